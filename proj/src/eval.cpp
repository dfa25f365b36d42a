// Copyright 2026 The ICA Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "ica/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <set>
#include <sstream>
#include <thread>

#include "ica/interpreter.hpp"
#include "util.hpp"

namespace ica {

namespace fs = std::filesystem;

namespace {

Json local_to_json(const LocalAction& a) { return Json{{"workflow_id", a.workflow_id}, {"action_id", a.action_id}}; }

LocalAction local_from_json(const Json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("workflow_id") || !j.contains("action_id") || !j["workflow_id"].is_string() ||
      !j["action_id"].is_number_integer())
    throw Error(ErrorCode::kParse, what + " must be {workflow_id, action_id}");
  return {j["workflow_id"].get<std::string>(), j["action_id"].get<int>()};
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

}  // namespace

Json eval_case_to_json(const EvalCase& c) {
  Json j;
  j["case_id"] = c.case_id;
  j["query"] = c.query;
  if (c.intent) j["intent"] = *c.intent;
  j["context"] = context_to_json(c.context);
  j["gold"] = local_to_json(c.gold);
  j["candidates"] = c.candidates;
  return j;
}

EvalCase eval_case_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "eval case must be an object");
  EvalCase c;
  auto str = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw Error(ErrorCode::kParse, std::string("eval case needs string '") + key + "'");
    return j[key].get<std::string>();
  };
  c.case_id = str("case_id");
  c.query = str("query");
  if (j.contains("intent") && !j["intent"].is_null()) c.intent = str("intent");
  if (j.contains("context")) c.context = context_from_json(j["context"]);
  if (!j.contains("gold")) throw Error(ErrorCode::kParse, "eval case " + c.case_id + " has no gold");
  c.gold = local_from_json(j["gold"], "gold of " + c.case_id);
  if (j.contains("candidates")) {
    if (!j["candidates"].is_array()) throw Error(ErrorCode::kParse, "candidates of " + c.case_id + " must be an array");
    for (const auto& v : j["candidates"]) {
      if (!v.is_string()) throw Error(ErrorCode::kParse, "candidates of " + c.case_id + " must be strings");
      c.candidates.push_back(v.get<std::string>());
    }
  }
  return c;
}

std::vector<EvalCase> load_eval_cases(const fs::path& jsonl) {
  std::vector<EvalCase> out;
  auto lines = util::split_lines(util::read_file(jsonl));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (util::trim(lines[i]).empty()) continue;
    std::string where = jsonl.string() + ":" + std::to_string(i + 1);
    try {
      out.push_back(eval_case_from_json(parse_json(lines[i], where)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParse) throw;
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
  }
  return out;
}

std::string eval_cases_to_jsonl(const std::vector<EvalCase>& cases) {
  std::string out;
  for (const auto& c : cases) out += eval_case_to_json(c).dump() + "\n";
  return out;
}

void validate_cases(const std::vector<EvalCase>& cases, const KnowledgeBase& kb) {
  std::set<std::string> seen;
  for (const auto& c : cases) {
    auto fail = [&](const std::string& msg) { throw Error(ErrorCode::kValidation, "case " + c.case_id + ": " + msg); };
    if (c.case_id.empty()) throw Error(ErrorCode::kValidation, "eval case with an empty case_id");
    if (!seen.insert(c.case_id).second) fail("duplicate case_id");
    if (!kb.find(c.gold.workflow_id)) fail("gold workflow '" + c.gold.workflow_id + "' is not in the knowledge base");
    if (!kb.actions.contains(c.gold.workflow_id, c.gold.action_id))
      fail("gold action " + std::to_string(c.gold.action_id) + " of '" + c.gold.workflow_id + "' does not resolve");
    for (const auto& id : c.candidates)
      if (!kb.find(id)) fail("pinned workflow '" + id + "' is not in the knowledge base");
  }
}

std::string EvalReport::arm() const { return std::string(to_string(format)) + (with_cot ? "/cot" : "/no-cot"); }

Json report_to_json(const EvalReport& r) {
  Json j;
  j["arm"] = r.arm();
  j["client"] = r.client;
  j["format"] = to_string(r.format);
  j["with_cot"] = r.with_cot;
  j["total"] = r.total;
  j["correct"] = r.correct;
  j["acc"] = r.acc;
  j["al_seconds"] = r.al_seconds;
  j["al_end_to_end_seconds"] = r.al_end_to_end_seconds;
  j["status_counts"] = Json::object();
  for (const auto& [k, v] : r.status_counts) j["status_counts"][k] = v;
  j["rows"] = Json::array();
  for (const auto& row : r.rows) {
    Json x;
    x["case_id"] = row.case_id;
    x["gold"] = local_to_json(row.gold);
    x["status"] = to_string(row.status);
    x["predicted"] = row.predicted ? local_to_json(*row.predicted) : Json(nullptr);
    x["correct"] = row.correct;
    x["latency_seconds"] = row.latency_seconds;
    x["end_to_end_seconds"] = row.end_to_end_seconds;
    j["rows"].push_back(std::move(x));
  }
  return j;
}

EvalReport report_from_json(const Json& j) {
  try {
    EvalReport r;
    r.client = j.at("client").get<std::string>();
    auto fmt = knowledge_format_from_string(j.at("format").get<std::string>());
    if (!fmt) throw Error(ErrorCode::kParse, "unknown format in report");
    r.format = *fmt;
    r.with_cot = j.at("with_cot").get<bool>();
    r.total = j.at("total").get<std::size_t>();
    r.correct = j.at("correct").get<std::size_t>();
    r.acc = j.at("acc").get<double>();
    r.al_seconds = j.at("al_seconds").get<double>();
    r.al_end_to_end_seconds = j.at("al_end_to_end_seconds").get<double>();
    for (auto it = j.at("status_counts").begin(); it != j.at("status_counts").end(); ++it)
      r.status_counts[it.key()] = it.value().get<std::size_t>();
    for (const auto& x : j.at("rows")) {
      EvalRow row;
      row.case_id = x.at("case_id").get<std::string>();
      row.gold = local_from_json(x.at("gold"), "gold");
      auto st = prediction_status_from_string(x.at("status").get<std::string>());
      if (!st) throw Error(ErrorCode::kParse, "unknown status in report row " + row.case_id);
      row.status = *st;
      if (!x.at("predicted").is_null()) row.predicted = local_from_json(x.at("predicted"), "predicted");
      row.correct = x.at("correct").get<bool>();
      row.latency_seconds = x.at("latency_seconds").get<double>();
      row.end_to_end_seconds = x.at("end_to_end_seconds").get<double>();
      r.rows.push_back(std::move(row));
    }
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed report: ") + e.what());
  }
}

EvalReport run_eval(const std::vector<EvalCase>& cases, const KnowledgeBase& kb, LlmClient& client,
                    const EvalConfig& config) {
  validate_cases(cases, kb);
  EvalReport report;
  report.client = config.client_name;
  report.format = config.predict.prompt.format;
  report.with_cot = config.predict.prompt.with_cot;
  report.rows.resize(cases.size());

  std::size_t workers = std::max<std::size_t>(1, config.concurrency);
  if (client.max_concurrency() > 0) workers = std::min(workers, client.max_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, cases.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto work = [&] {
    while (!stop) {
      std::size_t i = next++;
      if (i >= cases.size()) return;
      const EvalCase& c = cases[i];
      try {
        StaticContextProvider provider(c.context);
        PredictRequest req{{c.query, c.intent}, c.case_id, c.candidates};
        Prediction p = predict(req, provider, kb, client, config.predict);
        EvalRow& row = report.rows[i];
        row.case_id = c.case_id;
        row.gold = c.gold;
        row.status = p.status;
        if (p.status == PredictionStatus::kOk) row.predicted = LocalAction{p.workflow_id, p.action_id};
        row.correct = row.predicted && *row.predicted == c.gold;
        row.latency_seconds = p.latency_seconds;
        row.end_to_end_seconds = p.end_to_end_seconds;
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  for (const char* s : {"ok", "no_intent_match", "unparseable_response", "unknown_action_id"}) report.status_counts[s] = 0;
  double lat = 0, e2e = 0;
  std::size_t called = 0;
  for (const auto& row : report.rows) {
    report.total++;
    report.correct += row.correct;
    report.status_counts[to_string(row.status)]++;
    e2e += row.end_to_end_seconds;
    if (row.status != PredictionStatus::kNoIntentMatch) {
      lat += row.latency_seconds;
      called++;
    }
  }
  report.acc = report.total ? static_cast<double>(report.correct) / static_cast<double>(report.total) : 0.0;
  report.al_seconds = called ? lat / static_cast<double>(called) : 0.0;
  report.al_end_to_end_seconds = report.total ? e2e / static_cast<double>(report.total) : 0.0;
  return report;
}

std::string format_delta(double delta) {
  double r = std::round(delta * 100.0) / 100.0;
  if (r == 0) r = 0;  // no "-0.00"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f", r);
  return buf;
}

Comparison compare_reports(const std::vector<EvalReport>& reports) {
  if (reports.size() < 2) throw Error(ErrorCode::kValidation, "compare needs at least two reports");
  static const char* kOrder[] = {"richtext/no-cot", "richtext/cot", "ica/no-cot", "ica/cot"};
  std::map<std::string, const EvalReport*> by_arm;
  for (const auto& r : reports)
    if (!by_arm.emplace(r.arm(), &r).second) throw Error(ErrorCode::kValidation, "two reports for arm " + r.arm());

  auto ids = [](const EvalReport& r) {
    std::set<std::string> s;
    for (const auto& row : r.rows) s.insert(row.case_id);
    return s;
  };
  auto ref = ids(reports[0]);
  for (const auto& r : reports)
    if (ids(r) != ref || r.rows.size() != reports[0].rows.size())
      throw Error(ErrorCode::kValidation, "reports " + reports[0].arm() + " and " + r.arm() + " cover different cases");

  std::string baseline;
  for (const char* a : kOrder)
    if (by_arm.count(a)) {
      baseline = a;
      break;
    }
  double base_acc = by_arm.at(baseline)->acc;

  Comparison out;
  out.json["baseline"] = baseline;
  out.json["cases"] = ref.size();
  out.json["arms"] = Json::array();
  std::string table;
  table += pad("Arm", 17) + "| " + pad("Client", 13) + "| " + pad("N", 7) + "| " + pad("ACC", 6) + "| " +
           pad("Delta", 6) + "| " + pad("AL (s)", 9) + "| AL end-to-end (s)\n";
  for (const char* a : kOrder) {
    auto it = by_arm.find(a);
    if (it == by_arm.end()) continue;
    const EvalReport& r = *it->second;
    std::string delta = a == baseline ? "" : format_delta(r.acc - base_acc);
    Json x;
    x["arm"] = a;
    x["client"] = r.client;
    x["format"] = to_string(r.format);
    x["with_cot"] = r.with_cot;
    x["total"] = r.total;
    x["correct"] = r.correct;
    x["acc"] = r.acc;
    x["delta_acc"] = delta.empty() ? Json(nullptr) : Json(delta);
    x["al_seconds"] = r.al_seconds;
    x["al_end_to_end_seconds"] = r.al_end_to_end_seconds;
    out.json["arms"].push_back(std::move(x));
    table += pad(a, 17) + "| " + pad(r.client, 13) + "| " + pad(std::to_string(r.total), 7) + "| " +
             pad(fixed(r.acc, 2), 6) + "| " + pad(delta, 6) + "| " + pad(fixed(r.al_seconds, 4), 9) + "| " +
             fixed(r.al_end_to_end_seconds, 4) + "\n";
  }

  auto cell = [&](const char* a) -> std::string {
    auto it = by_arm.find(a);
    if (it == by_arm.end()) return "n/a";
    std::string s = fixed(it->second->acc, 2);
    if (a != baseline) s += " (" + format_delta(it->second->acc - base_acc) + ")";
    return s;
  };
  std::string grid;
  grid += "CoT | " + pad("ACC Rich Text", 14) + "| ACC ICA\n";
  grid += "w/o | " + pad(cell("richtext/no-cot"), 14) + "| " + cell("ica/no-cot") + "\n";
  grid += "w/  | " + pad(cell("richtext/cot"), 14) + "| " + cell("ica/cot") + "\n";

  out.text = grid + "\n" + table;
  return out;
}

// ---------------------------------------------------------------------------
// derive-eval

namespace {

std::string humanize(std::string label) {
  std::replace(label.begin(), label.end(), '_', ' ');
  return label;
}

// Values worth trying for each context key: the thresholds and members the
// workflow tests, one step either side of numbers, an unseen string, and
// both booleans.
std::map<std::string, std::vector<Scalar>> candidate_values(const DecisionTree& tree) {
  std::map<std::string, std::set<Scalar>> vals;
  for (NodeId id : tree.preorder()) {
    const TreeNode& n = tree.node(id);
    if (n.is_leaf()) continue;
    const ConditionExpr& c = n.condition();
    if (c.kind == ConditionKind::kIntentLabel || c.kind == ConditionKind::kElse) continue;
    auto& s = vals[c.key];
    if (c.kind == ConditionKind::kBooleanTrue || c.kind == ConditionKind::kExists) {
      s.insert(true);
      s.insert(false);
    }
    for (const Scalar& v : c.values) {
      s.insert(v);
      if (auto d = std::get_if<double>(&v)) {
        s.insert(*d - 1);
        s.insert(*d + 1);
      } else if (auto str = std::get_if<std::string>(&v)) {
        s.insert(*str + "_other");
      } else {
        s.insert(!std::get<bool>(v));
      }
    }
  }
  std::map<std::string, std::vector<Scalar>> out;
  for (auto& [k, s] : vals) out[k] = {s.begin(), s.end()};
  return out;
}

}  // namespace

DerivedEval derive_eval(const std::vector<SftInstance>& instances, const SynthPools* pools, const KnowledgeBase* base,
                        const DeriveOptions& options) {
  DerivedEval out;
  std::set<std::string> ids;
  auto add_doc = [&](IcaDocument doc) {
    if (!ids.insert(doc.workflow_id).second)
      throw Error(ErrorCode::kValidation, "workflow id '" + doc.workflow_id + "' appears twice");
    out.workflows.push_back(std::move(doc));
  };

  if (base) {
    for (const auto& d : base->workflows) add_doc(d);
    out.actions.merge(base->actions);
    out.aliases = base->aliases;
  }
  if (pools)
    for (const auto& i : pools->intents) {
      auto& list = out.aliases[i.label];
      for (const auto& t : i.templates)
        if (std::find(list.begin(), list.end(), t) == list.end()) list.push_back(t);
    }

  for (const auto& inst : instances) {
    const Json& m = inst.meta;
    std::string prefix;
    try {
      prefix = "i" + std::to_string(m.at("index").get<std::uint64_t>()) + "-";
      std::vector<std::string> names;
      for (auto it = m.at("workflows").begin(); it != m.at("workflows").end(); ++it) names.push_back(it.key());
      // keep the prompt's order: wf1, wf2, ...
      std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
      });
      ActionMap local = action_map_from_json(m.at("actions"));
      std::vector<DecisionTree> trees;
      EvalCase c;
      for (const auto& name : names) {
        std::string id = prefix + name;
        auto r = parse_ica(m.at("workflows").at(name).get<std::string>(), id);
        if (!r.ok()) throw Error(ErrorCode::kParse, id + ": " + r.error_summary());
        for (int a : local.ids_for(name)) {
          out.actions.set(id, a, resolve_action(local, name, a));
          r.document->action_map.set(id, a, resolve_action(local, name, a));
        }
        trees.push_back(r.document->tree);
        c.candidates.push_back(id);
        add_doc(std::move(*r.document));
      }
      c.case_id = "synth-" + prefix.substr(1, prefix.size() - 2);
      c.query = m.at("query").get<std::string>();
      c.intent = m.at("intent").get<std::string>();
      c.context = context_from_json(m.at("context"));
      auto trace = evaluate(trees, {c.query, c.intent}, c.context);
      if (!trace.matched) throw Error(ErrorCode::kValidation, "no branch applies");
      c.gold = {trace.matched->workflow_id, trace.matched->action_id};
      LocalAction recorded{prefix + m.at("matched").at("workflow_id").get<std::string>(),
                           m.at("matched").at("action_id").get<int>()};
      if (!(recorded == c.gold)) throw Error(ErrorCode::kValidation, "recorded answer disagrees with the interpreter");
      out.cases.push_back(std::move(c));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParse, "synth instance " + prefix + ": malformed meta: " + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kParse || e.code() == ErrorCode::kValidation)
        throw Error(e.code(), "synth instance " + prefix + ": " + e.what());
      throw;
    }
  }

  if (base) {
    for (const auto& w : base->workflows) {
      const TreeNode& root = w.tree.node(w.tree.root);
      const std::string& label = root.condition().intent_label;
      auto values = candidate_values(w.tree);
      Rng rng(mix_seed(options.seed, util::fnv1a64(w.workflow_id)));
      std::vector<std::string> phrasings;
      if (auto it = base->aliases.find(label); it != base->aliases.end()) phrasings = it->second;
      phrasings.push_back(root.description.empty() ? humanize(label) : root.description);

      for (int j = 0; j < options.cases_per_base_workflow; ++j) {
        bool done = false;
        for (int attempt = 0; attempt < 20 && !done; ++attempt) {
          EvalCase c;
          c.case_id = "base-" + w.workflow_id + "-" + std::to_string(j);
          c.query = rng.pick(phrasings);
          c.intent = label;
          for (const auto& [k, vs] : values)
            if (!rng.chance(0.1)) c.context[k] = rng.pick(vs);
          std::vector<DecisionTree> trees;
          for (const auto& r : base->index.retrieve(c.query, kDefaultTopK)) {
            c.candidates.push_back(r.workflow_id);
            trees.push_back(base->at(r.workflow_id).tree);
          }
          if (trees.empty()) break;
          auto trace = evaluate(trees, {c.query, c.intent}, c.context);
          if (!trace.matched) continue;
          c.gold = {trace.matched->workflow_id, trace.matched->action_id};
          out.cases.push_back(std::move(c));
          done = true;
        }
        if (!done) out.skipped++;
      }
    }
  }

  std::sort(out.workflows.begin(), out.workflows.end(),
            [](const IcaDocument& a, const IcaDocument& b) { return a.workflow_id < b.workflow_id; });
  return out;
}

void write_kb(const fs::path& dir, const std::vector<IcaDocument>& workflows, const ActionMap& actions,
              const IntentAliases& aliases) {
  fs::create_directories(dir);
  for (const auto& d : workflows) util::write_file(dir / (d.workflow_id + ".ica"), print_ica(d.tree, actions));
  util::write_file(dir / "actions.json", dump_canonical(action_map_to_json(actions)) + "\n");
  util::write_file(dir / "aliases.json", dump_canonical(aliases_to_json(aliases)) + "\n");
}

}  // namespace ica
