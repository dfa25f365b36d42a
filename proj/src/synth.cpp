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


#include "ica/synth.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>

#include "ica/lang.hpp"
#include "ica/prompt.hpp"
#include "util.hpp"

namespace ica {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::kValidation, "pools: " + msg); }
[[noreturn]] void cannot(const std::string& msg) { throw Error(ErrorCode::kGeneration, msg); }

std::string humanize(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', ' ');
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

// Description for conditions made up during mutation.
std::string describe(const ConditionExpr& c) {
  std::string k = humanize(c.key);
  auto v = [&] { return display(c.values.at(0)); };
  switch (c.kind) {
    case ConditionKind::kIntentLabel: return "The intent is " + c.intent_label;
    case ConditionKind::kEquals: return k + " is " + v();
    case ConditionKind::kNotEquals: return k + " is not " + v();
    case ConditionKind::kLessThan: return k + " is below " + v();
    case ConditionKind::kGreaterThan: return k + " is above " + v();
    case ConditionKind::kInSet: {
      std::vector<std::string> parts;
      for (const auto& x : c.values) parts.push_back(display(x));
      return k + " is one of " + util::join(parts, ", ");
    }
    case ConditionKind::kExists: return k + " is on file";
    case ConditionKind::kBooleanTrue: return k + " holds";
    case ConditionKind::kElse: return "Otherwise";
  }
  return k;
}

bool holds(const ConditionExpr& c, const UserQuery& q, const ContextRecord& ctx) {
  return eval_condition(c, q, ctx).matched();
}

std::string fresh_action(const SynthPools& pools, Rng& rng, std::set<std::string>& used) {
  for (int i = 0; i < 1000; ++i) {
    std::string text = rng.pick(pools.action_templates);
    std::string n = std::to_string(rng.between(1, 99));
    for (std::size_t p = 0; (p = text.find("{n}", p)) != std::string::npos; p += n.size()) text.replace(p, 3, n);
    if (used.insert(text).second) return text;
  }
  cannot("action templates cannot produce enough distinct actions");
}

struct Builder {
  const MatchedBranch& mb;
  const SynthPools& pools;
  Rng& rng;
  const SynthConfig& cfg;
  SynthForest forest;
  std::vector<NodeId> path;  // root, c1 .. cL in the matched tree
  std::set<std::string> used_actions;

  int mismatches(const std::vector<const ConditionExpr*>& conds) const {
    int n = 0;
    for (const auto* c : conds) n += !holds(*c, mb.query, mb.context);
    return n;
  }

  // Appends a chain below `parent` in tree `t`, ending in a fresh leaf; the
  // first new node goes to a random slot before any leaf child.
  NodeId attach(std::size_t t, NodeId parent, const std::vector<BranchCondition>& chain) {
    DecisionTree& tree = forest.trees[t];
    NodeId cur = parent;
    NodeId first = 0;
    for (const auto& c : chain) {
      cur = tree.add(cur, c.condition, c.description);
      if (!first) first = cur;
    }
    NodeId leaf = tree.add(cur, ActionRef{0});
    forest.leaf_texts[t][leaf] = fresh_action(pools, rng, used_actions);
    if (!first) first = leaf;
    auto& kids = tree.node(parent).children;
    kids.pop_back();
    std::size_t conds = static_cast<std::size_t>(
        std::count_if(kids.begin(), kids.end(), [&](NodeId k) { return !tree.node(k).is_leaf(); }));
    kids.insert(kids.begin() + static_cast<std::ptrdiff_t>(rng.below(conds + 1)), first);
    return leaf;
  }

  BranchCondition mutate(const BranchCondition& orig) {
    const ConditionExpr& c = orig.condition;
    std::vector<const PoolCondition*> alt;
    for (const auto& pc : pools.conditions)
      if (pc.condition.key == c.key && !(pc.condition == c) && !holds(pc.condition, mb.query, mb.context))
        alt.push_back(&pc);
    if (!alt.empty()) {
      const PoolCondition* p = rng.pick(alt);
      return {p->condition, p->description};
    }
    const Scalar& v = mb.context.at(c.key);
    ConditionExpr m;
    switch (type_of(v)) {
      case ScalarType::kBoolean: m = ConditionExpr::compare(ConditionKind::kEquals, c.key, !std::get<bool>(v)); break;
      case ScalarType::kNumber:
        m = ConditionExpr::compare(rng.chance(0.5) ? ConditionKind::kLessThan : ConditionKind::kGreaterThan, c.key, v);
        break;
      case ScalarType::kText: m = ConditionExpr::compare(ConditionKind::kNotEquals, c.key, v); break;
    }
    return {m, describe(m)};
  }

  std::optional<DivergentBranch> root_mutation() {
    std::vector<const PoolIntent*> others;
    for (const auto& pi : pools.intents)
      if (pi.label != mb.query.intent_label) others.push_back(&pi);
    int extra = cfg.min_mismatch_nodes - 1;
    if (others.empty() || extra > static_cast<int>(mb.conditions.size())) return std::nullopt;
    const PoolIntent* pi = rng.pick(others);
    std::vector<BranchCondition> chain;
    for (std::size_t i = 0; i < mb.conditions.size(); ++i)
      chain.push_back(static_cast<int>(i) < extra ? mutate(mb.conditions[i]) : mb.conditions[i]);

    ConditionExpr root = ConditionExpr::intent(pi->label);
    std::vector<const ConditionExpr*> all{&root};
    for (const auto& c : chain) all.push_back(&c.condition);
    int miss = mismatches(all);
    if (miss < std::max(1, cfg.min_mismatch_nodes)) return std::nullopt;

    DecisionTree t;
    t.workflow_id = "wf";
    NodeId r = t.add(std::nullopt, root, pi->description);
    forest.trees.push_back(std::move(t));
    forest.leaf_texts.emplace_back();
    std::size_t ti = forest.trees.size() - 1;
    NodeId cur = r;
    for (const auto& c : chain) cur = forest.trees[ti].add(cur, c.condition, c.description);
    NodeId leaf = forest.trees[ti].add(cur, ActionRef{0});
    forest.leaf_texts[ti][leaf] = fresh_action(pools, rng, used_actions);
    return DivergentBranch{DivergenceType::kRootMutation, ti, leaf, miss};
  }

  std::optional<DivergentBranch> node_mutation() {
    int L = static_cast<int>(mb.conditions.size());
    int m = std::max(1, cfg.min_mismatch_nodes);
    if (L < m) return std::nullopt;
    int j = rng.between(1, L - m + 1);
    std::vector<BranchCondition> chain;
    for (int k = j; k <= L; ++k) {
      const BranchCondition& c = mb.conditions[static_cast<std::size_t>(k - 1)];
      chain.push_back(k < j + m ? mutate(c) : c);
    }
    std::vector<const ConditionExpr*> all;
    for (const auto& c : chain) all.push_back(&c.condition);
    int miss = mismatches(all);
    if (miss < m) return std::nullopt;
    NodeId leaf = attach(0, path[static_cast<std::size_t>(j - 1)], chain);
    return DivergentBranch{DivergenceType::kNodeMutation, 0, leaf, miss};
  }

  std::optional<DivergentBranch> irrelevant() {
    int L = static_cast<int>(mb.conditions.size());
    int m = std::max(1, cfg.min_mismatch_nodes);
    for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
      int p = rng.between(0, L);
      std::set<std::string> taken;
      for (int k = 0; k < p; ++k) taken.insert(mb.conditions[static_cast<std::size_t>(k)].condition.key);
      std::vector<std::string> keys;
      for (const auto& pc : pools.conditions)
        if (!taken.count(pc.condition.key) && std::find(keys.begin(), keys.end(), pc.condition.key) == keys.end())
          keys.push_back(pc.condition.key);
      if (keys.empty()) continue;
      int len = rng.between(1, std::max(1, cfg.max_depth - p));
      rng.shuffle(keys);
      keys.resize(std::min(keys.size(), static_cast<std::size_t>(len)));
      std::vector<BranchCondition> chain;
      for (const auto& key : keys) {
        std::vector<const PoolCondition*> with_key;
        for (const auto& pc : pools.conditions)
          if (pc.condition.key == key) with_key.push_back(&pc);
        const PoolCondition* pc = rng.pick(with_key);
        chain.push_back({pc->condition, pc->description});
      }
      std::vector<const ConditionExpr*> all;
      for (const auto& c : chain) all.push_back(&c.condition);
      int miss = mismatches(all);
      if (miss < m) continue;
      NodeId leaf = attach(0, path[static_cast<std::size_t>(p)], chain);
      return DivergentBranch{DivergenceType::kIrrelevant, 0, leaf, miss};
    }
    return std::nullopt;
  }
};

std::string strip_end(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ':' || s.back() == ';' || s.back() == ',' || s.back() == ' '))
    s.pop_back();
  return s;
}

std::string node_text(const TreeNode& n) {
  return strip_end(n.description.empty() ? describe(n.condition()) : util::normalize_space(n.description));
}

std::string why(const ConditionResult& r) {
  if (r.key == "intent") return r.observed ? "the intent is `" + display(*r.observed) + "`" : "the intent is not known";
  if (r.outcome == Outcome::kUnknown)
    return r.reason == "key is missing" ? "`" + r.key + "` is missing" : "an earlier alternative could not be checked";
  if (r.observed) return "`" + r.key + "` is `" + display(*r.observed) + "`";
  if (r.key.empty()) return "an earlier alternative applies";
  return "`" + r.key + "` is missing";
}

}  // namespace

const PoolIntent* SynthPools::find_intent(const std::string& label) const {
  for (const auto& i : intents)
    if (i.label == label) return &i;
  return nullptr;
}

const char* to_string(DivergenceType type) {
  switch (type) {
    case DivergenceType::kRootMutation: return "root_mutation";
    case DivergenceType::kNodeMutation: return "node_mutation";
    case DivergenceType::kIrrelevant: return "irrelevant";
  }
  return "irrelevant";
}

SynthPools pools_from_json(const Json& conditions, const Json& queries, const Json& action_templates) {
  SynthPools p;
  try {
    for (const auto& j : conditions.at("intents")) {
      PoolIntent pi{j.at("label").get<std::string>(), j.at("description").get<std::string>(), {}};
      for (const auto& t : j.at("templates")) pi.templates.push_back(t.get<std::string>());
      p.intents.push_back(std::move(pi));
    }
    for (const auto& j : conditions.at("conditions"))
      p.conditions.push_back({condition_from_json(j.at("condition")), j.at("description").get<std::string>()});
    for (const auto& j : queries)
      p.records.push_back(
          {j.at("query").get<std::string>(), j.at("intent").get<std::string>(), context_from_json(j.at("context"))});
    for (const auto& t : action_templates) p.action_templates.push_back(t.get<std::string>());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("pools: ") + e.what());
  }
  validate_pools(p);
  return p;
}

SynthPools load_pools(const fs::path& dir) {
  auto read = [&](const char* name) {
    fs::path f = dir / name;
    if (!fs::exists(f)) throw Error(ErrorCode::kNotFound, "missing " + f.string());
    return parse_json(util::read_file(f), f.string());
  };
  return pools_from_json(read("conditions.json"), read("queries.json"), read("action_templates.json"));
}

void validate_pools(const SynthPools& pools) {
  if (pools.intents.empty()) invalid("no intents");
  if (pools.records.empty()) invalid("no query records");
  if (pools.action_templates.empty()) invalid("no action templates");
  std::set<std::string> labels;
  for (const auto& pi : pools.intents) {
    if (!labels.insert(pi.label).second) invalid("duplicate intent '" + pi.label + "'");
    if (pi.templates.empty()) invalid("intent '" + pi.label + "' has no query template");
    if (!check_condition(ConditionExpr::intent(pi.label)).empty()) invalid("bad intent label '" + pi.label + "'");
  }
  std::set<std::string> record_keys;
  for (std::size_t i = 0; i < pools.records.size(); ++i) {
    const auto& r = pools.records[i];
    if (!labels.count(r.intent)) invalid("record " + std::to_string(i) + " has unknown intent '" + r.intent + "'");
    if (r.context.empty()) invalid("record " + std::to_string(i) + " has an empty context");
    if (util::trim(r.query).empty()) invalid("record " + std::to_string(i) + " has an empty query");
    for (const auto& [k, v] : r.context) record_keys.insert(k);
  }
  for (const auto& pc : pools.conditions) {
    const auto& c = pc.condition;
    if (c.kind == ConditionKind::kIntentLabel || c.kind == ConditionKind::kElse)
      invalid("pool condition must be a context condition: " + format_condition(c));
    if (auto msg = check_condition(c); !msg.empty()) invalid(msg);
    if (!record_keys.count(c.key)) invalid("condition key '" + c.key + "' appears in no record");
    if (util::trim(pc.description).empty()) invalid("condition " + format_condition(c) + " has no description");
  }
  for (const auto& t : pools.action_templates)
    if (util::trim(t).empty()) invalid("empty action template");
}

MatchedBranch synth_matched_branch(const SynthPools& pools, Rng& rng, const SynthConfig& config) {
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    const QueryRecord& rec = rng.pick(pools.records);
    UserQuery q{rec.query, rec.intent};
    std::vector<const PoolCondition*> sat;
    std::vector<std::string> keys;
    for (const auto& pc : pools.conditions) {
      if (!holds(pc.condition, q, rec.context)) continue;
      sat.push_back(&pc);
      if (std::find(keys.begin(), keys.end(), pc.condition.key) == keys.end()) keys.push_back(pc.condition.key);
    }
    if (keys.empty()) continue;
    int depth = rng.between(1, std::max(1, config.max_depth));
    rng.shuffle(keys);
    keys.resize(std::min(keys.size(), static_cast<std::size_t>(depth)));

    MatchedBranch mb;
    mb.query = q;
    mb.context = rec.context;
    const PoolIntent* pi = pools.find_intent(rec.intent);
    mb.intent_description = pi ? pi->description : rec.intent;
    for (const auto& key : keys) {
      std::vector<const PoolCondition*> with_key;
      for (const auto* pc : sat)
        if (pc->condition.key == key) with_key.push_back(pc);
      const PoolCondition* pc = rng.pick(with_key);
      mb.conditions.push_back({pc->condition, pc->description});
    }
    std::set<std::string> used;
    mb.action = fresh_action(pools, rng, used);
    for (const auto& c : mb.conditions)
      if (!holds(c.condition, mb.query, mb.context)) throw Error(ErrorCode::kInternal, "sampled condition does not hold");
    return mb;
  }
  cannot("no query record satisfies any pool condition after " + std::to_string(config.max_retries) + " draws");
}

SynthForest synth_divergent_branches(const MatchedBranch& matched, const SynthPools& pools, Rng& rng,
                                     int n_divergent, const SynthConfig& config) {
  Builder b{matched, pools, rng, config, {}, {}, {}};
  b.used_actions.insert(matched.action);
  DecisionTree t;
  t.workflow_id = "wf";
  NodeId cur = t.add(std::nullopt, ConditionExpr::intent(matched.query.intent_label.value_or("")),
                     matched.intent_description);
  b.path.push_back(cur);
  for (const auto& c : matched.conditions) {
    cur = t.add(cur, c.condition, c.description);
    b.path.push_back(cur);
  }
  NodeId leaf = t.add(cur, ActionRef{0});
  b.forest.trees.push_back(std::move(t));
  b.forest.leaf_texts.push_back({{leaf, matched.action}});
  b.forest.matched_leaf = leaf;

  int trees = rng.between(1, std::max(1, config.max_trees));
  int roots = std::min(trees - 1, n_divergent);
  for (int i = 0; i < n_divergent; ++i) {
    std::optional<DivergentBranch> d;
    if (i < roots) d = b.root_mutation();
    if (!d) {
      bool node_first = rng.chance(0.5);
      d = node_first ? b.node_mutation() : b.irrelevant();
      if (!d) d = node_first ? b.irrelevant() : b.node_mutation();
    }
    if (!d) cannot("cannot build a non-matching branch for query '" + matched.query.text + "'");
    b.forest.divergent.push_back(*d);
  }
  return std::move(b.forest);
}

std::string synth_cot(const EvalTrace& trace, std::span<const DecisionTree> trees, const UserQuery& query,
                      const ContextRecord& ctx) {
  (void)query;
  (void)ctx;
  if (!trace.matched) throw Error(ErrorCode::kInvalidArgument, "cannot explain a trace without a matched branch");
  std::string out;
  int line = 0;
  std::map<std::pair<std::size_t, NodeId>, int> first_line;
  for (const auto& b : trace.branches) {
    const DecisionTree& t = trees[b.tree_index];
    out += std::to_string(++line) + ". Action " + std::to_string(b.action_id) + " (workflow " + b.workflow_id + "): ";
    switch (b.status) {
      case BranchStatus::kMatched: {
        std::vector<std::string> parts;
        for (NodeId id : trace.matched->path)
          if (!t.node(id).is_leaf()) parts.push_back(node_text(t.node(id)));
        out += "applies. " + util::join(parts, "; ") + ".";
        break;
      }
      case BranchStatus::kShadowed: out += "also holds, but an earlier branch applies first."; break;
      case BranchStatus::kFailed:
      case BranchStatus::kUnknown: {
        // branches sharing a failing node point back to the first one, which
        // keeps long workflows inside the output cap
        auto [it, fresh] = first_line.try_emplace({b.tree_index, *b.failing_node}, line);
        if (fresh)
          out += "not applicable. " + node_text(t.node(*b.failing_node)) + ": no, because " + why(b.failure) + ".";
        else
          out += "not applicable, same as line " + std::to_string(it->second) + ".";
        break;
      }
    }
    out += "\n";
  }
  out += "Action: " + std::to_string(trace.matched->action_id);
  return out;
}

Json sft_to_json(const SftInstance& instance) {
  Json j;
  j["instruction"] = instance.instruction;
  j["label"] = instance.label;
  j["meta"] = instance.meta;
  return j;
}

std::string sft_to_jsonl(const SftInstance& instance) { return sft_to_json(instance).dump(); }

SftInstance sft_from_json(const Json& j) {
  try {
    return {j.at("instruction").get<std::string>(), j.at("label").get<std::string>(), j.value("meta", Json::object())};
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad instance: ") + e.what());
  }
}

SynthAttempt synth_instance(const SynthPools& pools, std::uint64_t seed, std::uint64_t index, const SynthConfig& config,
                            int first_attempt) {
  SynthAttempt out;
  for (int a = first_attempt; a < first_attempt + config.max_retries; ++a) {
    out.attempt = a;
    Rng rng(mix_seed(mix_seed(seed, index), static_cast<std::uint64_t>(a)));
    MatchedBranch mb = synth_matched_branch(pools, rng, config);
    int nd = rng.between(config.min_divergent, config.max_divergent);
    SynthForest forest = synth_divergent_branches(mb, pools, rng, nd, config);

    std::vector<std::size_t> order(forest.trees.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::size_t> position(order.size());
    std::vector<IcaDocument> docs;
    for (std::size_t k = 0; k < order.size(); ++k) {
      position[order[k]] = k;
      DecisionTree t = forest.trees[order[k]];
      t.workflow_id = "wf" + std::to_string(k + 1);
      auto [numbered, actions] = assign_action_ids(t, forest.leaf_texts[order[k]]);
      IcaDocument d;
      d.workflow_id = numbered.workflow_id;
      d.source_text = print_ica(numbered, actions);
      d.tree = std::move(numbered);
      d.action_map = std::move(actions);
      docs.push_back(std::move(d));
    }
    auto local = [&](std::size_t tree, NodeId leaf) {
      const IcaDocument& d = docs[position[tree]];
      return LocalAction{d.workflow_id, d.tree.node(leaf).action_id()};
    };

    std::optional<BuiltPrompt> prompt;
    try {
      prompt = build_prompt(mb.query, mb.context, docs,
                            {.with_cot = config.with_cot, .format = KnowledgeFormat::kIca,
                             .token_budget = config.token_budget});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBudget) throw;
      out.skipped.push_back("token budget");
      continue;
    }
    LocalAction want = local(0, forest.matched_leaf);
    int want_global = prompt->request_map.global_id(want).value_or(0);
    EvalTrace trace = evaluate(prompt->trees, mb.query, mb.context);
    std::string label = config.with_cot ? synth_cot(trace, prompt->trees, mb.query, mb.context)
                                        : "Action: " + std::to_string(want_global);

    // Self-consistency on the emitted text alone.
    ParsedPrompt back = parse_prompt(prompt->text);
    EvalTrace replay = evaluate(back.trees, back.query, back.context);
    std::size_t matching = std::count_if(replay.branches.begin(), replay.branches.end(), [](const BranchOutcome& b) {
      return b.status == BranchStatus::kMatched || b.status == BranchStatus::kShadowed;
    });
    if (!replay.matched || replay.matched->action_id != want_global || parse_response(label) != want_global ||
        matching != 1) {
      out.skipped.push_back("self-consistency");
      continue;
    }

    Json meta;
    meta["seed"] = seed;
    meta["index"] = index;
    meta["attempt"] = a;
    meta["query"] = mb.query.text;
    meta["intent"] = *mb.query.intent_label;
    meta["context"] = context_to_json(mb.context);
    meta["matched"] = {{"workflow_id", want.workflow_id},
                       {"action_id", want.action_id},
                       {"global_action_id", want_global},
                       {"depth", mb.conditions.size()}};
    Json div = Json::array();
    for (const auto& d : forest.divergent) {
      LocalAction la = local(d.tree, d.leaf);
      div.push_back({{"type", to_string(d.type)},
                     {"workflow_id", la.workflow_id},
                     {"action_id", la.action_id},
                     {"global_action_id", prompt->request_map.global_id(la).value_or(0)},
                     {"mismatch_nodes", d.mismatch_nodes}});
    }
    meta["divergent"] = std::move(div);
    Json wfs = Json::object();
    ActionMap all;
    for (const auto& d : docs) {
      wfs[d.workflow_id] = d.source_text;
      all.merge(d.action_map);
    }
    meta["workflows"] = std::move(wfs);
    meta["actions"] = action_map_to_json(all);
    out.instance = SftInstance{std::move(prompt->text), std::move(label), std::move(meta)};
    return out;
  }
  return out;
}

SynthStats generate_dataset(const SynthPools& pools, std::size_t n, std::uint64_t seed, const SynthConfig& config,
                            const std::function<void(const SftInstance&)>& sink) {
  validate_pools(pools);
  if (config.min_divergent < 0 || config.max_divergent < config.min_divergent || config.max_trees < 1 ||
      config.max_depth < 1 || config.max_retries < 1 || config.min_mismatch_nodes < 1)
    throw Error(ErrorCode::kInvalidArgument, "invalid synth configuration");
  SynthStats stats;
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  constexpr std::size_t kChunk = 256;

  auto check_rate = [&](bool final) {
    if ((final || stats.emitted + stats.skipped >= 1000) && stats.skip_rate() > config.max_skip_rate) {
      std::string reasons;
      for (const auto& [r, c] : stats.skip_reasons) reasons += (reasons.empty() ? "" : ", ") + r + " " + std::to_string(c);
      cannot("skip rate " + util::format_number(stats.skip_rate()) + " exceeds " +
             util::format_number(config.max_skip_rate) + " (" + std::to_string(stats.skipped) + " skipped, " +
             std::to_string(stats.emitted) + " emitted; " + reasons + ")");
    }
  };
  auto account = [&](const SynthAttempt& a, std::uint64_t index) {
    stats.skipped += a.skipped.size();
    for (const auto& r : a.skipped) ++stats.skip_reasons[r];
    if (!a.instance)
      cannot("instance " + std::to_string(index) + ": no consistent instance after " +
             std::to_string(config.max_retries) + " attempts");
  };

  std::vector<SynthAttempt> batch;
  std::vector<std::exception_ptr> errors;
  for (std::size_t base = 0; base < n; base += kChunk) {
    std::size_t count = std::min(kChunk, n - base);
    batch.assign(count, {});
    errors.assign(count, nullptr);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          batch[i] = synth_instance(pools, seed, base + i, config);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(threads, count); ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    for (std::size_t i = 0; i < count; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      std::uint64_t index = base + i;
      SynthAttempt a = std::move(batch[i]);
      account(a, index);
      while (!seen.insert({util::fnv1a64(a.instance->instruction), util::fnv1a64(a.instance->label)}).second) {
        ++stats.duplicates;
        a = synth_instance(pools, seed, index, config, a.attempt + 1);
        account(a, index);
      }
      sink(*a.instance);
      ++stats.emitted;
    }
    check_rate(false);
  }
  check_rate(true);
  return stats;
}

}  // namespace ica
