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


#include "ica/ica.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>

#include "ica/config.hpp"
#include "ica/eval.hpp"
#include "ica/http.hpp"
#include "ica/ingest.hpp"
#include "ica/interpreter.hpp"
#include "util.hpp"

using namespace ica;
namespace fs = std::filesystem;

struct ica_config {
  Config value;
};

struct ica_kb {
  KnowledgeBase value;
};

struct ica_client {
  std::string kind;
  std::unique_ptr<OracleEchoClient> oracle;
  std::unique_ptr<CorruptingClient> corrupt;
  std::unique_ptr<HttpLlmClient> http;
  LlmClient* active = nullptr;
};

struct ica_server {
  std::unique_ptr<HttpContextProvider> provider;
  std::unique_ptr<PredictService> service;
  int port = 0;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_stage;

ica_status fail(ica_status s, const std::string& msg, const std::string& stage = {}) {
  g_error = msg;
  g_stage = stage;
  return s;
}

ica_status status_of(ErrorCode code) { return static_cast<ica_status>(static_cast<int>(code) + 1); }

template <typename F>
ica_status guard(F&& body) {
  g_error.clear();
  g_stage.clear();
  try {
    body();
    return ICA_OK;
  } catch (const StageError& e) {
    return fail(status_of(e.code()), e.what(), e.stage());
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const Json::exception& e) {
    return fail(ICA_ERR_PARSE, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(ICA_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ICA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ICA_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* name) {
  if (!p) throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must not be null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const Json& j) { *out = dup(j.dump()); }

UserQuery query_of(const Json& req) {
  if (!req.is_object() || !req.contains("query") || !req["query"].is_string())
    throw Error(ErrorCode::kInvalidArgument, "request needs a string 'query'");
  UserQuery q{req["query"].get<std::string>(), std::nullopt};
  if (req.contains("intent") && !req["intent"].is_null()) q.intent_label = req["intent"].get<std::string>();
  return q;
}

std::vector<std::string> strings_of(const Json& req, const char* key) {
  std::vector<std::string> out;
  if (!req.contains(key) || req[key].is_null()) return out;
  if (!req[key].is_array()) throw Error(ErrorCode::kInvalidArgument, std::string("'") + key + "' must be an array");
  for (const auto& v : req[key]) out.push_back(v.get<std::string>());
  return out;
}

Json trace_to_json(const EvalTrace& trace, std::span<const DecisionTree> trees, const ActionMap& actions) {
  Json j;
  if (trace.matched) {
    const auto& m = *trace.matched;
    j["matched"] = {{"workflow_id", m.workflow_id},
                    {"action_id", m.action_id},
                    {"action", resolve_action(actions, m.workflow_id, m.action_id)},
                    {"path", m.path}};
  } else {
    j["matched"] = nullptr;
  }
  j["branches"] = Json::array();
  for (const auto& b : trace.branches) {
    Json x{{"workflow_id", b.workflow_id}, {"action_id", b.action_id}, {"status", to_string(b.status)}};
    if (b.failing_node) {
      const TreeNode& n = trees[b.tree_index].node(*b.failing_node);
      x["failing_node"] = *b.failing_node;
      if (!n.description.empty()) x["description"] = n.description;
      x["key"] = b.failure.key;
      x["observed"] = b.failure.observed ? scalar_to_json(*b.failure.observed) : Json(nullptr);
      x["reason"] = b.failure.reason;
    }
    j["branches"].push_back(std::move(x));
  }
  return j;
}

}  // namespace

extern "C" {

const char* ica_version(void) { return "0.1.0"; }

const char* ica_status_name(ica_status status) {
  if (status == ICA_OK) return "ok";
  if (status < ICA_ERR_INVALID_ARGUMENT || status > ICA_ERR_INTERNAL) return "unknown";
  return to_string(static_cast<ErrorCode>(static_cast<int>(status) - 1));
}

const char* ica_last_error(void) { return g_error.c_str(); }
const char* ica_last_error_stage(void) { return g_stage.c_str(); }
void ica_string_free(char* s) { std::free(s); }

ica_status ica_config_load(const char* path, ica_config** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    auto c = std::make_unique<ica_config>();
    c->value = load_config(path ? std::optional<fs::path>(path) : std::nullopt);
    *out = c.release();
  });
}

ica_status ica_config_set(ica_config* config, const char* key, const char* value) {
  return guard([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    Config next = config->value;
    set_config_value(next, key, value);
    next.synth.token_budget = next.prompt_token_budget;
    next.synth.with_cot = next.with_cot;
    validate_config(next);
    config->value = next;
  });
}

ica_status ica_config_to_json(const ica_config* config, char** out_json) {
  return guard([&] {
    need(config, "config");
    need(out_json, "out_json");
    put(out_json, config_to_json(config->value));
  });
}

void ica_config_free(ica_config* config) { delete config; }

ica_status ica_kb_load(const char* dir, ica_kb** out) {
  return guard([&] {
    need(dir, "dir");
    need(out, "out");
    *out = nullptr;
    auto kb = std::make_unique<ica_kb>();
    kb->value = load_kb(dir);
    *out = kb.release();
  });
}

ica_status ica_kb_describe(const ica_kb* kb, char** out_json) {
  return guard([&] {
    need(kb, "kb");
    need(out_json, "out_json");
    Json j;
    j["workflows"] = Json::array();
    for (const auto& d : kb->value.workflows)
      j["workflows"].push_back({{"workflow_id", d.workflow_id},
                                {"intent", d.tree.node(d.tree.root).condition().intent_label},
                                {"actions", kb->value.actions.ids_for(d.workflow_id).size()}});
    j["actions"] = kb->value.actions.size();
    put(out_json, j);
  });
}

void ica_kb_free(ica_kb* kb) { delete kb; }

ica_status ica_convert(const char* input, const char* out_dir, char** out_summary_json) {
  return guard([&] {
    need(input, "input");
    need(out_dir, "out_dir");
    need(out_summary_json, "out_summary_json");
    RuleBasedClassifier rules;
    auto s = convert_path(input, out_dir, rules);
    Json j{{"workflows", s.workflows}, {"flagged_blocks", s.flagged_blocks}, {"written", Json::array()}};
    for (const auto& p : s.written) j["written"].push_back(p.string());
    put(out_summary_json, j);
  });
}

ica_status ica_lint(const char* ica_text, const char* workflow_id, char** out_json) {
  return guard([&] {
    need(ica_text, "ica_text");
    need(workflow_id, "workflow_id");
    need(out_json, "out_json");
    auto r = parse_ica(ica_text, workflow_id);
    Json j{{"ok", r.ok()}, {"diagnostics", Json::array()}, {"warnings", Json::array()}};
    for (const auto& d : r.diagnostics)
      j["diagnostics"].push_back({{"line", d.line},
                                  {"column", d.column},
                                  {"severity", d.severity == Severity::kError ? "error" : "warning"},
                                  {"message", d.message}});
    if (r.ok())
      for (const auto& w : lint_ica(*r.document))
        j["warnings"].push_back({{"code", w.code}, {"line", w.line}, {"message", w.message}});
    put(out_json, j);
  });
}

ica_status ica_run(const ica_kb* kb, const ica_config* config, const char* request_json, char** out_json) {
  return guard([&] {
    need(kb, "kb");
    need(request_json, "request_json");
    need(out_json, "out_json");
    Json req = parse_json(request_json, "request");
    UserQuery q = query_of(req);
    ContextRecord ctx = req.contains("context") ? context_from_json(req["context"]) : ContextRecord{};
    auto ids = strings_of(req, "workflows");
    if (ids.empty()) {
      std::size_t k = config ? config->value.k : kDefaultTopK;
      for (const auto& r : kb->value.index.retrieve(q.text, k)) ids.push_back(r.workflow_id);
    }
    std::vector<DecisionTree> trees;
    for (const auto& id : ids) trees.push_back(kb->value.at(id).tree);
    Json j = trace_to_json(evaluate(trees, q, ctx), trees, kb->value.actions);
    j["workflows"] = ids;
    put(out_json, j);
  });
}

ica_status ica_retrieve(const ica_kb* kb, const char* query, size_t k, char** out_json) {
  return guard([&] {
    need(kb, "kb");
    need(query, "query");
    need(out_json, "out_json");
    Json j = Json::array();
    for (const auto& r : kb->value.index.retrieve(query, k))
      j.push_back({{"workflow_id", r.workflow_id}, {"score", r.score}});
    put(out_json, j);
  });
}

ica_status ica_synth(const ica_config* config, const char* pools_dir, size_t n, uint64_t seed, const char* out_path,
                     char** out_stats_json) {
  return guard([&] {
    need(config, "config");
    need(pools_dir, "pools_dir");
    need(out_path, "out_path");
    auto pools = load_pools(pools_dir);
    fs::path tmp = fs::path(out_path).string() + ".partial";
    SynthStats stats;
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
      stats = generate_dataset(pools, n, seed, config->value.synth,
                               [&](const SftInstance& s) { out << sft_to_jsonl(s) << '\n'; });
      out.flush();
      if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
    }
    fs::rename(tmp, out_path);
    if (out_stats_json) {
      Json reasons = Json::object();
      for (const auto& [k, v] : stats.skip_reasons) reasons[k] = v;
      put(out_stats_json, Json{{"emitted", stats.emitted},
                               {"skipped", stats.skipped},
                               {"duplicates", stats.duplicates},
                               {"skip_rate", stats.skip_rate()},
                               {"skip_reasons", reasons}});
    }
  });
}

ica_status ica_client_create(const ica_config* config, const ica_kb* kb, uint64_t seed, ica_client** out) {
  return guard([&] {
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    const Config& c = config->value;
    auto h = std::make_unique<ica_client>();
    h->kind = c.client;
    if (c.client == "http") {
      HttpClientConfig hc = http_client_config_from_env();
      if (!c.endpoint.empty()) hc.endpoint = c.endpoint;
      if (!c.model.empty()) hc.model = c.model;
      hc.concurrency = c.client_concurrency;
      if (hc.endpoint.empty())
        throw Error(ErrorCode::kInvalidArgument, "http client needs client.endpoint or ICA_LLM_ENDPOINT");
      h->http = std::make_unique<HttpLlmClient>(hc);
      h->active = h->http.get();
    } else {
      h->oracle = std::make_unique<OracleEchoClient>(kb ? &kb->value : nullptr,
                                                     MockLatency{c.latency_min_ms, c.latency_max_ms, 0});
      h->active = h->oracle.get();
      if (c.client == "corrupt") {
        h->corrupt = std::make_unique<CorruptingClient>(*h->oracle, c.corrupt_p, seed);
        h->active = h->corrupt.get();
      }
    }
    *out = h.release();
  });
}

ica_status ica_client_stats(const ica_client* client, char** out_json) {
  return guard([&] {
    need(client, "client");
    need(out_json, "out_json");
    Json j{{"kind", client->kind}};
    if (client->oracle) {
      auto lat = client->oracle->injected_latencies();
      j["calls"] = lat.size();
      j["injected_latencies"] = lat;
    }
    if (client->corrupt) j["corrupted"] = client->corrupt->corrupted();
    put(out_json, j);
  });
}

void ica_client_free(ica_client* client) { delete client; }

ica_status ica_predict(const ica_kb* kb, ica_client* client, const ica_config* config, const char* request_json,
                       char** out_json) {
  return guard([&] {
    need(kb, "kb");
    need(client, "client");
    need(config, "config");
    need(request_json, "request_json");
    need(out_json, "out_json");
    Json req = parse_json(request_json, "request");
    PredictRequest pr{query_of(req), req.value("query_id", std::string()), strings_of(req, "candidates")};
    PredictConfig pc = config->value.predict_config();
    if (req.contains("k")) pc.k = req["k"].get<std::size_t>();
    std::unique_ptr<ContextProvider> provider;
    if (req.contains("context"))
      provider = std::make_unique<StaticContextProvider>(context_from_json(req["context"]));
    else if (!config->value.context_url.empty())
      provider = std::make_unique<HttpContextProvider>(config->value.context_url, pc.timeout);
    else
      provider = std::make_unique<StaticContextProvider>();
    put(out_json, prediction_to_json(predict(pr, *provider, kb->value, *client->active, pc)));
  });
}

ica_status ica_eval(const ica_kb* kb, ica_client* client, const ica_config* config, const char* cases_path,
                    char** out_json) {
  return guard([&] {
    need(kb, "kb");
    need(client, "client");
    need(config, "config");
    need(cases_path, "cases_path");
    need(out_json, "out_json");
    EvalConfig ec;
    ec.predict = config->value.predict_config();
    ec.concurrency = config->value.eval_concurrency;
    ec.client_name = client->kind;
    put(out_json, report_to_json(run_eval(load_eval_cases(cases_path), kb->value, *client->active, ec)));
  });
}

ica_status ica_derive_eval(const char* synth_jsonl, const char* pools_dir, const char* base_kb_dir, uint64_t seed,
                           int cases_per_base_workflow, const char* out_kb_dir, const char* out_cases_path,
                           char** out_summary_json) {
  return guard([&] {
    need(synth_jsonl, "synth_jsonl");
    need(out_kb_dir, "out_kb_dir");
    need(out_cases_path, "out_cases_path");
    if (cases_per_base_workflow < 0) throw Error(ErrorCode::kInvalidArgument, "cases per base workflow must be >= 0");
    std::vector<SftInstance> instances;
    auto lines = util::split_lines(util::read_file(synth_jsonl));
    for (std::size_t i = 0; i < lines.size(); ++i)
      if (!util::trim(lines[i]).empty())
        instances.push_back(sft_from_json(parse_json(lines[i], std::string(synth_jsonl) + ":" + std::to_string(i + 1))));
    std::optional<SynthPools> pools;
    if (pools_dir) pools = load_pools(pools_dir);
    std::optional<KnowledgeBase> base;
    if (base_kb_dir) base = load_kb(base_kb_dir);
    auto d = derive_eval(instances, pools ? &*pools : nullptr, base ? &*base : nullptr,
                         {seed, cases_per_base_workflow});
    if (d.workflows.empty()) throw Error(ErrorCode::kValidation, "nothing to derive: no instances and no base");
    write_kb(out_kb_dir, d.workflows, d.actions, d.aliases);
    util::write_file(out_cases_path, eval_cases_to_jsonl(d.cases));
    if (out_summary_json)
      put(out_summary_json, Json{{"cases", d.cases.size()}, {"workflows", d.workflows.size()}, {"skipped", d.skipped}});
  });
}

ica_status ica_compare(const char* reports_json, char** out_json) {
  return guard([&] {
    need(reports_json, "reports_json");
    need(out_json, "out_json");
    Json arr = parse_json(reports_json, "reports");
    if (!arr.is_array()) throw Error(ErrorCode::kInvalidArgument, "reports must be a JSON array");
    std::vector<EvalReport> reports;
    for (const auto& r : arr) reports.push_back(report_from_json(r));
    auto c = compare_reports(reports);
    put(out_json, Json{{"json", c.json}, {"text", c.text}});
  });
}

ica_status ica_server_create(const ica_kb* kb, ica_client* client, const ica_config* config, const char* host,
                             int port, ica_server** out) {
  return guard([&] {
    need(kb, "kb");
    need(client, "client");
    need(config, "config");
    need(host, "host");
    need(out, "out");
    *out = nullptr;
    auto s = std::make_unique<ica_server>();
    ServiceConfig sc;
    sc.max_in_flight = config->value.max_in_flight;
    sc.predict = config->value.predict_config();
    if (!config->value.context_url.empty())
      s->provider = std::make_unique<HttpContextProvider>(config->value.context_url, sc.predict.timeout);
    s->service = std::make_unique<PredictService>(kb->value, *client->active, s->provider.get(), sc);
    s->port = s->service->bind(host, port);
    *out = s.release();
  });
}

int ica_server_port(const ica_server* server) { return server ? server->port : -1; }

ica_status ica_server_run(ica_server* server) {
  return guard([&] {
    need(server, "server");
    server->service->listen();
  });
}

void ica_server_stop(ica_server* server) {
  if (server) server->service->stop();
}

void ica_server_free(ica_server* server) { delete server; }

}  // extern "C"
