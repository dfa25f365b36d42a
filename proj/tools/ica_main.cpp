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


// Command-line front end. Everything goes through the C interface.

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ica/ica.h"

namespace {

using Json = nlohmann::ordered_json;

enum Level { kError, kWarn, kInfo, kDebug };
Level g_level = kInfo;
bool g_json_errors = false;

void log(Level level, const std::string& msg) {
  if (level > g_level) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[" << names[level] << "] " << msg << "\n";
}

struct Failure {
  int exit_code;
  std::string code;
  std::string message;
  std::string stage;
};

int report(const Failure& f) {
  if (g_json_errors) {
    Json j{{"code", f.code}, {"message", f.message}};
    if (!f.stage.empty()) j["stage"] = f.stage;
    std::cerr << Json{{"error", j}}.dump() << "\n";
  } else {
    std::cerr << "ica: " << f.message << "\n";
  }
  return f.exit_code;
}

// Throws on a non-ok status; invalid arguments are usage errors.
void check(ica_status s) {
  if (s == ICA_OK) return;
  throw Failure{s == ICA_ERR_INVALID_ARGUMENT ? 2 : 1, ica_status_name(s), ica_last_error(), ica_last_error_stage()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  ica_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) Free(p);
  }
};
using ConfigH = Handle<ica_config, ica_config_free>;
using KbH = Handle<ica_kb, ica_kb_free>;
using ClientH = Handle<ica_client, ica_client_free>;
using ServerH = Handle<ica_server, ica_server_free>;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{1, "io_error", "cannot read " + path, ""};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Failure{1, "io_error", "cannot write " + path, ""};
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text(path, text);
}

std::string pretty(const std::string& json) { return Json::parse(json).dump(2) + "\n"; }

// Inline JSON or @file.
Json context_arg(const std::string& arg) {
  std::string text = !arg.empty() && arg[0] == '@' ? read_text(arg.substr(1)) : arg;
  try {
    Json j = Json::parse(text);
    if (!j.is_object()) throw Failure{2, "usage", "--context must be a JSON object", ""};
    return j;
  } catch (const Json::exception& e) {
    throw Failure{2, "usage", std::string("--context: ") + e.what(), ""};
  }
}

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string log_level = "info";
};

struct Overrides {
  std::string client;
  std::optional<bool> cot;
  std::string format;
  std::optional<std::size_t> k;
  std::optional<std::size_t> concurrency;
};

void set(ica_config* cfg, const std::string& key, const std::string& value) { check(ica_config_set(cfg, key.c_str(), value.c_str())); }

void open_config(const Globals& g, ConfigH& cfg, const Overrides& o = {}) {
  check(ica_config_load(g.config_path.empty() ? nullptr : g.config_path.c_str(), &cfg.p));
  if (g.seed) set(cfg.p, "seed", std::to_string(*g.seed));
  if (!o.client.empty()) set(cfg.p, "client", o.client);
  if (o.cot) set(cfg.p, "prompt.cot", *o.cot ? "true" : "false");
  if (!o.format.empty()) set(cfg.p, "prompt.format", o.format);
  if (o.k) set(cfg.p, "retrieval.k", std::to_string(*o.k));
  if (o.concurrency) set(cfg.p, "eval.concurrency", std::to_string(*o.concurrency));
}

Json config_json(const ConfigH& cfg) {
  char* out = nullptr;
  check(ica_config_to_json(cfg.p, &out));
  return Json::parse(take(out));
}

// --kb, else kb_dir from the config.
void open_kb(const std::string& flag, const ConfigH& cfg, KbH& kb) {
  std::string dir = flag.empty() ? config_json(cfg)["kb_dir"].get<std::string>() : flag;
  if (dir.empty()) throw Failure{2, "usage", "no knowledge base: pass --kb or set kb_dir", ""};
  check(ica_kb_load(dir.c_str(), &kb.p));
}

std::uint64_t seed_of(const ConfigH& cfg) { return config_json(cfg)["seed"].get<std::uint64_t>(); }

void add_client_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--client", o.client, "oracle, corrupt or http")->check(CLI::IsMember({"oracle", "corrupt", "http"}));
  cmd->add_flag("--cot,!--no-cot", o.cot, "ask for step-by-step reasoning");
  cmd->add_option("--format", o.format, "knowledge format shown to the model")->check(CLI::IsMember({"ica", "richtext"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ICA toolkit: workflow pseudocode, synthetic data, prediction and evaluation", "ica"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ica_version()));
  Globals g;
  app.add_option("--config", g.config_path, "key = value settings file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed for synth, derive-eval and the corrupting client");
  app.add_option("--log-level", g.log_level, "error, warn, info or debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  app.add_flag("--json-errors", g_json_errors, "print errors on stderr as JSON");

  // convert
  std::string conv_in, conv_out;
  auto* convert = app.add_subcommand("convert", "HTML workflow documents to ICA files");
  convert->add_option("input", conv_in, "HTML file or directory")->required();
  convert->add_option("-o,--out", conv_out, "output knowledge-base directory")->required();

  // lint
  std::vector<std::string> lint_files;
  auto* lint = app.add_subcommand("lint", "check .ica files");
  lint->add_option("files", lint_files, ".ica files")->required()->check(CLI::ExistingFile);

  // run
  std::string run_kb, run_query, run_intent, run_context;
  std::vector<std::string> run_workflows;
  auto* run = app.add_subcommand("run", "evaluate workflows on a query and context with the interpreter");
  run->add_option("--kb", run_kb, "knowledge-base directory");
  run->add_option("--query", run_query, "user query")->required();
  run->add_option("--intent", run_intent, "intent label");
  run->add_option("--context", run_context, "context as JSON or @file");
  run->add_option("--workflow", run_workflows, "workflow id (repeatable); default: top-k retrieved");

  // synth
  std::string synth_pools, synth_out;
  std::size_t synth_n = 0;
  std::optional<bool> synth_cot;
  auto* synth = app.add_subcommand("synth", "generate synthetic training instances as JSONL");
  synth->add_option("--pools", synth_pools, "pool directory (default: pools_dir)");
  synth->add_option("--n", synth_n, "number of instances")->required();
  synth->add_option("-o,--out", synth_out, "output JSONL file")->required();
  synth->add_flag("--cot,!--no-cot", synth_cot, "label with the reasoning text");

  // retrieve
  std::string ret_kb, ret_query;
  std::optional<std::size_t> ret_k;
  auto* retrieve = app.add_subcommand("retrieve", "rank workflows for a query");
  retrieve->add_option("--kb", ret_kb, "knowledge-base directory");
  retrieve->add_option("--query", ret_query, "user query")->required();
  retrieve->add_option("-k", ret_k, "number of workflows")->check(CLI::PositiveNumber);

  // predict
  std::string pred_kb, pred_query, pred_intent, pred_context;
  std::vector<std::string> pred_candidates;
  Overrides pred_o;
  auto* predict = app.add_subcommand("predict", "predict the action for one query");
  predict->add_option("--kb", pred_kb, "knowledge-base directory");
  predict->add_option("--query", pred_query, "user query")->required();
  predict->add_option("--intent", pred_intent, "intent label");
  predict->add_option("--context", pred_context, "context as JSON or @file");
  predict->add_option("--candidate", pred_candidates, "pinned workflow id (repeatable)");
  predict->add_option("-k", pred_o.k, "retrieved candidates")->check(CLI::PositiveNumber);
  add_client_flags(predict, pred_o);

  // serve
  std::string serve_kb, serve_host;
  std::optional<int> serve_port;
  Overrides serve_o;
  auto* serve = app.add_subcommand("serve", "HTTP prediction service");
  serve->add_option("--kb", serve_kb, "knowledge-base directory");
  serve->add_option("--host", serve_host, "bind address (default: serve.host)");
  serve->add_option("--port", serve_port, "port, 0 for any (default: serve.port)")->check(CLI::Range(0, 65535));
  add_client_flags(serve, serve_o);

  // eval
  std::string eval_kb, eval_data, eval_out;
  Overrides eval_o;
  auto* eval = app.add_subcommand("eval", "accuracy and latency over a labeled JSONL set");
  eval->add_option("--kb", eval_kb, "knowledge-base directory");
  eval->add_option("--data", eval_data, "eval cases (JSONL)")->required()->check(CLI::ExistingFile);
  eval->add_option("-o,--out", eval_out, "report file (default: stdout)");
  eval->add_option("--concurrency", eval_o.concurrency, "parallel cases")->check(CLI::PositiveNumber);
  add_client_flags(eval, eval_o);

  // derive-eval
  std::string de_synth, de_pools, de_base, de_out_kb, de_out;
  int de_per = 5;
  auto* derive = app.add_subcommand("derive-eval", "labeled eval set from synthetic instances");
  derive->add_option("--synth", de_synth, "synth JSONL")->required()->check(CLI::ExistingFile);
  derive->add_option("--pools", de_pools, "pools directory, for retrieval aliases");
  derive->add_option("--base-kb", de_base, "also sample cases for this knowledge base");
  derive->add_option("--per-workflow", de_per, "cases per base workflow")->check(CLI::NonNegativeNumber);
  derive->add_option("--out-kb", de_out_kb, "merged knowledge-base directory")->required();
  derive->add_option("-o,--out", de_out, "eval cases (JSONL)")->required();

  // compare
  std::vector<std::string> cmp_reports;
  bool cmp_json = false;
  auto* compare = app.add_subcommand("compare", "side-by-side accuracy and latency of eval reports");
  compare->add_option("reports", cmp_reports, "report files")->required()->check(CLI::ExistingFile);
  compare->add_flag("--json", cmp_json, "print JSON instead of the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // name the bad command instead of "a subcommand is required"
    std::string msg = e.what();
    for (int i = 1; i < argc; ++i) {
      std::string a = argv[i];
      if (a == "--config" || a == "--seed" || a == "--log-level") {
        ++i;
        continue;
      }
      if (a.empty() || a[0] == '-') continue;
      if (!app.get_subcommand_no_throw(a)) msg = "unknown command '" + a + "'";
      break;
    }
    if (g_json_errors) return report({2, "usage", msg, ""});
    std::cerr << "ica: " << msg << "\n\n" << app.help();
    return 2;
  }
  g_level = g.log_level == "error" ? kError : g.log_level == "warn" ? kWarn : g.log_level == "debug" ? kDebug : kInfo;

  try {
    if (*convert) {
      char* out = nullptr;
      check(ica_convert(conv_in.c_str(), conv_out.c_str(), &out));
      Json s = Json::parse(take(out));
      log(kInfo, "converted " + s["workflows"].dump() + " workflow(s), " + s["flagged_blocks"].dump() +
                     " block(s) flagged for review");
      for (const auto& p : s["written"]) log(kDebug, "wrote " + p.get<std::string>());
      return 0;
    }

    if (*lint) {
      bool errors = false;
      for (const auto& f : lint_files) {
        std::string id = f.substr(f.find_last_of('/') + 1);
        id = id.substr(0, id.rfind('.'));
        char* out = nullptr;
        check(ica_lint(read_text(f).c_str(), id.c_str(), &out));
        Json r = Json::parse(take(out));
        errors |= !r["ok"].get<bool>();
        for (const auto& d : r["diagnostics"])
          std::cout << f << ":" << d["line"].get<int>() << ":" << d["column"].get<int>() << ": "
                    << d["severity"].get<std::string>() << ": " << d["message"].get<std::string>() << "\n";
        for (const auto& w : r["warnings"])
          std::cout << f << ":" << w["line"].get<int>() << ": warning[" << w["code"].get<std::string>()
                    << "]: " << w["message"].get<std::string>() << "\n";
      }
      return errors ? 1 : 0;
    }

    ConfigH cfg;
    if (*run) {
      open_config(g, cfg);
      KbH kb;
      open_kb(run_kb, cfg, kb);
      Json req{{"query", run_query}};
      if (!run_intent.empty()) req["intent"] = run_intent;
      req["context"] = run_context.empty() ? Json::object() : context_arg(run_context);
      if (!run_workflows.empty()) req["workflows"] = run_workflows;
      char* out = nullptr;
      check(ica_run(kb.p, cfg.p, req.dump().c_str(), &out));
      std::cout << pretty(take(out));
      return 0;
    }

    if (*synth) {
      open_config(g, cfg);
      if (synth_cot) set(cfg.p, "prompt.cot", *synth_cot ? "true" : "false");
      Json c = config_json(cfg);
      std::string pools = synth_pools.empty() ? c["pools_dir"].get<std::string>() : synth_pools;
      if (pools.empty()) throw Failure{2, "usage", "no pools: pass --pools or set pools_dir", ""};
      char* out = nullptr;
      check(ica_synth(cfg.p, pools.c_str(), synth_n, seed_of(cfg), synth_out.c_str(), &out));
      Json s = Json::parse(take(out));
      log(kInfo, "wrote " + s["emitted"].dump() + " instance(s) to " + synth_out + "; skipped " +
                     s["skipped"].dump() + " attempt(s), " + s["duplicates"].dump() + " duplicate(s)");
      if (!s["skip_reasons"].empty()) log(kDebug, "skip reasons " + s["skip_reasons"].dump());
      return 0;
    }

    if (*retrieve) {
      open_config(g, cfg);
      KbH kb;
      open_kb(ret_kb, cfg, kb);
      std::size_t k = ret_k ? *ret_k : config_json(cfg)["retrieval.k"].get<std::size_t>();
      char* out = nullptr;
      check(ica_retrieve(kb.p, ret_query.c_str(), k, &out));
      std::cout << pretty(take(out));
      return 0;
    }

    if (*predict) {
      open_config(g, cfg, pred_o);
      KbH kb;
      open_kb(pred_kb, cfg, kb);
      ClientH client;
      check(ica_client_create(cfg.p, kb.p, seed_of(cfg), &client.p));
      Json req{{"query", pred_query}};
      if (!pred_intent.empty()) req["intent"] = pred_intent;
      if (!pred_context.empty()) req["context"] = context_arg(pred_context);
      if (!pred_candidates.empty()) req["candidates"] = pred_candidates;
      char* out = nullptr;
      check(ica_predict(kb.p, client.p, cfg.p, req.dump().c_str(), &out));
      std::cout << pretty(take(out));
      return 0;
    }

    if (*serve) {
      open_config(g, cfg, serve_o);
      KbH kb;
      open_kb(serve_kb, cfg, kb);
      ClientH client;
      check(ica_client_create(cfg.p, kb.p, seed_of(cfg), &client.p));
      Json c = config_json(cfg);
      std::string host = serve_host.empty() ? c["serve.host"].get<std::string>() : serve_host;
      int port = serve_port ? *serve_port : c["serve.port"].get<int>();

      // signals are taken by a dedicated thread so stop() runs outside a handler
      sigset_t set_;
      sigemptyset(&set_);
      sigaddset(&set_, SIGINT);
      sigaddset(&set_, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &set_, nullptr);

      ServerH server;
      check(ica_server_create(kb.p, client.p, cfg.p, host.c_str(), port, &server.p));
      log(kInfo, "listening on " + host + ":" + std::to_string(ica_server_port(server.p)));
      std::thread waiter([&] {
        int sig = 0;
        sigwait(&set_, &sig);
        log(kInfo, "stopping");
        ica_server_stop(server.p);
      });
      ica_status s = ica_server_run(server.p);
      pthread_kill(waiter.native_handle(), SIGTERM);
      waiter.join();
      check(s);
      return 0;
    }

    if (*eval) {
      open_config(g, cfg, eval_o);
      KbH kb;
      open_kb(eval_kb, cfg, kb);
      ClientH client;
      check(ica_client_create(cfg.p, kb.p, seed_of(cfg), &client.p));
      char* out = nullptr;
      check(ica_eval(kb.p, client.p, cfg.p, eval_data.c_str(), &out));
      Json r = Json::parse(take(out));
      emit(eval_out, r.dump(2) + "\n");
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: acc %.4f (%zu/%zu), AL %.4fs, end-to-end %.4fs", r["arm"].get<std::string>().c_str(),
                    r["acc"].get<double>(), r["correct"].get<std::size_t>(), r["total"].get<std::size_t>(),
                    r["al_seconds"].get<double>(), r["al_end_to_end_seconds"].get<double>());
      log(kInfo, buf);
      return 0;
    }

    if (*derive) {
      open_config(g, cfg);
      char* out = nullptr;
      check(ica_derive_eval(de_synth.c_str(), de_pools.empty() ? nullptr : de_pools.c_str(),
                            de_base.empty() ? nullptr : de_base.c_str(), seed_of(cfg), de_per, de_out_kb.c_str(),
                            de_out.c_str(), &out));
      Json s = Json::parse(take(out));
      log(kInfo, "wrote " + s["cases"].dump() + " case(s) and " + s["workflows"].dump() + " workflow(s); " +
                     s["skipped"].dump() + " base sample(s) without an answer");
      return 0;
    }

    if (*compare) {
      Json arr = Json::array();
      for (const auto& f : cmp_reports) {
        try {
          arr.push_back(Json::parse(read_text(f)));
        } catch (const Json::exception& e) {
          throw Failure{1, "parse_error", f + ": " + e.what(), ""};
        }
      }
      char* out = nullptr;
      check(ica_compare(arr.dump().c_str(), &out));
      Json c = Json::parse(take(out));
      std::cout << (cmp_json ? c["json"].dump(2) + "\n" : c["text"].get<std::string>());
      return 0;
    }
  } catch (const Failure& f) {
    return report(f);
  }
  return 2;
}
