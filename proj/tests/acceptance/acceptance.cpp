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


// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>

#include "ica/eval.hpp"
#include "ica/http.hpp"
#include "ica/ingest.hpp"
#include "ica/interpreter.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "util.hpp"

using namespace ica;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kFixtures = ICA_FIXTURES_DIR;

// Pinned tolerances.
constexpr double kC1MaxSeconds = 10.0;
constexpr double kC2MaxSeconds = 5.0;
constexpr double kC3MaxSeconds = 120.0;
constexpr double kC3MaxSkipRate = 0.05;
constexpr double kC5CorruptP = 0.3;
constexpr double kC5AccTarget = 0.70;
constexpr double kC5AccTolerance = 0.02;
constexpr double kC5LatencyToleranceSeconds = 0.001;
constexpr std::size_t kBudget = 4096;
constexpr int kOutputCap = 512;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
  std::string first_failure;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) first_failure = what;
    pass = false;
  }
};

int failed = 0;

void criterion(int n, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  auto t = Clock::now();
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.first_failure = std::string("exception: ") + e.what();
  }
  double s = seconds_since(t);
  failed += !o.pass;
  std::printf("%s %d %s: %s%s [%.2fs]\n", o.pass ? "PASS" : "FAIL", n, name.c_str(), o.detail.c_str(),
              o.pass ? "" : ("; first failure: " + o.first_failure).c_str(), s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::set<testing::OracleBranch> as_oracle_set(const EvalTrace& trace) {
  std::set<testing::OracleBranch> out;
  for (const auto& b : trace.branches) out.insert({b.tree_index, b.leaf, to_string(b.status), b.failing_node});
  return out;
}

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("ica_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// ---------------------------------------------------------------------------

Outcome interpreter_equivalence() {
  Outcome o;
  testing::Gen g(20260101);
  int matched = 0, agree = 0;
  auto t = Clock::now();
  for (int i = 0; i < 1000; ++i) {
    std::vector<DecisionTree> trees;
    int n = g.between(1, 3);
    for (int k = 0; k < n; ++k) trees.push_back(testing::random_tree(g, "w" + std::to_string(k), {5, 4, 0.2, false}));
    UserQuery q = testing::random_query(g);
    ContextRecord ctx = testing::random_context(g);
    auto trace = evaluate(trees, q, ctx);
    auto oracle = testing::brute_force_evaluate(trees, q, ctx);
    bool same = trace.matched.has_value() == oracle.matched.has_value();
    if (same && trace.matched)
      same = trace.matched->tree_index == std::get<0>(*oracle.matched) &&
             trace.matched->action_id == std::get<1>(*oracle.matched) &&
             trace.matched->path == std::get<2>(*oracle.matched);
    same = same && as_oracle_set(trace) == oracle.branches;
    agree += same;
    matched += trace.matched.has_value();
    o.require(same, "triple " + std::to_string(i));
  }
  double s = seconds_since(t);
  o.require(s < kC1MaxSeconds, "too slow");
  o.detail = std::to_string(agree) + "/1000 triples agree (" + std::to_string(matched) + " with a match), " +
             fmt("%.2fs", s) + " < " + fmt("%.0fs", kC1MaxSeconds);
  return o;
}

Outcome grammar_round_trip() {
  Outcome o;
  testing::Gen g(77);
  int ok = 0;
  auto t = Clock::now();
  for (int i = 0; i < 1000; ++i) {
    DecisionTree tree = testing::random_tree(g, "w", {5, 4, 0.2, true});
    ActionMap actions = testing::random_action_map(g, tree, true);
    std::string text = print_ica(tree, actions);
    auto r = parse_ica(text, "w");
    bool same = r.ok() && structurally_equal(r.document->tree, tree);
    ok += same;
    o.require(same, "tree " + std::to_string(i));
  }
  int files = 0;
  std::vector<fs::path> corpus;
  for (const auto& e : fs::directory_iterator(kFixtures / "golden" / "convert"))
    if (e.path().extension() == ".ica") corpus.push_back(e.path());
  corpus.push_back(kFixtures / "grammar" / "reference.ica");
  for (const auto& f : corpus) {
    auto kb_dir = f.parent_path();
    ActionMap actions = action_map_from_json(parse_json(
        util::read_file(f.filename() == "reference.ica" ? kb_dir / "reference.actions.json" : kb_dir / "actions.json"),
        "actions"));
    std::string id = f.stem().string();
    auto r1 = parse_ica(util::read_file(f), id);
    o.require(r1.ok(), f.filename().string() + " does not parse");
    if (!r1.ok()) continue;
    std::string p1 = print_ica(r1.document->tree, actions);
    auto r2 = parse_ica(p1, id);
    o.require(r2.ok() && print_ica(r2.document->tree, actions) == p1, f.filename().string() + " not idempotent");
    ++files;
  }
  double s = seconds_since(t);
  o.require(s < kC2MaxSeconds, "too slow");
  o.detail = std::to_string(ok) + "/1000 trees round-trip, print(parse(s)) idempotent on " + std::to_string(files) +
             " corpus files, " + fmt("%.2fs", s) + " < " + fmt("%.0fs", kC2MaxSeconds);
  return o;
}

Outcome synthesis_self_consistency() {
  Outcome o;
  auto pools = load_pools(kFixtures / "pools");
  auto t = Clock::now();
  std::string first;
  std::size_t checked = 0, divergent = 0;
  auto sink = [&](const SftInstance& s) {
    std::string line = sft_to_jsonl(s);
    first += line;
    first += '\n';
    ParsedPrompt p = parse_prompt(s.instruction);
    EvalTrace tr = evaluate(p.trees, p.query, p.context);
    int want = s.meta["matched"]["global_action_id"].get<int>();
    o.require(tr.matched && tr.matched->action_id == want && parse_response(s.label) == want,
              "instance " + s.meta["index"].dump() + " is not self-consistent");
    for (const auto& d : s.meta["divergent"]) {
      int gid = d["global_action_id"].get<int>();
      for (const auto& b : tr.branches)
        if (b.action_id == gid)
          o.require(b.status == BranchStatus::kFailed || b.status == BranchStatus::kUnknown,
                    "divergent branch " + std::to_string(gid) + " of " + s.meta["index"].dump() + " holds");
      ++divergent;
    }
    ++checked;
  };
  SynthStats a = generate_dataset(pools, 10000, 7, {}, sink);
  std::string second;
  second.reserve(first.size());
  SynthStats b = generate_dataset(pools, 10000, 7, {}, [&](const SftInstance& s) {
    second += sft_to_jsonl(s);
    second += '\n';
  });
  double s = seconds_since(t);
  o.require(checked == 10000, "instance count");
  o.require(first == second, "second run differs");
  o.require(a.skip_rate() <= kC3MaxSkipRate && b.skip_rate() == a.skip_rate(), "skip rate");
  o.require(s < kC3MaxSeconds, "too slow");
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(util::fnv1a64(first)));
  o.detail = std::to_string(checked) + " instances self-consistent, " + std::to_string(divergent) +
             " divergent branches all fail, skip rate " + fmt("%.4f", a.skip_rate()) + " <= " +
             fmt("%.2f", kC3MaxSkipRate) + ", two runs byte-identical (fnv " + hash + ", " +
             std::to_string(first.size()) + " bytes), " + fmt("%.1fs", s) + " < " + fmt("%.0fs", kC3MaxSeconds);
  return o;
}

Outcome ingestion_goldens() {
  Outcome o;
  fs::path out = scratch() / "convert";
  RuleBasedClassifier rules;
  auto summary = convert_path(kFixtures / "html", out, rules);
  int docs = 0;
  bool table = false, nested = false;
  for (const auto& e : fs::directory_iterator(kFixtures / "html")) {
    if (e.path().extension() != ".html") continue;
    ++docs;
    std::string html = util::read_file(e.path());
    table |= html.find("<table") != std::string::npos;
    auto li = html.find("<li");
    nested |= li != std::string::npos && html.find("<ul", li) != std::string::npos;
  }
  int compared = 0;
  for (const auto& e : fs::directory_iterator(kFixtures / "golden" / "convert")) {
    auto name = e.path().filename();
    if (e.path().extension() != ".ica" && name != "actions.json") continue;
    ++compared;
    o.require(fs::exists(out / name) && util::read_file(out / name) == util::read_file(e.path()),
              name.string() + " differs");
  }
  std::size_t produced = 0;
  for (const auto& e : fs::directory_iterator(out)) produced += e.path().extension() == ".ica";
  o.require(docs >= 5 && table && nested, "fixture corpus too small");
  o.require(produced + 1 == static_cast<std::size_t>(compared), "extra or missing workflows");
  o.detail = std::to_string(docs) + " documents (table: " + (table ? "yes" : "no") + ", nested lists: " +
             (nested ? "yes" : "no") + ") -> " + std::to_string(summary.workflows) + " workflows; " +
             std::to_string(compared) + " golden files byte-identical";
  return o;
}

struct Pipeline {
  KnowledgeBase kb;
  std::vector<EvalCase> cases;
};

// convert -> synth n -> derive-eval, written to disk and loaded back.
Pipeline build_pipeline(std::size_t n, std::uint64_t seed, const std::string& name, bool with_base) {
  fs::path dir = scratch() / name;
  RuleBasedClassifier rules;
  convert_path(kFixtures / "html", dir / "converted", rules);
  auto pools = load_pools(kFixtures / "pools");
  std::vector<SftInstance> instances;
  generate_dataset(pools, n, seed, {}, [&](const SftInstance& s) { instances.push_back(s); });
  std::optional<KnowledgeBase> base;
  if (with_base) base = load_kb(dir / "converted");
  auto d = derive_eval(instances, &pools, base ? &*base : nullptr, {seed, 5});
  write_kb(dir / "kb", d.workflows, d.actions, d.aliases);
  util::write_file(dir / "cases.jsonl", eval_cases_to_jsonl(d.cases));
  return {load_kb(dir / "kb"), load_eval_cases(dir / "cases.jsonl")};
}

Outcome end_to_end() {
  Outcome o;
  auto small = build_pipeline(100, 1, "e2e", true);
  std::string arms;
  OracleEchoClient oracle(&small.kb);
  for (auto fmt_ : {KnowledgeFormat::kRichText, KnowledgeFormat::kIca})
    for (bool cot : {false, true}) {
      EvalConfig cfg;
      cfg.predict.prompt = {cot, fmt_, kBudget};
      cfg.concurrency = 4;
      auto r = run_eval(small.cases, small.kb, oracle, cfg);
      o.require(r.acc == 1.0, r.arm() + " oracle acc " + std::to_string(r.acc));
      arms += (arms.empty() ? "" : ", ") + r.arm() + " " + fmt("%.3f", r.acc);
    }

  auto big = build_pipeline(5000, 2, "corrupt", false);
  OracleEchoClient inner(&big.kb);
  CorruptingClient corrupt(inner, kC5CorruptP, 99);
  EvalConfig cc;
  cc.concurrency = 4;
  auto rc = run_eval(big.cases, big.kb, corrupt, cc);
  o.require(big.cases.size() == 5000, "corrupt set size");
  o.require(std::abs(rc.acc - kC5AccTarget) <= kC5AccTolerance, "corrupted acc " + std::to_string(rc.acc));

  OracleEchoClient slow(&small.kb, {2.0, 6.0, 5});
  EvalConfig lc;
  lc.concurrency = 4;
  auto rl = run_eval(small.cases, small.kb, slow, lc);
  auto injected = slow.injected_latencies();
  double mean = injected.empty() ? 0 : std::accumulate(injected.begin(), injected.end(), 0.0) / injected.size();
  double diff = std::abs(rl.al_seconds - mean);
  o.require(injected.size() == rl.total - rl.status_counts["no_intent_match"], "latency sample count");
  o.require(diff <= kC5LatencyToleranceSeconds, "AL off by " + std::to_string(diff));

  o.detail = "oracle-echo on " + std::to_string(small.cases.size()) + " derived cases: " + arms +
             "; corrupting p=" + fmt("%.1f", kC5CorruptP) + " on " + std::to_string(rc.total) + " cases: acc " +
             fmt("%.4f", rc.acc) + " (target " + fmt("%.2f", kC5AccTarget) + " +/- " + fmt("%.2f", kC5AccTolerance) +
             ", " + std::to_string(corrupt.corrupted()) + " replies corrupted); AL " + fmt("%.5fs", rl.al_seconds) + " vs mean injected " + fmt("%.5fs", mean) + " (|diff| " +
             fmt("%.5fs", diff) + " <= 0.001s)";
  return o;
}

Outcome table_structure() {
  Outcome o;
  auto p = build_pipeline(400, 3, "table", false);
  struct Arm {
    KnowledgeFormat format;
    bool cot;
    double p;
  };
  // one corruption rate per arm, weakest to strongest
  Arm arms[] = {{KnowledgeFormat::kRichText, false, 0.43},
                {KnowledgeFormat::kRichText, true, 0.35},
                {KnowledgeFormat::kIca, false, 0.30},
                {KnowledgeFormat::kIca, true, 0.08}};
  std::vector<EvalReport> reports;
  for (const auto& a : arms) {
    OracleEchoClient inner(&p.kb);
    CorruptingClient c(inner, a.p, 17);
    EvalConfig cfg;
    cfg.predict.prompt = {a.cot, a.format, kBudget};
    cfg.client_name = "corrupt";
    reports.push_back(run_eval(p.cases, p.kb, c, cfg));
  }
  auto cmp = compare_reports(reports);

  // recount every accuracy from the rows and the deltas from the recount
  auto recount = [](const EvalReport& r) {
    std::size_t c = 0;
    for (const auto& row : r.rows) c += row.predicted && *row.predicted == row.gold;
    return static_cast<double>(c) / static_cast<double>(r.rows.size());
  };
  double base = recount(reports[0]);
  auto cell = [&](const EvalReport& r, bool is_base) {
    double acc = recount(r);
    std::string s = fmt("%.2f", acc);
    if (!is_base) {
      double d = std::round((acc - base) * 100) / 100;
      if (d == 0) d = 0;
      s += " (" + fmt("%+.2f", d) + ")";
    }
    return s;
  };
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::string want_grid = "CoT | ACC Rich Text | ACC ICA\n";
  want_grid += "w/o | " + pad(cell(reports[0], true), 14) + "| " + cell(reports[2], false) + "\n";
  want_grid += "w/  | " + pad(cell(reports[1], false), 14) + "| " + cell(reports[3], false) + "\n";
  o.require(cmp.text.rfind(want_grid, 0) == 0, "grid differs from the recount");
  o.require(cmp.json["baseline"] == "richtext/no-cot", "baseline");
  o.require(cmp.json["arms"].size() == 4, "arm count");
  for (std::size_t i = 1; i < 4; ++i)
    o.require(cmp.json["arms"][i]["delta_acc"] == format_delta(recount(reports[i]) - base), "json delta " + std::to_string(i));

  std::string flat = want_grid;
  for (auto& c : flat)
    if (c == '\n') c = ';';
  o.detail = "four arms over " + std::to_string(p.cases.size()) + " cases, deltas vs richtext/no-cot match the recount: " + flat;
  return o;
}

Outcome retrieval_contract() {
  Outcome o;
  auto kb = load_kb(kFixtures / "golden" / "convert");
  o.require(kDefaultTopK == 3, "default k");
  o.require(kb.index.retrieve("cancel my reservation").size() <= 3, "default retrieve returns more than 3");

  testing::Gen g(4);
  const char* words[] = {"cancel", "refund", "reservation", "guest", "host", "charge", "dates", "listing",
                         "checkout", "account", "extra", "safety", "the", "my"};
  int prefix_checks = 0;
  for (int i = 0; i < 300; ++i) {
    std::string q;
    int n = g.between(1, 5);
    for (int w = 0; w < n; ++w) q += std::string(w ? " " : "") + words[g.index(std::size(words))];
    auto all = kb.index.retrieve(q, 100);
    for (std::size_t k = 1; k <= all.size(); ++k) {
      auto top = kb.index.retrieve(q, k);
      bool prefix = top.size() == k;
      for (std::size_t j = 0; prefix && j < k; ++j) prefix = top[j].workflow_id == all[j].workflow_id;
      o.require(prefix, "prefix for '" + q + "' k=" + std::to_string(k));
      ++prefix_checks;
    }
    for (std::size_t j = 1; j < all.size(); ++j)
      o.require(all[j - 1].score > all[j].score ||
                    (all[j - 1].score == all[j].score && all[j - 1].workflow_id < all[j].workflow_id),
                "order for '" + q + "'");
    auto again = kb.index.retrieve(q, 100);
    for (std::size_t j = 0; j < all.size(); ++j) o.require(again[j].workflow_id == all[j].workflow_id, "repeatability");
  }

  // tie-break: identical documents rank by id whatever their input order
  auto doc = [](const std::string& id) {
    auto r = parse_ica("intent: cancel_booking -- Guest cancels a booking\n  then do Action 1\n", id);
    return *r.document;
  };
  std::vector<IcaDocument> fwd{doc("c"), doc("a"), doc("b")}, rev{doc("b"), doc("a"), doc("c")};
  auto r1 = IntentIndex::build(fwd).retrieve("cancel booking", 3);
  auto r2 = IntentIndex::build(rev).retrieve("cancel booking", 3);
  bool ties = r1.size() == 3 && r2.size() == 3;
  for (std::size_t j = 0; ties && j < 3; ++j) ties = r1[j].workflow_id == std::string(1, static_cast<char>('a' + j)) && r2[j].workflow_id == r1[j].workflow_id;
  o.require(ties, "tie-break");

  auto golden = parse_json(util::read_file(kFixtures / "golden" / "retrieval_rankings.json"), "golden");
  int queries = 0;
  for (const auto& q : golden["queries"]) {
    auto got = kb.index.retrieve(q["query"].get<std::string>());
    const auto& want = q["ranking"];
    bool same = got.size() == want.size();
    for (std::size_t j = 0; same && j < got.size(); ++j)
      same = got[j].workflow_id == want[j]["workflow_id"].get<std::string>() &&
             std::abs(got[j].score - want[j]["score"].get<double>()) <= 1e-9;
    o.require(same, "golden ranking for '" + q["query"].get<std::string>() + "'");
    ++queries;
  }
  o.detail = std::to_string(prefix_checks) + " prefix checks, tie-break by id, " + std::to_string(queries) +
             " golden rankings match, default k = " + std::to_string(kDefaultTopK);
  return o;
}

struct CapturingChatServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;
  std::mutex mu;
  std::vector<int> max_tokens;

  CapturingChatServer() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = Json::parse(req.body);
      {
        std::lock_guard lock(mu);
        max_tokens.push_back(body["max_tokens"].get<int>());
      }
      res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"Action: 1"}}]})", "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~CapturingChatServer() {
    server.stop();
    thread.join();
  }
};

Outcome budget_enforcement() {
  Outcome o;
  // a workflow whose single action is long enough to overflow 4096 tokens
  auto make = [](const std::string& id, std::size_t bytes) {
    auto r = parse_ica("intent: refund_request -- Guest asks for a refund\n  then do Action 1\n", id);
    IcaDocument d = *r.document;
    std::string text;
    while (text.size() < bytes) text += "Explain the refund policy step by step. ";
    d.action_map.set(id, 1, text);
    return d;
  };
  UserQuery q{"refund please", "refund_request"};
  std::vector<IcaDocument> big{make("wa", 6000), make("wb", 12000)};
  std::string message;
  bool rejected = false;
  try {
    build_prompt(q, {}, big, {true, KnowledgeFormat::kRichText, kBudget});
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::kBudget;
    message = e.what();
  }
  o.require(rejected, "oversized prompt accepted");
  o.require(message.find("budget is 4096") != std::string::npos && message.find("wa ~") != std::string::npos &&
                message.find("wb ~") != std::string::npos,
            "diagnostics do not list the candidates");
  std::vector<IcaDocument> fits{make("wa", 2000)};
  auto p = build_prompt(q, {}, fits, {true, KnowledgeFormat::kRichText, kBudget});
  o.require(p.estimated_tokens <= kBudget, "estimate above budget");

  // a prompt right at the limit passes, one byte more fails
  std::size_t lo = 0;
  for (std::size_t bytes = 14000; bytes < 17000; bytes += 1) {
    try {
      std::vector<IcaDocument> one{make("wa", 0)};
      one[0].action_map.set("wa", 1, std::string(bytes, 'x'));
      build_prompt(q, {}, one, {true, KnowledgeFormat::kRichText, kBudget});
      lo = bytes;
    } catch (const Error&) {
      break;
    }
  }
  auto sized = [&](std::size_t bytes) {
    std::vector<IcaDocument> one{make("wa", 0)};
    one[0].action_map.set("wa", 1, std::string(bytes, 'x'));
    return one;
  };
  o.require(lo > 14000, "limit search started past the boundary");
  o.require(build_prompt(q, {}, sized(lo), {true, KnowledgeFormat::kRichText, kBudget}).estimated_tokens <= kBudget,
            "boundary estimate");
  bool over = false;
  try {
    build_prompt(q, {}, sized(lo + 1), {true, KnowledgeFormat::kRichText, kBudget});
  } catch (const Error& e) {
    over = e.code() == ErrorCode::kBudget;
  }
  o.require(over, "one byte over the limit accepted");

  CapturingChatServer fake;
  HttpClientConfig hc;
  hc.endpoint = "http://127.0.0.1:" + std::to_string(fake.port) + "/v1/chat/completions";
  HttpLlmClient client(hc);
  client.complete("hi", 2000, std::chrono::seconds(5));
  client.complete("hi", 100, std::chrono::seconds(5));
  auto kb = load_kb(kFixtures / "golden" / "convert");
  StaticContextProvider ctx;
  predict({{"cancel my reservation", std::nullopt}, "", {}}, ctx, kb, client);
  std::vector<int> seen;
  {
    std::lock_guard lock(fake.mu);
    seen = fake.max_tokens;
  }
  o.require(seen == std::vector<int>{kOutputCap, 100, kOutputCap}, "max_tokens sent");
  o.detail = "4096-token budget rejects an oversized prompt (" + message.substr(0, message.find(" (")) +
             "), limit found at " + std::to_string(lo) + " action bytes; HTTP max_tokens sent: " +
             std::to_string(seen.size() > 0 ? seen[0] : -1) + " for 2000 requested, " +
             std::to_string(seen.size() > 1 ? seen[1] : -1) + " for 100, " +
             std::to_string(seen.size() > 2 ? seen[2] : -1) + " from predict";
  return o;
}

}  // namespace

int main() {
  criterion(1, "interpreter-oracle equivalence", interpreter_equivalence);
  criterion(2, "grammar round-trip", grammar_round_trip);
  criterion(3, "synthesis self-consistency", synthesis_self_consistency);
  criterion(4, "ingestion goldens", ingestion_goldens);
  criterion(5, "end-to-end oracle pipeline", end_to_end);
  criterion(6, "table-structure reproduction", table_structure);
  criterion(7, "retrieval contract", retrieval_contract);
  criterion(8, "budget enforcement", budget_enforcement);
  fs::remove_all(scratch());
  std::printf("%d of 8 criteria failed\n", failed);
  return failed;
}
