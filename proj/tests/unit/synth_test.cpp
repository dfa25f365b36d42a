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


#include <doctest.h>

#include <filesystem>
#include <set>

#include "ica/prompt.hpp"
#include "ica/synth.hpp"
#include "support/oracles.hpp"
#include "util.hpp"

using namespace ica;
namespace fs = std::filesystem;

namespace {

const SynthPools& fixture_pools() {
  static const SynthPools pools = load_pools(fs::path(ICA_FIXTURES_DIR) / "pools");
  return pools;
}

PoolCondition pc(ConditionExpr c, std::string d) { return {std::move(c), std::move(d)}; }

SynthPools tiny_pools() {
  SynthPools p;
  p.intents = {{"cancel_reservation", "Cancel", {"cancel my stay"}}, {"refund_request", "Refund", {"refund me"}}};
  p.conditions = {pc(ConditionExpr::compare(ConditionKind::kEquals, "status", std::string("canceled")), "Canceled"),
                  pc(ConditionExpr::compare(ConditionKind::kEquals, "status", std::string("active")), "Active")};
  p.records = {{"cancel my stay", "cancel_reservation", {{"status", std::string("canceled")}}}};
  p.action_templates = {"Do thing {n}"};
  return p;
}

std::vector<DecisionTree> prompt_trees(const SftInstance& s) { return parse_prompt(s.instruction).trees; }

std::vector<SftInstance> generate(std::size_t n, std::uint64_t seed, SynthConfig cfg = {}) {
  std::vector<SftInstance> out;
  generate_dataset(fixture_pools(), n, seed, cfg, [&](const SftInstance& s) { out.push_back(s); });
  return out;
}

}  // namespace

TEST_CASE("pool validation") {
  CHECK_NOTHROW(validate_pools(fixture_pools()));
  CHECK(fixture_pools().intents.size() == 8);
  auto p = tiny_pools();
  p.intents[0].templates.clear();
  CHECK_THROWS_AS(validate_pools(p), Error);
  p = tiny_pools();
  p.records[0].context.clear();
  CHECK_THROWS_AS(validate_pools(p), Error);
  p = tiny_pools();
  p.conditions.push_back(pc(ConditionExpr::boolean_true("nowhere"), "Unused key"));
  CHECK_THROWS_AS(validate_pools(p), Error);
  p = tiny_pools();
  p.records[0].intent = "unknown_intent";
  CHECK_THROWS_AS(validate_pools(p), Error);
}

TEST_CASE("matched branch: single possibility and unsatisfiable pools") {
  SynthPools p = tiny_pools();
  p.conditions.pop_back();
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(s);
    auto mb = synth_matched_branch(p, rng);
    REQUIRE(mb.conditions.size() == 1);
    CHECK(mb.conditions[0].condition == p.conditions[0].condition);
    CHECK(mb.query.intent_label == "cancel_reservation");
    CHECK(mb.action.rfind("Do thing ", 0) == 0);
  }
  p.records[0].context = {{"status", std::string("pending")}};
  Rng rng(1);
  try {
    synth_matched_branch(p, rng);
    FAIL("expected a generation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGeneration);
  }
}

TEST_CASE("matched branch: every node holds and length stays in range") {
  const auto& pools = fixture_pools();
  std::set<std::size_t> lengths;
  for (std::uint64_t s = 0; s < 500; ++s) {
    Rng rng(s);
    auto mb = synth_matched_branch(pools, rng);
    REQUIRE(pools.find_intent(*mb.query.intent_label));
    lengths.insert(mb.conditions.size());
    std::set<std::string> keys;
    for (const auto& c : mb.conditions) {
      CHECK(testing::oracle_condition(c.condition, mb.query, mb.context) == testing::Tri::kYes);
      CHECK(keys.insert(c.condition.key).second);
    }
  }
  CHECK(lengths == std::set<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("divergent: forced mismatch on the mutated condition") {
  SynthPools p = tiny_pools();
  MatchedBranch mb;
  mb.query = {"cancel my stay", "cancel_reservation"};
  mb.context = {{"status", std::string("canceled")}};
  mb.intent_description = "Cancel";
  mb.conditions = {{p.conditions[0].condition, "Canceled"}};
  mb.action = "Do thing 1";
  SynthConfig cfg;
  cfg.max_trees = 1;
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng(s);
    auto forest = synth_divergent_branches(mb, p, rng, 3, cfg);
    REQUIRE(forest.trees.size() == 1);
    REQUIRE(forest.divergent.size() == 3);
    auto trace = evaluate(forest.trees, mb.query, mb.context);
    REQUIRE(trace.matched);
    CHECK(forest.trees[0].node(forest.matched_leaf).id == trace.matched->path.back());
    for (const auto& b : trace.branches) {
      if (b.leaf == forest.matched_leaf) continue;
      CHECK(b.status == BranchStatus::kFailed);
      const auto& failing = forest.trees[0].node(*b.failing_node).condition();
      CHECK(failing == p.conditions[1].condition);
    }
  }
}

TEST_CASE("divergent: root mutations make separate trees whose root fails") {
  const auto& pools = fixture_pools();
  int seen = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(s);
    auto mb = synth_matched_branch(pools, rng);
    auto forest = synth_divergent_branches(mb, pools, rng, 4);
    for (const auto& d : forest.divergent) {
      if (d.type != DivergenceType::kRootMutation) {
        CHECK(d.tree == 0);
        continue;
      }
      ++seen;
      REQUIRE(d.tree > 0);
      const DecisionTree& t = forest.trees[d.tree];
      CHECK(t.node(t.root).condition().intent_label != *mb.query.intent_label);
      CHECK(eval_condition(t.node(t.root).condition(), mb.query, mb.context).outcome == Outcome::kFailed);
    }
    CHECK(forest.trees.size() <= 3);
    auto oracle = testing::brute_force_evaluate(forest.trees, mb.query, mb.context);
    int matching = 0;
    for (const auto& b : oracle.branches) matching += b.status == "matched" || b.status == "shadowed";
    CHECK(matching == 1);
  }
  CHECK(seen > 0);
}

TEST_CASE("cot: one line per branch plus the action line") {
  auto r = parse_ica(
      "intent: cancel_reservation -- Guest cancels\n"
      "  if status == canceled -- Booking already canceled\n"
      "    then do Action 1\n"
      "  if nights > 3 -- Long stay\n"
      "    then do Action 2\n",
      "wf1");
  REQUIRE(r.ok());
  std::vector<DecisionTree> trees{r.document->tree};
  UserQuery q{"cancel", "cancel_reservation"};
  ContextRecord ctx{{"status", std::string("active")}, {"nights", 5.0}};
  auto trace = evaluate(trees, q, ctx);
  std::string cot = synth_cot(trace, trees, q, ctx);
  CHECK(cot ==
        "1. Action 1 (workflow wf1): not applicable. Booking already canceled: no, because `status` is `active`.\n"
        "2. Action 2 (workflow wf1): applies. Guest cancels; Long stay.\n"
        "Action: 2");
  CHECK(parse_response(cot) == 2);

  ContextRecord none{{"status", std::string("active")}};
  CHECK_THROWS_AS(synth_cot(evaluate(trees, q, none), trees, q, none), Error);
  auto missing = synth_cot(evaluate(trees, q, {{"status", std::string("canceled")}}), trees, q, {});
  CHECK(missing.find("2. Action 2 (workflow wf1): not applicable. Long stay: no, because `nights` is missing.") !=
        std::string::npos);

  // a second branch below the same failing node refers back to the first
  auto r2 = parse_ica(
      "intent: cancel_reservation -- Guest cancels\n"
      "  if status == canceled -- Booking already canceled\n"
      "    if nights > 3\n"
      "      then do Action 1\n"
      "    then do Action 2\n"
      "  then do Action 3\n",
      "wf2");
  REQUIRE(r2.ok());
  std::vector<DecisionTree> t2{r2.document->tree};
  auto cot2 = synth_cot(evaluate(t2, q, ctx), t2, q, ctx);
  CHECK(cot2 ==
        "1. Action 1 (workflow wf2): not applicable. Booking already canceled: no, because `status` is `active`.\n"
        "2. Action 2 (workflow wf2): not applicable, same as line 1.\n"
        "3. Action 3 (workflow wf2): applies. Guest cancels.\n"
        "Action: 3");
}

TEST_CASE("golden: seed 0") {
  const auto& pools = fixture_pools();
  auto golden = parse_json(util::read_file(fs::path(ICA_FIXTURES_DIR) / "synth_seed0.json"), "golden");
  Rng rng(mix_seed(mix_seed(0, 0), 0));
  auto mb = synth_matched_branch(pools, rng);
  const auto& gb = golden["matched_branch"];
  CHECK(mb.query.text == gb["query"].get<std::string>());
  CHECK(*mb.query.intent_label == gb["intent"].get<std::string>());
  CHECK(mb.context == context_from_json(gb["context"]));
  CHECK(mb.action == gb["action"].get<std::string>());
  REQUIRE(mb.conditions.size() == gb["conditions"].size());
  for (std::size_t i = 0; i < mb.conditions.size(); ++i) {
    auto c = condition_from_json(gb["conditions"][i]["condition"]);
    CHECK(mb.conditions[i].condition == c);
    CHECK(testing::oracle_condition(c, mb.query, mb.context) == testing::Tri::kYes);
  }

  auto one = generate(1, 0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].label == golden["cot"].get<std::string>());
  CHECK(one[0].meta["divergent"] == golden["divergent"]);
  CHECK(sft_to_jsonl(one[0]) + "\n" == util::read_file(fs::path(ICA_FIXTURES_DIR) / "synth_seed0.jsonl"));

  // none of the divergent branches matches
  auto trees = prompt_trees(one[0]);
  auto oracle = testing::brute_force_evaluate(trees, mb.query, mb.context);
  int matched = 0;
  for (const auto& b : oracle.branches) matched += b.status == "matched" || b.status == "shadowed";
  CHECK(matched == 1);
}

TEST_CASE("n = 0 yields nothing") {
  auto stats = generate_dataset(fixture_pools(), 0, 5, {}, [](const SftInstance&) { FAIL("unexpected instance"); });
  CHECK(stats.emitted == 0);
  CHECK(stats.skip_rate() == 0);
}

TEST_CASE("property: self-consistency, divergence, cot coverage and budget") {
  auto data = generate(2000, 3);
  REQUIRE(data.size() == 2000);
  std::set<std::string> intents;
  std::set<int> labels;
  std::set<std::size_t> tree_counts;
  for (const auto& s : data) {
    auto p = parse_prompt(s.instruction);
    CHECK(estimate_tokens(s.instruction) <= kDefaultPromptTokenBudget);
    auto oracle = testing::brute_force_evaluate(p.trees, p.query, p.context);
    REQUIRE(oracle.matched);
    auto label = parse_response(s.label);
    REQUIRE(label);
    CHECK(std::get<1>(*oracle.matched) == *label);
    CHECK(*label == s.meta["matched"]["global_action_id"].get<int>());
    std::size_t matching = 0, lines = 0;
    for (const auto& b : oracle.branches) matching += b.status == "matched" || b.status == "shadowed";
    CHECK(matching == 1);
    for (const auto& line : util::split_lines(s.label)) lines += !line.empty();
    CHECK(lines == oracle.branches.size() + 1);
    for (int id = 1; id <= p.action_count; ++id)
      CHECK(s.label.find(". Action " + std::to_string(id) + " (workflow ") != std::string::npos);
    intents.insert(s.meta["intent"].get<std::string>());
    labels.insert(*label);
    tree_counts.insert(p.trees.size());
  }
  CHECK(intents.size() == fixture_pools().intents.size());
  CHECK(labels.size() > 1);
  CHECK(tree_counts == std::set<std::size_t>{1, 2, 3});
}

TEST_CASE("property: min_mismatch_nodes is honored") {
  SynthConfig cfg;
  cfg.min_mismatch_nodes = 2;
  auto data = generate(300, 9, cfg);
  for (const auto& s : data) {
    for (const auto& d : s.meta["divergent"]) CHECK(d["mismatch_nodes"].get<int>() >= 2);
    auto p = parse_prompt(s.instruction);
    auto oracle = testing::brute_force_evaluate(p.trees, p.query, p.context);
    REQUIRE(oracle.matched);
    CHECK(std::get<1>(*oracle.matched) == parse_response(s.label));
  }
}

TEST_CASE("determinism: thread count does not change the bytes") {
  SynthConfig one, four;
  one.threads = 1;
  four.threads = 4;
  auto a = generate(600, 42, one);
  auto b = generate(600, 42, four);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(sft_to_jsonl(a[i]) == sft_to_jsonl(b[i]));
  auto c = generate(600, 43, one);
  CHECK(sft_to_jsonl(a[0]) != sft_to_jsonl(c[0]));
}

TEST_CASE("without cot the label is the action line") {
  SynthConfig cfg;
  cfg.with_cot = false;
  auto data = generate(50, 1, cfg);
  for (const auto& s : data) {
    CHECK(s.label.rfind("Action: ", 0) == 0);
    CHECK(s.label.find('\n') == std::string::npos);
    CHECK_FALSE(parse_prompt(s.instruction).with_cot);
  }
}

TEST_CASE("skip rate above the threshold aborts") {
  SynthConfig cfg;
  cfg.token_budget = 300;  // nearly every prompt is too long
  cfg.max_retries = 3;
  CHECK_THROWS_AS(generate(5, 0, cfg), Error);
}
