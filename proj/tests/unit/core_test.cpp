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

#include "ica/core.hpp"
#include "ica/json_io.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace ica;

namespace {

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.code == code; });
}

DecisionTree minimal_tree() {
  DecisionTree t;
  t.workflow_id = "w1";
  NodeId root = t.add(std::nullopt, ConditionExpr::intent("cancel_reservation"), "Guest cancels");
  t.add(root, ActionRef{1});
  return t;
}

}  // namespace

TEST_CASE("validate_tree: root that is an action leaf is rejected") {
  DecisionTree t;
  t.workflow_id = "w1";
  t.add(std::nullopt, ActionRef{1});
  auto vs = validate_tree(t);
  REQUIRE(has_code(vs, "root-not-intent"));
  auto it = std::find_if(vs.begin(), vs.end(), [](auto& v) { return v.code == "root-not-intent"; });
  CHECK(it->message == "root must be intent condition");
}

TEST_CASE("validate_tree: minimal intent -> action tree is ok") {
  CHECK(validate_tree(minimal_tree()).empty());
}

TEST_CASE("validate_tree: duplicate action id") {
  DecisionTree t = minimal_tree();
  t.add(t.root, ActionRef{1});
  ActionMap m;
  m.set("w1", 1, "refund guest");
  auto vs = validate_tree(t, {.require_contiguous_ids = true, .action_map = &m});
  CHECK(has_code(vs, "duplicate-action-id"));
}

TEST_CASE("validate_tree: structural violations") {
  SUBCASE("orphan node") {
    DecisionTree t = minimal_tree();
    TreeNode orphan;
    orphan.id = 7;
    orphan.payload = ActionRef{2};
    t.nodes[7] = orphan;
    CHECK(has_code(validate_tree(t), "orphan-node"));
  }
  SUBCASE("cycle through the root") {
    DecisionTree t = minimal_tree();
    NodeId c = t.add(t.root, ConditionExpr::exists("status"));
    t.node(c).children.push_back(t.root);
    CHECK(has_code(validate_tree(t), "cycle"));
  }
  SUBCASE("unresolvable ActionRef") {
    ActionMap empty;
    auto vs = validate_tree(minimal_tree(), {.require_contiguous_ids = true, .action_map = &empty});
    CHECK(has_code(vs, "unresolved-action"));
  }
  SUBCASE("gap in action ids") {
    DecisionTree t = minimal_tree();
    t.add(t.root, ActionRef{3});
    CHECK(has_code(validate_tree(t), "non-contiguous-action-ids"));
    CHECK(validate_tree(t, {.require_contiguous_ids = false, .action_map = nullptr}).empty());
  }
  SUBCASE("condition without children") {
    DecisionTree t = minimal_tree();
    t.add(t.root, ConditionExpr::exists("status"));
    CHECK(has_code(validate_tree(t), "childless-condition"));
  }
  SUBCASE("dangling else") {
    DecisionTree t;
    t.workflow_id = "w";
    NodeId root = t.add(std::nullopt, ConditionExpr::intent("x"));
    NodeId e = t.add(root, ConditionExpr::otherwise());
    t.add(e, ActionRef{1});
    CHECK(has_code(validate_tree(t), "dangling-else"));
  }
  SUBCASE("invalid condition") {
    DecisionTree t = minimal_tree();
    NodeId c = t.add(t.root, ConditionExpr::compare(ConditionKind::kLessThan, "nights", std::string("x")));
    t.add(c, ActionRef{2});
    CHECK(has_code(validate_tree(t), "invalid-condition"));
  }
}

TEST_CASE("validate_tree agrees with an independent structural checklist") {
  testing::Gen g(11);
  int valid = 0, invalid = 0;
  for (int i = 0; i < 2000; ++i) {
    DecisionTree t = testing::random_tree(g, "w" + std::to_string(i), {.max_depth = 4});
    // Mutate about two thirds of the trees.
    switch (g.index(9)) {
      case 0: t.nodes.begin()->second.children.push_back(t.root); break;
      case 1: t.node(t.leaves().front()).payload = ActionRef{99}; break;
      case 2: {
        auto leaves = t.leaves();
        t.node(leaves.back()).payload = ActionRef{1};
        break;
      }
      case 3: t.node(t.root).payload = ActionRef{1}; break;
      case 4: {
        TreeNode extra;
        extra.id = 1000;
        extra.payload = ActionRef{static_cast<int>(t.leaves().size()) + 1};
        t.nodes[1000] = extra;
        break;
      }
      case 5: {
        NodeId leaf = t.leaves().front();
        t.node(leaf).description = "not allowed";
        break;
      }
      default: break;
    }
    bool expected = testing::oracle_tree_is_valid(t);
    bool actual = validate_tree(t).empty();
    CHECK_MESSAGE(expected == actual, "tree ", i);
    (expected ? valid : invalid)++;
  }
  CHECK(valid > 500);
  CHECK(invalid > 500);
}

TEST_CASE("assign_action_ids numbers leaves in pre-order from 1") {
  DecisionTree t;
  t.workflow_id = "w1";
  NodeId root = t.add(std::nullopt, ConditionExpr::intent("refund_request"));
  NodeId c = t.add(root, ConditionExpr::exists("status"));
  NodeId a = t.add(c, ActionRef{});
  NodeId b = t.add(c, ActionRef{});
  NodeId d = t.add(root, ActionRef{});
  auto [out, map] = assign_action_ids(t, {{a, "A"}, {b, "B"}, {d, "C"}});
  CHECK(out.node(a).action_id() == 1);
  CHECK(out.node(b).action_id() == 2);
  CHECK(out.node(d).action_id() == 3);
  CHECK(resolve_action(map, "w1", 1) == "A");
  CHECK(resolve_action(map, "w1", 2) == "B");
  CHECK(resolve_action(map, "w1", 3) == "C");
  CHECK(validate_tree(out, {.require_contiguous_ids = true, .action_map = &map}).empty());
}

TEST_CASE("assign_action_ids: single leaf gets id 1") {
  DecisionTree t = minimal_tree();
  NodeId leaf = t.leaves().front();
  auto [out, map] = assign_action_ids(t, {{leaf, "only"}});
  CHECK(out.node(leaf).action_id() == 1);
  CHECK(map.size() == 1);
}

TEST_CASE("assign_action_ids: identical texts keep distinct positional ids") {
  DecisionTree t = minimal_tree();
  NodeId second = t.add(t.root, ActionRef{});
  NodeId first = t.leaves().front();
  auto [out, map] = assign_action_ids(t, {{first, "escalate"}, {second, "escalate"}});
  // Traversal-order oracle: pre-order position + 1.
  auto order = out.leaves();
  REQUIRE(order.size() == 2);
  for (std::size_t i = 0; i < order.size(); ++i) {
    CHECK(out.node(order[i]).action_id() == static_cast<int>(i) + 1);
    CHECK(resolve_action(map, "w1", static_cast<int>(i) + 1) == "escalate");
  }
}

TEST_CASE("assign_action_ids rejects a structurally broken tree") {
  DecisionTree t;
  t.workflow_id = "w1";
  t.add(std::nullopt, ActionRef{});
  CHECK_THROWS_AS(assign_action_ids(t, {{0, "x"}}), Error);
}

TEST_CASE("resolve_action") {
  ActionMap m;
  m.set("w1", 1, "refund guest");
  CHECK(resolve_action(m, "w1", 1) == "refund guest");
  try {
    resolve_action(m, "w1", 2);
    FAIL("expected ActionNotFound");
  } catch (const ActionNotFound& e) {
    CHECK(e.workflow_id() == "w1");
    CHECK(e.action_id() == 2);
    CHECK(e.code() == ErrorCode::kNotFound);
  }
}

TEST_CASE("property: id substitution is lossless and deterministic") {
  testing::Gen g(5);
  for (int i = 0; i < 300; ++i) {
    DecisionTree t = testing::random_tree(g, "wf" + std::to_string(i));
    std::map<NodeId, std::string> texts;
    for (NodeId leaf : t.leaves()) texts[leaf] = "text-" + std::to_string(g.index(4));
    auto [a, map_a] = assign_action_ids(t, texts);
    auto [b, map_b] = assign_action_ids(t, texts);
    for (NodeId leaf : a.leaves())
      CHECK(resolve_action(map_a, a.workflow_id, a.node(leaf).action_id()) == texts[leaf]);
    CHECK(dump_canonical(action_map_to_json(map_a)) == dump_canonical(action_map_to_json(map_b)));
    CHECK(dump_canonical(tree_to_json(a)) == dump_canonical(tree_to_json(b)));
  }
}

TEST_CASE("JSON round trip of trees, maps and contexts") {
  testing::Gen g(3);
  for (int i = 0; i < 100; ++i) {
    DecisionTree t = testing::random_tree(g, "w", {.tricky_text = true});
    ActionMap m = testing::random_action_map(g, t, true);
    ContextRecord ctx = testing::random_context(g);
    CHECK(structurally_equal(tree_from_json(tree_to_json(t)), t));
    CHECK(action_map_from_json(action_map_to_json(m)) == m);
    CHECK(context_from_json(context_to_json(ctx)) == ctx);
  }
}
