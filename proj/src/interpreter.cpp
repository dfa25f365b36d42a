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

#include "ica/interpreter.hpp"

#include <algorithm>

namespace ica {

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kMatched: return "matched";
    case Outcome::kFailed: return "failed";
    case Outcome::kUnknown: return "unknown";
  }
  return "failed";
}

const char* to_string(BranchStatus status) {
  switch (status) {
    case BranchStatus::kMatched: return "matched";
    case BranchStatus::kShadowed: return "shadowed";
    case BranchStatus::kFailed: return "failed";
    case BranchStatus::kUnknown: return "unknown";
  }
  return "failed";
}

namespace {

ConditionResult matched(const std::string& key) { return {Outcome::kMatched, key, std::nullopt, {}}; }

ConditionResult failed(const std::string& key, std::optional<Scalar> observed, std::string reason) {
  return {Outcome::kFailed, key, std::move(observed), std::move(reason)};
}

ConditionResult type_mismatch(const std::string& key, const Scalar& observed, ScalarType wanted) {
  return failed(key, observed,
                std::string("expected a ") + to_string(wanted) + " but found a " +
                    to_string(type_of(observed)));
}

}  // namespace

ConditionResult eval_condition(const ConditionExpr& cond, const UserQuery& query,
                               const ContextRecord& ctx) {
  using K = ConditionKind;
  if (cond.kind == K::kIntentLabel) {
    if (!query.intent_label) return {Outcome::kUnknown, "intent", std::nullopt, "intent is not known"};
    if (*query.intent_label == cond.intent_label) return matched("intent");
    return failed("intent", Scalar{*query.intent_label}, "intent differs");
  }
  if (cond.kind == K::kElse) return failed({}, std::nullopt, "else depends on its siblings");

  auto it = ctx.find(cond.key);
  if (cond.kind == K::kExists) {
    if (it != ctx.end()) return matched(cond.key);
    return failed(cond.key, std::nullopt, "key is missing");
  }
  if (it == ctx.end()) return {Outcome::kUnknown, cond.key, std::nullopt, "key is missing"};
  const Scalar& v = it->second;

  switch (cond.kind) {
    case K::kBooleanTrue:
      if (type_of(v) != ScalarType::kBoolean) return type_mismatch(cond.key, v, ScalarType::kBoolean);
      return std::get<bool>(v) ? matched(cond.key) : failed(cond.key, v, "value is false");
    case K::kEquals:
    case K::kNotEquals: {
      const Scalar& want = cond.values.at(0);
      if (type_of(v) != type_of(want)) return type_mismatch(cond.key, v, type_of(want));
      bool eq = v == want;
      if (cond.kind == K::kEquals)
        return eq ? matched(cond.key) : failed(cond.key, v, "value differs");
      return eq ? failed(cond.key, v, "value is excluded") : matched(cond.key);
    }
    case K::kLessThan:
    case K::kGreaterThan: {
      if (type_of(v) != ScalarType::kNumber) return type_mismatch(cond.key, v, ScalarType::kNumber);
      double x = std::get<double>(v);
      double bound = std::get<double>(cond.values.at(0));
      bool ok = cond.kind == K::kLessThan ? x < bound : x > bound;
      return ok ? matched(cond.key) : failed(cond.key, v, "value out of range");
    }
    case K::kInSet: {
      if (std::find(cond.values.begin(), cond.values.end(), v) != cond.values.end())
        return matched(cond.key);
      bool any_same_type = std::any_of(cond.values.begin(), cond.values.end(),
                                       [&](const Scalar& s) { return type_of(s) == type_of(v); });
      if (!any_same_type) return type_mismatch(cond.key, v, type_of(cond.values.front()));
      return failed(cond.key, v, "value not in set");
    }
    default:
      return failed(cond.key, v, "unsupported condition");
  }
}

namespace {

struct Failure {
  NodeId node;
  ConditionResult result;
};

class TreeWalker {
 public:
  TreeWalker(const DecisionTree& tree, std::size_t index, const UserQuery& query,
             const ContextRecord& ctx, EvalTrace& trace)
      : tree_(tree), index_(index), query_(query), ctx_(ctx), trace_(trace) {}

  void run() {
    std::optional<Failure> failure;
    const TreeNode& root = tree_.node(tree_.root);
    if (!root.is_leaf()) {
      ConditionResult r = eval_condition(root.condition(), query_, ctx_);
      if (!r.matched()) failure = Failure{tree_.root, std::move(r)};
    }
    path_.push_back(tree_.root);
    visit(tree_.root, failure);
  }

 private:
  void visit(NodeId id, const std::optional<Failure>& failure) {
    const TreeNode& n = tree_.node(id);
    if (n.is_leaf()) {
      record_leaf(n, failure);
      return;
    }
    // Outcomes of the current if/else chain, consulted by `else`.
    bool chain_matched = false;
    const ConditionResult* chain_unknown = nullptr;
    std::vector<ConditionResult> chain;
    chain.reserve(n.children.size());
    for (NodeId c : n.children) {
      const TreeNode& child = tree_.node(c);
      path_.push_back(c);
      if (child.is_leaf() || failure) {
        visit(c, failure);
      } else if (child.condition().kind == ConditionKind::kElse) {
        std::optional<Failure> f;
        if (chain_matched)
          f = Failure{c, {Outcome::kFailed, {}, std::nullopt, "an earlier alternative applies"}};
        else if (chain_unknown)
          f = Failure{c, {Outcome::kUnknown, chain_unknown->key, std::nullopt,
                          "an earlier alternative could not be checked"}};
        visit(c, f);
        chain_matched = false;
        chain_unknown = nullptr;
        chain.clear();
      } else {
        chain.push_back(eval_condition(child.condition(), query_, ctx_));
        const ConditionResult& r = chain.back();
        if (r.matched()) chain_matched = true;
        if (r.outcome == Outcome::kUnknown && !chain_unknown) chain_unknown = &r;
        std::optional<Failure> f;
        if (!r.matched()) f = Failure{c, r};
        visit(c, f);
      }
      path_.pop_back();
    }
  }

  void record_leaf(const TreeNode& leaf, const std::optional<Failure>& failure) {
    BranchOutcome b;
    b.tree_index = index_;
    b.workflow_id = tree_.workflow_id;
    b.leaf = leaf.id;
    b.action_id = leaf.action_id();
    if (failure) {
      b.failing_node = failure->node;
      b.failure = failure->result;
      b.status = failure->result.outcome == Outcome::kUnknown ? BranchStatus::kUnknown
                                                              : BranchStatus::kFailed;
    } else if (trace_.matched) {
      b.status = BranchStatus::kShadowed;
      b.failure = matched({});
    } else {
      b.status = BranchStatus::kMatched;
      b.failure = matched({});
      trace_.matched = MatchedAction{index_, tree_.workflow_id, leaf.action_id(), path_};
    }
    trace_.branches.push_back(std::move(b));
  }

  const DecisionTree& tree_;
  std::size_t index_;
  const UserQuery& query_;
  const ContextRecord& ctx_;
  EvalTrace& trace_;
  std::vector<NodeId> path_;
};

}  // namespace

EvalTrace evaluate(std::span<const DecisionTree> trees, const UserQuery& query,
                   const ContextRecord& ctx) {
  EvalTrace trace;
  for (std::size_t i = 0; i < trees.size(); ++i) TreeWalker(trees[i], i, query, ctx, trace).run();
  return trace;
}

}  // namespace ica
