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

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ica/core.hpp"

namespace ica {

enum class Outcome { kMatched, kFailed, kUnknown };

const char* to_string(Outcome outcome);

struct ConditionResult {
  Outcome outcome = Outcome::kFailed;
  std::string key;                // context key involved ("intent" for the root)
  std::optional<Scalar> observed;  // value that made the condition fail
  std::string reason;             // empty when matched

  bool matched() const { return outcome == Outcome::kMatched; }
};

/// Total three-valued evaluation of one condition. A missing key yields
/// kUnknown for every kind except `exists`, which simply fails.
ConditionResult eval_condition(const ConditionExpr& cond, const UserQuery& query,
                               const ContextRecord& ctx);

enum class BranchStatus {
  kMatched,   // the selected branch
  kShadowed,  // fully satisfied but after the selected branch
  kFailed,
  kUnknown,   // stopped at a condition whose key is missing
};

const char* to_string(BranchStatus status);

/// One root-to-leaf branch, identified by its leaf.
struct BranchOutcome {
  std::size_t tree_index = 0;
  std::string workflow_id;
  NodeId leaf = 0;
  int action_id = 0;
  BranchStatus status = BranchStatus::kFailed;
  std::optional<NodeId> failing_node;  // first non-matching node on the branch
  ConditionResult failure;             // its evaluation (meaningless when matched)
};

struct MatchedAction {
  std::size_t tree_index = 0;
  std::string workflow_id;
  int action_id = 0;
  std::vector<NodeId> path;  // root .. leaf
};

struct EvalTrace {
  std::optional<MatchedAction> matched;
  std::vector<BranchOutcome> branches;  // every branch, document order
};

/// First-match evaluation over trees in the given order: depth-first,
/// children in stored order, `else` holds iff every earlier condition of its
/// if/else chain failed. Every branch of every tree is reported.
EvalTrace evaluate(std::span<const DecisionTree> trees, const UserQuery& query,
                   const ContextRecord& ctx);

}  // namespace ica
