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

// Domain model for Intent-Context-Action workflows: typed scalars, the closed
// predicate language, decision trees and the per-workflow action registry.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ica/error.hpp"

namespace ica {

/// Context values are text, number or boolean. Text compares case-sensitively
/// and exactly; numbers compare numerically.
using Scalar = std::variant<std::string, double, bool>;

enum class ScalarType { kText, kNumber, kBoolean };

ScalarType type_of(const Scalar& value);
const char* to_string(ScalarType type);

/// Human-readable rendering (numbers in shortest round-trip form).
std::string display(const Scalar& value);

enum class ConditionKind {
  kIntentLabel,
  kEquals,
  kNotEquals,
  kLessThan,
  kGreaterThan,
  kInSet,
  kExists,
  kBooleanTrue,
  // First-match fallback: holds iff every earlier condition sibling of the
  // same if/else chain fails.
  kElse,
};

const char* to_string(ConditionKind kind);
std::optional<ConditionKind> condition_kind_from_string(const std::string& name);

struct ConditionExpr {
  ConditionKind kind = ConditionKind::kExists;
  std::string key;
  std::vector<Scalar> values;  // one scalar for comparisons, >=1 for in-set
  std::string intent_label;

  static ConditionExpr intent(std::string label);
  static ConditionExpr compare(ConditionKind kind, std::string key, Scalar value);
  static ConditionExpr in_set(std::string key, std::vector<Scalar> values);
  static ConditionExpr exists(std::string key);
  static ConditionExpr boolean_true(std::string key);
  static ConditionExpr otherwise();

  friend bool operator==(const ConditionExpr&, const ConditionExpr&) = default;
};

/// Returns an empty string when the expression satisfies its invariants,
/// otherwise a description of the first broken one.
std::string check_condition(const ConditionExpr& cond);

struct ActionRef {
  int action_id = 0;
  friend bool operator==(const ActionRef&, const ActionRef&) = default;
};

using NodeId = std::uint32_t;

struct TreeNode {
  NodeId id = 0;
  std::variant<ConditionExpr, ActionRef> payload;
  std::vector<NodeId> children;
  std::string description;

  bool is_leaf() const { return std::holds_alternative<ActionRef>(payload); }
  const ConditionExpr& condition() const { return std::get<ConditionExpr>(payload); }
  int action_id() const { return std::get<ActionRef>(payload).action_id; }
};

struct DecisionTree {
  std::string workflow_id;
  std::map<NodeId, TreeNode> nodes;
  NodeId root = 0;

  const TreeNode& node(NodeId id) const;
  TreeNode& node(NodeId id);

  /// Adds a node under `parent` (or as root when parent is empty) and returns
  /// its id. Ids are allocated densely from the current node count.
  NodeId add(std::optional<NodeId> parent,
             std::variant<ConditionExpr, ActionRef> payload,
             std::string description = {});

  /// Node ids in depth-first pre-order, children in stored order. Requires a
  /// cycle-free tree.
  std::vector<NodeId> preorder() const;
  std::vector<NodeId> leaves() const;
  std::optional<NodeId> parent_of(NodeId id) const;
  std::vector<NodeId> path_to(NodeId id) const;
};

/// Order- and id-insensitive comparison: same workflow id, and recursively the
/// same payloads, descriptions and child sequences.
bool structurally_equal(const DecisionTree& a, const DecisionTree& b);

/// (workflow_id, action_id) -> full action content.
class ActionMap {
 public:
  using Key = std::pair<std::string, int>;

  void set(const std::string& workflow_id, int action_id, std::string content);
  bool contains(const std::string& workflow_id, int action_id) const;
  const std::map<Key, std::string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Ids registered for one workflow in ascending order.
  std::vector<int> ids_for(const std::string& workflow_id) const;
  /// Copies every entry of `workflow_id` into a new map.
  ActionMap slice(const std::string& workflow_id) const;
  void merge(const ActionMap& other);

  friend bool operator==(const ActionMap&, const ActionMap&) = default;

 private:
  std::map<Key, std::string> entries_;
};

/// Looks up the content of an action; throws ActionNotFound otherwise.
const std::string& resolve_action(const ActionMap& map, const std::string& workflow_id,
                                  int action_id);

using ContextRecord = std::map<std::string, Scalar>;

struct UserQuery {
  std::string text;
  std::optional<std::string> intent_label;
};

struct Violation {
  std::string code;  // stable machine-readable tag, e.g. "duplicate-action-id"
  std::optional<NodeId> node;
  std::string message;
};

struct ValidationOptions {
  /// Require leaf ids of one workflow to be exactly 1..K.
  bool require_contiguous_ids = true;
  /// When set, every ActionRef must resolve in this map.
  const ActionMap* action_map = nullptr;
};

/// Structural check of a tree. Violations are data; an empty result means ok.
std::vector<Violation> validate_tree(const DecisionTree& tree,
                                     const ValidationOptions& options = {});

/// Replaces the raw text carried by each leaf with ActionRefs numbered 1..K in
/// pre-order and records the texts in a fresh action map. `leaf_texts` is keyed
/// by leaf node id; leaf payload ids are ignored. Identical texts at different
/// leaves receive distinct ids.
std::pair<DecisionTree, ActionMap> assign_action_ids(
    const DecisionTree& tree, const std::map<NodeId, std::string>& leaf_texts);

}  // namespace ica
