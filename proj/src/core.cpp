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

#include "ica/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <functional>
#include <set>

#include "util.hpp"

namespace ica {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kGeneration: return "generation_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kTransport: return "transport_error";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kBudget: return "budget_exceeded";
    case ErrorCode::kInternal: return "internal_error";
  }
  return "internal_error";
}

ActionNotFound::ActionNotFound(std::string workflow_id, int action_id)
    : Error(ErrorCode::kNotFound, "action " + std::to_string(action_id) +
                                      " not found in workflow '" + workflow_id + "'"),
      workflow_id_(std::move(workflow_id)),
      action_id_(action_id) {}

ScalarType type_of(const Scalar& value) {
  return static_cast<ScalarType>(value.index());
}

const char* to_string(ScalarType type) {
  switch (type) {
    case ScalarType::kText: return "text";
    case ScalarType::kNumber: return "number";
    case ScalarType::kBoolean: return "boolean";
  }
  return "text";
}

std::string display(const Scalar& value) {
  switch (type_of(value)) {
    case ScalarType::kText: return std::get<std::string>(value);
    case ScalarType::kNumber: return util::format_number(std::get<double>(value));
    case ScalarType::kBoolean: return std::get<bool>(value) ? "true" : "false";
  }
  return {};
}

namespace {

constexpr std::pair<ConditionKind, const char*> kKindNames[] = {
    {ConditionKind::kIntentLabel, "intent-label"},
    {ConditionKind::kEquals, "equals"},
    {ConditionKind::kNotEquals, "not-equals"},
    {ConditionKind::kLessThan, "less-than"},
    {ConditionKind::kGreaterThan, "greater-than"},
    {ConditionKind::kInSet, "in-set"},
    {ConditionKind::kExists, "exists"},
    {ConditionKind::kBooleanTrue, "boolean-true"},
    {ConditionKind::kElse, "else"},
};

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  auto ident_start = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!ident_start(key[0])) return false;
  return std::all_of(key.begin(), key.end(), [&](char c) {
    return ident_start(c) || (c >= '0' && c <= '9') || c == '.';
  });
}

}  // namespace

const char* to_string(ConditionKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "exists";
}

std::optional<ConditionKind> condition_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (name == n) return k;
  return std::nullopt;
}

ConditionExpr ConditionExpr::intent(std::string label) {
  ConditionExpr c;
  c.kind = ConditionKind::kIntentLabel;
  c.intent_label = std::move(label);
  return c;
}

ConditionExpr ConditionExpr::compare(ConditionKind kind, std::string key, Scalar value) {
  ConditionExpr c;
  c.kind = kind;
  c.key = std::move(key);
  c.values.push_back(std::move(value));
  return c;
}

ConditionExpr ConditionExpr::in_set(std::string key, std::vector<Scalar> values) {
  ConditionExpr c;
  c.kind = ConditionKind::kInSet;
  c.key = std::move(key);
  c.values = std::move(values);
  return c;
}

ConditionExpr ConditionExpr::exists(std::string key) {
  ConditionExpr c;
  c.kind = ConditionKind::kExists;
  c.key = std::move(key);
  return c;
}

ConditionExpr ConditionExpr::boolean_true(std::string key) {
  ConditionExpr c;
  c.kind = ConditionKind::kBooleanTrue;
  c.key = std::move(key);
  return c;
}

ConditionExpr ConditionExpr::otherwise() {
  ConditionExpr c;
  c.kind = ConditionKind::kElse;
  return c;
}

std::string check_condition(const ConditionExpr& cond) {
  for (const auto& v : cond.values) {
    if (type_of(v) == ScalarType::kNumber && !std::isfinite(std::get<double>(v)))
      return "numbers must be finite";
  }
  switch (cond.kind) {
    case ConditionKind::kIntentLabel:
      if (cond.intent_label.empty()) return "intent condition needs a label";
      if (std::any_of(cond.intent_label.begin(), cond.intent_label.end(),
                      [](unsigned char c) { return std::isspace(c); }))
        return "intent label must not contain whitespace";
      if (!cond.key.empty() || !cond.values.empty())
        return "intent condition carries no key or value";
      return {};
    case ConditionKind::kElse:
      if (!cond.key.empty() || !cond.values.empty() || !cond.intent_label.empty())
        return "else carries no key, value or label";
      return {};
    default:
      break;
  }
  if (!valid_key(cond.key)) return "invalid context key '" + cond.key + "'";
  if (!cond.intent_label.empty()) return "only intent conditions carry a label";
  switch (cond.kind) {
    case ConditionKind::kExists:
    case ConditionKind::kBooleanTrue:
      if (!cond.values.empty()) return std::string(to_string(cond.kind)) + " takes no value";
      return {};
    case ConditionKind::kEquals:
    case ConditionKind::kNotEquals:
      if (cond.values.size() != 1) return "comparison takes exactly one value";
      return {};
    case ConditionKind::kLessThan:
    case ConditionKind::kGreaterThan:
      if (cond.values.size() != 1) return "comparison takes exactly one value";
      if (type_of(cond.values[0]) != ScalarType::kNumber)
        return "ordering comparison needs a number";
      return {};
    case ConditionKind::kInSet:
      if (cond.values.empty()) return "in-set needs a non-empty value set";
      return {};
    default:
      return {};
  }
}

const TreeNode& DecisionTree::node(NodeId id) const {
  auto it = nodes.find(id);
  if (it == nodes.end())
    throw Error(ErrorCode::kInvalidArgument, "unknown node id " + std::to_string(id));
  return it->second;
}

TreeNode& DecisionTree::node(NodeId id) {
  return const_cast<TreeNode&>(std::as_const(*this).node(id));
}

NodeId DecisionTree::add(std::optional<NodeId> parent,
                         std::variant<ConditionExpr, ActionRef> payload,
                         std::string description) {
  NodeId id = nodes.empty() ? 0 : nodes.rbegin()->first + 1;
  TreeNode n;
  n.id = id;
  n.payload = std::move(payload);
  n.description = std::move(description);
  nodes.emplace(id, std::move(n));
  if (parent)
    node(*parent).children.push_back(id);
  else
    root = id;
  return id;
}

std::vector<NodeId> DecisionTree::preorder() const {
  std::vector<NodeId> out;
  if (!nodes.count(root)) return out;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    out.push_back(id);
    const auto& children = node(id).children;
    for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<NodeId> DecisionTree::leaves() const {
  std::vector<NodeId> out;
  for (NodeId id : preorder())
    if (node(id).is_leaf()) out.push_back(id);
  return out;
}

std::optional<NodeId> DecisionTree::parent_of(NodeId id) const {
  for (const auto& [pid, n] : nodes)
    if (std::find(n.children.begin(), n.children.end(), id) != n.children.end()) return pid;
  return std::nullopt;
}

std::vector<NodeId> DecisionTree::path_to(NodeId id) const {
  std::vector<NodeId> path{id};
  while (auto p = parent_of(path.back())) path.push_back(*p);
  std::reverse(path.begin(), path.end());
  return path;
}

bool structurally_equal(const DecisionTree& a, const DecisionTree& b) {
  if (a.workflow_id != b.workflow_id) return false;
  if (!a.nodes.count(a.root) || !b.nodes.count(b.root)) return false;
  std::function<bool(NodeId, NodeId, int)> same = [&](NodeId x, NodeId y, int depth) {
    if (depth > static_cast<int>(a.nodes.size()) + 1) return false;
    const TreeNode& nx = a.node(x);
    const TreeNode& ny = b.node(y);
    if (nx.payload != ny.payload || nx.description != ny.description ||
        nx.children.size() != ny.children.size())
      return false;
    for (std::size_t i = 0; i < nx.children.size(); ++i)
      if (!same(nx.children[i], ny.children[i], depth + 1)) return false;
    return true;
  };
  return same(a.root, b.root, 0);
}

void ActionMap::set(const std::string& workflow_id, int action_id, std::string content) {
  entries_[{workflow_id, action_id}] = std::move(content);
}

bool ActionMap::contains(const std::string& workflow_id, int action_id) const {
  return entries_.count({workflow_id, action_id}) > 0;
}

std::vector<int> ActionMap::ids_for(const std::string& workflow_id) const {
  std::vector<int> ids;
  for (auto it = entries_.lower_bound({workflow_id, INT32_MIN});
       it != entries_.end() && it->first.first == workflow_id; ++it)
    ids.push_back(it->first.second);
  return ids;
}

ActionMap ActionMap::slice(const std::string& workflow_id) const {
  ActionMap out;
  for (int id : ids_for(workflow_id)) out.set(workflow_id, id, entries_.at({workflow_id, id}));
  return out;
}

void ActionMap::merge(const ActionMap& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

const std::string& resolve_action(const ActionMap& map, const std::string& workflow_id,
                                  int action_id) {
  auto it = map.entries().find({workflow_id, action_id});
  if (it == map.entries().end()) throw ActionNotFound(workflow_id, action_id);
  return it->second;
}

std::vector<Violation> validate_tree(const DecisionTree& tree, const ValidationOptions& options) {
  std::vector<Violation> out;
  auto report = [&](std::string code, std::optional<NodeId> node, std::string message) {
    out.push_back({std::move(code), node, std::move(message)});
  };

  if (tree.workflow_id.empty()) report("missing-workflow-id", std::nullopt, "workflow id is empty");
  if (tree.nodes.empty()) {
    report("empty-tree", std::nullopt, "tree has no nodes");
    return out;
  }
  if (!tree.nodes.count(tree.root)) {
    report("missing-root", std::nullopt, "root node does not exist");
    return out;
  }

  std::map<NodeId, int> parent_count;
  for (const auto& [id, n] : tree.nodes) {
    if (n.id != id) report("node-id-mismatch", id, "node stored under a different id");
    for (NodeId c : n.children) {
      if (!tree.nodes.count(c)) {
        report("dangling-child", id, "child " + std::to_string(c) + " does not exist");
        continue;
      }
      ++parent_count[c];
    }
  }
  if (parent_count.count(tree.root)) report("cycle", tree.root, "root has a parent");
  for (const auto& [id, count] : parent_count)
    if (count > 1) report("multiple-parents", id, "node has more than one parent");

  // Reachability; a second visit means a cycle or a shared child.
  std::set<NodeId> seen;
  std::deque<NodeId> queue{tree.root};
  bool cyclic = false;
  while (!queue.empty()) {
    NodeId id = queue.front();
    queue.pop_front();
    if (!seen.insert(id).second) {
      cyclic = true;
      continue;
    }
    for (NodeId c : tree.nodes.at(id).children)
      if (tree.nodes.count(c)) queue.push_back(c);
  }
  if (cyclic && !parent_count.count(tree.root)) {
    bool shared = std::any_of(parent_count.begin(), parent_count.end(),
                              [](const auto& p) { return p.second > 1; });
    if (!shared) report("cycle", std::nullopt, "tree contains a cycle");
  }
  for (const auto& [id, n] : tree.nodes)
    if (!seen.count(id)) report("orphan-node", id, "node is not reachable from the root");

  const TreeNode& root = tree.nodes.at(tree.root);
  if (root.is_leaf() || root.condition().kind != ConditionKind::kIntentLabel)
    report("root-not-intent", tree.root, "root must be intent condition");

  std::map<int, NodeId> action_ids;
  bool any_leaf = false;
  for (const auto& [id, n] : tree.nodes) {
    if (n.description.find('\n') != std::string::npos ||
        n.description != util::trim(n.description))
      report("bad-description", id, "description must be a single trimmed line");
    if (n.is_leaf()) {
      any_leaf = true;
      if (!n.children.empty()) report("action-with-children", id, "action leaf has children");
      if (!n.description.empty())
        report("leaf-description", id, "action leaves carry no description; content lives in the action map");
      int aid = n.action_id();
      if (aid <= 0) {
        report("bad-action-id", id, "action id must be a positive integer");
      } else if (auto [it, inserted] = action_ids.emplace(aid, id); !inserted) {
        report("duplicate-action-id", id, "duplicate action id " + std::to_string(aid));
      }
      if (options.action_map && aid > 0 &&
          !options.action_map->contains(tree.workflow_id, aid))
        report("unresolved-action", id, "action " + std::to_string(aid) + " is not in the action map");
      continue;
    }
    const ConditionExpr& cond = n.condition();
    if (auto problem = check_condition(cond); !problem.empty())
      report("invalid-condition", id, problem);
    if (n.children.empty()) report("childless-condition", id, "condition node has no children");
    if (id != tree.root && cond.kind == ConditionKind::kIntentLabel)
      report("misplaced-intent", id, "intent conditions may only appear at the root");
    // Every else needs an earlier condition in its own if/else chain.
    bool chain_open = false;
    for (NodeId c : n.children) {
      auto it = tree.nodes.find(c);
      if (it == tree.nodes.end() || it->second.is_leaf()) continue;
      if (it->second.condition().kind == ConditionKind::kElse) {
        if (!chain_open) report("dangling-else", c, "else without a preceding if");
        chain_open = false;
      } else {
        chain_open = true;
      }
    }
  }
  if (!any_leaf) report("no-actions", std::nullopt, "tree has no action leaves");

  if (options.require_contiguous_ids && !action_ids.empty()) {
    int expected = 1;
    for (const auto& [aid, node] : action_ids) {
      if (aid != expected) {
        report("non-contiguous-action-ids", node,
               "action ids must be exactly 1.." + std::to_string(action_ids.size()));
        break;
      }
      ++expected;
    }
  }
  return out;
}

std::pair<DecisionTree, ActionMap> assign_action_ids(
    const DecisionTree& tree, const std::map<NodeId, std::string>& leaf_texts) {
  ValidationOptions opts;
  opts.require_contiguous_ids = false;
  for (const auto& v : validate_tree(tree, opts)) {
    if (v.code == "bad-action-id" || v.code == "duplicate-action-id") continue;
    throw Error(ErrorCode::kValidation, "cannot assign action ids: " + v.message);
  }
  DecisionTree out = tree;
  ActionMap map;
  int next = 1;
  for (NodeId id : out.preorder()) {
    TreeNode& n = out.node(id);
    if (!n.is_leaf()) continue;
    auto text = leaf_texts.find(id);
    if (text == leaf_texts.end())
      throw Error(ErrorCode::kValidation, "leaf " + std::to_string(id) + " has no action text");
    n.payload = ActionRef{next};
    map.set(out.workflow_id, next, text->second);
    ++next;
  }
  return {std::move(out), std::move(map)};
}

}  // namespace ica
