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

#include "ica/json_io.hpp"

#include <cmath>

namespace ica {

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::kParse, "malformed JSON: " + what);
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) bad(std::string("missing field '") + name + "'");
  return j.at(name);
}

}  // namespace

Json scalar_to_json(const Scalar& value) {
  switch (type_of(value)) {
    case ScalarType::kText: return std::get<std::string>(value);
    case ScalarType::kBoolean: return std::get<bool>(value);
    case ScalarType::kNumber: {
      double d = std::get<double>(value);
      if (std::floor(d) == d && std::fabs(d) < 9007199254740992.0)
        return static_cast<std::int64_t>(d);
      return d;
    }
  }
  return nullptr;
}

Scalar scalar_from_json(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  bad("scalar must be a string, number or boolean");
}

Json condition_to_json(const ConditionExpr& cond) {
  Json j;
  j["kind"] = to_string(cond.kind);
  switch (cond.kind) {
    case ConditionKind::kIntentLabel:
      j["intent_label"] = cond.intent_label;
      break;
    case ConditionKind::kElse:
      break;
    case ConditionKind::kInSet: {
      j["key"] = cond.key;
      Json values = Json::array();
      for (const auto& v : cond.values) values.push_back(scalar_to_json(v));
      j["values"] = std::move(values);
      break;
    }
    case ConditionKind::kExists:
    case ConditionKind::kBooleanTrue:
      j["key"] = cond.key;
      break;
    default:
      j["key"] = cond.key;
      if (!cond.values.empty()) j["value"] = scalar_to_json(cond.values.front());
      break;
  }
  return j;
}

ConditionExpr condition_from_json(const Json& j) {
  auto kind = condition_kind_from_string(field(j, "kind").get<std::string>());
  if (!kind) bad("unknown condition kind " + j.at("kind").dump());
  ConditionExpr c;
  c.kind = *kind;
  if (j.contains("intent_label")) c.intent_label = j.at("intent_label").get<std::string>();
  if (j.contains("key")) c.key = j.at("key").get<std::string>();
  if (j.contains("value")) c.values.push_back(scalar_from_json(j.at("value")));
  if (j.contains("values")) {
    if (!j.at("values").is_array()) bad("'values' must be an array");
    for (const auto& v : j.at("values")) c.values.push_back(scalar_from_json(v));
  }
  return c;
}

Json tree_to_json(const DecisionTree& tree) {
  Json nodes = Json::array();
  for (const auto& [id, n] : tree.nodes) {
    Json jn;
    jn["id"] = id;
    if (n.is_leaf())
      jn["action_id"] = n.action_id();
    else
      jn["condition"] = condition_to_json(n.condition());
    jn["description"] = n.description;
    jn["children"] = n.children;
    nodes.push_back(std::move(jn));
  }
  Json j;
  j["workflow_id"] = tree.workflow_id;
  j["root"] = tree.root;
  j["nodes"] = std::move(nodes);
  return j;
}

DecisionTree tree_from_json(const Json& j) {
  try {
    DecisionTree tree;
    tree.workflow_id = field(j, "workflow_id").get<std::string>();
    tree.root = field(j, "root").get<NodeId>();
    for (const auto& jn : field(j, "nodes")) {
      TreeNode n;
      n.id = field(jn, "id").get<NodeId>();
      if (jn.contains("action_id"))
        n.payload = ActionRef{jn.at("action_id").get<int>()};
      else
        n.payload = condition_from_json(field(jn, "condition"));
      if (jn.contains("description")) n.description = jn.at("description").get<std::string>();
      if (jn.contains("children")) n.children = jn.at("children").get<std::vector<NodeId>>();
      if (!tree.nodes.emplace(n.id, n).second) bad("duplicate node id " + std::to_string(n.id));
    }
    return tree;
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
}

Json action_map_to_json(const ActionMap& map) {
  Json workflows = Json::array();
  std::string current;
  for (const auto& [key, content] : map.entries()) {
    if (workflows.empty() || key.first != current) {
      current = key.first;
      Json w;
      w["workflow_id"] = current;
      w["actions"] = Json::array();
      workflows.push_back(std::move(w));
    }
    Json a;
    a["id"] = key.second;
    a["content"] = content;
    workflows.back()["actions"].push_back(std::move(a));
  }
  Json j;
  j["workflows"] = std::move(workflows);
  return j;
}

ActionMap action_map_from_json(const Json& j) {
  try {
    ActionMap map;
    for (const auto& w : field(j, "workflows")) {
      auto wf = field(w, "workflow_id").get<std::string>();
      for (const auto& a : field(w, "actions"))
        map.set(wf, field(a, "id").get<int>(), field(a, "content").get<std::string>());
    }
    return map;
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
}

Json context_to_json(const ContextRecord& ctx) {
  Json j = Json::object();
  for (const auto& [k, v] : ctx) j[k] = scalar_to_json(v);
  return j;
}

ContextRecord context_from_json(const Json& j) {
  if (!j.is_object()) bad("context record must be an object");
  ContextRecord ctx;
  for (const auto& [k, v] : j.items()) ctx[k] = scalar_from_json(v);
  return ctx;
}

std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, what + ": " + e.what());
  }
}

}  // namespace ica
