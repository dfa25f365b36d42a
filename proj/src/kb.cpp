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

#include "ica/kb.hpp"

#include <algorithm>

#include "util.hpp"

namespace ica {

namespace fs = std::filesystem;

const IcaDocument* KnowledgeBase::find(const std::string& workflow_id) const {
  auto it = std::lower_bound(workflows.begin(), workflows.end(), workflow_id,
                             [](const IcaDocument& d, const std::string& id) { return d.workflow_id < id; });
  return it != workflows.end() && it->workflow_id == workflow_id ? &*it : nullptr;
}

const IcaDocument& KnowledgeBase::at(const std::string& workflow_id) const {
  if (const IcaDocument* d = find(workflow_id)) return *d;
  throw Error(ErrorCode::kNotFound, "unknown workflow '" + workflow_id + "'");
}

IntentAliases aliases_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "aliases must be an object of string arrays");
  IntentAliases out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_array()) throw Error(ErrorCode::kParse, "aliases for '" + it.key() + "' must be an array");
    for (const auto& v : it.value()) {
      if (!v.is_string()) throw Error(ErrorCode::kParse, "aliases for '" + it.key() + "' must be strings");
      out[it.key()].push_back(v.get<std::string>());
    }
  }
  return out;
}

Json aliases_to_json(const IntentAliases& aliases) {
  Json j = Json::object();
  for (const auto& [label, list] : aliases) j[label] = list;
  return j;
}

KnowledgeBase make_kb(std::vector<IcaDocument> workflows, ActionMap actions, IntentAliases aliases) {
  KnowledgeBase kb;
  std::sort(workflows.begin(), workflows.end(),
            [](const IcaDocument& a, const IcaDocument& b) { return a.workflow_id < b.workflow_id; });
  for (auto& doc : workflows) {
    doc.action_map = actions.slice(doc.workflow_id);
    auto v = validate_tree(doc.tree, {true, &actions});
    if (!v.empty()) throw Error(ErrorCode::kValidation, doc.workflow_id + ": " + v[0].message);
  }
  kb.index = IntentIndex::build(workflows, aliases);
  kb.workflows = std::move(workflows);
  kb.actions = std::move(actions);
  kb.aliases = std::move(aliases);
  return kb;
}

KnowledgeBase load_kb(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kNotFound, "knowledge base directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".ica") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::kNotFound, "no .ica files in " + dir.string());

  std::vector<IcaDocument> docs;
  for (const auto& f : files) {
    auto r = parse_ica(util::read_file(f), f.stem().string());
    if (!r.ok()) throw Error(ErrorCode::kParse, f.filename().string() + ": " + r.error_summary());
    docs.push_back(std::move(*r.document));
  }
  fs::path actions_path = dir / "actions.json";
  if (!fs::exists(actions_path)) throw Error(ErrorCode::kNotFound, "missing " + actions_path.string());
  ActionMap actions = action_map_from_json(parse_json(util::read_file(actions_path), actions_path.string()));
  IntentAliases aliases;
  if (fs::path ap = dir / "aliases.json"; fs::exists(ap))
    aliases = aliases_from_json(parse_json(util::read_file(ap), ap.string()));
  return make_kb(std::move(docs), std::move(actions), std::move(aliases));
}

}  // namespace ica
