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

// A knowledge base directory: <workflow_id>.ica files, actions.json and an
// optional aliases.json ({"<intent label>": ["example query", ...]}).

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ica/lang.hpp"
#include "ica/retrieval.hpp"

namespace ica {

struct KnowledgeBase {
  std::vector<IcaDocument> workflows;  // sorted by workflow id
  ActionMap actions;
  IntentAliases aliases;
  IntentIndex index;

  const IcaDocument* find(const std::string& workflow_id) const;
  const IcaDocument& at(const std::string& workflow_id) const;  // throws kNotFound
};

/// Parses and validates every workflow; any parse error or unresolved action
/// fails the load with the file and line.
KnowledgeBase load_kb(const std::filesystem::path& dir);

/// Builds a knowledge base from in-memory parts (validated the same way).
KnowledgeBase make_kb(std::vector<IcaDocument> workflows, ActionMap actions, IntentAliases aliases = {});

IntentAliases aliases_from_json(const Json& j);
Json aliases_to_json(const IntentAliases& aliases);

}  // namespace ica
