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

// Canonical JSON interchange for trees, action maps and context records. Field
// order is fixed (see docs/schemas.md); integral numbers are written without a
// fractional part.

#pragma once

#include <string>

#include <json.hpp>

#include "ica/core.hpp"

namespace ica {

using Json = nlohmann::ordered_json;

Json scalar_to_json(const Scalar& value);
Scalar scalar_from_json(const Json& j);

Json condition_to_json(const ConditionExpr& cond);
ConditionExpr condition_from_json(const Json& j);

Json tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const Json& j);

Json action_map_to_json(const ActionMap& map);
ActionMap action_map_from_json(const Json& j);

Json context_to_json(const ContextRecord& ctx);
ContextRecord context_from_json(const Json& j);

/// Two-space indented dump with a trailing newline.
std::string dump_canonical(const Json& j);

/// Parses JSON text, converting parser failures to Error(kParse).
Json parse_json(const std::string& text, const std::string& what);

}  // namespace ica
