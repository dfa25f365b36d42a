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

// The .ica pseudocode format. Line oriented, two spaces of indentation per
// nesting level:
//
//   intent: cancel_reservation -- The guest wants to cancel
//     if hours_since_booking < 24 -- Booked less than a day ago
//       then do Action 1  # Issue a full refund
//     else -- Booked a day ago or more
//       then do Action 2  # Explain the cancellation policy
//
// docs/grammar.md has the full EBNF.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ica/core.hpp"

namespace ica {

enum class Severity { kError, kWarning };

struct ParseDiagnostic {
  int line = 0;    // 1-based
  int column = 0;  // 1-based, byte offset
  Severity severity = Severity::kError;
  std::string message;
};

struct IcaDocument {
  std::string workflow_id;
  std::string source_text;
  DecisionTree tree;
  ActionMap action_map;            // slice for this workflow; may be empty
  std::map<NodeId, int> node_lines;  // source line of each node
};

struct ParseOptions {
  /// Off when parsing workflows whose actions were renumbered across several
  /// candidates (prompt sections).
  bool require_contiguous_ids = true;
};

struct ParseResult {
  std::optional<IcaDocument> document;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return document.has_value(); }
  /// All error diagnostics joined into one message.
  std::string error_summary() const;
};

ParseResult parse_ica(std::string_view text, const std::string& workflow_id,
                      const ParseOptions& options = {});

/// Canonical text of a tree. Each action line carries a comment with the first
/// 60 code points of its content. Throws Error(kNotFound) on an unresolvable
/// ActionRef.
std::string print_ica(const DecisionTree& tree, const ActionMap& action_map);

struct LintWarning {
  std::string code;  // duplicate-condition | possibly-shadowed | unused-action
  std::optional<NodeId> node;
  int line = 0;
  std::string message;
};

std::vector<LintWarning> lint_ica(const IcaDocument& doc);

/// Value literal as written in pseudocode: numbers bare, true/false bare, text
/// bare when unambiguous and double-quoted otherwise.
std::string format_literal(const Scalar& value);
/// Inverse of format_literal for a complete literal.
std::optional<Scalar> parse_literal(std::string_view text);

/// Condition without the `if` keyword, e.g. `status == canceled`.
std::string format_condition(const ConditionExpr& cond);

/// True when every context that satisfies `later` also satisfies `earlier`
/// (same key, closed predicate language). Sound, not complete.
bool subsumes(const ConditionExpr& earlier, const ConditionExpr& later);

}  // namespace ica
