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

// Prompt template shared by training-data synthesis and online prediction.
//
//   <preamble>
//
//   ## User Query
//   <query text on one line>
//   Intent: <label>            (only when known)
//
//   ## Context Data
//   key: literal               (sorted by key, or "(none)")
//
//   ## Workflows
//   ### Workflow <id>
//   <ICA text, or the rich-text rendering>
//
//   ## Instructions
//   <with or without step-by-step reasoning>
//
// Actions are renumbered 1..N across all candidates; the request map turns a
// global id back into (workflow, local id).

#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ica/core.hpp"
#include "ica/lang.hpp"
#include "ica/llm_client.hpp"

namespace ica {

enum class KnowledgeFormat { kIca, kRichText };
const char* to_string(KnowledgeFormat format);
std::optional<KnowledgeFormat> knowledge_format_from_string(const std::string& name);

struct LocalAction {
  std::string workflow_id;
  int action_id = 0;
  friend bool operator==(const LocalAction&, const LocalAction&) = default;
};

class RequestMap {
 public:
  /// Appends and returns the new global id.
  int add(LocalAction local);
  std::optional<LocalAction> translate(int global_id) const;
  std::optional<int> global_id(const LocalAction& local) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<LocalAction>& entries() const { return entries_; }

 private:
  std::vector<LocalAction> entries_;  // [global - 1]
};

/// Candidate trees with action ids replaced by global ids, in candidate order
/// and pre-order within each tree. `actions` is keyed by (workflow, global id).
struct RenumberedCandidates {
  std::vector<DecisionTree> trees;
  ActionMap actions;
  RequestMap map;
};

/// Each candidate's action contents come from its own `action_map`.
/// Throws ActionNotFound for an unresolvable leaf.
RenumberedCandidates renumber_candidates(std::span<const IcaDocument> candidates);

/// Nested bullet list of node descriptions with "<content> (Action N)" leaves.
/// This is the rich-text baseline arm.
std::string render_richtext(const DecisionTree& tree, const ActionMap& actions);

struct PromptOptions {
  bool with_cot = true;
  KnowledgeFormat format = KnowledgeFormat::kIca;
  std::size_t token_budget = kDefaultPromptTokenBudget;
};

struct BuiltPrompt {
  std::string text;
  RequestMap request_map;
  std::vector<DecisionTree> trees;  // renumbered, as shown in the prompt
  std::size_t estimated_tokens = 0;
};

/// Throws Error(kInvalidArgument) without candidates and Error(kBudget) when
/// the estimate exceeds the budget; the message lists each candidate's size.
BuiltPrompt build_prompt(const UserQuery& query, const ContextRecord& context,
                         std::span<const IcaDocument> candidates, const PromptOptions& options = {});

struct ParsedPrompt {
  UserQuery query;
  ContextRecord context;
  KnowledgeFormat format = KnowledgeFormat::kIca;
  bool with_cot = true;
  std::vector<std::pair<std::string, std::string>> sections;  // workflow id, body
  std::vector<DecisionTree> trees;  // ICA format only, global ids
  int action_count = 0;             // N of the global numbering
};

/// Inverse of build_prompt. Throws Error(kParse) on text that does not follow
/// the template.
ParsedPrompt parse_prompt(const std::string& prompt);

/// The integer on the last line that reads `Action:` + optional whitespace +
/// a positive integer (surrounding whitespace ignored).
std::optional<int> parse_response(const std::string& text);

}  // namespace ica
