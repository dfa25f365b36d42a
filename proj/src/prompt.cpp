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

#include "ica/prompt.hpp"

#include <algorithm>
#include <charconv>
#include <functional>

#include "util.hpp"

namespace ica {

namespace {

constexpr std::string_view kPreamble =
    "You are assisting a customer support agent. Decide which action the agent should take for this user by "
    "following the workflows below.";
constexpr std::string_view kQueryHeader = "## User Query";
constexpr std::string_view kContextHeader = "## Context Data";
constexpr std::string_view kWorkflowsHeader = "## Workflows";
constexpr std::string_view kWorkflowPrefix = "### Workflow ";
constexpr std::string_view kInstructionsHeader = "## Instructions";
constexpr std::string_view kIntentPrefix = "Intent: ";
constexpr std::string_view kNoContext = "(none)";
constexpr std::string_view kCotInstruction =
    "Check every branch of every workflow against the user query and the context data. Write one numbered line "
    "per branch saying whether it applies and, if not, which condition fails. Then write a last line of the form "
    "`Action: <id>` with the action of the first branch that applies.";
constexpr std::string_view kPlainInstruction =
    "Reply with a single line of the form `Action: <id>` with the action of the first branch that applies. Do "
    "not explain.";

std::string condition_text(const TreeNode& n) {
  if (!n.description.empty()) return n.description;
  const ConditionExpr& c = n.condition();
  if (c.kind == ConditionKind::kElse) return "Otherwise";
  return "If " + format_condition(c);
}

[[noreturn]] void bad_prompt(const std::string& msg) { throw Error(ErrorCode::kParse, "malformed prompt: " + msg); }

}  // namespace

const char* to_string(KnowledgeFormat format) { return format == KnowledgeFormat::kIca ? "ica" : "richtext"; }

std::optional<KnowledgeFormat> knowledge_format_from_string(const std::string& name) {
  if (name == "ica") return KnowledgeFormat::kIca;
  if (name == "richtext") return KnowledgeFormat::kRichText;
  return std::nullopt;
}

int RequestMap::add(LocalAction local) {
  entries_.push_back(std::move(local));
  return static_cast<int>(entries_.size());
}

std::optional<LocalAction> RequestMap::translate(int global_id) const {
  if (global_id < 1 || static_cast<std::size_t>(global_id) > entries_.size()) return std::nullopt;
  return entries_[static_cast<std::size_t>(global_id - 1)];
}

std::optional<int> RequestMap::global_id(const LocalAction& local) const {
  auto it = std::find(entries_.begin(), entries_.end(), local);
  if (it == entries_.end()) return std::nullopt;
  return static_cast<int>(it - entries_.begin()) + 1;
}

RenumberedCandidates renumber_candidates(std::span<const IcaDocument> candidates) {
  RenumberedCandidates out;
  for (const auto& doc : candidates) {
    DecisionTree t = doc.tree;
    t.workflow_id = doc.workflow_id;
    for (NodeId id : t.preorder()) {
      TreeNode& n = t.node(id);
      if (!n.is_leaf()) continue;
      int local = n.action_id();
      const std::string& content = resolve_action(doc.action_map, doc.workflow_id, local);
      int global = out.map.add({doc.workflow_id, local});
      n.payload = ActionRef{global};
      out.actions.set(doc.workflow_id, global, content);
    }
    out.trees.push_back(std::move(t));
  }
  return out;
}

std::string render_richtext(const DecisionTree& tree, const ActionMap& actions) {
  std::string out;
  const TreeNode& root = tree.node(tree.root);
  out += "Intent: " + (root.description.empty() ? root.condition().intent_label : root.description) + "\n";
  std::function<void(NodeId, int)> walk = [&](NodeId id, int depth) {
    const TreeNode& n = tree.node(id);
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    if (n.is_leaf()) {
      out += "- " + util::normalize_space(resolve_action(actions, tree.workflow_id, n.action_id())) + " (Action " +
             std::to_string(n.action_id()) + ")\n";
      return;
    }
    out += "- " + condition_text(n) + "\n";
    for (NodeId c : n.children) walk(c, depth + 1);
  };
  for (NodeId c : root.children) walk(c, 0);
  return out;
}

BuiltPrompt build_prompt(const UserQuery& query, const ContextRecord& context,
                         std::span<const IcaDocument> candidates, const PromptOptions& options) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "build_prompt needs at least one candidate");
  RenumberedCandidates rc = renumber_candidates(candidates);

  std::string text;
  text += kPreamble;
  text += "\n\n";
  text += kQueryHeader;
  text += "\n" + util::normalize_space(query.text) + "\n";
  if (query.intent_label) text += std::string(kIntentPrefix) + *query.intent_label + "\n";
  text += "\n";
  text += kContextHeader;
  text += "\n";
  if (context.empty()) {
    text += kNoContext;
    text += "\n";
  }
  for (const auto& [k, v] : context) text += k + ": " + format_literal(v) + "\n";
  text += "\n";
  text += kWorkflowsHeader;
  text += "\n";

  std::vector<std::pair<std::string, std::size_t>> sizes;
  for (const auto& t : rc.trees) {
    std::string body = options.format == KnowledgeFormat::kIca ? print_ica(t, rc.actions) : render_richtext(t, rc.actions);
    std::string section = std::string(kWorkflowPrefix) + t.workflow_id + "\n" + body + "\n";
    sizes.emplace_back(t.workflow_id, estimate_tokens(section));
    text += section;
  }
  text += kInstructionsHeader;
  text += "\n";
  text += options.with_cot ? kCotInstruction : kPlainInstruction;
  text += "\n";

  std::size_t tokens = estimate_tokens(text);
  if (tokens > options.token_budget) {
    std::string detail;
    for (const auto& [id, n] : sizes) detail += (detail.empty() ? "" : ", ") + id + " ~" + std::to_string(n);
    throw Error(ErrorCode::kBudget, "prompt needs ~" + std::to_string(tokens) + " tokens, budget is " +
                                        std::to_string(options.token_budget) + " (candidates: " + detail + ")");
  }
  return {std::move(text), std::move(rc.map), std::move(rc.trees), tokens};
}

ParsedPrompt parse_prompt(const std::string& prompt) {
  auto lines = util::split_lines(prompt);
  ParsedPrompt out;
  std::size_t i = 0;
  auto expect = [&](std::string_view header) {
    while (i < lines.size() && lines[i].empty()) ++i;
    if (i >= lines.size() || lines[i] != header) bad_prompt("expected '" + std::string(header) + "'");
    ++i;
  };

  expect(kPreamble);
  expect(kQueryHeader);
  if (i >= lines.size()) bad_prompt("missing query text");
  out.query.text = lines[i++];
  if (i < lines.size() && lines[i].rfind(kIntentPrefix, 0) == 0)
    out.query.intent_label = lines[i++].substr(kIntentPrefix.size());

  expect(kContextHeader);
  for (; i < lines.size() && !lines[i].empty(); ++i) {
    if (lines[i] == kNoContext) continue;
    auto sep = lines[i].find(": ");
    if (sep == std::string::npos) bad_prompt("context line without ': '");
    auto value = parse_literal(lines[i].substr(sep + 2));
    if (!value) bad_prompt("bad context value in '" + lines[i] + "'");
    out.context[lines[i].substr(0, sep)] = *value;
  }

  expect(kWorkflowsHeader);
  while (true) {
    while (i < lines.size() && lines[i].empty()) ++i;
    if (i >= lines.size()) bad_prompt("missing instructions");
    if (lines[i].rfind(kWorkflowPrefix, 0) != 0) break;
    std::string id = lines[i++].substr(kWorkflowPrefix.size());
    std::string body;
    for (; i < lines.size() && !lines[i].empty(); ++i) body += lines[i] + "\n";
    out.sections.emplace_back(id, body);
  }
  if (out.sections.empty()) bad_prompt("no workflows");
  expect(kInstructionsHeader);
  if (i >= lines.size()) bad_prompt("missing instructions");
  if (lines[i] == kCotInstruction)
    out.with_cot = true;
  else if (lines[i] == kPlainInstruction)
    out.with_cot = false;
  else
    bad_prompt("unknown instructions");

  out.format = out.sections[0].second.rfind("intent:", 0) == 0 ? KnowledgeFormat::kIca : KnowledgeFormat::kRichText;
  for (const auto& [id, body] : out.sections) {
    if (out.format == KnowledgeFormat::kIca) {
      auto r = parse_ica(body, id, {.require_contiguous_ids = false});
      if (!r.ok()) bad_prompt("workflow " + id + ": " + r.error_summary());
      for (NodeId leaf : r.document->tree.leaves())
        out.action_count = std::max(out.action_count, r.document->tree.node(leaf).action_id());
      out.trees.push_back(std::move(r.document->tree));
    } else {
      for (std::size_t p = 0; (p = body.find("(Action ", p)) != std::string::npos; ++p) {
        int n = 0;
        const char* s = body.data() + p + 8;
        auto [end, ec] = std::from_chars(s, body.data() + body.size(), n);
        if (ec == std::errc() && *end == ')') out.action_count = std::max(out.action_count, n);
      }
    }
  }
  return out;
}

std::optional<int> parse_response(const std::string& text) {
  std::optional<int> found;
  for (const auto& raw : util::split_lines(text)) {
    std::string line = util::trim(raw);
    if (line.rfind("Action:", 0) != 0) continue;
    std::string num = util::trim(line.substr(7));
    if (num.empty() || !std::all_of(num.begin(), num.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
    int v = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc() || v <= 0) continue;
    found = v;
  }
  return found;
}

}  // namespace ica
