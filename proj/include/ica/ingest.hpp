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

// Rich-text (HTML) workflow documents to ICA trees:
// extract blocks -> label condition/action -> assemble -> number actions.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ica/core.hpp"
#include "ica/json_io.hpp"
#include "ica/lang.hpp"
#include "ica/llm_client.hpp"

namespace ica {

enum class SourceKind { kHeading, kListItem, kParagraph, kTableCell };
const char* to_string(SourceKind kind);

struct ContentBlock {
  int block_id = 0;  // document order, from 0
  std::string text;  // whitespace-normalized, never empty
  int depth = 0;
  std::optional<int> parent_block_id;
  SourceKind source_kind = SourceKind::kParagraph;
  int heading_level = 0;  // 1..6 for headings
  std::string cell_header;  // table cells: the "<row> / <col>" prefix, if any
};

/// Blocks in document order. Headings nest by level, list items by list
/// nesting; paragraphs and tables hang under the innermost enclosing list item
/// or heading. Table cells become "<row header> / <col header>: <cell>".
/// Throws Error(kParse) when the input is not UTF-8.
std::vector<ContentBlock> extract_blocks(std::string_view html);

enum class BlockKind { kCondition, kAction };
const char* to_string(BlockKind kind);

struct BlockLabel {
  int block_id = 0;
  BlockKind label = BlockKind::kAction;
  double confidence = 0;  // [0, 1]
};

inline constexpr double kReviewThreshold = 0.7;

class BlockClassifier {
 public:
  virtual ~BlockClassifier() = default;
  /// One label per block, same order.
  virtual std::vector<BlockLabel> classify(std::span<const ContentBlock> blocks) = 0;
};

/// Keyword rules: a conditional marker ("if", "when", "unless", "in case",
/// "otherwise", ...) or a trailing colon over child blocks makes a condition;
/// a leading imperative verb makes an action; anything else is an action with
/// low confidence.
class RuleBasedClassifier : public BlockClassifier {
 public:
  std::vector<BlockLabel> classify(std::span<const ContentBlock> blocks) override;
};

/// Asks an LLM one block at a time. Client failures are rethrown as
/// StageError("classifier") naming the block.
class LlmBlockClassifier : public BlockClassifier {
 public:
  explicit LlmBlockClassifier(LlmClient& client, std::chrono::milliseconds timeout = std::chrono::seconds(30))
      : client_(client), timeout_(timeout) {}
  std::vector<BlockLabel> classify(std::span<const ContentBlock> blocks) override;

  static std::string build_prompt(const ContentBlock& block, std::span<const ContentBlock> all);

 private:
  LlmClient& client_;
  std::chrono::milliseconds timeout_;
};

std::vector<BlockLabel> classify_blocks(std::span<const ContentBlock> blocks, BlockClassifier& classifier);

bool is_imperative_verb(std::string_view word);
bool is_else_marker(std::string_view text);

/// Tree before action numbering: leaves carry placeholder ids, their texts
/// live in `leaf_texts`.
struct AssembledTree {
  DecisionTree tree;
  std::map<NodeId, std::string> leaf_texts;
  std::vector<std::string> warnings;
};

/// `blocks` are the body of one workflow; depths are taken relative to the
/// shallowest block, which sits directly under the intent root. Throws
/// Error(kValidation, "no actions found") when no block is labeled action.
AssembledTree assemble_tree(std::span<const ContentBlock> blocks, std::span<const BlockLabel> labels,
                            const std::string& intent_label, const std::string& workflow_id,
                            const std::string& intent_description = {});

/// Lowercase ASCII words joined by '_', at most `max_words`.
std::string slugify(std::string_view text, std::size_t max_words = 6);

struct ConvertedWorkflow {
  IcaDocument document;
  std::string ica_text;
  std::string intent_label;
  std::vector<ContentBlock> blocks;
  std::vector<BlockLabel> labels;
  std::vector<std::string> warnings;
};

struct ConvertedDocument {
  std::string source_name;
  std::vector<ConvertedWorkflow> workflows;
  std::vector<std::string> warnings;
};

/// One workflow per top-level heading (the shallowest heading level present).
/// A single section takes `doc_stem` as workflow id; several take
/// "<doc_stem>-<n>". Without headings the whole body is one workflow named
/// after <title> or the stem.
ConvertedDocument convert_document(std::string_view html, const std::string& doc_stem,
                                   const std::string& source_name, BlockClassifier& classifier);

struct ConvertSummary {
  std::vector<std::filesystem::path> written;
  std::size_t workflows = 0;
  std::size_t flagged_blocks = 0;
};

/// Converts one .html file or every .html file of a directory (sorted by
/// name) and writes <workflow_id>.ica, actions.json and review_report.json to
/// `out_dir`.
ConvertSummary convert_path(const std::filesystem::path& input, const std::filesystem::path& out_dir,
                            BlockClassifier& classifier);

Json blocks_to_json(std::span<const ContentBlock> blocks, std::span<const BlockLabel> labels = {});
Json review_report(std::span<const ConvertedDocument> docs);

}  // namespace ica
