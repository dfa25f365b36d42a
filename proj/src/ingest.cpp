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

#include "ica/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <initializer_list>
#include <set>

#include "html.hpp"
#include "ica/retrieval.hpp"
#include "util.hpp"

namespace ica {

namespace fs = std::filesystem;

const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::kHeading: return "heading";
    case SourceKind::kListItem: return "list-item";
    case SourceKind::kParagraph: return "paragraph";
    case SourceKind::kTableCell: return "table-cell";
  }
  return "?";
}

const char* to_string(BlockKind kind) { return kind == BlockKind::kCondition ? "condition" : "action"; }

namespace {

using html::Node;

bool in(std::string_view s, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

bool is_heading(std::string_view n) { return n.size() == 2 && n[0] == 'h' && n[1] >= '1' && n[1] <= '6'; }

bool is_skipped(std::string_view n) {
  return in(n, {"head", "script", "style", "title", "template", "noscript", "img", "svg"});
}

bool is_container(std::string_view n) {
  return in(n, {"#document", "html", "body", "div", "section", "article", "main", "blockquote", "form", "header",
                "footer", "nav", "aside", "figure", "details", "fieldset", "center", "address", "ul", "ol", "dl",
                "thead", "tbody", "tfoot", "tr"});
}

bool is_block(std::string_view n) {
  return is_container(n) || is_heading(n) ||
         in(n, {"p", "li", "dd", "dt", "table", "pre", "summary", "hr", "td", "th", "caption", "figcaption"});
}

bool is_nested_structure(std::string_view n) { return in(n, {"ul", "ol", "dl", "table"}); }

std::string clean(std::string_view raw) {
  std::string s(raw);
  for (std::size_t p; (p = s.find("\xC2\xA0")) != std::string::npos;) s.replace(p, 2, " ");
  return util::normalize_space(s);
}

// Text under `n`. Nested lists and tables are not descended into; they are
// collected in `nested` (outermost only) when given.
void collect(const Node& n, std::string& out, std::vector<const Node*>* nested) {
  for (const auto& c : n.children) {
    if (c->is_text) {
      out += c->text;
      continue;
    }
    if (is_skipped(c->name)) continue;
    if (nested && is_nested_structure(c->name)) {
      nested->push_back(c.get());
      continue;
    }
    if (c->name == "br") {
      out += ' ';
      continue;
    }
    bool block = is_block(c->name);
    if (block) out += ' ';
    collect(*c, out, nested);
    if (block) out += ' ';
  }
}

std::string text_of(const Node& n) {
  std::string s;
  collect(n, s, nullptr);
  return clean(s);
}

class Extractor {
 public:
  std::vector<ContentBlock> run(const Node& body) {
    container(body, std::nullopt);
    return std::move(blocks_);
  }

 private:
  std::optional<int> parent_for(std::optional<int> item) const {
    if (item) return item;
    if (!headings_.empty()) return headings_.back().second;
    return std::nullopt;
  }

  std::optional<int> add(std::string text, SourceKind kind, std::optional<int> parent, int level = 0) {
    text = clean(text);
    if (text.empty()) return std::nullopt;
    ContentBlock b;
    b.block_id = static_cast<int>(blocks_.size());
    b.text = std::move(text);
    b.parent_block_id = parent;
    b.depth = parent ? blocks_[static_cast<std::size_t>(*parent)].depth + 1 : 0;
    b.source_kind = kind;
    b.heading_level = level;
    blocks_.push_back(std::move(b));
    return blocks_.back().block_id;
  }

  void container(const Node& n, std::optional<int> item) {
    std::string pending;
    auto flush = [&] {
      add(pending, SourceKind::kParagraph, parent_for(item));
      pending.clear();
    };
    for (const auto& c : n.children) {
      if (c->is_text) {
        pending += c->text;
        continue;
      }
      const std::string& name = c->name;
      if (is_skipped(name)) continue;
      if (name == "br") {
        pending += ' ';
        continue;
      }
      if (!is_block(name)) {
        std::vector<const Node*> nested;
        std::string t;
        collect(*c, t, &nested);
        pending += t;
        if (!nested.empty()) {
          flush();
          for (const Node* s : nested) structure(*s, item);
        }
        continue;
      }
      flush();
      block(*c, item);
    }
    flush();
  }

  void block(const Node& n, std::optional<int> item) {
    const std::string& name = n.name;
    if (is_heading(name)) {
      int level = name[1] - '0';
      if (!item)
        while (!headings_.empty() && headings_.back().first >= level) headings_.pop_back();
      // A heading inside a list item still nests under the item.
      auto id = add(text_of(n), SourceKind::kHeading, parent_for(item), level);
      if (id && !item) headings_.emplace_back(level, *id);
      return;
    }
    if (name == "table") return table(n, item);
    if (is_container(name)) return container(n, item);
    // li, dd, dt, p, pre, stray cells: own text first, then nested structures.
    std::vector<const Node*> nested;
    std::string t;
    collect(n, t, &nested);
    SourceKind kind = in(name, {"li", "dd", "dt"}) ? SourceKind::kListItem : SourceKind::kParagraph;
    auto id = add(t, kind, parent_for(item));
    std::optional<int> inner = kind == SourceKind::kListItem && id ? id : item;
    for (const Node* s : nested) structure(*s, inner);
  }

  void structure(const Node& n, std::optional<int> item) {
    if (n.name == "table") return table(n, item);
    container(n, item);
  }

  struct Cell {
    bool header = false;
    std::string text;
  };

  static void rows_of(const Node& n, std::vector<std::vector<Cell>>& rows, std::vector<std::string>& captions) {
    for (const auto& c : n.children) {
      if (c->is_text) continue;
      if (c->name == "tr") {
        std::vector<Cell> row;
        for (const auto& cell : c->children)
          if (!cell->is_text && (cell->name == "td" || cell->name == "th"))
            row.push_back({cell->name == "th", text_of(*cell)});
        rows.push_back(std::move(row));
      } else if (c->name == "caption") {
        captions.push_back(text_of(*c));
      } else if (in(c->name, {"thead", "tbody", "tfoot"})) {
        rows_of(*c, rows, captions);
      }
    }
  }

  void table(const Node& n, std::optional<int> item) {
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> captions;
    rows_of(n, rows, captions);
    std::optional<int> parent = parent_for(item);
    for (const auto& c : captions) add(c, SourceKind::kParagraph, parent);

    std::vector<std::string> col_headers;
    std::size_t first = 0;
    if (rows.size() > 1 && !rows[0].empty() &&
        std::all_of(rows[0].begin(), rows[0].end(), [](const Cell& c) { return c.header; })) {
      for (const auto& c : rows[0]) col_headers.push_back(c.text);
      first = 1;
    }
    for (std::size_t r = first; r < rows.size(); ++r) {
      const auto& row = rows[r];
      bool has_row_header = row.size() > 1 && row[0].header;
      for (std::size_t ci = has_row_header ? 1 : 0; ci < row.size(); ++ci) {
        if (row[ci].text.empty()) continue;
        std::vector<std::string> prefix;
        if (has_row_header && !row[0].text.empty()) prefix.push_back(row[0].text);
        if (ci < col_headers.size() && !col_headers[ci].empty()) prefix.push_back(col_headers[ci]);
        std::string header = util::join(prefix, " / ");
        std::string text = prefix.empty() ? row[ci].text : header + ": " + row[ci].text;
        if (auto id = add(text, SourceKind::kTableCell, parent))
          blocks_[static_cast<std::size_t>(*id)].cell_header = header;
      }
    }
  }

  std::vector<ContentBlock> blocks_;
  std::vector<std::pair<int, int>> headings_;  // (level, block id)
};

// Sorted for binary search.
constexpr std::string_view kVerbs[] = {
    "add",        "adjust",    "advise",   "apologize", "apply",    "approve",   "arrange",   "ask",
    "assign",     "assist",    "book",     "call",      "cancel",   "change",    "charge",    "check",
    "close",      "collect",   "compensate", "confirm", "contact",  "create",    "credit",    "decline",
    "deny",       "direct",    "document", "email",     "encourage", "escalate", "explain",   "file",
    "flag",       "follow",    "forward",  "give",      "help",     "hold",      "inform",    "initiate",
    "issue",      "keep",      "let",      "log",       "make",     "mark",      "modify",    "notify",
    "offer",      "open",      "pay",      "process",   "provide",  "reach",     "rebook",    "recommend",
    "record",     "redirect",  "refer",    "refund",    "reimburse", "reject",   "release",   "remind",
    "remove",     "reopen",    "request",  "reschedule", "resend", "reset",     "resolve",   "respond",
    "review",     "route",     "send",     "set",       "share",    "submit",    "suggest",   "tell",
    "transfer",   "update",    "use",      "verify",    "waive",
};

constexpr std::string_view kConditionMarkers[] = {"if", "in case", "in the event", "unless", "when", "whenever"};
constexpr std::string_view kElseMarkers[] = {"else", "if not", "in all other cases", "in any other case",
                                             "otherwise"};

std::string first_word(std::string_view text) {
  std::string w;
  std::size_t i = 0;
  while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i])))
    w += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i++])));
  return w;
}

bool starts_with_any(std::string_view lower, std::span<const std::string_view> markers) {
  for (auto m : markers)
    if (util::starts_with_word(lower, m)) return true;
  return false;
}

BlockLabel rule_label(const ContentBlock& b, bool has_children) {
  std::string lower = util::to_lower_ascii(b.text);
  auto label = [&](BlockKind k, double c) { return BlockLabel{b.block_id, k, c}; };
  if (is_else_marker(lower)) return label(BlockKind::kCondition, 0.9);
  if (starts_with_any(lower, kConditionMarkers)) return label(BlockKind::kCondition, 0.95);
  if (!lower.empty() && lower.back() == ':') {
    if (has_children) return label(BlockKind::kCondition, 0.85);
    return label(BlockKind::kAction, 0.5);  // introduces what follows
  }

  std::string_view action_text = b.text;
  if (!b.cell_header.empty()) action_text.remove_prefix(std::min(action_text.size(), b.cell_header.size() + 2));
  std::string w = first_word(action_text);
  if (w == "please") w = first_word(action_text.substr(util::to_lower_ascii(action_text).find("please") + 6));
  if (is_imperative_verb(w)) return label(BlockKind::kAction, has_children ? 0.75 : 0.95);
  if (b.source_kind == SourceKind::kTableCell) return label(BlockKind::kAction, 0.6);
  if (has_children) return label(BlockKind::kCondition, 0.6);
  return label(BlockKind::kAction, 0.5);
}

std::string condition_key(const std::string& text, int block_id) {
  std::string lower = util::to_lower_ascii(text);
  for (auto m : kConditionMarkers)
    if (util::starts_with_word(lower, m)) {
      lower.erase(0, m.size());
      break;
    }
  std::string key = slugify(lower, 5);
  if (key.empty()) return "condition_" + std::to_string(block_id);
  if (std::isdigit(static_cast<unsigned char>(key[0]))) key = "k_" + key;
  return key;
}

}  // namespace

bool is_imperative_verb(std::string_view word) {
  return std::binary_search(std::begin(kVerbs), std::end(kVerbs), word);
}

bool is_else_marker(std::string_view text) {
  std::string lower = util::to_lower_ascii(text);
  return starts_with_any(lower, kElseMarkers);
}

std::string slugify(std::string_view text, std::size_t max_words) {
  std::vector<std::string> words;
  for (auto& t : tokenize(text)) {
    bool ascii = std::all_of(t.begin(), t.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
    if (!ascii) continue;
    words.push_back(t);
    if (words.size() == max_words) break;
  }
  return util::join(words, "_");
}

std::vector<ContentBlock> extract_blocks(std::string_view html_text) {
  auto doc = html::parse(html_text);
  const Node* body = html::find_first(*doc, "body");
  Extractor ex;
  return ex.run(body ? *body : *doc);
}

std::vector<BlockLabel> RuleBasedClassifier::classify(std::span<const ContentBlock> blocks) {
  std::set<int> parents;
  for (const auto& b : blocks)
    if (b.parent_block_id) parents.insert(*b.parent_block_id);
  std::vector<BlockLabel> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(rule_label(b, parents.count(b.block_id) > 0));
  return out;
}

std::string LlmBlockClassifier::build_prompt(const ContentBlock& block, std::span<const ContentBlock> all) {
  std::string p =
      "You label fragments of a customer-support workflow document.\n"
      "A fragment is a CONDITION if it states a circumstance about the customer's intent or situation "
      "that decides what to do. It is an ACTION if it tells the agent what to do or say.\n\n";
  if (block.parent_block_id) {
    for (const auto& b : all)
      if (b.block_id == *block.parent_block_id) p += "Enclosing fragment: " + b.text + "\n";
  }
  p += "Fragment: " + block.text + "\n\n";
  p += "Answer with exactly one line: `Label: condition` or `Label: action`.\n";
  return p;
}

std::vector<BlockLabel> LlmBlockClassifier::classify(std::span<const ContentBlock> blocks) {
  std::vector<BlockLabel> out;
  for (const auto& b : blocks) {
    Completion c;
    try {
      c = client_.complete(build_prompt(b, blocks), 16, timeout_);
    } catch (const Error& e) {
      throw StageError(e.code(), "classifier", "block " + std::to_string(b.block_id) + ": " + e.what());
    }
    BlockLabel l{b.block_id, BlockKind::kAction, 0.0};
    for (const auto& line : util::split_lines(c.text)) {
      std::string t = util::to_lower_ascii(util::trim(line));
      if (t.rfind("label:", 0) != 0) continue;
      std::string v = util::trim(t.substr(6));
      if (v == "condition") l = {b.block_id, BlockKind::kCondition, 0.9};
      if (v == "action") l = {b.block_id, BlockKind::kAction, 0.9};
    }
    out.push_back(l);
  }
  return out;
}

std::vector<BlockLabel> classify_blocks(std::span<const ContentBlock> blocks, BlockClassifier& classifier) {
  auto labels = classifier.classify(blocks);
  if (labels.size() != blocks.size())
    throw Error(ErrorCode::kInternal, "classifier returned " + std::to_string(labels.size()) + " labels for " +
                                          std::to_string(blocks.size()) + " blocks");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].block_id != blocks[i].block_id)
      throw Error(ErrorCode::kInternal, "classifier labels out of order");
    labels[i].confidence = std::clamp(labels[i].confidence, 0.0, 1.0);
  }
  return labels;
}

namespace {

struct Draft {
  int block = -1;
  std::string description;
  std::vector<std::size_t> kids;
  std::vector<std::string> texts;
  bool text_before_condition = false;
};

}  // namespace

AssembledTree assemble_tree(std::span<const ContentBlock> blocks, std::span<const BlockLabel> labels,
                            const std::string& intent_label, const std::string& workflow_id,
                            const std::string& intent_description) {
  if (labels.size() != blocks.size()) throw Error(ErrorCode::kInvalidArgument, "every block needs a label");
  if (std::none_of(labels.begin(), labels.end(), [](const BlockLabel& l) { return l.label == BlockKind::kAction; }))
    throw Error(ErrorCode::kValidation, "no actions found");

  AssembledTree out;
  auto warn = [&](int block, const std::string& msg) {
    out.warnings.push_back((block < 0 ? std::string("intent root") : "block " + std::to_string(block)) + ": " + msg);
  };

  std::vector<Draft> drafts(1);  // [0] is the intent root
  auto add_condition = [&](std::size_t parent, int block, std::string desc) {
    drafts.push_back({block, util::normalize_space(desc), {}, {}, false});
    std::size_t id = drafts.size() - 1;
    if (!drafts[parent].texts.empty()) drafts[parent].text_before_condition = true;
    drafts[parent].kids.push_back(id);
    return id;
  };

  int base = blocks.empty() ? 0 : blocks[0].depth;
  for (const auto& b : blocks) base = std::min(base, b.depth);
  std::vector<std::pair<int, std::size_t>> open{{0, 0}};  // (depth, draft)

  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const ContentBlock& b = blocks[i];
    int depth = b.depth - base + 1;
    while (open.size() > 1 && open.back().first >= depth) open.pop_back();
    std::size_t parent = open.back().second;

    if (labels[i].label == BlockKind::kCondition) {
      open.emplace_back(depth, add_condition(parent, b.block_id, b.text));
      continue;
    }
    if (!b.cell_header.empty()) {
      // "<row> / <col>: value" reads as a condition on the headers.
      std::size_t c = add_condition(parent, b.block_id, b.cell_header);
      drafts[c].texts.push_back(b.text.substr(std::min(b.text.size(), b.cell_header.size() + 2)));
      continue;
    }
    if (parent == 0) warn(b.block_id, "action has no governing condition; attached to the intent root");
    drafts[parent].texts.push_back(b.text);
  }

  // Conditions that govern nothing are kept as text of their parent so no
  // content is lost. Children before parents.
  for (std::size_t d = drafts.size(); d-- > 1;) {
    for (std::size_t k = drafts[d].kids.size(); k-- > 0;) {
      Draft& kid = drafts[drafts[d].kids[k]];
      if (!kid.kids.empty() || !kid.texts.empty()) continue;
      warn(kid.block, "condition has no actions beneath it; kept as an action");
      drafts[d].texts.insert(drafts[d].texts.begin(), kid.description);
      drafts[d].kids.erase(drafts[d].kids.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  for (std::size_t k = drafts[0].kids.size(); k-- > 0;) {
    Draft& kid = drafts[drafts[0].kids[k]];
    if (!kid.kids.empty() || !kid.texts.empty()) continue;
    warn(kid.block, "condition has no actions beneath it; kept as an action");
    drafts[0].texts.insert(drafts[0].texts.begin(), kid.description);
    drafts[0].kids.erase(drafts[0].kids.begin() + static_cast<std::ptrdiff_t>(k));
  }

  DecisionTree& tree = out.tree;
  tree.workflow_id = workflow_id;
  std::function<void(std::size_t, std::optional<NodeId>)> emit = [&](std::size_t d, std::optional<NodeId> parent) {
    const Draft& dr = drafts[d];
    NodeId id;
    if (!parent) {
      id = tree.add(std::nullopt, ConditionExpr::intent(intent_label), util::normalize_space(intent_description));
    } else {
      ConditionExpr cond = ConditionExpr::boolean_true(condition_key(dr.description, dr.block));
      if (is_else_marker(dr.description)) {
        // Only an open if/else chain among earlier siblings makes this an else.
        bool chain = false;
        for (NodeId s : tree.node(*parent).children)
          if (!tree.node(s).is_leaf()) chain = tree.node(s).condition().kind != ConditionKind::kElse;
        if (chain)
          cond = ConditionExpr::otherwise();
        else
          warn(dr.block, "'otherwise' without a preceding condition; kept as a plain condition");
      }
      id = tree.add(*parent, cond, dr.description);
    }
    for (std::size_t k : dr.kids) emit(k, id);
    if (!dr.texts.empty()) {
      if (dr.text_before_condition)
        warn(dr.block, "action text placed before conditions moved after them as the fallback action");
      NodeId leaf = tree.add(id, ActionRef{0});
      out.leaf_texts[leaf] = util::join(dr.texts, " ");
    }
  };
  emit(0, std::nullopt);
  return out;
}

namespace {

struct Section {
  std::string title;
  std::vector<ContentBlock> body;
};

std::vector<Section> split_sections(const std::vector<ContentBlock>& blocks, const std::string& fallback_title,
                                    std::vector<std::string>& warnings) {
  int top = 7;
  for (const auto& b : blocks)
    if (b.source_kind == SourceKind::kHeading && !b.parent_block_id) top = std::min(top, b.heading_level);
  std::vector<Section> out;
  if (top == 7) {
    out.push_back({fallback_title, blocks});
    return out;
  }
  std::size_t preamble = 0;
  for (const auto& b : blocks) {
    if (b.source_kind == SourceKind::kHeading && !b.parent_block_id && b.heading_level == top) {
      out.push_back({b.text, {}});
    } else if (out.empty()) {
      ++preamble;
    } else {
      out.back().body.push_back(b);
    }
  }
  if (preamble)
    warnings.push_back(std::to_string(preamble) + " block(s) before the first top-level heading were ignored");
  return out;
}

}  // namespace

ConvertedDocument convert_document(std::string_view html_text, const std::string& doc_stem,
                                   const std::string& source_name, BlockClassifier& classifier) {
  ConvertedDocument doc;
  doc.source_name = source_name;
  auto blocks = extract_blocks(html_text);
  if (blocks.empty()) throw Error(ErrorCode::kValidation, source_name + ": document has no text content");

  std::string title;
  {
    auto dom = html::parse(html_text);
    if (const Node* t = html::find_first(*dom, "title")) title = text_of(*t);
  }
  if (title.empty()) title = doc_stem;

  auto sections = split_sections(blocks, title, doc.warnings);
  if (sections.size() > 1)
    doc.warnings.push_back("document split into " + std::to_string(sections.size()) +
                           " workflows, one per top-level heading");
  for (std::size_t s = 0; s < sections.size(); ++s) {
    auto& sec = sections[s];
    ConvertedWorkflow wf;
    std::string wf_id = sections.size() == 1 ? doc_stem : doc_stem + "-" + std::to_string(s + 1);
    wf.intent_label = slugify(sec.title);
    if (wf.intent_label.empty()) wf.intent_label = slugify(doc_stem);
    if (wf.intent_label.empty()) wf.intent_label = "intent_" + std::to_string(s + 1);
    wf.blocks = sec.body;
    wf.labels = classify_blocks(wf.blocks, classifier);
    AssembledTree at;
    try {
      at = assemble_tree(wf.blocks, wf.labels, wf.intent_label, wf_id, sec.title);
    } catch (const Error& e) {
      throw Error(e.code(), source_name + ": section '" + sec.title + "': " + e.what());
    }
    wf.warnings = std::move(at.warnings);
    auto [tree, actions] = assign_action_ids(at.tree, at.leaf_texts);
    auto violations = validate_tree(tree, {true, &actions});
    if (!violations.empty())
      throw Error(ErrorCode::kInternal, source_name + ": assembled tree is invalid: " + violations[0].message);
    wf.ica_text = print_ica(tree, actions);
    auto parsed = parse_ica(wf.ica_text, wf_id);
    if (!parsed.ok())
      throw Error(ErrorCode::kInternal, source_name + ": printed workflow does not parse: " + parsed.error_summary());
    wf.document = std::move(*parsed.document);
    wf.document.action_map = std::move(actions);
    doc.workflows.push_back(std::move(wf));
  }
  return doc;
}

Json blocks_to_json(std::span<const ContentBlock> blocks, std::span<const BlockLabel> labels) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    Json j;
    j["block_id"] = b.block_id;
    j["text"] = b.text;
    j["depth"] = b.depth;
    j["parent_block_id"] = b.parent_block_id ? Json(*b.parent_block_id) : Json(nullptr);
    j["source_kind"] = to_string(b.source_kind);
    if (b.source_kind == SourceKind::kHeading) j["heading_level"] = b.heading_level;
    if (!b.cell_header.empty()) j["cell_header"] = b.cell_header;
    if (i < labels.size()) {
      j["label"] = to_string(labels[i].label);
      j["confidence"] = labels[i].confidence;
      j["needs_review"] = labels[i].confidence < kReviewThreshold;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

Json review_report(std::span<const ConvertedDocument> docs) {
  Json j;
  j["review_threshold"] = kReviewThreshold;
  j["split_policy"] = "one workflow per top-level heading";
  Json arr = Json::array();
  for (const auto& d : docs) {
    Json dj;
    dj["source"] = d.source_name;
    dj["warnings"] = d.warnings;
    Json wfs = Json::array();
    for (const auto& w : d.workflows) {
      Json wj;
      wj["workflow_id"] = w.document.workflow_id;
      wj["intent_label"] = w.intent_label;
      std::size_t flagged = 0;
      for (const auto& l : w.labels) flagged += l.confidence < kReviewThreshold;
      wj["flagged_blocks"] = flagged;
      wj["warnings"] = w.warnings;
      wj["blocks"] = blocks_to_json(w.blocks, w.labels);
      wfs.push_back(std::move(wj));
    }
    dj["workflows"] = std::move(wfs);
    arr.push_back(std::move(dj));
  }
  j["documents"] = std::move(arr);
  return j;
}

ConvertSummary convert_path(const fs::path& input, const fs::path& out_dir, BlockClassifier& classifier) {
  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::directory_iterator(input))
      if (e.is_regular_file() && (e.path().extension() == ".html" || e.path().extension() == ".htm"))
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorCode::kNotFound, "no .html files in " + input.string());
  } else if (fs::is_regular_file(input)) {
    files.push_back(input);
  } else {
    throw Error(ErrorCode::kNotFound, "no such file or directory: " + input.string());
  }

  std::vector<ConvertedDocument> docs;
  for (const auto& f : files)
    docs.push_back(convert_document(util::read_file(f), f.stem().string(), f.filename().string(), classifier));

  ConvertSummary summary;
  fs::create_directories(out_dir);
  ActionMap all;
  std::set<std::string> ids;
  for (const auto& d : docs) {
    for (const auto& w : d.workflows) {
      const std::string& id = w.document.workflow_id;
      if (!ids.insert(id).second) throw Error(ErrorCode::kValidation, "duplicate workflow id '" + id + "'");
      fs::path p = out_dir / (id + ".ica");
      util::write_file(p, w.ica_text);
      summary.written.push_back(p);
      all.merge(w.document.action_map);
      ++summary.workflows;
      for (const auto& l : w.labels) summary.flagged_blocks += l.confidence < kReviewThreshold;
    }
  }
  util::write_file(out_dir / "actions.json", dump_canonical(action_map_to_json(all)));
  util::write_file(out_dir / "review_report.json", dump_canonical(review_report(docs)));
  summary.written.push_back(out_dir / "actions.json");
  summary.written.push_back(out_dir / "review_report.json");
  return summary;
}

}  // namespace ica
