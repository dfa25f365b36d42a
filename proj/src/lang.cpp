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

#include "ica/lang.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>

#include "util.hpp"

namespace ica {

namespace {

constexpr std::size_t kCommentPreview = 60;

struct LineError {
  std::size_t column;  // 0-based offset within the full line
  std::string message;
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_number_literal(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && s[i] == '-') ++i;
  if (i >= s.size() || !is_digit(s[i])) return false;
  if (s[i] == '0') {
    ++i;
  } else {
    while (i < s.size() && is_digit(s[i])) ++i;
  }
  if (i < s.size() && s[i] == '.') {
    ++i;
    if (i >= s.size() || !is_digit(s[i])) return false;
    while (i < s.size() && is_digit(s[i])) ++i;
  }
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    if (i >= s.size() || !is_digit(s[i])) return false;
    while (i < s.size() && is_digit(s[i])) ++i;
  }
  return i == s.size();
}

Scalar classify_bare(std::string_view raw) {
  if (is_number_literal(raw)) {
    double d = 0;
    auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), d);
    if (ec == std::errc() && p == raw.data() + raw.size()) return d;
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  return std::string(raw);
}

bool bare_safe(std::string_view s) {
  if (s.empty() || s != util::trim(s)) return false;
  if (is_number_literal(s) || s == "true" || s == "false") return false;
  if (s.find("--") != std::string_view::npos) return false;
  return std::none_of(s.begin(), s.end(), [](char c) {
    return c == '"' || c == ',' || c == '[' || c == ']' || c == '#' || c == '\\' ||
           static_cast<unsigned char>(c) < 0x20 || c == 0x7f;
  });
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

/// Cursor over one statement. Offsets reported in errors are relative to the
/// full line (the statement starts at `base`).
class Cursor {
 public:
  Cursor(std::string_view text, std::size_t base) : s_(text), base_(base) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  std::size_t column() const { return base_ + pos_; }
  std::string_view rest() const { return s_.substr(std::min(pos_, s_.size())); }

  [[noreturn]] void fail(std::string msg) const { throw LineError{column(), std::move(msg)}; }

  void skip_spaces() {
    while (!done() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool consume(std::string_view token) {
    if (rest().substr(0, token.size()) != token) return false;
    pos_ += token.size();
    return true;
  }

  /// Consumes `word` only when followed by whitespace or end of statement.
  bool consume_word(std::string_view word) {
    if (!util::starts_with_word(rest(), word)) return false;
    pos_ += word.size();
    return true;
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (!done()) {
      char c = s_[pos_];
      bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '.' ||
                (pos_ > start && is_digit(c));
      if (!ok) break;
      ++pos_;
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string token() {
    std::size_t start = pos_;
    while (!done() && s_[pos_] != ' ' && s_[pos_] != '\t') ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string quoted() {
    if (!consume("\"")) fail("expected '\"'");
    std::string out;
    while (true) {
      if (done()) fail("unterminated quoted text");
      char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (done()) fail("unterminated escape sequence");
      char e = s_[pos_++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        default: fail(std::string("unknown escape sequence '\\") + e + "'");
      }
    }
  }

  /// Offset of the ` --` description separator in the remaining text, or npos.
  std::size_t find_separator() const {
    std::string_view r = rest();
    for (std::size_t i = 0; i + 2 < r.size() + 1; ++i) {
      if ((i == 0 || r[i - 1] == ' ') && r.substr(i, 2) == "--" &&
          (i + 2 == r.size() || r[i + 2] == ' '))
        return i;
    }
    return std::string_view::npos;
  }

  Scalar scalar_value() {
    if (peek() == '"') return quoted();
    std::size_t sep = find_separator();
    std::string raw = util::trim(rest().substr(0, sep));
    if (raw.empty()) fail("expected a value");
    pos_ += sep == std::string_view::npos ? rest().size() : sep;
    return classify_bare(raw);
  }

  std::vector<Scalar> set_value() {
    if (!consume("[")) fail("expected '[' to open a value set");
    std::vector<Scalar> values;
    skip_spaces();
    if (consume("]")) fail("value set must not be empty");
    while (true) {
      skip_spaces();
      if (peek() == '"') {
        values.emplace_back(quoted());
      } else {
        std::size_t start = pos_;
        while (!done() && s_[pos_] != ',' && s_[pos_] != ']') ++pos_;
        std::string raw = util::trim(s_.substr(start, pos_ - start));
        if (raw.empty()) fail("expected a value");
        values.push_back(classify_bare(raw));
      }
      skip_spaces();
      if (consume("]")) return values;
      if (!consume(",")) fail("expected ',' or ']' in value set");
    }
  }

  /// Optional trailing `-- description`; anything else is an error.
  std::string description() {
    skip_spaces();
    if (done()) return {};
    if (!consume("--")) fail("unexpected text '" + std::string(rest()) + "'");
    if (!done() && peek() != ' ') fail("expected a space after '--'");
    std::string d = util::trim(rest());
    pos_ = s_.size();
    return d;
  }

 private:
  std::string_view s_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

enum class StmtKind { kIntent, kIf, kElse, kThen };

struct Statement {
  StmtKind kind;
  ConditionExpr cond;
  int action_id = 0;
  std::string description;
};

Statement parse_statement(std::string_view content, std::size_t indent) {
  Cursor cur(content, indent);
  Statement st{};
  if (cur.consume("intent:")) {
    st.kind = StmtKind::kIntent;
    cur.skip_spaces();
    std::string label = cur.token();
    if (label.empty() || label == "--") cur.fail("expected an intent label");
    st.cond = ConditionExpr::intent(label);
    st.description = cur.description();
    return st;
  }
  if (cur.consume_word("if")) {
    st.kind = StmtKind::kIf;
    cur.skip_spaces();
    std::string key = cur.identifier();
    if (key.empty()) cur.fail("expected a context key");
    if (!cur.done() && cur.peek() != ' ') cur.fail("invalid character in context key");
    cur.skip_spaces();
    if (cur.consume("==")) {
      cur.skip_spaces();
      st.cond = ConditionExpr::compare(ConditionKind::kEquals, key, cur.scalar_value());
    } else if (cur.consume("!=")) {
      cur.skip_spaces();
      st.cond = ConditionExpr::compare(ConditionKind::kNotEquals, key, cur.scalar_value());
    } else if (cur.consume("<")) {
      cur.skip_spaces();
      Scalar v = cur.scalar_value();
      if (type_of(v) != ScalarType::kNumber) cur.fail("'<' needs a number");
      st.cond = ConditionExpr::compare(ConditionKind::kLessThan, key, v);
    } else if (cur.consume(">")) {
      cur.skip_spaces();
      Scalar v = cur.scalar_value();
      if (type_of(v) != ScalarType::kNumber) cur.fail("'>' needs a number");
      st.cond = ConditionExpr::compare(ConditionKind::kGreaterThan, key, v);
    } else if (cur.consume_word("in")) {
      cur.skip_spaces();
      st.cond = ConditionExpr::in_set(key, cur.set_value());
    } else if (cur.consume_word("exists")) {
      st.cond = ConditionExpr::exists(key);
    } else if (cur.consume_word("is")) {
      cur.skip_spaces();
      if (!cur.consume_word("true")) cur.fail("expected 'true' after 'is'");
      st.cond = ConditionExpr::boolean_true(key);
    } else {
      cur.fail("expected an operator (==, !=, <, >, in, exists, is true)");
    }
    st.description = cur.description();
    return st;
  }
  if (cur.consume_word("else")) {
    st.kind = StmtKind::kElse;
    st.cond = ConditionExpr::otherwise();
    st.description = cur.description();
    return st;
  }
  if (cur.consume_word("then")) {
    st.kind = StmtKind::kThen;
    cur.skip_spaces();
    if (!cur.consume_word("do")) cur.fail("expected 'then do Action <id>'");
    cur.skip_spaces();
    if (!cur.consume_word("Action")) cur.fail("expected 'then do Action <id>'");
    cur.skip_spaces();
    std::string digits = cur.token();
    std::size_t hash = digits.find('#');
    if (hash != std::string::npos) cur.fail("expected whitespace before '#'");
    int id = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
    if (digits.empty() || ec != std::errc() || p != digits.data() + digits.size() || id <= 0 ||
        digits[0] == '+' || digits[0] == '-')
      cur.fail("action id '" + digits + "' is not a positive integer");
    st.action_id = id;
    cur.skip_spaces();
    if (!cur.done() && cur.peek() != '#') cur.fail("unexpected text after action id");
    return st;
  }
  cur.fail("unrecognized statement; expected intent:, if, else or then do");
}

std::string description_suffix(const std::string& d) { return d.empty() ? "" : " -- " + d; }

}  // namespace

std::string ParseResult::error_summary() const {
  std::vector<std::string> parts;
  for (const auto& d : diagnostics)
    if (d.severity == Severity::kError)
      parts.push_back(std::to_string(d.line) + ":" + std::to_string(d.column) + ": " + d.message);
  return util::join(parts, "; ");
}

ParseResult parse_ica(std::string_view text, const std::string& workflow_id,
                      const ParseOptions& options) {
  ParseResult result;
  auto error = [&](int line, std::size_t column, std::string message) {
    result.diagnostics.push_back(
        {line, static_cast<int>(column) + 1, Severity::kError, std::move(message)});
  };
  if (!util::valid_utf8(text)) {
    error(1, 0, "input is not valid UTF-8");
    return result;
  }

  const auto lines = util::split_lines(text);
  DecisionTree tree;
  tree.workflow_id = workflow_id;
  std::map<NodeId, int> node_lines;
  std::map<NodeId, std::size_t> node_cols;
  struct Open {
    NodeId id;
    int depth;
  };
  std::vector<Open> open;
  bool have_root = false;
  int last_leaf_depth = -1;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const int lineno = static_cast<int>(i) + 1;
    std::size_t indent = 0;
    while (indent < line.size() && line[indent] == ' ') ++indent;
    std::string content = util::trim(std::string_view(line).substr(indent));
    if (content.empty() || content[0] == '#') continue;
    if (line[indent] == '\t') {
      error(lineno, indent, "tab in indentation; use two spaces per level");
      continue;
    }
    if (indent % 2 != 0) {
      error(lineno, 0, "indentation must be a multiple of 2 spaces");
      continue;
    }
    const int depth = static_cast<int>(indent / 2);

    Statement st;
    try {
      st = parse_statement(content, indent);
    } catch (const LineError& e) {
      error(lineno, std::min(e.column, line.size()), e.message);
      continue;
    }

    if (!have_root) {
      if (st.kind != StmtKind::kIntent) {
        error(lineno, indent, "missing intent header: a workflow must start with 'intent:'");
        return result;
      }
      if (depth != 0) error(lineno, 0, "intent header must not be indented");
      NodeId root = tree.add(std::nullopt, st.cond, st.description);
      node_lines[root] = lineno;
      node_cols[root] = indent;
      open = {{root, 0}};
      have_root = true;
      continue;
    }
    if (st.kind == StmtKind::kIntent) {
      error(lineno, indent, "only one intent header is allowed per workflow");
      continue;
    }
    if (depth == 0) {
      error(lineno, 0, "statement must be nested under the intent header");
      continue;
    }
    if (last_leaf_depth >= 0 && depth > last_leaf_depth) {
      error(lineno, 0, "an action line cannot have nested statements");
      continue;
    }
    if (depth > open.back().depth + 1) {
      error(lineno, 0, "indentation jumps more than one level");
      continue;
    }
    while (open.back().depth >= depth) open.pop_back();
    const NodeId parent = open.back().id;

    if (st.kind == StmtKind::kElse) {
      // Walk back over the parent's children to the nearest condition.
      const auto& siblings = tree.node(parent).children;
      auto prev = std::find_if(siblings.rbegin(), siblings.rend(),
                               [&](NodeId c) { return !tree.node(c).is_leaf(); });
      if (prev == siblings.rend() ||
          tree.node(*prev).condition().kind == ConditionKind::kElse) {
        error(lineno, indent, "dangling else: 'else' must follow an 'if' at the same depth");
        continue;
      }
    }

    NodeId id;
    if (st.kind == StmtKind::kThen) {
      id = tree.add(parent, ActionRef{st.action_id});
      last_leaf_depth = depth;
    } else {
      id = tree.add(parent, st.cond, st.description);
      open.push_back({id, depth});
      last_leaf_depth = -1;
    }
    node_lines[id] = lineno;
    node_cols[id] = indent;
  }

  if (!have_root) {
    if (result.diagnostics.empty())
      error(1, 0, "missing intent header: a workflow must start with 'intent:'");
    return result;
  }
  if (!result.diagnostics.empty()) return result;

  ValidationOptions vo;
  vo.require_contiguous_ids = options.require_contiguous_ids;
  for (const auto& v : validate_tree(tree, vo)) {
    int line = v.node && node_lines.count(*v.node) ? node_lines[*v.node] : 1;
    std::size_t col = v.node && node_cols.count(*v.node) ? node_cols[*v.node] : 0;
    std::string message = v.code == "childless-condition"
                              ? "condition has no actions beneath it"
                              : v.message;
    error(line, col, message);
  }
  if (!result.diagnostics.empty()) return result;

  IcaDocument doc;
  doc.workflow_id = workflow_id;
  doc.source_text = std::string(text);
  doc.tree = std::move(tree);
  doc.node_lines = std::move(node_lines);
  result.document = std::move(doc);
  return result;
}

std::string format_literal(const Scalar& value) {
  if (type_of(value) != ScalarType::kText) return display(value);
  const auto& s = std::get<std::string>(value);
  return bare_safe(s) ? s : quote(s);
}

std::optional<Scalar> parse_literal(std::string_view text) {
  std::string t = util::trim(text);
  if (t.empty()) return std::nullopt;
  if (t[0] != '"') return classify_bare(t);
  try {
    Cursor cur(t, 0);
    std::string s = cur.quoted();
    if (!cur.done()) return std::nullopt;
    return Scalar{std::move(s)};
  } catch (const LineError&) {
    return std::nullopt;
  }
}

std::string format_condition(const ConditionExpr& c) {
  auto first = [&] { return c.values.empty() ? std::string() : format_literal(c.values[0]); };
  switch (c.kind) {
    case ConditionKind::kIntentLabel: return "intent is " + c.intent_label;
    case ConditionKind::kEquals: return c.key + " == " + first();
    case ConditionKind::kNotEquals: return c.key + " != " + first();
    case ConditionKind::kLessThan: return c.key + " < " + first();
    case ConditionKind::kGreaterThan: return c.key + " > " + first();
    case ConditionKind::kInSet: {
      std::vector<std::string> items;
      for (const auto& v : c.values) items.push_back(format_literal(v));
      return c.key + " in [" + util::join(items, ", ") + "]";
    }
    case ConditionKind::kExists: return c.key + " exists";
    case ConditionKind::kBooleanTrue: return c.key + " is true";
    case ConditionKind::kElse: return "otherwise";
  }
  return {};
}

std::string print_ica(const DecisionTree& tree, const ActionMap& action_map) {
  std::string out;
  std::function<void(NodeId, int)> emit = [&](NodeId id, int depth) {
    const TreeNode& n = tree.node(id);
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    if (n.is_leaf()) {
      const std::string& content = [&]() -> const std::string& {
        try {
          return resolve_action(action_map, tree.workflow_id, n.action_id());
        } catch (const ActionNotFound&) {
          throw Error(ErrorCode::kNotFound, "unresolvable ActionRef: action " +
                                                std::to_string(n.action_id()) +
                                                " of workflow '" + tree.workflow_id + "'");
        }
      }();
      out += "then do Action " + std::to_string(n.action_id());
      std::string preview = util::trim(util::utf8_prefix(util::normalize_space(content), kCommentPreview));
      if (!preview.empty()) out += "  # " + preview;
      out += '\n';
      return;
    }
    const ConditionExpr& c = n.condition();
    switch (c.kind) {
      case ConditionKind::kIntentLabel: out += "intent: " + c.intent_label; break;
      case ConditionKind::kElse: out += "else"; break;
      default: out += "if " + format_condition(c); break;
    }
    out += description_suffix(n.description);
    out += '\n';
    for (NodeId child : n.children) emit(child, depth + 1);
  };
  emit(tree.root, 0);
  return out;
}

bool subsumes(const ConditionExpr& a, const ConditionExpr& b) {
  using K = ConditionKind;
  auto is_context = [](K k) { return k != K::kIntentLabel && k != K::kElse; };
  if (!is_context(a.kind) || !is_context(b.kind) || a.key != b.key) return false;
  if (a == b) return true;

  // Every value the later condition can accept, when that set is finite.
  std::optional<std::vector<Scalar>> accepted;
  if (b.kind == K::kEquals || b.kind == K::kInSet) accepted = b.values;
  if (b.kind == K::kBooleanTrue) accepted = std::vector<Scalar>{true};

  auto a_accepts = [&](const Scalar& v) -> bool {
    switch (a.kind) {
      case K::kEquals: return v == a.values[0];
      case K::kNotEquals: return type_of(v) == type_of(a.values[0]) && v != a.values[0];
      case K::kLessThan:
        return type_of(v) == ScalarType::kNumber && std::get<double>(v) < std::get<double>(a.values[0]);
      case K::kGreaterThan:
        return type_of(v) == ScalarType::kNumber && std::get<double>(v) > std::get<double>(a.values[0]);
      case K::kInSet: return std::find(a.values.begin(), a.values.end(), v) != a.values.end();
      case K::kBooleanTrue: return v == Scalar{true};
      case K::kExists: return true;
      default: return false;
    }
  };

  if (a.kind == K::kExists) return true;  // b needs the key to be present
  if (accepted) return std::all_of(accepted->begin(), accepted->end(), a_accepts);

  // b is an open range or a negation.
  const double* bound = b.values.empty() || type_of(b.values[0]) != ScalarType::kNumber
                            ? nullptr
                            : &std::get<double>(b.values[0]);
  if (!bound) return false;
  if (b.kind == K::kLessThan) {
    if (a.kind == K::kLessThan) return *bound <= std::get<double>(a.values[0]);
    if (a.kind == K::kNotEquals && type_of(a.values[0]) == ScalarType::kNumber)
      return std::get<double>(a.values[0]) >= *bound;
  }
  if (b.kind == K::kGreaterThan) {
    if (a.kind == K::kGreaterThan) return *bound >= std::get<double>(a.values[0]);
    if (a.kind == K::kNotEquals && type_of(a.values[0]) == ScalarType::kNumber)
      return std::get<double>(a.values[0]) <= *bound;
  }
  return false;
}

std::vector<LintWarning> lint_ica(const IcaDocument& doc) {
  std::vector<LintWarning> out;
  const DecisionTree& tree = doc.tree;
  auto line_of = [&](NodeId id) {
    auto it = doc.node_lines.find(id);
    return it == doc.node_lines.end() ? 0 : it->second;
  };
  std::set<int> used;
  for (NodeId id : tree.preorder()) {
    const TreeNode& n = tree.node(id);
    if (n.is_leaf()) {
      used.insert(n.action_id());
      continue;
    }
    std::vector<NodeId> conds;
    for (NodeId c : n.children) {
      const TreeNode& child = tree.node(c);
      if (child.is_leaf() || child.condition().kind == ConditionKind::kElse) continue;
      conds.push_back(c);
    }
    for (std::size_t j = 0; j < conds.size(); ++j) {
      const ConditionExpr& later = tree.node(conds[j]).condition();
      for (std::size_t i = 0; i < j; ++i) {
        const ConditionExpr& earlier = tree.node(conds[i]).condition();
        if (earlier == later) {
          out.push_back({"duplicate-condition", conds[j], line_of(conds[j]),
                         "duplicate sibling condition '" + format_condition(later) +
                             "' (first at line " + std::to_string(line_of(conds[i])) + ")"});
          break;
        }
        if (subsumes(earlier, later)) {
          out.push_back({"possibly-shadowed", conds[j], line_of(conds[j]),
                         "possibly shadowed: '" + format_condition(later) +
                             "' is implied by earlier sibling '" + format_condition(earlier) +
                             "' (line " + std::to_string(line_of(conds[i])) + ")"});
          break;
        }
      }
    }
  }
  for (int id : doc.action_map.ids_for(doc.workflow_id)) {
    if (!used.count(id))
      out.push_back({"unused-action", std::nullopt, 0,
                     "action " + std::to_string(id) + " is in the action map but never used"});
  }
  return out;
}

}  // namespace ica
