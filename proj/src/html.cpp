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

#include "html.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cstdint>
#include <initializer_list>
#include <map>

#include "ica/error.hpp"
#include "util.hpp"

namespace ica::html {

namespace {

bool in(std::string_view s, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

bool is_void(std::string_view n) {
  return in(n, {"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
                "track", "wbr"});
}

bool is_heading(std::string_view n) { return n.size() == 2 && n[0] == 'h' && n[1] >= '1' && n[1] <= '6'; }

bool closes_paragraph(std::string_view n) {
  return is_heading(n) || in(n, {"p", "div", "ul", "ol", "li", "table", "section", "article", "blockquote", "pre",
                                 "dl", "dd", "dt", "form", "header", "footer", "nav", "hr", "aside", "main"});
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

const std::map<std::string_view, std::uint32_t>& named_entities() {
  static const std::map<std::string_view, std::uint32_t> m = {
      {"amp", '&'},      {"lt", '<'},        {"gt", '>'},        {"quot", '"'},      {"apos", '\''},
      {"nbsp", 0xA0},    {"ndash", 0x2013},  {"mdash", 0x2014},  {"lsquo", 0x2018}, {"rsquo", 0x2019},
      {"ldquo", 0x201C}, {"rdquo", 0x201D},  {"hellip", 0x2026}, {"copy", 0xA9},    {"reg", 0xAE},
      {"trade", 0x2122}, {"euro", 0x20AC},   {"pound", 0xA3},    {"middot", 0xB7},  {"bull", 0x2022},
      {"times", 0xD7},   {"rarr", 0x2192},   {"larr", 0x2190},   {"deg", 0xB0},
  };
  return m;
}

class Builder {
 public:
  Builder() : root_(std::make_unique<Node>()) {
    root_->name = "#document";
    stack_.push_back(root_.get());
  }

  void start(std::string name, bool self_closing) {
    if (name == "li") close_in_scope({"li"}, {"ul", "ol", "table"});
    if (name == "dd" || name == "dt") close_in_scope({"dd", "dt"}, {"dl", "table"});
    if (name == "td" || name == "th") close_in_scope({"td", "th"}, {"tr", "table"});
    if (name == "tr") close_in_scope({"tr"}, {"table", "thead", "tbody", "tfoot"});
    if (in(name, {"thead", "tbody", "tfoot"})) close_in_scope({"thead", "tbody", "tfoot"}, {"table"});
    if (closes_paragraph(name)) close_in_scope({"p"}, {"li", "td", "th", "div", "table", "blockquote", "body"});
    if (is_heading(name) && is_heading(top()->name)) stack_.pop_back();

    auto node = std::make_unique<Node>();
    node->name = std::move(name);
    node->parent = top();
    Node* raw = node.get();
    top()->children.push_back(std::move(node));
    if (!self_closing && !is_void(raw->name)) stack_.push_back(raw);
  }

  void end(const std::string& name) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      // </h3> closes an open <h2>, as browsers do
      if (stack_[i]->name == name || (is_heading(name) && is_heading(stack_[i]->name))) {
        stack_.resize(i);
        return;
      }
      // An end tag never reaches outside the table or list that contains it.
      if (in(stack_[i]->name, {"table"}) && name != "table") return;
    }
  }

  void text(std::string t) {
    if (t.empty()) return;
    Node* parent = top();
    if (!parent->children.empty() && parent->children.back()->is_text) {
      parent->children.back()->text += t;
      return;
    }
    auto node = std::make_unique<Node>();
    node->is_text = true;
    node->text = std::move(t);
    node->parent = parent;
    parent->children.push_back(std::move(node));
  }

  std::unique_ptr<Node> finish() { return std::move(root_); }

 private:
  Node* top() const { return stack_.back(); }

  // Pops through the nearest open element named in `targets`, unless a
  // `boundary` element is found first.
  void close_in_scope(std::initializer_list<std::string_view> targets,
                      std::initializer_list<std::string_view> boundary) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const std::string& n = stack_[i]->name;
      if (in(n, targets)) {
        stack_.resize(i);
        return;
      }
      if (in(n, boundary)) return;
    }
  }

  std::unique_ptr<Node> root_;
  std::vector<Node*> stack_;
};

bool name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == ':';
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < needle.size() && ok; ++k)
      ok = std::tolower(static_cast<unsigned char>(hay[i + k])) == needle[k];
    if (ok) return i;
  }
  return std::string_view::npos;
}

// Index just past the '>' closing a tag that starts at `i`, honoring quoted
// attribute values. Sets `self_closing` when the tag ends in "/>".
std::size_t skip_tag(std::string_view s, std::size_t i, bool& self_closing) {
  char quote = 0;
  self_closing = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      self_closing = i > 0 && s[i - 1] == '/';
      return i + 1;
    }
  }
  return s.size();
}

}  // namespace

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    std::size_t semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 12) {
      out += s[i++];
      continue;
    }
    std::string_view body = s.substr(i + 1, semi - i - 1);
    if (!body.empty() && body[0] == '#') {
      std::uint32_t cp = 0;
      bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
      std::string_view digits = body.substr(hex ? 2 : 1);
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (ec == std::errc() && p == digits.data() + digits.size() && !digits.empty()) {
        append_utf8(out, cp);
        i = semi + 1;
        continue;
      }
    } else if (auto it = named_entities().find(body); it != named_entities().end()) {
      append_utf8(out, it->second);
      i = semi + 1;
      continue;
    }
    out += s[i++];
  }
  return out;
}

std::unique_ptr<Node> parse(std::string_view src) {
  if (!util::valid_utf8(src)) throw Error(ErrorCode::kParse, "input is not valid UTF-8");
  if (src.substr(0, 3) == "\xEF\xBB\xBF") src.remove_prefix(3);

  Builder b;
  std::size_t i = 0;
  std::string pending;
  auto flush = [&] {
    b.text(decode_entities(pending));
    pending.clear();
  };
  while (i < src.size()) {
    if (src[i] != '<') {
      pending += src[i++];
      continue;
    }
    if (src.compare(i, 4, "<!--") == 0) {
      flush();
      std::size_t e = src.find("-->", i + 4);
      i = e == std::string_view::npos ? src.size() : e + 3;
      continue;
    }
    if (i + 1 < src.size() && (src[i + 1] == '!' || src[i + 1] == '?')) {
      flush();
      bool sc;
      i = skip_tag(src, i, sc);
      continue;
    }
    bool closing = i + 1 < src.size() && src[i + 1] == '/';
    std::size_t n0 = i + (closing ? 2 : 1);
    std::size_t n1 = n0;
    while (n1 < src.size() && name_char(src[n1])) ++n1;
    if (n1 == n0 || !std::isalpha(static_cast<unsigned char>(src[n0]))) {
      pending += src[i++];  // stray '<'
      continue;
    }
    flush();
    std::string name = util::to_lower_ascii(src.substr(n0, n1 - n0));
    bool self_closing;
    i = skip_tag(src, n1, self_closing);
    if (closing) {
      b.end(name);
      continue;
    }
    b.start(name, self_closing);
    if (!self_closing && (name == "script" || name == "style")) {
      std::size_t e = find_ci(src, "</" + name, i);
      i = e == std::string_view::npos ? src.size() : e;
    }
  }
  flush();
  return b.finish();
}

const Node* find_first(const Node& root, std::string_view tag) {
  if (root.is(tag)) return &root;
  for (const auto& c : root.children)
    if (const Node* f = find_first(*c, tag)) return f;
  return nullptr;
}

}  // namespace ica::html
