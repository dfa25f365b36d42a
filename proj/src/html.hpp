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

// Small tolerant HTML parser. Good enough for exported knowledge-base pages:
// no scripting, no foreign content, a handful of implied end tags.

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace ica::html {

struct Node {
  bool is_text = false;
  std::string name;  // lowercased tag name, empty for text
  std::string text;  // entity-decoded, text nodes only
  std::vector<std::unique_ptr<Node>> children;
  Node* parent = nullptr;

  bool is(std::string_view tag) const { return !is_text && name == tag; }
};

/// Parses `src` into a document node. Throws Error(kParse) on invalid UTF-8.
std::unique_ptr<Node> parse(std::string_view src);

std::string decode_entities(std::string_view s);

/// First element named `tag` in document order, or nullptr.
const Node* find_first(const Node& root, std::string_view tag);

}  // namespace ica::html
