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

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ica/ingest.hpp"
#include "ica/interpreter.hpp"
#include "support/generators.hpp"

using namespace ica;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path kHtmlDir = fs::path(ICA_FIXTURES_DIR) / "html";
const fs::path kGoldenDir = fs::path(ICA_FIXTURES_DIR) / "golden" / "convert";

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Random HTML built from a known list of words, so the content-loss oracle is
// just that list.
struct HtmlGen {
  testing::Gen& g;
  bool spaced;     // extra whitespace between tags
  bool flip_attrs;  // attribute order
  std::vector<std::string> emitted;

  // Draws the same numbers either way so both variants stay in step.
  std::string ws() {
    std::string w = std::string(static_cast<std::size_t>(g.between(0, 3)), ' ') + (g.chance(0.5) ? "\n" : "");
    return spaced ? w : "";
  }

  std::string attrs() {
    std::string a = " class=\"c" + std::to_string(g.between(0, 9)) + "\"";
    std::string b = " data-x='" + std::to_string(g.between(0, 9)) + "'";
    return flip_attrs ? b + a : a + b;
  }

  std::string text() {
    static const char* kWords[] = {"alpha", "bravo", "refund", "guest", "host", "policy", "night", "fee", "caf\xC3\xA9"};
    int n = g.between(1, 4);
    std::string t;
    for (int i = 0; i < n; ++i) {
      std::string w = kWords[g.index(std::size(kWords))];
      if (w == "fee" && g.chance(0.3)) {
        emitted.push_back("fee&more");
        w = "fee&amp;more";
      } else {
        emitted.push_back(w);
      }
      if (g.chance(0.2)) w = "<b>" + w + "</b>";
      t += (i ? " " : "") + w;
    }
    return t;
  }

  std::string list(int depth) {
    std::string tag = g.chance(0.5) ? "ul" : "ol";
    std::string out = "<" + tag + attrs() + ">" + ws();
    int n = g.between(1, 3);
    for (int i = 0; i < n; ++i) {
      out += "<li" + attrs() + ">" + text();
      if (depth < 3 && g.chance(0.4)) out += ws() + list(depth + 1);
      out += "</li>" + ws();
    }
    return out + "</" + tag + ">";
  }

  std::string document() {
    std::string out = "<html><head><title>t</title></head><body" + attrs() + ">" + ws();
    int sections = g.between(1, 3);
    for (int s = 0; s < sections; ++s) {
      out += "<h" + std::to_string(g.between(1, 3)) + ">" + text() + "</h" + "1>" + ws();
      // mismatched heading end tags are repaired by the heading rule
      int n = g.between(1, 3);
      for (int i = 0; i < n; ++i) {
        if (g.chance(0.5))
          out += "<p" + attrs() + ">" + text() + "</p>" + ws();
        else
          out += list(0) + ws();
      }
    }
    return out + "</body></html>";
  }
};

class FakeClient : public LlmClient {
 public:
  std::vector<std::string> replies;
  bool fail = false;
  std::size_t calls = 0;
  Completion complete(const std::string&, int, std::chrono::milliseconds) override {
    if (fail) throw StageError(ErrorCode::kTransport, "client", "connection refused");
    return {replies[calls++ % replies.size()], 0.0};
  }
};

}  // namespace

TEST_CASE("extract_blocks: nested list items") {
  auto blocks = extract_blocks("<ul><li>A<ul><li>B</li></ul></li></ul>");
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].text == "A");
  CHECK(blocks[1].text == "B");
  CHECK(blocks[1].depth == blocks[0].depth + 1);
  CHECK(blocks[1].parent_block_id == blocks[0].block_id);
  CHECK(blocks[0].source_kind == SourceKind::kListItem);
}

TEST_CASE("extract_blocks: table cells carry their headers") {
  auto blocks = extract_blocks(
      "<table><tr><th></th><th>Col1</th></tr><tr><th>Row1</th><td>V</td></tr></table>");
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].text == "Row1 / Col1: V");
  CHECK(blocks[0].source_kind == SourceKind::kTableCell);
  CHECK(blocks[0].cell_header == "Row1 / Col1");
}

TEST_CASE("extract_blocks: empty input, bad bytes, skipped elements") {
  CHECK(extract_blocks("").empty());
  CHECK(extract_blocks("<html><head><title>x</title></head><body>  </body></html>").empty());
  try {
    extract_blocks("<p>caf\xC3</p>");
    FAIL("expected a decoding error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
  }
  auto blocks = extract_blocks("<body><script>var a = '<p>x</p>';</script><p>kept &amp; decoded&nbsp;here</p></body>");
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].text == "kept & decoded here");
}

TEST_CASE("extract_blocks: headings nest by level, content hangs under them") {
  auto blocks = extract_blocks("<h1>T</h1><p>intro</p><h2>S</h2><ul><li>x</li></ul><h2>U</h2><p>y</p>");
  REQUIRE(blocks.size() == 6);
  CHECK(blocks[1].parent_block_id == 0);
  CHECK(blocks[2].parent_block_id == 0);
  CHECK(blocks[3].parent_block_id == 2);
  CHECK(blocks[4].parent_block_id == 0);
  CHECK(blocks[5].parent_block_id == 4);
  CHECK(blocks[5].depth == 2);
}

TEST_CASE("extract_blocks: unclosed tags are repaired like their closed form") {
  auto loose = extract_blocks("<ul><li>a<li>b<ul><li>c</ul><li>d</ul><p>e<p>f");
  auto tight = extract_blocks("<ul><li>a</li><li>b<ul><li>c</li></ul></li><li>d</li></ul><p>e</p><p>f</p>");
  REQUIRE(loose.size() == tight.size());
  for (std::size_t i = 0; i < loose.size(); ++i) {
    CHECK(loose[i].text == tight[i].text);
    CHECK(loose[i].parent_block_id == tight[i].parent_block_id);
  }
}

TEST_CASE("property: extraction ignores inter-tag whitespace and attribute order, loses nothing") {
  testing::Gen g(5);
  for (int i = 0; i < 300; ++i) {
    std::uint64_t seed = g.between(0, 1 << 30);
    testing::Gen g1(seed), g2(seed);
    HtmlGen a{g1, false, false, {}};
    HtmlGen b{g2, true, true, {}};
    std::string da = a.document(), db = b.document();
    auto ba = extract_blocks(da);
    auto bb = extract_blocks(db);
    REQUIRE(ba.size() == bb.size());
    std::vector<std::string> got;
    for (std::size_t k = 0; k < ba.size(); ++k) {
      CHECK(ba[k].text == bb[k].text);
      CHECK(ba[k].depth == bb[k].depth);
      CHECK(ba[k].parent_block_id == bb[k].parent_block_id);
      if (ba[k].parent_block_id) CHECK(ba[k].depth == ba[static_cast<std::size_t>(*ba[k].parent_block_id)].depth + 1);
      for (auto& w : words(ba[k].text)) got.push_back(w);
    }
    auto want = a.emitted;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
    CHECK(blocks_to_json(extract_blocks(da)) == blocks_to_json(ba));
  }
}

TEST_CASE("rule classifier examples") {
  RuleBasedClassifier c;
  CHECK(classify_blocks(std::vector<ContentBlock>{}, c).empty());
  std::vector<ContentBlock> blocks{
      {0, "If the reservation is canceled within 24 hours", 0, std::nullopt, SourceKind::kListItem, 0, {}},
      {1, "Issue a full refund to the guest", 1, 0, SourceKind::kListItem, 0, {}},
      {2, "Eligible stays:", 0, std::nullopt, SourceKind::kParagraph, 0, {}},
      {3, "Otherwise", 0, std::nullopt, SourceKind::kListItem, 0, {}},
      {4, "Some remark", 0, std::nullopt, SourceKind::kParagraph, 0, {}},
  };
  blocks.push_back({5, "Covered", 1, 2, SourceKind::kListItem, 0, {}});
  auto labels = classify_blocks(blocks, c);
  CHECK(labels[0].label == BlockKind::kCondition);
  CHECK(labels[1].label == BlockKind::kAction);
  CHECK(labels[1].confidence >= kReviewThreshold);
  CHECK(labels[2].label == BlockKind::kCondition);
  CHECK(labels[3].label == BlockKind::kCondition);
  CHECK(labels[4].label == BlockKind::kAction);
  CHECK(labels[4].confidence < kReviewThreshold);
  auto again = classify_blocks(blocks, c);
  for (std::size_t i = 0; i < labels.size(); ++i) CHECK(again[i].confidence == labels[i].confidence);
}

TEST_CASE("llm classifier adapter") {
  std::vector<ContentBlock> blocks{{0, "If late", 0, std::nullopt, SourceKind::kListItem, 0, {}},
                                   {1, "Refund", 1, 0, SourceKind::kListItem, 0, {}}};
  FakeClient client;
  client.replies = {"Thinking...\nLabel: condition", "label: ACTION"};
  LlmBlockClassifier llm(client);
  auto labels = classify_blocks(blocks, llm);
  CHECK(labels[0].label == BlockKind::kCondition);
  CHECK(labels[1].label == BlockKind::kAction);
  CHECK(labels[1].confidence == doctest::Approx(0.9));

  client.replies = {"no idea"};
  CHECK(classify_blocks(blocks, llm)[0].confidence == 0.0);

  client.fail = true;
  try {
    classify_blocks(blocks, llm);
    FAIL("expected failure");
  } catch (const StageError& e) {
    CHECK(e.stage() == "classifier");
    CHECK(std::string(e.what()).find("block 0") != std::string::npos);
    CHECK(e.code() == ErrorCode::kTransport);
  }
}

TEST_CASE("assemble_tree examples") {
  std::vector<ContentBlock> blocks{{0, "If C", 1, std::nullopt, SourceKind::kListItem, 0, {}},
                                   {1, "Do A", 2, 0, SourceKind::kListItem, 0, {}}};
  std::vector<BlockLabel> labels{{0, BlockKind::kCondition, 1}, {1, BlockKind::kAction, 1}};
  auto at = assemble_tree(blocks, labels, "x", "w");
  CHECK(at.warnings.empty());
  CHECK(at.tree.nodes.size() == 3);
  NodeId c = at.tree.node(at.tree.root).children.at(0);
  NodeId leaf = at.tree.node(c).children.at(0);
  CHECK(at.leaf_texts.at(leaf) == "Do A");
  auto [tree, actions] = assign_action_ids(at.tree, at.leaf_texts);
  CHECK(validate_tree(tree, {true, &actions}).empty());

  std::vector<ContentBlock> lone{{0, "Do A", 1, std::nullopt, SourceKind::kParagraph, 0, {}}};
  auto at2 = assemble_tree(lone, std::vector<BlockLabel>{{0, BlockKind::kAction, 1}}, "x", "w");
  CHECK(at2.tree.nodes.size() == 2);
  CHECK(at2.warnings.size() == 1);

  try {
    assemble_tree(std::vector<ContentBlock>{blocks[0]}, std::vector<BlockLabel>{labels[0]}, "x", "w");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "no actions found");
  }
}

TEST_CASE("assemble_tree: consecutive actions merge, else chains, demotion") {
  std::vector<ContentBlock> blocks{
      {0, "If a", 1, std::nullopt, SourceKind::kListItem, 0, {}},
      {1, "Do one.", 2, 0, SourceKind::kListItem, 0, {}},
      {2, "Do two.", 2, 0, SourceKind::kListItem, 0, {}},
      {3, "Otherwise:", 1, std::nullopt, SourceKind::kListItem, 0, {}},
      {4, "Do three.", 2, 3, SourceKind::kListItem, 0, {}},
      {5, "Otherwise", 1, std::nullopt, SourceKind::kListItem, 0, {}},
      {6, "If nothing below", 1, std::nullopt, SourceKind::kListItem, 0, {}},
  };
  std::vector<BlockLabel> labels;
  for (int i = 0; i < 7; ++i)
    labels.push_back({i, (i == 0 || i == 3 || i == 5 || i == 6) ? BlockKind::kCondition : BlockKind::kAction, 1});
  // block 5 governs nothing; it is demoted and so is 6
  auto at = assemble_tree(blocks, labels, "x", "w");
  auto [tree, actions] = assign_action_ids(at.tree, at.leaf_texts);
  CHECK(validate_tree(tree, {true, &actions}).empty());
  const auto& kids = tree.node(tree.root).children;
  REQUIRE(kids.size() == 3);
  CHECK(tree.node(kids[1]).condition().kind == ConditionKind::kElse);
  CHECK(resolve_action(actions, "w", 1) == "Do one. Do two.");
  CHECK(resolve_action(actions, "w", 3) == "Otherwise If nothing below");
  CHECK(at.warnings.size() == 2);
}

TEST_CASE("end to end: every fixture converts to a valid, parseable workflow") {
  RuleBasedClassifier c;
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(kHtmlDir)) {
    if (e.path().extension() != ".html") continue;
    auto doc = convert_document(slurp(e.path()), e.path().stem().string(), e.path().filename().string(), c);
    for (const auto& w : doc.workflows) {
      ++n;
      auto parsed = parse_ica(w.ica_text, w.document.workflow_id);
      REQUIRE(parsed.ok());
      CHECK(validate_tree(parsed.document->tree, {true, &w.document.action_map}).empty());
      CHECK(print_ica(parsed.document->tree, w.document.action_map) == w.ica_text);
    }
  }
  CHECK(n >= 5);
}

TEST_CASE("multi-intent documents split per top-level heading") {
  RuleBasedClassifier c;
  auto doc = convert_document(slurp(kHtmlDir / "workflow_03.html"), "workflow_03", "workflow_03.html", c);
  REQUIRE(doc.workflows.size() == 2);
  CHECK(doc.workflows[0].document.workflow_id == "workflow_03-1");
  CHECK(doc.workflows[1].intent_label == "guest_add_another_guest");
  CHECK_FALSE(doc.warnings.empty());
}

TEST_CASE("golden: workflow_01 block list") {
  auto blocks = extract_blocks(slurp(kHtmlDir / "workflow_01.html"));
  RuleBasedClassifier c;
  auto labels = classify_blocks(blocks, c);
  CHECK(dump_canonical(blocks_to_json(blocks, labels)) ==
        slurp(fs::path(ICA_FIXTURES_DIR) / "golden" / "workflow_01.blocks.json"));
}

TEST_CASE("golden: convert reproduces the committed outputs") {
  RuleBasedClassifier c;
  fs::path out = fs::temp_directory_path() / "ica_convert_golden_test";
  fs::remove_all(out);
  auto summary = convert_path(kHtmlDir, out, c);
  CHECK(summary.workflows >= 5);
  for (const auto& p : summary.written) {
    INFO(p.string());
    CHECK(slurp(p) == slurp(kGoldenDir / p.filename()));
  }
  fs::remove_all(out);
}
