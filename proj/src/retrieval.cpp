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

#include "ica/retrieval.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ica {

namespace {

// Sorted for binary search.
constexpr std::string_view kStopWords[] = {
    "a",       "about",   "above",  "after",  "again",   "against", "all",     "am",
    "an",      "and",     "any",    "are",    "as",      "at",      "be",      "because",
    "been",    "before",  "being",  "below",  "between", "both",    "but",     "by",
    "can",     "could",   "did",    "do",     "does",    "doing",   "down",    "during",
    "each",    "few",     "for",    "from",   "further", "had",     "has",     "have",
    "having",  "he",      "her",    "here",   "hers",    "herself", "him",     "himself",
    "his",     "how",     "i",      "if",     "in",      "into",    "is",      "it",
    "its",     "itself",  "just",   "me",     "more",    "most",    "my",      "myself",
    "need",    "no",      "nor",    "not",    "now",     "of",      "off",     "on",
    "once",    "only",    "or",     "other",  "our",     "ours",    "ourselves", "out",
    "over",    "own",     "please", "same",   "she",     "should",  "so",      "some",
    "such",    "than",    "that",   "the",    "their",   "theirs",  "them",    "themselves",
    "then",    "there",   "these",  "they",   "this",    "those",   "through", "to",
    "too",     "under",   "until",  "up",     "very",    "want",    "wants",   "was",
    "we",      "were",    "what",   "when",   "where",   "which",   "while",   "who",
    "whom",    "why",     "will",   "with",   "would",   "you",     "your",
};

bool word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

double idf_value(std::size_t n_docs, std::size_t df) {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

}  // namespace

std::span<const std::string_view> stop_words() { return kStopWords; }

bool is_stop_word(std::string_view token) {
  return std::binary_search(std::begin(kStopWords), std::end(kStopWords), token);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !is_stop_word(cur)) out.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (!word_byte(c)) {
      flush();
      continue;
    }
    cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
  }
  flush();
  return out;
}

IntentIndex IntentIndex::build(std::span<const IcaDocument> docs, const IntentAliases& aliases) {
  IntentIndex index;
  std::set<std::string> seen;
  for (const auto& doc : docs) {
    if (!seen.insert(doc.workflow_id).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate workflow id '" + doc.workflow_id + "'");
    const TreeNode& root = doc.tree.node(doc.tree.root);
    IntentEntry e;
    e.workflow_id = doc.workflow_id;
    e.intent_label = root.condition().intent_label;
    e.description = root.description;
    auto add = [&](std::string_view text) {
      for (auto& t : tokenize(text)) ++e.terms[t];
    };
    add(e.intent_label);
    add(e.description);
    if (auto it = aliases.find(e.intent_label); it != aliases.end())
      for (const auto& a : it->second) add(a);
    index.entries_.push_back(std::move(e));
  }
  std::sort(index.entries_.begin(), index.entries_.end(),
            [](const IntentEntry& a, const IntentEntry& b) { return a.workflow_id < b.workflow_id; });
  index.recompute_idf();
  return index;
}

void IntentIndex::recompute_idf() {
  std::map<std::string, std::size_t> df;
  for (const auto& e : entries_)
    for (const auto& [t, c] : e.terms) ++df[t];
  idf_.clear();
  for (const auto& [t, n] : df) idf_[t] = idf_value(entries_.size(), n);
  norms_.clear();
  for (const auto& e : entries_) {
    double sq = 0;
    for (const auto& [t, c] : e.terms) {
      auto it = idf_.find(t);
      if (it == idf_.end()) continue;
      double w = c * it->second;
      sq += w * w;
    }
    norms_.push_back(std::sqrt(sq));
  }
}

void IntentIndex::set_fixed_idf(std::map<std::string, double> idf) {
  idf_ = std::move(idf);
  norms_.clear();
  for (const auto& e : entries_) {
    double sq = 0;
    for (const auto& [t, c] : e.terms)
      if (auto it = idf_.find(t); it != idf_.end()) sq += (c * it->second) * (c * it->second);
    norms_.push_back(std::sqrt(sq));
  }
}

const IntentEntry* IntentIndex::find(const std::string& workflow_id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), workflow_id,
                             [](const IntentEntry& e, const std::string& id) { return e.workflow_id < id; });
  return it != entries_.end() && it->workflow_id == workflow_id ? &*it : nullptr;
}

std::vector<RankedWorkflow> IntentIndex::retrieve(std::string_view query, std::size_t k) const {
  std::set<std::string> all;
  for (const auto& e : entries_) all.insert(e.workflow_id);
  return retrieve_among(query, k, all);
}

std::vector<RankedWorkflow> IntentIndex::retrieve_among(std::string_view query, std::size_t k,
                                                        const std::set<std::string>& allowed) const {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  std::map<std::string, double> qvec;
  for (const auto& t : tokenize(query))
    if (auto it = idf_.find(t); it != idf_.end()) qvec[t] += it->second;
  double qnorm = 0;
  for (const auto& [t, w] : qvec) qnorm += w * w;
  qnorm = std::sqrt(qnorm);

  std::vector<RankedWorkflow> ranked;
  if (qnorm == 0) return ranked;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const IntentEntry& e = entries_[i];
    if (!allowed.count(e.workflow_id) || norms_[i] == 0) continue;
    double dot = 0;
    for (const auto& [t, qw] : qvec)
      if (auto it = e.terms.find(t); it != e.terms.end()) dot += qw * it->second * idf_.at(t);
    if (dot > 0) ranked.push_back({e.workflow_id, dot / (qnorm * norms_[i])});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedWorkflow& a, const RankedWorkflow& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.workflow_id < b.workflow_id;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

Json IntentIndex::dump() const {
  Json entries = Json::array();
  for (const auto& e : entries_) {
    Json j;
    j["workflow_id"] = e.workflow_id;
    j["intent_label"] = e.intent_label;
    j["description"] = e.description;
    Json terms = Json::object();
    for (const auto& [t, c] : e.terms) terms[t] = c;
    j["terms"] = std::move(terms);
    entries.push_back(std::move(j));
  }
  Json j;
  j["entries"] = std::move(entries);
  return j;
}

}  // namespace ica
