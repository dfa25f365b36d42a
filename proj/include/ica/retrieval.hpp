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

// Lexical intent retrieval: each workflow is represented by the terms of its
// intent label, intent description and any query aliases registered for the
// label; queries are ranked by TF-IDF cosine similarity.

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ica/json_io.hpp"
#include "ica/lang.hpp"

namespace ica {

inline constexpr std::size_t kDefaultTopK = 3;

/// intent label -> example queries / alternative phrasings
using IntentAliases = std::map<std::string, std::vector<std::string>>;

/// Lowercased word tokens with stop words removed. Word characters are ASCII
/// letters and digits plus any non-ASCII byte; everything else separates.
std::vector<std::string> tokenize(std::string_view text);
bool is_stop_word(std::string_view token);
/// The shipped stop-word list, sorted.
std::span<const std::string_view> stop_words();

struct IntentEntry {
  std::string workflow_id;
  std::string intent_label;
  std::string description;
  std::map<std::string, int> terms;  // term -> count
};

struct RankedWorkflow {
  std::string workflow_id;
  double score = 0;
};

class IntentIndex {
 public:
  IntentIndex() = default;

  /// Throws Error(kInvalidArgument) on duplicate workflow ids.
  static IntentIndex build(std::span<const IcaDocument> docs, const IntentAliases& aliases = {});

  /// Up to k workflows with a positive score, best first; ties broken by
  /// workflow id ascending. k must be at least 1.
  std::vector<RankedWorkflow> retrieve(std::string_view query, std::size_t k = kDefaultTopK) const;
  /// Same ranking restricted to `allowed` workflow ids.
  std::vector<RankedWorkflow> retrieve_among(std::string_view query, std::size_t k,
                                             const std::set<std::string>& allowed) const;

  /// Replaces corpus-derived IDF with a fixed table; terms absent from it are
  /// ignored. Used to compare rankings across corpora.
  void set_fixed_idf(std::map<std::string, double> idf);
  const std::map<std::string, double>& idf() const { return idf_; }

  const std::vector<IntentEntry>& entries() const { return entries_; }
  const IntentEntry* find(const std::string& workflow_id) const;
  bool empty() const { return entries_.empty(); }

  Json dump() const;

 private:
  void recompute_idf();

  std::vector<IntentEntry> entries_;  // sorted by workflow id
  std::map<std::string, double> idf_;
  std::vector<double> norms_;
};

}  // namespace ica
