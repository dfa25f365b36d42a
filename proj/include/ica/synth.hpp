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


// Synthetic fine-tuning data: sample a branch that matches a pooled
// (query, context) record, surround it with branches that provably do not
// match, explain the outcome and emit the prompt/label pair.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ica/core.hpp"
#include "ica/interpreter.hpp"
#include "ica/json_io.hpp"
#include "ica/rng.hpp"

namespace ica {

struct PoolIntent {
  std::string label;
  std::string description;
  std::vector<std::string> templates;  // compatible query templates
};

struct PoolCondition {
  ConditionExpr condition;
  std::string description;
};

struct QueryRecord {
  std::string query;
  std::string intent;
  ContextRecord context;
};

struct SynthPools {
  std::vector<PoolIntent> intents;
  std::vector<PoolCondition> conditions;
  std::vector<QueryRecord> records;
  std::vector<std::string> action_templates;  // "{n}" is replaced by a number

  const PoolIntent* find_intent(const std::string& label) const;
};

/// Reads conditions.json, queries.json and action_templates.json from `dir`
/// and validates them.
SynthPools load_pools(const std::filesystem::path& dir);
SynthPools pools_from_json(const Json& conditions, const Json& queries, const Json& action_templates);
/// Throws Error(kValidation) naming the first broken invariant.
void validate_pools(const SynthPools& pools);

struct SynthConfig {
  int max_depth = 4;             // context conditions on the matched branch
  int min_divergent = 2;
  int max_divergent = 6;
  int max_trees = 3;             // candidate workflows per prompt
  int min_mismatch_nodes = 1;    // per divergent branch
  int max_retries = 100;
  double max_skip_rate = 0.05;
  std::size_t token_budget = 4096;
  bool with_cot = true;
  unsigned threads = 0;          // 0: hardware concurrency
};

struct BranchCondition {
  ConditionExpr condition;
  std::string description;
};

struct MatchedBranch {
  UserQuery query;
  ContextRecord context;
  std::string intent_description;
  std::vector<BranchCondition> conditions;  // below the intent root
  std::string action;
};

/// Throws Error(kGeneration) when no record satisfies any pool condition
/// within `max_retries` draws.
MatchedBranch synth_matched_branch(const SynthPools& pools, Rng& rng, const SynthConfig& config = {});

enum class DivergenceType { kRootMutation, kNodeMutation, kIrrelevant };
const char* to_string(DivergenceType type);

struct DivergentBranch {
  DivergenceType type = DivergenceType::kNodeMutation;
  std::size_t tree = 0;  // index into SynthForest::trees
  NodeId leaf = 0;
  int mismatch_nodes = 0;
};

/// Trees before naming and numbering. trees[0] holds the matched branch;
/// leaves carry ActionRef{0} and their text lives in `leaf_texts`.
struct SynthForest {
  std::vector<DecisionTree> trees;
  std::vector<std::map<NodeId, std::string>> leaf_texts;
  NodeId matched_leaf = 0;
  std::vector<DivergentBranch> divergent;
};

/// Adds `n_divergent` branches. The first T-1 (T uniform in [1, max_trees])
/// mutate the intent root and become separate trees; the rest mutate a
/// context node or attach an unrelated branch inside the matched tree. Each
/// one is checked with the interpreter. Throws Error(kGeneration).
SynthForest synth_divergent_branches(const MatchedBranch& matched, const SynthPools& pools, Rng& rng,
                                     int n_divergent, const SynthConfig& config = {});

/// One numbered line per branch of the trace, then `Action: <id>`.
/// Throws Error(kInvalidArgument) when the trace has no match.
std::string synth_cot(const EvalTrace& trace, std::span<const DecisionTree> trees, const UserQuery& query,
                      const ContextRecord& ctx);

struct SftInstance {
  std::string instruction;
  std::string label;
  Json meta;
};

Json sft_to_json(const SftInstance& instance);
/// Compact single-line form used in the JSONL output.
std::string sft_to_jsonl(const SftInstance& instance);
SftInstance sft_from_json(const Json& j);

struct SynthAttempt {
  std::optional<SftInstance> instance;
  int attempt = 0;
  std::vector<std::string> skipped;  // reason per discarded attempt
};

/// Builds instance `index` of the dataset with master seed `seed`, starting at
/// sub-seed `first_attempt`. Attempts that exceed the token budget or fail the
/// self-consistency check are discarded; after `max_retries` the result is
/// empty.
SynthAttempt synth_instance(const SynthPools& pools, std::uint64_t seed, std::uint64_t index,
                            const SynthConfig& config = {}, int first_attempt = 0);

struct SynthStats {
  std::size_t emitted = 0;
  std::size_t skipped = 0;
  std::size_t duplicates = 0;
  std::map<std::string, std::size_t> skip_reasons;
  double skip_rate() const {
    return emitted + skipped ? static_cast<double>(skipped) / static_cast<double>(emitted + skipped) : 0.0;
  }
};

/// Emits instances 0..n-1 in index order. Exact duplicates of earlier
/// instances are regenerated. Throws Error(kGeneration) when the skip rate
/// exceeds `max_skip_rate`.
SynthStats generate_dataset(const SynthPools& pools, std::size_t n, std::uint64_t seed, const SynthConfig& config,
                            const std::function<void(const SftInstance&)>& sink);

}  // namespace ica
