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


// Offline accuracy/latency harness and the labeled-set builder.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ica/kb.hpp"
#include "ica/predict.hpp"
#include "ica/synth.hpp"

namespace ica {

struct EvalCase {
  std::string case_id;
  std::string query;
  std::optional<std::string> intent;
  ContextRecord context;
  LocalAction gold;
  std::vector<std::string> candidates;  // pinned; retrieval when empty
};

Json eval_case_to_json(const EvalCase& c);
EvalCase eval_case_from_json(const Json& j);
std::vector<EvalCase> load_eval_cases(const std::filesystem::path& jsonl);
std::string eval_cases_to_jsonl(const std::vector<EvalCase>& cases);

/// Throws Error(kValidation) for duplicate ids, unresolvable gold actions or
/// unknown pinned workflows.
void validate_cases(const std::vector<EvalCase>& cases, const KnowledgeBase& kb);

struct EvalRow {
  std::string case_id;
  LocalAction gold;
  PredictionStatus status = PredictionStatus::kOk;
  std::optional<LocalAction> predicted;
  bool correct = false;
  double latency_seconds = 0;
  double end_to_end_seconds = 0;
};

struct EvalConfig {
  PredictConfig predict;
  std::size_t concurrency = 1;
  std::string client_name = "mock";
};

struct EvalReport {
  std::string client;
  KnowledgeFormat format = KnowledgeFormat::kIca;
  bool with_cot = true;
  std::size_t total = 0;
  std::size_t correct = 0;
  double acc = 0;
  double al_seconds = 0;              // model calls only
  double al_end_to_end_seconds = 0;   // retrieval through resolution
  std::map<std::string, std::size_t> status_counts;
  std::vector<EvalRow> rows;          // dataset order

  /// "<format>/<cot|no-cot>"
  std::string arm() const;
};

Json report_to_json(const EvalReport& r);
EvalReport report_from_json(const Json& j);

/// Non-ok predictions count as incorrect. Rows keep dataset order whatever
/// the concurrency; the client's own limit caps it further.
EvalReport run_eval(const std::vector<EvalCase>& cases, const KnowledgeBase& kb, LlmClient& client,
                    const EvalConfig& config = {});

/// "+0.13", "-0.05"; rounded to two places.
std::string format_delta(double delta);

struct Comparison {
  Json json;
  std::string text;
};

/// Per-arm ACC and AL with deltas against the rich-text, no-CoT arm (or the
/// first arm present in the order richtext/no-cot, richtext/cot, ica/no-cot,
/// ica/cot). Throws Error(kValidation) unless at least two reports over the
/// same case ids are given.
Comparison compare_reports(const std::vector<EvalReport>& reports);

struct DerivedEval {
  std::vector<EvalCase> cases;
  std::vector<IcaDocument> workflows;
  ActionMap actions;
  IntentAliases aliases;
  std::size_t skipped = 0;  // base samples without a reachable answer
};

struct DeriveOptions {
  std::uint64_t seed = 0;
  int cases_per_base_workflow = 5;
};

/// Labels cases with the interpreter. Every synth instance becomes a case
/// pinned to its own workflows (renamed i<index>-wf<k>). Workflows of `base`
/// are added too, each with sampled contexts and candidates pinned to the
/// top-k retrieval over `base`. Aliases come from the pool templates.
DerivedEval derive_eval(const std::vector<SftInstance>& instances, const SynthPools* pools,
                        const KnowledgeBase* base, const DeriveOptions& options = {});

/// <id>.ica for each workflow, actions.json and aliases.json.
void write_kb(const std::filesystem::path& dir, const std::vector<IcaDocument>& workflows, const ActionMap& actions,
              const IntentAliases& aliases);

}  // namespace ica
