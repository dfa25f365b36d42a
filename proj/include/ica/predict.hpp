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


// Online loop: retrieve candidates, fetch context, prompt the model, map the
// answer back to a (workflow, action) pair.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ica/json_io.hpp"
#include "ica/kb.hpp"
#include "ica/llm_client.hpp"
#include "ica/prompt.hpp"

namespace ica {

struct ContextRequest {
  std::string query_id;
  UserQuery query;
  std::vector<std::string> keys;  // referenced by the candidate workflows
};

/// Errors are raised as StageError("context", ...).
class ContextProvider {
 public:
  virtual ~ContextProvider() = default;
  virtual ContextRecord fetch(const ContextRequest& request) = 0;
};

class StaticContextProvider : public ContextProvider {
 public:
  explicit StaticContextProvider(ContextRecord record = {}) : record_(std::move(record)) {}
  ContextRecord fetch(const ContextRequest&) override { return record_; }

 private:
  ContextRecord record_;
};

/// JSON object {"<query id>": {context}}. Unknown ids are an error.
class FileContextProvider : public ContextProvider {
 public:
  explicit FileContextProvider(const std::filesystem::path& path);
  ContextRecord fetch(const ContextRequest& request) override;

 private:
  std::map<std::string, ContextRecord> records_;
};

/// Context keys of every condition in the given workflows, sorted.
std::vector<std::string> referenced_keys(std::span<const IcaDocument> docs);

/// Answers like a perfect model: runs the interpreter over the workflows in
/// the prompt and replies with the templated rationale (or the bare action
/// line). Rich-text prompts are resolved through `kb`. Optional latency is
/// drawn per call, uniformly in [min_ms, max_ms], seeded by the prompt text.
struct MockLatency {
  double min_ms = 0;
  double max_ms = 0;
  std::uint64_t seed = 0;
};

class OracleEchoClient : public LlmClient {
 public:
  explicit OracleEchoClient(const KnowledgeBase* kb = nullptr, MockLatency latency = {});

  Completion complete(const std::string& prompt, int max_output_tokens, std::chrono::milliseconds timeout) override;

  /// Injected delays in seconds, in call completion order.
  std::vector<double> injected_latencies() const;

 private:
  const KnowledgeBase* kb_;
  MockLatency latency_;
  mutable std::mutex mu_;
  std::vector<double> injected_;
};

/// Wraps another client; with probability p (seeded by the prompt text)
/// rewrites the final `Action:` line to a different id in 1..N, or N+1 when
/// N is 1.
class CorruptingClient : public LlmClient {
 public:
  CorruptingClient(LlmClient& inner, double p, std::uint64_t seed);

  Completion complete(const std::string& prompt, int max_output_tokens, std::chrono::milliseconds timeout) override;
  std::size_t max_concurrency() const override { return inner_.max_concurrency(); }
  std::size_t corrupted() const;

 private:
  LlmClient& inner_;
  double p_;
  std::uint64_t seed_;
  mutable std::mutex mu_;
  std::size_t corrupted_ = 0;
};

enum class PredictionStatus { kOk, kNoIntentMatch, kUnparseableResponse, kUnknownActionId };
const char* to_string(PredictionStatus status);
std::optional<PredictionStatus> prediction_status_from_string(const std::string& name);

struct Prediction {
  PredictionStatus status = PredictionStatus::kNoIntentMatch;
  std::string workflow_id;   // set when ok
  int action_id = 0;         // local to workflow_id
  int global_action_id = 0;  // as emitted by the model, 0 when unparseable
  std::string action_content;
  std::string rationale;
  std::string intent_label;
  std::vector<std::string> candidates;
  std::size_t prompt_tokens = 0;
  double latency_seconds = 0;     // around the client call
  double end_to_end_seconds = 0;  // retrieval through resolution
};

Json prediction_to_json(const Prediction& p);

struct PredictConfig {
  std::size_t k = kDefaultTopK;
  PromptOptions prompt;
  int max_output_tokens = kDefaultMaxOutputTokens;
  std::chrono::milliseconds timeout{30000};
};

struct PredictRequest {
  UserQuery query;
  std::string query_id;
  std::vector<std::string> candidates;  // pinned workflow ids; retrieval when empty
};

/// The intent shown to the model is the query's own label when given,
/// otherwise the label of the best-ranked candidate. Unknown pinned ids throw
/// Error(kNotFound); client and provider failures propagate as StageError.
Prediction predict(const PredictRequest& request, ContextProvider& context, const KnowledgeBase& kb,
                   LlmClient& client, const PredictConfig& config = {});

}  // namespace ica
