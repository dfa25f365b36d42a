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


#include "ica/predict.hpp"

#include <set>
#include <thread>

#include "ica/interpreter.hpp"
#include "ica/rng.hpp"
#include "ica/synth.hpp"
#include "util.hpp"

namespace ica {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Cuts to at most `bytes` without splitting a UTF-8 sequence.
std::string cut(std::string text, std::size_t bytes) {
  if (text.size() <= bytes) return text;
  std::size_t n = bytes;
  while (n > 0 && (static_cast<unsigned char>(text[n]) & 0xC0) == 0x80) --n;
  text.resize(n);
  return text;
}

}  // namespace

FileContextProvider::FileContextProvider(const fs::path& path) {
  Json j;
  try {
    j = parse_json(util::read_file(path), path.string());
  } catch (const Error& e) {
    throw StageError(e.code(), "context", e.what());
  }
  if (!j.is_object()) throw StageError(ErrorCode::kParse, "context", path.string() + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) records_[it.key()] = context_from_json(it.value());
}

ContextRecord FileContextProvider::fetch(const ContextRequest& request) {
  auto it = records_.find(request.query_id);
  if (it == records_.end()) throw StageError(ErrorCode::kNotFound, "context", "no record for '" + request.query_id + "'");
  return it->second;
}

std::vector<std::string> referenced_keys(std::span<const IcaDocument> docs) {
  std::set<std::string> keys;
  for (const auto& d : docs)
    for (const auto& [id, n] : d.tree.nodes)
      if (!n.is_leaf() && !n.condition().key.empty()) keys.insert(n.condition().key);
  return {keys.begin(), keys.end()};
}

OracleEchoClient::OracleEchoClient(const KnowledgeBase* kb, MockLatency latency) : kb_(kb), latency_(latency) {}

Completion OracleEchoClient::complete(const std::string& prompt, int max_output_tokens,
                                      std::chrono::milliseconds timeout) {
  auto start = Clock::now();
  ParsedPrompt p = parse_prompt(prompt);
  std::vector<DecisionTree> trees = std::move(p.trees);
  if (p.format == KnowledgeFormat::kRichText) {
    if (!kb_) throw Error(ErrorCode::kInvalidArgument, "rich-text prompts need a knowledge base");
    std::vector<IcaDocument> docs;
    for (const auto& [id, body] : p.sections) docs.push_back(kb_->at(id));
    trees = renumber_candidates(docs).trees;
  }
  EvalTrace trace = evaluate(trees, p.query, p.context);
  std::string text;
  if (!trace.matched)
    text = "None of the workflows applies to this query.";
  else if (p.with_cot)
    text = synth_cot(trace, trees, p.query, p.context);
  else
    text = "Action: " + std::to_string(trace.matched->action_id);
  text = cut(std::move(text), static_cast<std::size_t>(std::max(0, max_output_tokens)) * 4);

  if (latency_.max_ms > 0) {
    Rng rng(mix_seed(latency_.seed, util::fnv1a64(prompt)));
    double ms = latency_.min_ms + rng.unit() * (latency_.max_ms - latency_.min_ms);
    if (ms > static_cast<double>(timeout.count())) {
      std::this_thread::sleep_for(timeout);
      throw StageError(ErrorCode::kTimeout, "client", "no reply within " + std::to_string(timeout.count()) + " ms");
    }
    std::this_thread::sleep_until(start + std::chrono::duration<double, std::milli>(ms));
    std::lock_guard lock(mu_);
    injected_.push_back(ms / 1000.0);
  }
  return {std::move(text), seconds_since(start)};
}

std::vector<double> OracleEchoClient::injected_latencies() const {
  std::lock_guard lock(mu_);
  return injected_;
}

CorruptingClient::CorruptingClient(LlmClient& inner, double p, std::uint64_t seed) : inner_(inner), p_(p), seed_(seed) {
  if (p < 0 || p > 1) throw Error(ErrorCode::kInvalidArgument, "corruption probability must be in [0, 1]");
}

Completion CorruptingClient::complete(const std::string& prompt, int max_output_tokens,
                                      std::chrono::milliseconds timeout) {
  Completion c = inner_.complete(prompt, max_output_tokens, timeout);
  Rng rng(mix_seed(seed_, util::fnv1a64(prompt)));
  if (!rng.chance(p_)) return c;

  auto lines = util::split_lines(c.text);
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (parse_response(lines[i])) last = i;
  if (!last) return c;
  int current = *parse_response(lines[*last]);
  int n = 0;
  try {
    n = parse_prompt(prompt).action_count;
  } catch (const Error&) {
  }
  int wrong;
  if (n <= 1)
    wrong = current == n + 1 ? n + 2 : n + 1;
  else if (current < 1 || current > n)
    wrong = rng.between(1, n);
  else if ((wrong = rng.between(1, n - 1)) >= current)
    ++wrong;
  lines[*last] = "Action: " + std::to_string(wrong);
  c.text = util::join(lines, "\n");
  std::lock_guard lock(mu_);
  ++corrupted_;
  return c;
}

std::size_t CorruptingClient::corrupted() const {
  std::lock_guard lock(mu_);
  return corrupted_;
}

namespace {

constexpr std::pair<PredictionStatus, const char*> kStatusNames[] = {
    {PredictionStatus::kOk, "ok"},
    {PredictionStatus::kNoIntentMatch, "no_intent_match"},
    {PredictionStatus::kUnparseableResponse, "unparseable_response"},
    {PredictionStatus::kUnknownActionId, "unknown_action_id"},
};

}  // namespace

const char* to_string(PredictionStatus status) {
  for (const auto& [s, name] : kStatusNames)
    if (s == status) return name;
  return "ok";
}

std::optional<PredictionStatus> prediction_status_from_string(const std::string& name) {
  for (const auto& [s, n] : kStatusNames)
    if (name == n) return s;
  return std::nullopt;
}

Json prediction_to_json(const Prediction& p) {
  Json j;
  j["status"] = to_string(p.status);
  if (p.status == PredictionStatus::kOk) {
    j["workflow_id"] = p.workflow_id;
    j["action_id"] = p.action_id;
    j["action_content"] = p.action_content;
  }
  j["global_action_id"] = p.global_action_id;
  j["intent_label"] = p.intent_label;
  j["candidates"] = p.candidates;
  j["rationale"] = p.rationale;
  j["prompt_tokens"] = p.prompt_tokens;
  j["latency_seconds"] = p.latency_seconds;
  j["end_to_end_seconds"] = p.end_to_end_seconds;
  return j;
}

Prediction predict(const PredictRequest& request, ContextProvider& context, const KnowledgeBase& kb,
                   LlmClient& client, const PredictConfig& config) {
  auto start = Clock::now();
  Prediction p;
  std::vector<IcaDocument> docs;
  if (!request.candidates.empty()) {
    for (const auto& id : request.candidates) docs.push_back(kb.at(id));
  } else {
    if (config.k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
    for (const auto& r : kb.index.retrieve(request.query.text, config.k)) docs.push_back(kb.at(r.workflow_id));
  }
  for (const auto& d : docs) p.candidates.push_back(d.workflow_id);
  if (docs.empty()) {
    p.status = PredictionStatus::kNoIntentMatch;
    p.end_to_end_seconds = seconds_since(start);
    return p;
  }

  UserQuery q = request.query;
  if (!q.intent_label) q.intent_label = docs[0].tree.node(docs[0].tree.root).condition().intent_label;
  p.intent_label = *q.intent_label;
  ContextRecord ctx = context.fetch({request.query_id, q, referenced_keys(docs)});
  BuiltPrompt prompt = build_prompt(q, ctx, docs, config.prompt);
  p.prompt_tokens = prompt.estimated_tokens;

  auto call = Clock::now();
  Completion c = client.complete(prompt.text, config.max_output_tokens, config.timeout);
  p.latency_seconds = seconds_since(call);
  p.rationale = std::move(c.text);

  if (auto id = parse_response(p.rationale)) {
    p.global_action_id = *id;
    if (auto local = prompt.request_map.translate(*id); local && kb.actions.contains(local->workflow_id, local->action_id)) {
      p.status = PredictionStatus::kOk;
      p.workflow_id = local->workflow_id;
      p.action_id = local->action_id;
      p.action_content = resolve_action(kb.actions, p.workflow_id, p.action_id);
    } else {
      p.status = PredictionStatus::kUnknownActionId;
    }
  } else {
    p.status = PredictionStatus::kUnparseableResponse;
  }
  p.end_to_end_seconds = seconds_since(start);
  return p;
}

}  // namespace ica
