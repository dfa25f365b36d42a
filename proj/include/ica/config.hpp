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


// Settings shared by the command-line tool and the C API.
//
// File format: one `key = value` per line, `#` starts a comment line, blank
// lines ignored. Every key can be overridden by the environment variable
// ICA_<KEY>, upper-cased with dots turned into underscores
// (retrieval.k -> ICA_RETRIEVAL_K).

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ica/json_io.hpp"
#include "ica/predict.hpp"
#include "ica/synth.hpp"

namespace ica {

struct Config {
  std::string kb_dir;
  std::string pools_dir;
  std::uint64_t seed = 0;

  std::size_t k = kDefaultTopK;
  std::size_t prompt_token_budget = kDefaultPromptTokenBudget;
  int max_output_tokens = kDefaultMaxOutputTokens;
  std::int64_t timeout_ms = 30000;
  bool with_cot = true;
  KnowledgeFormat format = KnowledgeFormat::kIca;

  SynthConfig synth;

  std::string client = "oracle";  // oracle | corrupt | http
  std::string endpoint;
  std::string model;
  std::size_t client_concurrency = 4;
  double corrupt_p = 0.3;
  double latency_min_ms = 0;
  double latency_max_ms = 0;
  std::string context_url;  // HTTP context provider; empty: none

  std::size_t eval_concurrency = 4;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::size_t max_in_flight = 8;

  PredictConfig predict_config() const;
};

/// Keys in the order they are listed by config_to_json.
const std::vector<std::string>& config_keys();

/// Throws Error(kValidation) for an unknown key or a malformed value.
void set_config_value(Config& config, const std::string& key, const std::string& value);

/// Throws Error(kValidation) when a budget is not positive, k < 1, or the
/// synth and client parameters are inconsistent.
void validate_config(const Config& config);

using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;
EnvLookup process_env();

/// Defaults, then `text`, then environment overrides; validated.
Config parse_config(const std::string& text, const EnvLookup& env = process_env(), const std::string& origin = "config");
/// A missing path means defaults plus environment.
Config load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env = process_env());

Json config_to_json(const Config& config);

}  // namespace ica
