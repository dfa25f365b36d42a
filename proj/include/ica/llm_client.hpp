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

#pragma once

#include <chrono>
#include <string>

namespace ica {

inline constexpr int kDefaultMaxOutputTokens = 512;
inline constexpr int kDefaultPromptTokenBudget = 4096;

struct Completion {
  std::string text;
  double latency_seconds = 0;  // as observed by the client itself
};

/// Text-completion backend. Implementations must honor `max_output_tokens`
/// and report transport failures and timeouts as StageError("client", ...).
class LlmClient {
 public:
  virtual ~LlmClient() = default;

  virtual Completion complete(const std::string& prompt, int max_output_tokens,
                              std::chrono::milliseconds timeout) = 0;

  /// Maximum concurrent complete() calls the implementation tolerates;
  /// 0 means unbounded.
  virtual std::size_t max_concurrency() const { return 0; }
};

/// Rough token count used for budgets: one token per four bytes, rounded up.
inline std::size_t estimate_tokens(const std::string& text) { return (text.size() + 3) / 4; }

}  // namespace ica
