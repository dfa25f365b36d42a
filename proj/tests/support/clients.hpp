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

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "ica/llm_client.hpp"

namespace ica::testing {

/// Replies through a callback and keeps every prompt.
class ScriptedClient : public LlmClient {
 public:
  explicit ScriptedClient(std::function<std::string(const std::string&)> reply) : reply_(std::move(reply)) {}

  Completion complete(const std::string& prompt, int max_output_tokens, std::chrono::milliseconds) override {
    {
      std::lock_guard lock(mu_);
      prompts_.push_back(prompt);
      max_tokens_.push_back(max_output_tokens);
    }
    ++calls;
    return {reply_(prompt), 0};
  }

  std::vector<std::string> prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
  }
  std::vector<int> max_tokens() const {
    std::lock_guard lock(mu_);
    return max_tokens_;
  }

  std::atomic<int> calls{0};

 private:
  std::function<std::string(const std::string&)> reply_;
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
  std::vector<int> max_tokens_;
};

}  // namespace ica::testing
