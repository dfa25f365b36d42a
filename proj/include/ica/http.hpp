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


// Network pieces: an OpenAI-style chat-completions client, an HTTP context
// provider and the prediction service.

#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "ica/predict.hpp"

namespace ica {

struct HttpClientConfig {
  std::string endpoint;  // full URL, e.g. http://localhost:8000/v1/chat/completions
  std::string model;
  std::string api_key;   // sent as a bearer token when set
  int max_output_tokens_cap = kDefaultMaxOutputTokens;
  std::size_t concurrency = 4;
};

/// ICA_LLM_ENDPOINT, ICA_LLM_MODEL and ICA_LLM_API_KEY.
HttpClientConfig http_client_config_from_env();

/// Splits "http://host:port/path" into ("http://host:port", "/path").
std::pair<std::string, std::string> split_url(const std::string& url);

class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(HttpClientConfig config);

  /// Requests at most min(max_output_tokens, cap) tokens at temperature 0.
  Completion complete(const std::string& prompt, int max_output_tokens, std::chrono::milliseconds timeout) override;
  std::size_t max_concurrency() const override { return config_.concurrency; }

 private:
  HttpClientConfig config_;
};

/// GET <base_url>/<query id>?keys=a,b returning a JSON context object.
class HttpContextProvider : public ContextProvider {
 public:
  HttpContextProvider(std::string base_url, std::chrono::milliseconds timeout);
  ContextRecord fetch(const ContextRequest& request) override;

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

struct ServiceConfig {
  std::size_t max_in_flight = 8;
  PredictConfig predict;
};

/// POST /v1/predict {query, intent?, context?, k?, query_id?, candidates?}
/// and GET /healthz. Requests beyond `max_in_flight` get 503 retry_later.
class PredictService {
 public:
  struct Response {
    int status = 200;
    Json body;
  };

  /// `provider` is used when a request carries no context; may be null.
  PredictService(const KnowledgeBase& kb, LlmClient& client, ContextProvider* provider, ServiceConfig config);
  ~PredictService();

  Response handle_predict(const std::string& body);

  /// Binds and returns the port (an ephemeral one when `port` is 0).
  int bind(const std::string& host, int port);
  /// Serves until stop().
  void listen();
  void stop();
  std::size_t in_flight() const { return in_flight_.load(); }

 private:
  struct Server;
  const KnowledgeBase& kb_;
  LlmClient& client_;
  ContextProvider* provider_;
  ServiceConfig config_;
  std::atomic<std::size_t> in_flight_{0};
  std::unique_ptr<Server> server_;
};

}  // namespace ica
