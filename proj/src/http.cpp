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


#include "ica/http.hpp"

#include <httplib.h>

#include <cstdlib>

#include "util.hpp"

namespace ica {

using Clock = std::chrono::steady_clock;

namespace {

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

template <typename C>
void set_timeouts(C& cli, std::chrono::milliseconds t) {
  cli.set_connection_timeout(t);
  cli.set_read_timeout(t);
  cli.set_write_timeout(t);
}

[[noreturn]] void transport_failure(const std::string& stage, httplib::Error err, Clock::time_point start,
                                    std::chrono::milliseconds timeout) {
  bool timed_out = err == httplib::Error::ConnectionTimeout ||
                   (err == httplib::Error::Read && Clock::now() - start >= timeout * 9 / 10);
  if (timed_out)
    throw StageError(ErrorCode::kTimeout, stage, "no reply within " + std::to_string(timeout.count()) + " ms");
  throw StageError(ErrorCode::kTransport, stage, httplib::to_string(err));
}

}  // namespace

HttpClientConfig http_client_config_from_env() {
  HttpClientConfig c;
  c.endpoint = env("ICA_LLM_ENDPOINT");
  c.model = env("ICA_LLM_MODEL");
  c.api_key = env("ICA_LLM_API_KEY");
  return c;
}

std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos || scheme == 0) throw Error(ErrorCode::kInvalidArgument, "not a URL: '" + url + "'");
  auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

HttpLlmClient::HttpLlmClient(HttpClientConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(ErrorCode::kInvalidArgument, "LLM endpoint is not set (ICA_LLM_ENDPOINT)");
  if (config_.max_output_tokens_cap <= 0) throw Error(ErrorCode::kInvalidArgument, "output token cap must be positive");
  split_url(config_.endpoint);
}

Completion HttpLlmClient::complete(const std::string& prompt, int max_output_tokens,
                                   std::chrono::milliseconds timeout) {
  auto [base, path] = split_url(config_.endpoint);
  httplib::Client cli(base);
  set_timeouts(cli, timeout);
  Json body;
  if (!config_.model.empty()) body["model"] = config_.model;
  body["messages"] = Json::array({{{"role", "user"}, {"content", prompt}}});
  body["max_tokens"] = std::clamp(max_output_tokens, 1, config_.max_output_tokens_cap);
  body["temperature"] = 0;
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto start = Clock::now();
  auto res = cli.Post(path, headers, body.dump(), "application/json");
  double latency = std::chrono::duration<double>(Clock::now() - start).count();
  if (!res) transport_failure("client", res.error(), start, timeout);
  if (res->status != 200)
    throw StageError(ErrorCode::kTransport, "client",
                     "HTTP " + std::to_string(res->status) + ": " + util::utf8_prefix(res->body, 200));
  try {
    Json j = Json::parse(res->body);
    const Json& choice = j.at("choices").at(0);
    std::string text = choice.contains("message") ? choice["message"].at("content").get<std::string>()
                                                  : choice.at("text").get<std::string>();
    return {std::move(text), latency};
  } catch (const Json::exception& e) {
    throw StageError(ErrorCode::kTransport, "client", std::string("malformed reply: ") + e.what());
  }
}

HttpContextProvider::HttpContextProvider(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  split_url(base_url_);
}

ContextRecord HttpContextProvider::fetch(const ContextRequest& request) {
  auto [base, path] = split_url(base_url_);
  if (path.empty() || path.back() != '/') path += '/';
  path += httplib::detail::encode_url(request.query_id);
  if (!request.keys.empty()) path += "?keys=" + httplib::detail::encode_url(util::join(request.keys, ","));
  httplib::Client cli(base);
  set_timeouts(cli, timeout_);
  auto start = Clock::now();
  auto res = cli.Get(path);
  if (!res) transport_failure("context", res.error(), start, timeout_);
  if (res->status == 404) throw StageError(ErrorCode::kNotFound, "context", "no record for '" + request.query_id + "'");
  if (res->status != 200) throw StageError(ErrorCode::kTransport, "context", "HTTP " + std::to_string(res->status));
  try {
    return context_from_json(Json::parse(res->body));
  } catch (const Json::exception& e) {
    throw StageError(ErrorCode::kTransport, "context", std::string("malformed reply: ") + e.what());
  } catch (const Error& e) {
    throw StageError(ErrorCode::kTransport, "context", e.what());
  }
}

struct PredictService::Server {
  httplib::Server http;
  std::mutex mu;
  bool stop_requested = false;
  bool listening = false;
};

PredictService::PredictService(const KnowledgeBase& kb, LlmClient& client, ContextProvider* provider,
                               ServiceConfig config)
    : kb_(kb), client_(client), provider_(provider), config_(std::move(config)), server_(std::make_unique<Server>()) {
  if (config_.max_in_flight == 0) throw Error(ErrorCode::kInvalidArgument, "max_in_flight must be positive");
  std::size_t workers = config_.max_in_flight + 2;
  server_->http.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };
  server_->http.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  server_->http.Post("/v1/predict", [this](const httplib::Request& req, httplib::Response& res) {
    Response r = handle_predict(req.body);
    res.status = r.status;
    if (r.status == 503) res.set_header("Retry-After", "1");
    res.set_content(r.body.dump(), "application/json");
  });
}

PredictService::~PredictService() { stop(); }

PredictService::Response PredictService::handle_predict(const std::string& body) {
  struct Slot {
    std::atomic<std::size_t>& n;
    ~Slot() { --n; }
  };
  if (++in_flight_ > config_.max_in_flight) {
    --in_flight_;
    return {503, {{"status", "retry_later"}}};
  }
  Slot slot{in_flight_};
  auto error = [](int status, const std::string& msg) { return Response{status, {{"status", "error"}, {"error", msg}}}; };

  PredictRequest request;
  PredictConfig pc = config_.predict;
  std::optional<ContextRecord> context;
  try {
    Json j = Json::parse(body);
    if (!j.is_object() || !j.contains("query") || !j["query"].is_string())
      return error(400, "body must be an object with a string 'query'");
    request.query.text = j["query"].get<std::string>();
    if (j.contains("intent")) request.query.intent_label = j["intent"].get<std::string>();
    if (j.contains("query_id")) request.query_id = j["query_id"].get<std::string>();
    if (j.contains("candidates")) request.candidates = j["candidates"].get<std::vector<std::string>>();
    if (j.contains("context")) context = context_from_json(j["context"]);
    if (j.contains("k")) {
      int k = j["k"].get<int>();
      if (k < 1) return error(400, "k must be at least 1");
      pc.k = static_cast<std::size_t>(k);
    }
  } catch (const Json::exception& e) {
    return error(400, e.what());
  } catch (const Error& e) {
    return error(400, e.what());
  }

  try {
    StaticContextProvider fixed(context.value_or(ContextRecord{}));
    ContextProvider& provider = context || !provider_ ? static_cast<ContextProvider&>(fixed) : *provider_;
    return {200, prediction_to_json(predict(request, provider, kb_, client_, pc))};
  } catch (const StageError& e) {
    Response r = error(e.code() == ErrorCode::kTimeout ? 504 : 502, e.what());
    r.body["stage"] = e.stage();
    return r;
  } catch (const Error& e) {
    return error(e.code() == ErrorCode::kNotFound || e.code() == ErrorCode::kBudget ? 422 : 500, e.what());
  }
}

int PredictService::bind(const std::string& host, int port) {
  int bound = port == 0 ? server_->http.bind_to_any_port(host) : (server_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void PredictService::listen() {
  {
    std::lock_guard lock(server_->mu);
    if (server_->stop_requested) return;
    server_->listening = true;
  }
  server_->http.listen_after_bind();
}

// httplib ignores stop() before the accept loop runs, so a stop that races
// listen() waits for it to come up first.
void PredictService::stop() {
  if (!server_) return;
  {
    std::lock_guard lock(server_->mu);
    server_->stop_requested = true;
    if (!server_->listening) return;
  }
  server_->http.wait_until_ready();
  server_->http.stop();
}

}  // namespace ica
