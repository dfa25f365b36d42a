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


#include "ica/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <map>
#include <set>

#include "util.hpp"

namespace ica {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& want) {
  throw Error(ErrorCode::kValidation, "config " + key + " = '" + value + "': expected " + want);
}

template <typename T>
T as_int(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) bad(key, v, "an integer");
  return out;
}

double as_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) bad(key, v, "a number");
    return d;
  } catch (const std::logic_error&) {
    bad(key, v, "a number");
  }
}

bool as_bool(const std::string& key, const std::string& v) {
  std::string s = util::to_lower_ascii(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad(key, v, "true or false");
}

struct Field {
  std::function<void(Config&, const std::string&, const std::string&)> set;
  std::function<Json(const Config&)> get;
};

#define ICA_STR(member) \
  Field { [](Config& c, const std::string&, const std::string& v) { c.member = v; }, [](const Config& c) { return Json(c.member); } }
#define ICA_INT(member, type) \
  Field { [](Config& c, const std::string& k, const std::string& v) { c.member = as_int<type>(k, v); }, [](const Config& c) { return Json(c.member); } }
#define ICA_DBL(member) \
  Field { [](Config& c, const std::string& k, const std::string& v) { c.member = as_double(k, v); }, [](const Config& c) { return Json(c.member); } }
#define ICA_BOOL(member) \
  Field { [](Config& c, const std::string& k, const std::string& v) { c.member = as_bool(k, v); }, [](const Config& c) { return Json(c.member); } }

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"kb_dir", ICA_STR(kb_dir)},
      {"pools_dir", ICA_STR(pools_dir)},
      {"seed", ICA_INT(seed, std::uint64_t)},
      {"retrieval.k", ICA_INT(k, std::size_t)},
      {"prompt.token_budget", ICA_INT(prompt_token_budget, std::size_t)},
      {"prompt.cot", ICA_BOOL(with_cot)},
      {"prompt.format",
       Field{[](Config& c, const std::string& k, const std::string& v) {
               auto f = knowledge_format_from_string(v);
               if (!f) bad(k, v, "ica or richtext");
               c.format = *f;
             },
             [](const Config& c) { return Json(to_string(c.format)); }}},
      {"predict.max_output_tokens", ICA_INT(max_output_tokens, int)},
      {"predict.timeout_ms", ICA_INT(timeout_ms, std::int64_t)},
      {"synth.max_depth", ICA_INT(synth.max_depth, int)},
      {"synth.min_divergent", ICA_INT(synth.min_divergent, int)},
      {"synth.max_divergent", ICA_INT(synth.max_divergent, int)},
      {"synth.max_trees", ICA_INT(synth.max_trees, int)},
      {"synth.min_mismatch_nodes", ICA_INT(synth.min_mismatch_nodes, int)},
      {"synth.max_retries", ICA_INT(synth.max_retries, int)},
      {"synth.max_skip_rate", ICA_DBL(synth.max_skip_rate)},
      {"synth.threads", ICA_INT(synth.threads, unsigned)},
      {"client", ICA_STR(client)},
      {"client.endpoint", ICA_STR(endpoint)},
      {"client.model", ICA_STR(model)},
      {"client.concurrency", ICA_INT(client_concurrency, std::size_t)},
      {"client.corrupt_p", ICA_DBL(corrupt_p)},
      {"client.latency_min_ms", ICA_DBL(latency_min_ms)},
      {"client.latency_max_ms", ICA_DBL(latency_max_ms)},
      {"context.url", ICA_STR(context_url)},
      {"eval.concurrency", ICA_INT(eval_concurrency, std::size_t)},
      {"serve.host", ICA_STR(serve_host)},
      {"serve.port", ICA_INT(serve_port, int)},
      {"serve.max_in_flight", ICA_INT(max_in_flight, std::size_t)},
  };
  return table;
}

#undef ICA_STR
#undef ICA_INT
#undef ICA_DBL
#undef ICA_BOOL

const Field* find_field(const std::string& key) {
  for (const auto& [k, f] : fields())
    if (k == key) return &f;
  return nullptr;
}

std::string env_name(const std::string& key) {
  std::string out = "ICA_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

PredictConfig Config::predict_config() const {
  PredictConfig p;
  p.k = k;
  p.prompt.with_cot = with_cot;
  p.prompt.format = format;
  p.prompt.token_budget = prompt_token_budget;
  p.max_output_tokens = max_output_tokens;
  p.timeout = std::chrono::milliseconds(timeout_ms);
  return p;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, f] : fields()) out.push_back(k);
    return out;
  }();
  return keys;
}

void set_config_value(Config& config, const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (!f) throw Error(ErrorCode::kValidation, "unknown config key '" + key + "'");
  f->set(config, key, value);
}

void validate_config(const Config& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kValidation, "config: " + msg); };
  if (c.k < 1) fail("retrieval.k must be at least 1");
  if (c.prompt_token_budget == 0) fail("prompt.token_budget must be positive");
  if (c.max_output_tokens <= 0) fail("predict.max_output_tokens must be positive");
  if (c.timeout_ms <= 0) fail("predict.timeout_ms must be positive");
  if (c.synth.token_budget == 0) fail("synth token budget must be positive");
  if (c.synth.max_depth < 1) fail("synth.max_depth must be at least 1");
  if (c.synth.min_divergent < 0 || c.synth.max_divergent < c.synth.min_divergent)
    fail("synth.min_divergent must be between 0 and synth.max_divergent");
  if (c.synth.max_trees < 1) fail("synth.max_trees must be at least 1");
  if (c.synth.min_mismatch_nodes < 1) fail("synth.min_mismatch_nodes must be at least 1");
  if (c.synth.max_retries < 1) fail("synth.max_retries must be at least 1");
  if (c.synth.max_skip_rate < 0 || c.synth.max_skip_rate > 1) fail("synth.max_skip_rate must be in [0, 1]");
  static const std::set<std::string> clients{"oracle", "corrupt", "http"};
  if (!clients.count(c.client)) fail("client must be oracle, corrupt or http");
  if (c.client_concurrency < 1) fail("client.concurrency must be at least 1");
  if (c.corrupt_p < 0 || c.corrupt_p > 1) fail("client.corrupt_p must be in [0, 1]");
  if (c.latency_min_ms < 0 || c.latency_max_ms < c.latency_min_ms)
    fail("client latency must satisfy 0 <= latency_min_ms <= latency_max_ms");
  if (c.eval_concurrency < 1) fail("eval.concurrency must be at least 1");
  if (c.max_in_flight < 1) fail("serve.max_in_flight must be at least 1");
  if (c.serve_port < 0 || c.serve_port > 65535) fail("serve.port must be in [0, 65535]");
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

Config parse_config(const std::string& text, const EnvLookup& env, const std::string& origin) {
  Config c;
  std::set<std::string> seen;
  auto lines = util::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = util::trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    std::string where = origin + ":" + std::to_string(i + 1) + ": ";
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kValidation, where + "expected key = value");
    std::string key = util::trim(line.substr(0, eq));
    std::string value = util::trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw Error(ErrorCode::kValidation, where + "duplicate key '" + key + "'");
    try {
      set_config_value(c, key, value);
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
  }
  for (const auto& key : config_keys())
    if (auto v = env(env_name(key))) {
      try {
        set_config_value(c, key, *v);
      } catch (const Error& e) {
        throw Error(e.code(), env_name(key) + ": " + e.what());
      }
    }
  c.synth.token_budget = c.prompt_token_budget;
  c.synth.with_cot = c.with_cot;
  validate_config(c);
  return c;
}

Config load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env) {
  if (!path) return parse_config("", env);
  return parse_config(util::read_file(*path), env, path->string());
}

Json config_to_json(const Config& config) {
  Json j = Json::object();
  for (const auto& [k, f] : fields()) j[k] = f.get(config);
  return j;
}

}  // namespace ica
