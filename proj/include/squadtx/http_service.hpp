// Copyright 2026 The squadtx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Template-driven JSON-over-HTTP client used by every remote backend
// (translation, transliteration, similarity).
//
// A request is described by a path template and a body template. Both take
// {{name}} placeholders: path substitutions are URL-encoded, body
// substitutions are JSON-string-escaped (the template supplies the quotes).
// The reply is a JSON document; `response_path` selects the value, e.g.
// "data.translations.0.translatedText".

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>

#include "json.hpp"

namespace squadtx {

struct HttpServiceConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path_template = "/";
  std::string body_template;
  std::string response_path;
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;

  // Auth header is only sent when the env var is set and non-empty.
  std::string api_key_env = "SQUADTX_API_KEY";
  std::string auth_header = "Authorization";
  std::string auth_template = "Bearer {{api_key}}";

  int max_retries = 4;
  double initial_backoff_s = 0.5;
  double backoff_multiplier = 2.0;
  double max_backoff_s = 30.0;

  // Token bucket; rate <= 0 disables limiting.
  double rate_per_s = 0.0;
  double burst = 1.0;

  double timeout_s = 30.0;

  static HttpServiceConfig from_json(const nlohmann::json& j);
  static HttpServiceConfig from_file(const std::filesystem::path& path);
};

enum class Escape { kNone, kUrl, kJson };

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& vars,
                            Escape escape);

// Throws ResponseFormatError when a step is missing.
const nlohmann::json& extract_path(const nlohmann::json& doc,
                                   std::string_view path);

class TokenBucket {
 public:
  using Clock = std::chrono::steady_clock;

  TokenBucket(double rate_per_s, double burst);
  // Blocks until a token is available. No-op when disabled.
  void acquire();

 private:
  double rate_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mu_;
};

class HttpServiceClient {
 public:
  using Sleeper = std::function<void(double seconds)>;

  explicit HttpServiceClient(HttpServiceConfig cfg);

  // Renders the request from `vars`, POSTs it with retries, and returns the
  // value at response_path. Throws TransportError, RateLimitError,
  // HttpStatusError, or ResponseFormatError.
  nlohmann::json call(const std::map<std::string, std::string>& vars);

  // Replaces the backoff sleep, e.g. to make retry tests instant.
  void set_sleeper(Sleeper s) { sleeper_ = std::move(s); }
  const HttpServiceConfig& config() const noexcept { return cfg_; }

 private:
  nlohmann::json call_once(const std::string& path, const std::string& body);
  double backoff_for(int attempt) const;

  HttpServiceConfig cfg_;
  TokenBucket bucket_;
  Sleeper sleeper_;
};

}  // namespace squadtx
