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

#include "squadtx/http_service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <thread>

#include "squadtx/errors.hpp"

namespace squadtx {

namespace {

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size() * 3);
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string json_escape(std::string_view s) {
  const auto quoted = nlohmann::json(std::string(s)).dump();
  return quoted.substr(1, quoted.size() - 2);
}

std::optional<double> parse_retry_after(const std::string& v) {
  if (v.empty()) return std::nullopt;
  char* end = nullptr;
  const double secs = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || secs < 0) return std::nullopt;
  return secs;
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    out = it->get<T>();
  }
}

}  // namespace

HttpServiceConfig HttpServiceConfig::from_json(const nlohmann::json& j) {
  HttpServiceConfig c;
  read_opt(j, "base_url", c.base_url);
  read_opt(j, "path_template", c.path_template);
  read_opt(j, "body_template", c.body_template);
  read_opt(j, "response_path", c.response_path);
  read_opt(j, "content_type", c.content_type);
  read_opt(j, "headers", c.headers);
  read_opt(j, "api_key_env", c.api_key_env);
  read_opt(j, "auth_header", c.auth_header);
  read_opt(j, "auth_template", c.auth_template);
  read_opt(j, "max_retries", c.max_retries);
  read_opt(j, "initial_backoff_s", c.initial_backoff_s);
  read_opt(j, "backoff_multiplier", c.backoff_multiplier);
  read_opt(j, "max_backoff_s", c.max_backoff_s);
  read_opt(j, "rate_per_s", c.rate_per_s);
  read_opt(j, "burst", c.burst);
  read_opt(j, "timeout_s", c.timeout_s);
  if (c.base_url.empty()) throw Error("http service config: base_url is required");
  if (c.max_retries < 0) throw Error("http service config: max_retries < 0");
  return c;
}

HttpServiceConfig HttpServiceConfig::from_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open http config " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid http config " + path.string() + ": " + e.what());
  }
}

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& vars,
                            Escape escape) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const auto open = tmpl.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    out.append(tmpl.substr(i, open - i));
    const std::string name(tmpl.substr(open + 2, close - open - 2));
    auto it = vars.find(name);
    if (it == vars.end()) {
      throw Error("template placeholder {{" + name + "}} has no value");
    }
    switch (escape) {
      case Escape::kNone:
        out += it->second;
        break;
      case Escape::kUrl:
        out += url_encode(it->second);
        break;
      case Escape::kJson:
        out += json_escape(it->second);
        break;
    }
    i = close + 2;
  }
  return out;
}

const nlohmann::json& extract_path(const nlohmann::json& doc,
                                   std::string_view path) {
  const nlohmann::json* node = &doc;
  std::size_t i = 0;
  while (i <= path.size() && !path.empty()) {
    auto dot = path.find('.', i);
    if (dot == std::string_view::npos) dot = path.size();
    const std::string step(path.substr(i, dot - i));
    if (node->is_array()) {
      const bool numeric =
          !step.empty() && std::all_of(step.begin(), step.end(), [](char c) {
            return std::isdigit(static_cast<unsigned char>(c));
          });
      const auto idx = numeric ? std::stoul(step) : node->size();
      if (idx >= node->size()) {
        throw ResponseFormatError("response has no element \"" + step +
                                  "\" along path " + std::string(path));
      }
      node = &(*node)[idx];
    } else if (node->is_object()) {
      auto it = node->find(step);
      if (it == node->end()) {
        throw ResponseFormatError("response has no field \"" + step +
                                  "\" along path " + std::string(path));
      }
      node = &*it;
    } else {
      throw ResponseFormatError("cannot descend into scalar at \"" + step +
                                "\" along path " + std::string(path));
    }
    i = dot + 1;
  }
  return *node;
}

TokenBucket::TokenBucket(double rate_per_s, double burst)
    : rate_(rate_per_s),
      capacity_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      last_(Clock::now()) {}

void TokenBucket::acquire() {
  if (rate_ <= 0) return;
  for (;;) {
    double wait_s = 0;
    {
      std::lock_guard lock(mu_);
      const auto now = Clock::now();
      const double elapsed = std::chrono::duration<double>(now - last_).count();
      last_ = now;
      tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait_s = (1.0 - tokens_) / rate_;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
  }
}

HttpServiceClient::HttpServiceClient(HttpServiceConfig cfg)
    : cfg_(std::move(cfg)),
      bucket_(cfg_.rate_per_s, cfg_.burst),
      sleeper_([](double s) {
        std::this_thread::sleep_for(std::chrono::duration<double>(s));
      }) {}

double HttpServiceClient::backoff_for(int attempt) const {
  double b = cfg_.initial_backoff_s;
  for (int i = 0; i < attempt; ++i) b *= cfg_.backoff_multiplier;
  return std::min(b, cfg_.max_backoff_s);
}

nlohmann::json HttpServiceClient::call(
    const std::map<std::string, std::string>& vars) {
  const auto path = render_template(cfg_.path_template, vars, Escape::kUrl);
  const auto body = render_template(cfg_.body_template, vars, Escape::kJson);
  for (int attempt = 0;; ++attempt) {
    try {
      return call_once(path, body);
    } catch (const RateLimitError& e) {
      if (attempt >= cfg_.max_retries) throw;
      const double wait = std::min(
          e.retry_after().value_or(backoff_for(attempt)), cfg_.max_backoff_s);
      spdlog::debug("rate limited, retrying in {:.3f}s", wait);
      sleeper_(wait);
    } catch (const ServiceError& e) {
      if (!e.retryable() || attempt >= cfg_.max_retries) throw;
      const double wait = backoff_for(attempt);
      spdlog::debug("{}; retrying in {:.3f}s", e.what(), wait);
      sleeper_(wait);
    }
  }
}

nlohmann::json HttpServiceClient::call_once(const std::string& path,
                                            const std::string& body) {
  bucket_.acquire();
  httplib::Client client(cfg_.base_url);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(cfg_.timeout_s));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  for (const auto& [k, v] : cfg_.headers) headers.emplace(k, v);
  if (const char* key = std::getenv(cfg_.api_key_env.c_str());
      key != nullptr && *key != '\0') {
    headers.emplace(cfg_.auth_header,
                    render_template(cfg_.auth_template, {{"api_key", key}},
                                    Escape::kNone));
  }

  auto res = client.Post(path, headers, body, cfg_.content_type);
  if (!res) {
    throw TransportError("request to " + cfg_.base_url + path +
                         " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429) {
    throw RateLimitError("rate limited by " + cfg_.base_url,
                         parse_retry_after(res->get_header_value("Retry-After")));
  }
  if (res->status < 200 || res->status >= 300) {
    throw HttpStatusError("service returned HTTP " +
                              std::to_string(res->status),
                          res->status, res->body);
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ResponseFormatError(std::string("response is not JSON: ") + e.what());
  }
  return extract_path(doc, cfg_.response_path);
}

}  // namespace squadtx
