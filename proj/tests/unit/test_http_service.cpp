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

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "squadtx/errors.hpp"
#include "squadtx/http_service.hpp"
#include "squadtx/similarity.hpp"
#include "squadtx/translation.hpp"
#include "squadtx/transliteration.hpp"

using namespace squadtx;

namespace {

// Local service that replays scripted statuses, then answers normally.
class FakeService {
 public:
  FakeService() {
    server_.Post("/v1/translate", [this](const httplib::Request& req,
                                         httplib::Response& res) {
      std::lock_guard lock(mu_);
      ++requests_;
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      last_path_ = req.path;
      if (!script_.empty()) {
        const auto [status, retry_after] = script_.front();
        script_.pop_front();
        res.status = status;
        if (!retry_after.empty()) res.set_header("Retry-After", retry_after);
        res.set_content("{\"error\":\"scripted\"}", "application/json");
        return;
      }
      const auto j = nlohmann::json::parse(req.body);
      nlohmann::json out;
      out["data"]["translations"] = nlohmann::json::array(
          {{{"text", "[" + j["q"].get<std::string>() + "]"}}});
      res.set_content(out.dump(), "application/json");
    });
    server_.Post(R"(/v1/score)", [](const httplib::Request& req,
                                    httplib::Response& res) {
      const auto j = nlohmann::json::parse(req.body);
      const double s = j["a"] == j["b"] ? 1.0 : 1.7;  // out of range on purpose
      res.set_content(nlohmann::json{{"score", s}}.dump(), "application/json");
    });
    server_.Post(R"(/v1/translit/(\w+))", [](const httplib::Request& req,
                                             httplib::Response& res) {
      const auto j = nlohmann::json::parse(req.body);
      if (j["text"] == "fail") {
        res.status = 400;
        return;
      }
      res.set_content(nlohmann::json{{"result", "देव:" + j["text"].get<std::string>()}}.dump(),
                      "application/json");
    });
    server_.Post("/v1/garbage", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json", "text/plain");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }

  void script(int status, std::string retry_after = "") {
    std::lock_guard lock(mu_);
    script_.emplace_back(status, std::move(retry_after));
  }
  int requests() {
    std::lock_guard lock(mu_);
    return requests_;
  }
  std::string last_body() {
    std::lock_guard lock(mu_);
    return last_body_;
  }
  std::string last_auth() {
    std::lock_guard lock(mu_);
    return last_auth_;
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::deque<std::pair<int, std::string>> script_;
  int requests_ = 0;
  std::string last_body_;
  std::string last_auth_;
  std::string last_path_;
};

HttpServiceConfig translate_config(const FakeService& svc) {
  HttpServiceConfig c;
  c.base_url = svc.base_url();
  c.path_template = "/v1/translate";
  c.body_template = R"({"q": "{{text}}", "source": "{{src}}", "target": "{{tgt}}"})";
  c.response_path = "data.translations.0.text";
  c.timeout_s = 5;
  return c;
}

}  // namespace

TEST_CASE("templates escape for URLs and JSON") {
  const std::map<std::string, std::string> vars = {{"text", "a \"b\"\n/c"}, {"x", "1"}};
  CHECK(render_template("/t?q={{text}}&x={{x}}", vars, Escape::kUrl) ==
        "/t?q=a%20%22b%22%0A%2Fc&x=1");
  CHECK(render_template(R"({"q":"{{text}}"})", vars, Escape::kJson) ==
        R"({"q":"a \"b\"\n/c"})");
  CHECK(render_template("{{x}}{{x}}", vars, Escape::kNone) == "11");
  CHECK_THROWS_AS(render_template("{{missing}}", vars, Escape::kNone), Error);
}

TEST_CASE("response path extraction") {
  const auto doc = nlohmann::json::parse(R"({"a":[{"b":"x"},{"b":"y"}],"n":2})");
  CHECK(extract_path(doc, "a.1.b") == "y");
  CHECK(extract_path(doc, "n") == 2);
  CHECK(extract_path(doc, "") == doc);
  CHECK_THROWS_AS(extract_path(doc, "a.5.b"), ResponseFormatError);
  CHECK_THROWS_AS(extract_path(doc, "missing"), ResponseFormatError);
  CHECK_THROWS_AS(extract_path(doc, "n.deeper"), ResponseFormatError);
}

TEST_CASE("config file fields") {
  const auto c = HttpServiceConfig::from_json(nlohmann::json::parse(R"({
    "base_url": "https://api.example.com", "path_template": "/t",
    "body_template": "{}", "response_path": "x", "max_retries": 2,
    "headers": {"X-Test": "1"}, "rate_per_s": 5, "burst": 2})"));
  CHECK(c.base_url == "https://api.example.com");
  CHECK(c.max_retries == 2);
  CHECK(c.headers.at("X-Test") == "1");
  CHECK(c.rate_per_s == 5);
  CHECK(c.api_key_env == "SQUADTX_API_KEY");
}

TEST_CASE("http backend translates through the service") {
  FakeService svc;
  HttpTranslator t(translate_config(svc));
  CHECK(t.translate("hello \"world\"", "en", "mr") == "[hello \"world\"]");
  const auto body = nlohmann::json::parse(svc.last_body());
  CHECK(body["target"] == "mr");
  CHECK(t.id().rfind("http:", 0) == 0);
}

TEST_CASE("API key from the environment becomes the auth header") {
  FakeService svc;
  auto cfg = translate_config(svc);
  cfg.api_key_env = "SQUADTX_TEST_KEY";
  ::setenv("SQUADTX_TEST_KEY", "s3cret", 1);
  HttpTranslator t(cfg);
  t.translate("x", "en", "mr");
  CHECK(svc.last_auth() == "Bearer s3cret");
  ::unsetenv("SQUADTX_TEST_KEY");
  t.translate("y", "en", "mr");
  CHECK(svc.last_auth().empty());
}

TEST_CASE("429 surfaces a rate-limit error with retry-after") {
  FakeService svc;
  auto cfg = translate_config(svc);
  cfg.max_retries = 0;
  HttpServiceClient client(cfg);
  svc.script(429, "7");
  try {
    client.call({{"text", "x"}, {"src", "en"}, {"tgt", "mr"}});
    FAIL("expected RateLimitError");
  } catch (const RateLimitError& e) {
    REQUIRE(e.retry_after().has_value());
    CHECK(*e.retry_after() == doctest::Approx(7.0));
    CHECK(e.retryable());
  }
}

TEST_CASE("retries honour Retry-After and back off exponentially") {
  FakeService svc;
  auto cfg = translate_config(svc);
  cfg.max_retries = 4;
  cfg.initial_backoff_s = 0.5;
  cfg.backoff_multiplier = 2;
  HttpServiceClient client(cfg);
  std::vector<double> sleeps;
  client.set_sleeper([&](double s) { sleeps.push_back(s); });
  svc.script(429, "3");
  svc.script(503);
  svc.script(500);
  const auto out = client.call({{"text", "x"}, {"src", "en"}, {"tgt", "mr"}});
  CHECK(out == "[x]");
  CHECK(svc.requests() == 4);
  REQUIRE(sleeps.size() == 3);
  CHECK(sleeps[0] == doctest::Approx(3.0));
  CHECK(sleeps[1] == doctest::Approx(1.0));
  CHECK(sleeps[2] == doctest::Approx(2.0));
}

TEST_CASE("retries are bounded") {
  FakeService svc;
  auto cfg = translate_config(svc);
  cfg.max_retries = 2;
  HttpServiceClient client(cfg);
  int sleeps = 0;
  client.set_sleeper([&](double) { ++sleeps; });
  for (int i = 0; i < 5; ++i) svc.script(502);
  try {
    client.call({{"text", "x"}, {"src", "en"}, {"tgt", "mr"}});
    FAIL("expected HttpStatusError");
  } catch (const HttpStatusError& e) {
    CHECK(e.status() == 502);
    CHECK(e.retryable());
  }
  CHECK(svc.requests() == 3);
  CHECK(sleeps == 2);
}

TEST_CASE("client errors are not retried") {
  FakeService svc;
  HttpServiceClient client(translate_config(svc));
  client.set_sleeper([](double) { FAIL("no retry expected"); });
  svc.script(400);
  try {
    client.call({{"text", "x"}, {"src", "en"}, {"tgt", "mr"}});
    FAIL("expected HttpStatusError");
  } catch (const HttpStatusError& e) {
    CHECK(e.status() == 400);
    CHECK_FALSE(e.retryable());
  }
  CHECK(svc.requests() == 1);
}

TEST_CASE("malformed responses are format errors") {
  FakeService svc;
  auto cfg = translate_config(svc);
  cfg.path_template = "/v1/garbage";
  HttpServiceClient client(cfg);
  CHECK_THROWS_AS(client.call({{"text", "x"}, {"src", "en"}, {"tgt", "mr"}}),
                  ResponseFormatError);
}

TEST_CASE("transport failure is retryable and distinct") {
  HttpServiceConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.max_retries = 1;
  cfg.timeout_s = 1;
  HttpServiceClient client(cfg);
  int sleeps = 0;
  client.set_sleeper([&](double) { ++sleeps; });
  CHECK_THROWS_AS(client.call({}), TransportError);
  CHECK(sleeps == 1);
}

TEST_CASE("token bucket spaces requests") {
  TokenBucket bucket(50.0, 1.0);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 6; ++i) bucket.acquire();
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(elapsed >= 0.08);
}

TEST_CASE("http similarity clamps to [0, 1]") {
  FakeService svc;
  HttpServiceConfig cfg;
  cfg.base_url = svc.base_url();
  cfg.path_template = "/v1/score";
  cfg.body_template = R"({"a": "{{a}}", "b": "{{b}}"})";
  cfg.response_path = "score";
  HttpSimilarity sim(cfg);
  CHECK(sim.score("x", "x") == 1.0);
  CHECK(sim.score("x", "y") == 1.0);
  CHECK(sim.concurrent_safe());
}

TEST_CASE("http transliteration engine") {
  FakeService svc;
  HttpServiceConfig cfg;
  cfg.base_url = svc.base_url();
  cfg.path_template = "/v1/translit/{{tgt}}";
  cfg.body_template = R"({"text": "{{text}}"})";
  cfg.response_path = "result";
  cfg.max_retries = 0;
  HttpTransliterator engine(cfg, "mr");
  const auto r = transliterate_residue("youtube वर fail", &engine);
  CHECK(r.text == "देव:youtube वर fail");
  CHECK(r.replaced == 1);
  REQUIRE(r.flags.size() == 1);
  CHECK(r.flags[0].text == "fail");
}
