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

#include "squadtx/review.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <ctime>
#include <thread>

#include "httplib.h"
#include "squadtx/text.hpp"

namespace squadtx {

const char* to_string(Decision d) noexcept {
  switch (d) {
    case Decision::kAccept:
      return "accept";
    case Decision::kCorrected:
      return "corrected";
    case Decision::kReject:
      return "reject";
  }
  return "unknown";
}

Decision decision_from_string(std::string_view s) {
  if (s == "accept") return Decision::kAccept;
  if (s == "corrected") return Decision::kCorrected;
  if (s == "reject") return Decision::kReject;
  throw SchemaError("decision",
                    "must be accept, corrected or reject, got \"" +
                        std::string(s) + "\"");
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

OrderedJson to_json(const ReviewVerdict& v) {
  OrderedJson o = OrderedJson::object();
  o["qa_id"] = v.qa_id;
  o["decision"] = to_string(v.decision);
  if (v.corrected_text) o["corrected_text"] = *v.corrected_text;
  if (v.corrected_start) o["corrected_start"] = *v.corrected_start;
  o["reviewer"] = v.reviewer;
  o["timestamp"] = v.timestamp;
  return o;
}

ReviewVerdict verdict_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("$", "verdict must be an object");
  ReviewVerdict v;
  auto str = [&](const char* key, bool required) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) throw SchemaError(key, "is required");
      return std::nullopt;
    }
    if (!it->is_string()) throw SchemaError(key, "must be a string");
    return it->get<std::string>();
  };
  v.qa_id = str("qa_id", true).value();
  v.decision = decision_from_string(str("decision", true).value());
  v.corrected_text = str("corrected_text", false);
  if (auto it = j.find("corrected_start"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) {
      throw SchemaError("corrected_start", "must be an integer", v.qa_id);
    }
    v.corrected_start = it->get<std::int64_t>();
  }
  v.reviewer = str("reviewer", false).value_or("");
  v.timestamp = str("timestamp", false).value_or("");
  return v;
}

OrderedJson to_json(const ReviewItem& item) {
  OrderedJson o = OrderedJson::object();
  o["position"] = item.position;
  o["id"] = item.qa.id;
  o["title"] = item.title;
  o["context"] = item.context;
  o["question"] = item.qa.question;
  o["is_impossible"] = item.qa.is_impossible;
  OrderedJson answers = OrderedJson::array();
  for (const auto& a : item.qa.answers) {
    answers.push_back({{"text", a.text}, {"answer_start", a.answer_start}});
  }
  o["answers"] = std::move(answers);
  o["verdict"] = item.verdict ? to_json(*item.verdict) : OrderedJson(nullptr);
  return o;
}

OrderedJson to_json(const ReviewProgress& p) {
  OrderedJson o = OrderedJson::object();
  o["total"] = p.total;
  o["reviewed"] = p.reviewed;
  o["unreviewed"] = p.unreviewed;
  o["accepted"] = p.accepted;
  o["corrected"] = p.corrected;
  o["rejected"] = p.rejected;
  return o;
}

ReviewStore::ReviewStore(Dataset candidates, std::filesystem::path log_path)
    : candidates_(std::move(candidates)), log_path_(std::move(log_path)) {
  if (const auto bad = validate_spans(candidates_); !bad.empty()) {
    throw PreconditionError("candidate set has " + std::to_string(bad.size()) +
                            " invalid spans, first in " + bad.front().qa_id);
  }
  for (std::size_t a = 0; a < candidates_.data.size(); ++a) {
    const auto& article = candidates_.data[a];
    for (std::size_t p = 0; p < article.paragraphs.size(); ++p) {
      const auto& para = article.paragraphs[p];
      for (std::size_t q = 0; q < para.qas.size(); ++q) {
        index_.emplace(para.qas[q].id, positions_.size());
        positions_.push_back({a, p, q});
      }
    }
  }

  // Replay; keep only complete lines so the next append starts cleanly.
  std::uintmax_t good_bytes = 0;
  if (std::filesystem::exists(log_path_)) {
    std::ifstream in(log_path_, std::ios::binary);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (in.eof()) break;  // no trailing newline: partial write
      good_bytes += line.size() + 1;
      if (line.empty()) continue;
      try {
        auto v = verdict_from_json(nlohmann::json::parse(line));
        if (!index_.contains(v.qa_id)) {
          spdlog::warn("verdict log line {}: unknown id {}", line_no, v.qa_id);
          continue;
        }
        latest_[v.qa_id] = std::move(v);
      } catch (const std::exception& e) {
        spdlog::warn("verdict log line {} skipped: {}", line_no, e.what());
      }
    }
    in.close();
    if (std::filesystem::file_size(log_path_) != good_bytes) {
      spdlog::warn("dropping partial final line of {}", log_path_.string());
      std::filesystem::resize_file(log_path_, good_bytes);
    }
  }
  log_.open(log_path_, std::ios::binary | std::ios::app);
  if (!log_) throw Error("cannot open verdict log " + log_path_.string());
}

ReviewItem ReviewStore::item_at(std::size_t index) const {
  const auto& pos = positions_[index];
  const auto& article = candidates_.data[pos.article];
  const auto& para = article.paragraphs[pos.paragraph];
  ReviewItem item;
  item.position = index;
  item.title = article.title;
  item.context = para.context;
  item.qa = para.qas[pos.qa];
  if (auto it = latest_.find(item.qa.id); it != latest_.end()) {
    item.verdict = it->second;
  }
  return item;
}

std::optional<ReviewItem> ReviewStore::next_unreviewed() const {
  std::shared_lock lock(mu_);
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    const auto& pos = positions_[i];
    const auto& id =
        candidates_.data[pos.article].paragraphs[pos.paragraph].qas[pos.qa].id;
    if (!latest_.contains(id)) return item_at(i);
  }
  return std::nullopt;
}

ReviewItem ReviewStore::get(const std::string& qa_id) const {
  std::shared_lock lock(mu_);
  auto it = index_.find(qa_id);
  if (it == index_.end()) throw NotFoundError("unknown id " + qa_id);
  return item_at(it->second);
}

void ReviewStore::check(const ReviewVerdict& v) const {
  auto it = index_.find(v.qa_id);
  if (it == index_.end()) throw NotFoundError("unknown id " + v.qa_id);
  if (v.decision != Decision::kCorrected) return;
  if (!v.corrected_text || !v.corrected_start) {
    throw SchemaError("corrected_text",
                      "a corrected verdict needs corrected_text and "
                      "corrected_start",
                      v.qa_id);
  }
  const auto& pos = positions_[it->second];
  const auto context = text::decode(
      candidates_.data[pos.article].paragraphs[pos.paragraph].context);
  const auto answer = text::decode(*v.corrected_text);
  if (text::trim(std::u32string_view(answer)).empty()) {
    throw VerdictError("corrected text is empty", *v.corrected_text, "");
  }
  if (!span_matches(context, *v.corrected_start, answer)) {
    std::string actual;
    const auto start = *v.corrected_start;
    if (start >= 0 && static_cast<std::size_t>(start) <= context.size()) {
      actual = text::encode(std::u32string_view(context).substr(
          static_cast<std::size_t>(start), answer.size()));
    }
    throw VerdictError("context slice at " + std::to_string(start) +
                           " does not match the corrected text",
                       *v.corrected_text, actual);
  }
}

void ReviewStore::submit(ReviewVerdict v) {
  std::unique_lock lock(mu_);
  check(v);
  if (v.decision != Decision::kCorrected) {
    v.corrected_text.reset();
    v.corrected_start.reset();
  }
  if (v.timestamp.empty()) v.timestamp = utc_timestamp();
  log_ << to_json(v).dump() << '\n';
  log_.flush();
  if (!log_) throw Error("cannot append to verdict log " + log_path_.string());
  latest_[v.qa_id] = std::move(v);
}

ReviewProgress ReviewStore::progress() const {
  std::shared_lock lock(mu_);
  ReviewProgress p;
  p.total = positions_.size();
  p.reviewed = latest_.size();
  p.unreviewed = p.total - p.reviewed;
  for (const auto& [id, v] : latest_) {
    switch (v.decision) {
      case Decision::kAccept:
        ++p.accepted;
        break;
      case Decision::kCorrected:
        ++p.corrected;
        break;
      case Decision::kReject:
        ++p.rejected;
        break;
    }
  }
  return p;
}

Dataset ReviewStore::export_gold() const {
  std::shared_lock lock(mu_);
  Dataset out;
  out.version = candidates_.version;
  out.extra = candidates_.extra;
  for (const auto& article : candidates_.data) {
    Article a;
    a.title = article.title;
    a.extra = article.extra;
    for (const auto& para : article.paragraphs) {
      Paragraph p;
      p.context = para.context;
      p.extra = para.extra;
      for (const auto& qa : para.qas) {
        auto it = latest_.find(qa.id);
        if (it == latest_.end() || it->second.decision == Decision::kReject) {
          continue;
        }
        QaItem q = qa;
        if (it->second.decision == Decision::kCorrected) {
          q.is_impossible = false;
          q.answers = {AnswerSpan{*it->second.corrected_text,
                                  *it->second.corrected_start,
                                  OrderedJson::object()}};
        }
        p.qas.push_back(std::move(q));
      }
      if (!p.qas.empty()) a.paragraphs.push_back(std::move(p));
    }
    if (!a.paragraphs.empty()) out.data.push_back(std::move(a));
  }
  return out;
}

struct ReviewServer::Impl {
  explicit Impl(ReviewStore& s) : store(s) {}
  ReviewStore& store;
  httplib::Server server;
  std::thread thread;
};

namespace {

void send_json(httplib::Response& res, int status, const OrderedJson& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg) {
  send_json(res, status, OrderedJson{{"error", msg}});
}

}  // namespace

ReviewServer::ReviewServer(ReviewStore& store,
                           std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(store)) {
  auto& srv = impl_->server;
  auto& st = impl_->store;

  srv.Get("/api/queue/next", [&st](const httplib::Request&,
                                   httplib::Response& res) {
    const auto item = st.next_unreviewed();
    if (!item) {
      send_json(res, 200, OrderedJson{{"done", true}});
      return;
    }
    auto body = to_json(*item);
    body["done"] = false;
    send_json(res, 200, body);
  });

  srv.Get(R"(/api/examples/([^/]+))", [&st](const httplib::Request& req,
                                            httplib::Response& res) {
    try {
      send_json(res, 200, to_json(st.get(req.matches[1].str())));
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    }
  });

  srv.Post(R"(/api/examples/([^/]+)/verdict)", [&st](const httplib::Request& req,
                                                     httplib::Response& res) {
    const auto id = req.matches[1].str();
    try {
      auto body = nlohmann::json::parse(req.body);
      if (body.is_object() && !body.contains("qa_id")) body["qa_id"] = id;
      auto v = verdict_from_json(body);
      if (v.qa_id != id) {
        send_error(res, 400, "qa_id in body does not match the path");
        return;
      }
      st.submit(std::move(v));
      OrderedJson ack = OrderedJson::object();
      ack["ok"] = true;
      ack["qa_id"] = id;
      ack["progress"] = to_json(st.progress());
      send_json(res, 200, ack);
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const VerdictError& e) {
      send_json(res, 422, OrderedJson{{"error", e.what()},
                                      {"expected", e.expected()},
                                      {"actual", e.actual()}});
    } catch (const SchemaError& e) {
      send_error(res, 400, e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  });

  srv.Get("/api/progress", [&st](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, to_json(st.progress()));
  });

  srv.Get("/api/export", [&st](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, to_json(st.export_gold()));
  });

  if (static_dir) {
    if (!srv.set_mount_point("/", static_dir->string())) {
      throw Error("static directory not found: " + static_dir->string());
    }
  }
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = srv.bind_to_any_port(host);
  } else if (!srv.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return bound;
}

void ReviewServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error("cannot serve on " + host + ":" + std::to_string(port));
  }
}

void ReviewServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace squadtx
