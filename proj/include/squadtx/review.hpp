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

// Gold-set review: a candidate dataset, an append-only verdict log, and an
// HTTP JSON API over both.
//
// The queue follows candidate order and skips ids that have a verdict. The
// exported gold set is a pure fold over (candidates, log) where the latest
// verdict per id wins: accepted items verbatim, corrected items with the
// replacement span, rejected and unreviewed items left out.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "squadtx/errors.hpp"
#include "squadtx/squad.hpp"

namespace squadtx {

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// A corrected span whose context slice differs from its text.
class VerdictError : public Error {
 public:
  VerdictError(const std::string& what, std::string expected,
               std::string actual)
      : Error(what), expected_(std::move(expected)), actual_(std::move(actual)) {}
  const std::string& expected() const noexcept { return expected_; }
  const std::string& actual() const noexcept { return actual_; }

 private:
  std::string expected_;
  std::string actual_;
};

enum class Decision { kAccept, kCorrected, kReject };
const char* to_string(Decision d) noexcept;
// Throws SchemaError on an unknown name.
Decision decision_from_string(std::string_view s);

struct ReviewVerdict {
  std::string qa_id;
  Decision decision = Decision::kAccept;
  std::optional<std::string> corrected_text;
  std::optional<std::int64_t> corrected_start;
  std::string reviewer;
  std::string timestamp;  // ISO 8601 UTC

  friend bool operator==(const ReviewVerdict&, const ReviewVerdict&) = default;
};

OrderedJson to_json(const ReviewVerdict& v);
// Throws SchemaError.
ReviewVerdict verdict_from_json(const nlohmann::json& j);

struct ReviewItem {
  std::size_t position = 0;  // index in the queue
  std::string title;
  std::string context;
  QaItem qa;
  std::optional<ReviewVerdict> verdict;
};

OrderedJson to_json(const ReviewItem& item);

struct ReviewProgress {
  std::size_t total = 0;
  std::size_t reviewed = 0;
  std::size_t unreviewed = 0;
  std::size_t accepted = 0;
  std::size_t corrected = 0;
  std::size_t rejected = 0;

  friend bool operator==(const ReviewProgress&, const ReviewProgress&) = default;
};

OrderedJson to_json(const ReviewProgress& p);

std::string utc_timestamp();

class ReviewStore {
 public:
  // Replays an existing log. Candidates must pass validate_spans
  // (PreconditionError otherwise). A partial final log line is dropped.
  ReviewStore(Dataset candidates, std::filesystem::path log_path);

  std::optional<ReviewItem> next_unreviewed() const;
  // Throws NotFoundError.
  ReviewItem get(const std::string& qa_id) const;
  // Throws NotFoundError, VerdictError, or SchemaError for a corrected
  // verdict without text and offset. Fills an empty timestamp.
  void submit(ReviewVerdict v);
  ReviewProgress progress() const;
  Dataset export_gold() const;

  std::size_t size() const { return positions_.size(); }

 private:
  struct Position {
    std::size_t article;
    std::size_t paragraph;
    std::size_t qa;
  };

  ReviewItem item_at(std::size_t index) const;
  void check(const ReviewVerdict& v) const;

  Dataset candidates_;
  std::vector<Position> positions_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, ReviewVerdict> latest_;
  std::filesystem::path log_path_;
  std::ofstream log_;
  mutable std::shared_mutex mu_;
};

// HTTP front end. GET /api/queue/next, GET /api/examples/{id},
// POST /api/examples/{id}/verdict, GET /api/progress, GET /api/export, and
// static files from an optional directory.
class ReviewServer {
 public:
  ReviewServer(ReviewStore& store, std::optional<std::filesystem::path> static_dir);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Binds (port 0 picks a free one) and serves on a background thread.
  // Returns the bound port. Throws Error when binding fails.
  int start(const std::string& host, int port);
  // Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace squadtx
