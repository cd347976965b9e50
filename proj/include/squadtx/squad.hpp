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

// SQuAD 2.0 object graph, JSON (de)serialization, and span validation.
//
// Answer offsets are Unicode code points into the owning paragraph context,
// matching the character offsets of the original dataset. Unknown JSON fields
// are kept in `extra` so a parse/serialize round trip is lossless.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace squadtx {

using OrderedJson = nlohmann::ordered_json;

struct AnswerSpan {
  std::string text;
  std::int64_t answer_start = 0;
  OrderedJson extra = OrderedJson::object();

  friend bool operator==(const AnswerSpan&, const AnswerSpan&) = default;
};

struct QaItem {
  std::string id;
  std::string question;
  bool is_impossible = false;
  std::vector<AnswerSpan> answers;
  // Absent and empty are distinct so round trips stay exact.
  std::optional<std::vector<AnswerSpan>> plausible_answers;
  OrderedJson extra = OrderedJson::object();

  friend bool operator==(const QaItem&, const QaItem&) = default;
};

struct Paragraph {
  std::string context;
  std::vector<QaItem> qas;
  OrderedJson extra = OrderedJson::object();

  friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

struct Article {
  std::string title;
  std::vector<Paragraph> paragraphs;
  OrderedJson extra = OrderedJson::object();

  friend bool operator==(const Article&, const Article&) = default;
};

struct Dataset {
  std::optional<std::string> version;
  std::vector<Article> data;
  OrderedJson extra = OrderedJson::object();

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct DatasetStats {
  std::int64_t article_count = 0;
  std::int64_t paragraph_count = 0;
  std::int64_t qa_count = 0;
  std::int64_t answerable_count = 0;
  std::int64_t unanswerable_count = 0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

struct SpanViolation {
  std::string qa_id;
  std::string field;  // "answers" or "plausible_answers"
  std::size_t answer_index = 0;
  std::int64_t answer_start = 0;
  std::string expected;  // the answer text
  std::string actual;    // the context slice at answer_start

  friend bool operator==(const SpanViolation&, const SpanViolation&) = default;
};

struct ParseOptions {
  bool keep_unknown_fields = true;
  bool keep_plausible_answers = true;
};

inline constexpr std::string_view kSquadVersion = "v2.0";

// Throws ParseError (malformed JSON) or SchemaError (structure, duplicate
// ids, answer offsets outside the context, answers inconsistent with
// is_impossible). A span whose offset is in range but whose slice differs is
// not a parse error; validate_spans reports it.
Dataset parse_dataset(std::string_view json_text, const ParseOptions& opts = {});
Dataset load_dataset(const std::filesystem::path& path,
                     const ParseOptions& opts = {});

OrderedJson to_json(const Dataset& d);
std::string serialize_dataset(const Dataset& d, int indent = -1);
void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  int indent = -1);

std::vector<SpanViolation> validate_spans(const Dataset& d);
// Single-paragraph form, used by the pipeline and the review service.
std::vector<SpanViolation> validate_spans(const Paragraph& p);

// True iff `text` equals the code-point slice of `context` at `start`.
bool span_matches(std::u32string_view context, std::int64_t start,
                  std::u32string_view text);

DatasetStats dataset_stats(const Dataset& d);

OrderedJson to_json(const DatasetStats& s);
OrderedJson to_json(const SpanViolation& v);

}  // namespace squadtx
