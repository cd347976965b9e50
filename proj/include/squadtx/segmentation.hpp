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

// Rule-based sentence segmentation with exact code-point offsets.
//
// A boundary is placed after a run of sentence-final punctuation
// (. ! ? । ॥, optionally followed by closing quotes or brackets) when the
// run is followed by whitespace and then an uppercase letter, a letter from
// a caseless script, or opening punctuation. A lone-period run does not end
// a sentence when the token before it is a known abbreviation or an initial
// chain such as "L.A.", unless the next word is a common sentence opener
// ("He", "The", ...) and the abbreviation is not a title like "Dr".

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "squadtx/squad.hpp"

namespace squadtx {

struct Segment {
  std::string text;
  std::size_t start = 0;  // code points into the original context

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SegmentedContext {
  std::string original;
  std::vector<Segment> segments;

  friend bool operator==(const SegmentedContext&,
                         const SegmentedContext&) = default;
};

// Inclusive segment index range.
struct SegmentRange {
  std::size_t first = 0;
  std::size_t last = 0;

  friend bool operator==(const SegmentRange&, const SegmentRange&) = default;
};

// Abbreviations are stored lowercased with trailing periods removed.
class AbbreviationSet {
 public:
  AbbreviationSet() = default;
  explicit AbbreviationSet(std::initializer_list<std::string_view> tokens);

  static AbbreviationSet defaults();
  // One token per line; '#' starts a comment; blank lines ignored.
  static AbbreviationSet from_file(const std::filesystem::path& path);
  static AbbreviationSet parse(std::string_view contents);

  void add(std::string_view token);
  void merge(const AbbreviationSet& other);
  bool contains(std::string_view token) const;
  std::size_t size() const noexcept { return tokens_.size(); }

 private:
  static std::string key(std::string_view token);
  std::unordered_set<std::string> tokens_;
};

std::string normalize_camel_case(std::string_view text);

SegmentedContext segment_sentences(std::string_view context,
                                   const AbbreviationSet& abbreviations =
                                       AbbreviationSet::defaults());

// Throws InvariantError when the span is not a slice of sc.original or does
// not fall inside segment text.
SegmentRange locate_answer_segments(const SegmentedContext& sc,
                                    const AnswerSpan& span);

// Throws PreconditionError for an invalid range.
SegmentedContext merge_segments(const SegmentedContext& sc, SegmentRange range);

}  // namespace squadtx
