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

// Answer re-alignment inside a translated sentence.
//
// Every word-boundary phrase of the sentence (up to a length cap) is scored
// against the independently translated answer. The best phrase becomes the
// base answer; it is then grown one word at a time to the left or right
// while the grown phrase keeps at least `threshold_ratio` of the base score.
// The result is always an exact code-point slice of the sentence.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "squadtx/similarity.hpp"
#include "squadtx/translation.hpp"

namespace squadtx {

struct Word {
  std::string text;
  std::size_t start = 0;  // code points into the sentence
  std::size_t length = 0;

  friend bool operator==(const Word&, const Word&) = default;
};

struct WordSequence {
  std::string sentence;
  std::vector<Word> words;

  // Sentence text from the start of word `first` to the end of word `last`,
  // internal spacing preserved.
  std::string phrase(std::size_t first, std::size_t last) const;
  std::size_t phrase_start(std::size_t first) const {
    return words[first].start;
  }
  std::size_t phrase_length(std::size_t first, std::size_t last) const {
    return words[last].start + words[last].length - words[first].start;
  }

 private:
  friend WordSequence tokenize_words(std::string_view sentence);
  std::u32string cps_;
};

WordSequence tokenize_words(std::string_view sentence);

struct AlignConfig {
  double threshold_ratio = 0.99;
  double min_accept_floor = 0.35;
  // Unset: max(2 * answer_words + 3, 8).
  std::optional<std::size_t> max_phrase_words;

  // Throws PreconditionError when out of range.
  void validate() const;
  std::size_t phrase_cap(std::size_t answer_words) const;
};

struct WordSpan {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
  std::size_t size() const noexcept { return last - first + 1; }
  friend bool operator==(const WordSpan&, const WordSpan&) = default;
};

struct PhraseScore {
  WordSpan span;
  double score = 0.0;
  friend bool operator==(const PhraseScore&, const PhraseScore&) = default;
};

// Scores for every (first, last) with last - first + 1 <= cap.
class SimilarityMatrix {
 public:
  SimilarityMatrix(std::size_t word_count, std::size_t cap);

  std::size_t word_count() const noexcept { return words_; }
  std::size_t cap() const noexcept { return cap_; }
  // Number of stored entries.
  std::size_t size() const noexcept;
  bool contains(std::size_t first, std::size_t last) const noexcept;
  double at(std::size_t first, std::size_t last) const;
  void set(std::size_t first, std::size_t last, double score);

  // Entries in (first, length) order.
  std::vector<PhraseScore> entries() const;

 private:
  std::size_t index(std::size_t first, std::size_t last) const;
  std::size_t words_;
  std::size_t cap_;
  std::vector<double> scores_;  // NaN = not set
};

SimilarityMatrix build_similarity_matrix(
    const WordSequence& ws, std::string_view translated_answer,
    const AlignConfig& cfg, const Similarity& sim = default_similarity());

// Maximal score; ties go to fewer words, then the smaller first index.
// Throws PreconditionError on an empty matrix.
PhraseScore find_base_phrase(const SimilarityMatrix& m);

// Grows `base` while the grown phrase scores at least
// threshold_ratio * score(base). Both neighbours are tried each round; the
// higher-scoring one is adopted and the right one wins exact ties. Stops at
// the sentence edges or the length cap. A threshold_ratio of exactly 1
// means "strictly better than the base", which the capped base maximum
// never admits, so extension is effectively disabled. A base that already
// scores 1.0 is returned as is.
WordSpan extend_phrase(const WordSequence& ws, WordSpan base,
                       std::string_view translated_answer,
                       const AlignConfig& cfg,
                       const Similarity& sim = default_similarity());

enum class AlignStatus { kAligned, kBelowFloor };

struct AlignmentResult {
  AlignStatus status = AlignStatus::kBelowFloor;
  std::string answer_text;
  std::size_t start_in_sentence = 0;
  double score = 0.0;       // final phrase
  double base_score = 0.0;  // matrix maximum
  WordSpan words;
};

// Throws PreconditionError on an empty sentence or answer.
AlignmentResult align_answer(std::string_view sentence,
                             std::string_view translated_answer,
                             const AlignConfig& cfg,
                             const Similarity& sim = default_similarity());

// sentence_offsets[sentence_index] + start_in_sentence. Throws
// PreconditionError when the index is out of range or the span of
// `answer_length` code points would run past the sentence.
std::size_t compute_global_offset(const TranslatedContext& tc,
                                  std::size_t sentence_index,
                                  std::size_t start_in_sentence,
                                  std::size_t answer_length = 0);

const char* to_string(AlignStatus s) noexcept;

}  // namespace squadtx
