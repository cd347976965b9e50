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

#include "squadtx/span_align.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "squadtx/errors.hpp"
#include "squadtx/text.hpp"

namespace squadtx {

std::string WordSequence::phrase(std::size_t first, std::size_t last) const {
  const auto b = words[first].start;
  return text::encode(
      std::u32string_view(cps_).substr(b, phrase_length(first, last)));
}

WordSequence tokenize_words(std::string_view sentence) {
  WordSequence ws;
  ws.sentence = std::string(sentence);
  ws.cps_ = text::decode(sentence);
  const std::u32string_view u(ws.cps_);
  for (const auto& r : text::word_ranges(u)) {
    ws.words.push_back({text::encode(u.substr(r.begin, r.size())), r.begin,
                        r.size()});
  }
  return ws;
}

void AlignConfig::validate() const {
  if (!(threshold_ratio > 0.0 && threshold_ratio <= 1.0)) {
    throw PreconditionError("threshold_ratio must be in (0, 1]");
  }
  if (!(min_accept_floor >= 0.0 && min_accept_floor <= 1.0)) {
    throw PreconditionError("min_accept_floor must be in [0, 1]");
  }
  if (max_phrase_words && *max_phrase_words < 1) {
    throw PreconditionError("max_phrase_words must be >= 1");
  }
}

std::size_t AlignConfig::phrase_cap(std::size_t answer_words) const {
  if (max_phrase_words) return *max_phrase_words;
  return std::max<std::size_t>(2 * answer_words + 3, 8);
}

// --- SimilarityMatrix ---------------------------------------------------

SimilarityMatrix::SimilarityMatrix(std::size_t word_count, std::size_t cap)
    : words_(word_count),
      cap_(std::max<std::size_t>(1, cap)),
      scores_(word_count * std::max<std::size_t>(1, cap),
              std::numeric_limits<double>::quiet_NaN()) {}

std::size_t SimilarityMatrix::index(std::size_t first, std::size_t last) const {
  return first * cap_ + (last - first);
}

bool SimilarityMatrix::contains(std::size_t first,
                                std::size_t last) const noexcept {
  if (first > last || last >= words_ || last - first + 1 > cap_) return false;
  return !std::isnan(scores_[index(first, last)]);
}

double SimilarityMatrix::at(std::size_t first, std::size_t last) const {
  if (!contains(first, last)) {
    throw PreconditionError("no matrix entry for (" + std::to_string(first) +
                            ", " + std::to_string(last) + ")");
  }
  return scores_[index(first, last)];
}

void SimilarityMatrix::set(std::size_t first, std::size_t last, double score) {
  if (first > last || last >= words_ || last - first + 1 > cap_) {
    throw PreconditionError("phrase (" + std::to_string(first) + ", " +
                            std::to_string(last) + ") outside the matrix");
  }
  if (!(score >= 0.0 && score <= 1.0)) {
    throw InvariantError("similarity score outside [0, 1]");
  }
  scores_[index(first, last)] = score;
}

std::size_t SimilarityMatrix::size() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      scores_.begin(), scores_.end(), [](double s) { return !std::isnan(s); }));
}

std::vector<PhraseScore> SimilarityMatrix::entries() const {
  std::vector<PhraseScore> out;
  for (std::size_t i = 0; i < words_; ++i) {
    for (std::size_t len = 1; len <= cap_ && i + len <= words_; ++len) {
      const double s = scores_[index(i, i + len - 1)];
      if (!std::isnan(s)) out.push_back({{i, i + len - 1}, s});
    }
  }
  return out;
}

// --- alignment ----------------------------------------------------------

SimilarityMatrix build_similarity_matrix(const WordSequence& ws,
                                         std::string_view translated_answer,
                                         const AlignConfig& cfg,
                                         const Similarity& sim) {
  const auto answer_words = text::word_ranges(text::decode(translated_answer));
  const auto cap = cfg.phrase_cap(answer_words.size());
  SimilarityMatrix m(ws.words.size(), cap);
  const auto scorer = sim.bind(translated_answer);
  const auto n = ws.words.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n && j - i + 1 <= cap; ++j) {
      m.set(i, j, scorer(ws.phrase(i, j)));
    }
  }
  return m;
}

PhraseScore find_base_phrase(const SimilarityMatrix& m) {
  std::optional<PhraseScore> best;
  // Visit shorter phrases first so strict '>' keeps the tie-break.
  for (std::size_t len = 1; len <= m.cap(); ++len) {
    for (std::size_t i = 0; i + len <= m.word_count(); ++i) {
      const auto j = i + len - 1;
      if (!m.contains(i, j)) continue;
      const double s = m.at(i, j);
      if (!best || s > best->score) best = PhraseScore{{i, j}, s};
    }
  }
  if (!best) throw PreconditionError("similarity matrix is empty");
  return *best;
}

namespace {

WordSpan extend_impl(const WordSequence& ws, WordSpan base,
                     const std::function<double(std::string_view)>& scorer,
                     std::size_t cap, double threshold_ratio, double floor) {
  const double base_score = scorer(ws.phrase(base.first, base.last));
  if (base_score >= 1.0) return base;
  const double threshold = threshold_ratio * base_score;
  auto qualifies = [&](double s) {
    if (s < floor) return false;
    return threshold_ratio < 1.0 ? s >= threshold : s > base_score;
  };
  WordSpan cur = base;
  const auto n = ws.words.size();
  while (cur.size() < cap) {
    std::optional<double> left;
    std::optional<double> right;
    if (cur.first > 0) left = scorer(ws.phrase(cur.first - 1, cur.last));
    if (cur.last + 1 < n) right = scorer(ws.phrase(cur.first, cur.last + 1));
    const bool left_ok = left && qualifies(*left);
    const bool right_ok = right && qualifies(*right);
    if (right_ok && (!left_ok || *right >= *left)) {
      ++cur.last;
    } else if (left_ok) {
      --cur.first;
    } else {
      break;
    }
  }
  return cur;
}

}  // namespace

WordSpan extend_phrase(const WordSequence& ws, WordSpan base,
                       std::string_view translated_answer,
                       const AlignConfig& cfg, const Similarity& sim) {
  cfg.validate();
  if (base.first > base.last || base.last >= ws.words.size()) {
    throw PreconditionError("base phrase outside the word sequence");
  }
  const auto answer_words = text::word_ranges(text::decode(translated_answer));
  return extend_impl(ws, base, sim.bind(translated_answer),
                     cfg.phrase_cap(answer_words.size()), cfg.threshold_ratio,
                     0.0);
}

namespace {

// Words are whitespace runs, so "mat." is one word. Around the chosen span,
// and the span grown by one word on either side, punctuation at the phrase
// edges is dropped when that strictly raises the score. Repeats until no
// move helps; text without edge punctuation is never changed.
void refine_edges(const WordSequence& ws, std::size_t cap,
                  const std::function<double(std::string_view)>& scorer,
                  AlignmentResult& r) {
  for (bool moved = true; moved;) {
    moved = false;
    std::vector<WordSpan> spans = {r.words};
    if (r.words.first > 0 && r.words.size() < cap) {
      spans.push_back({r.words.first - 1, r.words.last});
    }
    if (r.words.last + 1 < ws.words.size() && r.words.size() < cap) {
      spans.push_back({r.words.first, r.words.last + 1});
    }
    for (const auto& span : spans) {
      const auto u = text::decode(ws.phrase(span.first, span.last));
      std::size_t lead = 0;
      while (lead < u.size() && text::is_punct(u[lead])) ++lead;
      std::size_t trail = 0;
      while (trail < u.size() - lead && text::is_punct(u[u.size() - 1 - trail])) {
        ++trail;
      }
      const std::pair<std::size_t, std::size_t> cuts[] = {
          {0, trail}, {lead, 0}, {lead, trail}};
      for (const auto& [l, t] : cuts) {
        if (l + t == 0 || l + t >= u.size()) continue;
        auto candidate = text::encode(u.substr(l, u.size() - l - t));
        const double score = scorer(candidate);
        if (score > r.score) {
          r.score = score;
          r.words = span;
          r.answer_text = std::move(candidate);
          r.start_in_sentence = ws.phrase_start(span.first) + l;
          moved = true;
        }
      }
    }
  }
}

}  // namespace

AlignmentResult align_answer(std::string_view sentence,
                             std::string_view translated_answer,
                             const AlignConfig& cfg, const Similarity& sim) {
  cfg.validate();
  if (text::trim(sentence).empty()) {
    throw PreconditionError("cannot align inside an empty sentence");
  }
  if (text::trim(translated_answer).empty()) {
    throw PreconditionError("cannot align an empty answer");
  }
  const auto ws = tokenize_words(sentence);
  const auto matrix = build_similarity_matrix(ws, translated_answer, cfg, sim);
  const auto base = find_base_phrase(matrix);

  const auto scorer = sim.bind(translated_answer);
  AlignmentResult result;
  result.base_score = base.score;
  result.words = base.span;
  result.score = base.score;
  result.answer_text = ws.phrase(base.span.first, base.span.last);
  result.start_in_sentence = ws.phrase_start(base.span.first);
  refine_edges(ws, matrix.cap(), scorer, result);
  if (result.score < cfg.min_accept_floor) {
    result.status = AlignStatus::kBelowFloor;
    result.answer_text.clear();
    result.start_in_sentence = 0;
    return result;
  }
  result.status = AlignStatus::kAligned;
  if (result.score != base.score) return result;
  // The floor also bounds extension so an aligned result never scores
  // below it.
  const auto span = extend_impl(ws, base.span, scorer, matrix.cap(),
                                cfg.threshold_ratio, cfg.min_accept_floor);
  if (span == base.span) return result;
  result.words = span;
  result.answer_text = ws.phrase(span.first, span.last);
  result.start_in_sentence = ws.phrase_start(span.first);
  result.score = scorer(result.answer_text);
  refine_edges(ws, matrix.cap(), scorer, result);
  return result;
}

std::size_t compute_global_offset(const TranslatedContext& tc,
                                  std::size_t sentence_index,
                                  std::size_t start_in_sentence,
                                  std::size_t answer_length) {
  if (sentence_index >= tc.sentence_offsets.size()) {
    throw PreconditionError("sentence index " + std::to_string(sentence_index) +
                            " out of range");
  }
  if (sentence_index < tc.sentence_lengths.size() &&
      start_in_sentence + answer_length >
          tc.sentence_lengths[sentence_index]) {
    throw PreconditionError("answer runs past the end of sentence " +
                            std::to_string(sentence_index));
  }
  return tc.sentence_offsets[sentence_index] + start_in_sentence;
}

const char* to_string(AlignStatus s) noexcept {
  switch (s) {
    case AlignStatus::kAligned:
      return "aligned";
    case AlignStatus::kBelowFloor:
      return "below_floor";
  }
  return "unknown";
}

}  // namespace squadtx
