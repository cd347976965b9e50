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

#include "squadtx/segmentation.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "squadtx/errors.hpp"
#include "squadtx/text.hpp"

namespace squadtx {

namespace {

constexpr char32_t kDanda = U'।';
constexpr char32_t kDoubleDanda = U'॥';

bool is_terminator(char32_t c) {
  return c == U'.' || c == U'!' || c == U'?' || c == kDanda ||
         c == kDoubleDanda;
}

bool is_closer(char32_t c) {
  if (c == U'"' || c == U'\'') return true;
  const auto gc = u_charType(static_cast<UChar32>(c));
  return gc == U_END_PUNCTUATION || gc == U_FINAL_PUNCTUATION;
}

bool is_opening_punct(char32_t c) {
  if (c == U'"' || c == U'\'' || c == U'¿' || c == U'¡') return true;
  const auto gc = u_charType(static_cast<UChar32>(c));
  return gc == U_START_PUNCTUATION || gc == U_INITIAL_PUNCTUATION;
}

// Uppercase letter, caseless-script letter (Devanagari etc.), or opening
// punctuation.
bool opens_sentence(char32_t c) {
  if (is_opening_punct(c)) return true;
  if (!text::is_letter(c)) return false;
  if (text::is_upper(c)) return true;
  return !text::is_lower(c) && !text::is_combining_mark(c);
}

std::string lower_ascii(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) {
    return static_cast<char>(std::tolower(ch));
  });
  return s;
}

// "L.A.", "U.S.", "J." -- letters each followed by a period.
bool is_initial_chain(std::u32string_view token) {
  if (token.size() < 2 || token.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < token.size(); i += 2) {
    if (!text::is_letter(token[i]) || token[i + 1] != U'.') return false;
  }
  return true;
}

// Abbreviations that precede a name and so never close a sentence.
const std::unordered_set<std::string>& non_terminal_abbreviations() {
  static const std::unordered_set<std::string> set = {
      "mr",  "mrs", "ms",  "dr",  "prof", "st",  "rev",    "gen",
      "sen", "rep", "gov", "capt", "lt",  "col", "sgt",    "hon",
      "mt",  "ft",  "vs",  "e.g", "i.e",  "cf",  "messrs", "no"};
  return set;
}

// Words that almost always begin a sentence when capitalized.
const std::unordered_set<std::string>& sentence_openers() {
  static const std::unordered_set<std::string> set = {
      "he",       "she",     "it",      "they",   "we",      "you",
      "the",      "this",    "that",    "these",  "those",   "there",
      "his",      "her",     "their",   "its",    "our",     "my",
      "in",       "on",      "at",      "but",    "however", "after",
      "when",     "while",   "then",    "as",     "if",      "so",
      "yet",      "also",    "during",  "since",  "although", "though",
      "because",  "some",    "many",    "most",   "each",    "both",
      "an",       "what",    "why",     "how",    "where",   "today",
      "later",    "thus",    "moreover", "meanwhile"};
  return set;
}

std::u32string_view strip_leading_openers(std::u32string_view s) {
  while (!s.empty() && is_opening_punct(s.front())) s.remove_prefix(1);
  return s;
}

std::string next_word_key(std::u32string_view u, std::size_t k) {
  std::size_t end = k;
  while (end < u.size() && !text::is_space(u[end])) ++end;
  auto w = strip_leading_openers(u.substr(k, end - k));
  while (!w.empty() && text::is_punct(w.back())) w.remove_suffix(1);
  std::u32string lowered(w);
  for (auto& c : lowered) c = text::to_lower(c);
  return text::encode(lowered);
}

}  // namespace

AbbreviationSet::AbbreviationSet(
    std::initializer_list<std::string_view> tokens) {
  for (auto t : tokens) add(t);
}

std::string AbbreviationSet::key(std::string_view token) {
  auto t = std::string(text::trim(token));
  while (!t.empty() && t.back() == '.') t.pop_back();
  std::u32string u = text::decode(t);
  for (auto& c : u) c = text::to_lower(c);
  return text::encode(u);
}

AbbreviationSet AbbreviationSet::defaults() {
  return AbbreviationSet{
      "Mr",   "Mrs",  "Ms",   "Dr",   "Prof", "St",  "Jr",   "Sr",
      "vs",   "etc",  "e.g",  "i.e",  "U.S",  "L.A", "U.K",  "D.C",
      "Inc",  "Ltd",  "Co",   "Corp", "Mt",   "Ft",  "Gen",  "Sen",
      "Rep",  "Gov",  "Capt", "Lt",   "Col",  "Sgt", "Rev",  "Hon",
      "cf",   "al",   "approx", "No",  "Jan", "Feb", "Mar",  "Apr",
      "Jun",  "Jul",  "Aug",  "Sep",  "Sept", "Oct", "Nov",  "Dec"};
}

AbbreviationSet AbbreviationSet::parse(std::string_view contents) {
  AbbreviationSet set;
  std::istringstream in{std::string(contents)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const auto t = text::trim(line);
    if (!t.empty()) set.add(t);
  }
  return set;
}

AbbreviationSet AbbreviationSet::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open abbreviation file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void AbbreviationSet::add(std::string_view token) {
  auto k = key(token);
  if (!k.empty()) tokens_.insert(std::move(k));
}

void AbbreviationSet::merge(const AbbreviationSet& other) {
  tokens_.insert(other.tokens_.begin(), other.tokens_.end());
}

bool AbbreviationSet::contains(std::string_view token) const {
  return tokens_.count(key(token)) != 0;
}

std::string normalize_camel_case(std::string_view input) {
  auto u = text::decode(input);
  for (const auto& r : text::word_ranges(u)) {
    bool camel = false;
    for (std::size_t i = r.begin; i + 1 < r.end; ++i) {
      if (text::is_lower(u[i]) && text::is_upper(u[i + 1])) {
        camel = true;
        break;
      }
    }
    if (!camel) continue;
    for (std::size_t i = r.begin; i < r.end; ++i) u[i] = text::to_lower(u[i]);
  }
  return text::encode(u);
}

SegmentedContext segment_sentences(std::string_view context,
                                   const AbbreviationSet& abbreviations) {
  SegmentedContext sc;
  sc.original = std::string(context);
  const auto u = text::decode(context);
  const std::u32string_view uv(u);
  const std::size_t n = u.size();

  std::size_t start = 0;
  while (start < n && text::is_space(u[start])) ++start;

  auto emit = [&](std::size_t b, std::size_t e) {
    while (e > b && text::is_space(u[e - 1])) --e;
    if (e > b) sc.segments.push_back({text::encode(uv.substr(b, e - b)), b});
  };

  std::size_t i = start;
  while (i < n) {
    if (!is_terminator(u[i])) {
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end < n && is_terminator(u[run_end])) ++run_end;
    const std::size_t terminators_end = run_end;
    while (run_end < n && is_closer(u[run_end])) ++run_end;
    if (run_end >= n || !text::is_space(u[run_end])) {
      i = run_end;
      continue;
    }
    std::size_t next = run_end;
    while (next < n && text::is_space(u[next])) ++next;
    if (next >= n || !opens_sentence(u[next])) {
      i = run_end;
      continue;
    }

    if (terminators_end - i == 1 && u[i] == U'.') {
      std::size_t token_begin = i;
      while (token_begin > start && !text::is_space(u[token_begin - 1])) {
        --token_begin;
      }
      const auto token =
          strip_leading_openers(uv.substr(token_begin, i + 1 - token_begin));
      const auto core_view = token.substr(0, token.size() - 1);
      const auto core = text::encode(core_view);
      const bool abbreviation =
          !core.empty() &&
          (abbreviations.contains(core) || is_initial_chain(token));
      if (abbreviation) {
        const bool can_close =
            non_terminal_abbreviations().count(lower_ascii(core)) == 0 &&
            sentence_openers().count(next_word_key(uv, next)) != 0;
        if (!can_close) {
          i = run_end;
          continue;
        }
      }
    }

    emit(start, run_end);
    start = next;
    i = next;
  }
  emit(start, n);
  return sc;
}

SegmentRange locate_answer_segments(const SegmentedContext& sc,
                                    const AnswerSpan& span) {
  const auto context = text::decode(sc.original);
  const auto answer = text::decode(span.text);
  if (!span_matches(context, span.answer_start, answer)) {
    throw InvariantError("answer \"" + span.text + "\" is not a slice of the "
                         "context at offset " +
                         std::to_string(span.answer_start));
  }
  const auto s = static_cast<std::size_t>(span.answer_start);
  const auto e = s + answer.size();

  std::optional<std::size_t> first;
  std::size_t last = 0;
  for (std::size_t k = 0; k < sc.segments.size(); ++k) {
    const auto& seg = sc.segments[k];
    const auto seg_end = seg.start + text::length(seg.text);
    const bool overlaps = answer.empty()
                              ? (seg.start <= s && s < seg_end)
                              : (seg.start < e && s < seg_end);
    if (!overlaps) continue;
    if (!first) first = k;
    last = k;
  }
  if (!first) {
    throw InvariantError("answer at offset " + std::to_string(s) +
                         " does not overlap any sentence");
  }
  const auto& head = sc.segments[*first];
  const auto& tail = sc.segments[last];
  if (s < head.start || e > tail.start + text::length(tail.text)) {
    throw InvariantError("answer at offset " + std::to_string(s) +
                         " extends into inter-sentence whitespace");
  }
  return {*first, last};
}

SegmentedContext merge_segments(const SegmentedContext& sc,
                                SegmentRange range) {
  if (range.first > range.last || range.last >= sc.segments.size()) {
    throw PreconditionError("invalid segment range [" +
                            std::to_string(range.first) + ", " +
                            std::to_string(range.last) + "]");
  }
  if (range.first == range.last) return sc;
  SegmentedContext out;
  out.original = sc.original;
  out.segments.reserve(sc.segments.size() - (range.last - range.first));
  for (std::size_t k = 0; k < range.first; ++k) {
    out.segments.push_back(sc.segments[k]);
  }
  const auto& head = sc.segments[range.first];
  const auto& tail = sc.segments[range.last];
  const auto end = tail.start + text::length(tail.text);
  out.segments.push_back(
      {text::substr(sc.original, head.start, end - head.start), head.start});
  for (std::size_t k = range.last + 1; k < sc.segments.size(); ++k) {
    out.segments.push_back(sc.segments[k]);
  }
  return out;
}

}  // namespace squadtx
