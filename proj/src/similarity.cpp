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

#include "squadtx/similarity.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

#include "squadtx/errors.hpp"
#include "squadtx/text.hpp"

namespace squadtx {

namespace {

// Sorted multisets so overlap is a linear merge.
struct Profile {
  std::u32string trimmed;
  std::vector<std::u32string> tokens;
  std::vector<std::uint64_t> bigrams;
};

Profile make_profile(std::string_view s) {
  Profile p;
  const auto u = text::decode(s);
  p.trimmed = std::u32string(text::trim(std::u32string_view(u)));
  const std::u32string_view t(p.trimmed);
  for (const auto& r : text::word_ranges(t)) {
    p.tokens.emplace_back(t.substr(r.begin, r.size()));
  }
  std::sort(p.tokens.begin(), p.tokens.end());
  if (t.size() >= 2) {
    p.bigrams.reserve(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      p.bigrams.push_back((static_cast<std::uint64_t>(t[i]) << 32) | t[i + 1]);
    }
    std::sort(p.bigrams.begin(), p.bigrams.end());
  }
  return p;
}

template <typename T>
std::size_t multiset_overlap(const std::vector<T>& a, const std::vector<T>& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  return common;
}

double f1_of(const Profile& a, const Profile& b) {
  if (a.tokens.empty() || b.tokens.empty()) return 0.0;
  const auto common = multiset_overlap(a.tokens, b.tokens);
  if (common == 0) return 0.0;
  const double p = static_cast<double>(common) / a.tokens.size();
  const double r = static_cast<double>(common) / b.tokens.size();
  return 2 * p * r / (p + r);
}

double dice_of(const Profile& a, const Profile& b) {
  if (a.trimmed.empty() || b.trimmed.empty()) return 0.0;
  if (a.bigrams.empty() || b.bigrams.empty()) {
    return a.trimmed == b.trimmed ? 1.0 : 0.0;
  }
  const auto common = multiset_overlap(a.bigrams, b.bigrams);
  return 2.0 * static_cast<double>(common) /
         static_cast<double>(a.bigrams.size() + b.bigrams.size());
}

// 0.5 * F1 + 0.5 * Dice = c/T + s/B, evaluated as one division of exact
// integers so equal ratios always produce the same double and ties stay ties.
double blend(const Profile& a, const Profile& b) {
  if (a.trimmed.empty() || b.trimmed.empty()) return 0.0;
  const auto c = static_cast<std::uint64_t>(multiset_overlap(a.tokens, b.tokens));
  const auto t = static_cast<std::uint64_t>(a.tokens.size() + b.tokens.size());
  if (a.bigrams.empty() || b.bigrams.empty()) {
    const std::uint64_t eq = a.trimmed == b.trimmed ? 1 : 0;
    return static_cast<double>(2 * c + eq * t) / static_cast<double>(2 * t);
  }
  const auto s = static_cast<std::uint64_t>(multiset_overlap(a.bigrams, b.bigrams));
  const auto bt = static_cast<std::uint64_t>(a.bigrams.size() + b.bigrams.size());
  return static_cast<double>(c * bt + s * t) / static_cast<double>(t * bt);
}

}  // namespace

std::function<double(std::string_view)> Similarity::bind(
    std::string_view b) const {
  return [this, fixed = std::string(b)](std::string_view a) {
    return score(a, fixed);
  };
}

double LexicalSimilarity::score(std::string_view a, std::string_view b) const {
  return blend(make_profile(a), make_profile(b));
}

std::function<double(std::string_view)> LexicalSimilarity::bind(
    std::string_view b) const {
  return [fixed = make_profile(b)](std::string_view a) {
    return blend(make_profile(a), fixed);
  };
}

double token_f1(std::string_view a, std::string_view b) {
  return f1_of(make_profile(a), make_profile(b));
}

double bigram_dice(std::string_view a, std::string_view b) {
  return dice_of(make_profile(a), make_profile(b));
}

const Similarity& default_similarity() {
  static const LexicalSimilarity instance;
  return instance;
}

HttpSimilarity::HttpSimilarity(HttpServiceConfig cfg)
    : client_(std::move(cfg)) {}

double HttpSimilarity::score(std::string_view a, std::string_view b) const {
  nlohmann::json value;
  {
    std::lock_guard lock(mu_);
    value = client_.call({{"a", std::string(a)}, {"b", std::string(b)}});
  }
  if (!value.is_number()) {
    throw ResponseFormatError("similarity at \"" +
                              client_.config().response_path +
                              "\" is not a number");
  }
  return std::clamp(value.get<double>(), 0.0, 1.0);
}

}  // namespace squadtx
