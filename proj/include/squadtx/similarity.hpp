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

#pragma once

#include <functional>
#include <mutex>
#include <string>
#include <string_view>

#include "squadtx/http_service.hpp"

namespace squadtx {

// Phrase similarity in [0, 1].
class Similarity {
 public:
  virtual ~Similarity() = default;
  virtual double score(std::string_view a, std::string_view b) const = 0;

  // Scorer with `b` fixed. Implementations may precompute per-`b` state.
  virtual std::function<double(std::string_view)> bind(
      std::string_view b) const;

  // False when calls must not overlap.
  virtual bool concurrent_safe() const noexcept { return true; }
};

// 0.5 * token F1 + 0.5 * character-bigram Dice, both on trimmed input.
// Token F1 uses whitespace tokens with multiset overlap; Dice uses the
// multiset of code-point bigrams (internal spaces included). Strings too
// short for a bigram compare by equality. Either side empty scores 0.
class LexicalSimilarity final : public Similarity {
 public:
  double score(std::string_view a, std::string_view b) const override;
  std::function<double(std::string_view)> bind(
      std::string_view b) const override;
};

double token_f1(std::string_view a, std::string_view b);
double bigram_dice(std::string_view a, std::string_view b);

const Similarity& default_similarity();

// Embedding or scoring service behind HTTP. {{a}} and {{b}} are available to
// the request templates; the value at response_path must be a number and is
// clamped to [0, 1]. Calls are serialized internally.
class HttpSimilarity final : public Similarity {
 public:
  explicit HttpSimilarity(HttpServiceConfig cfg);
  double score(std::string_view a, std::string_view b) const override;

 private:
  mutable std::mutex mu_;
  mutable HttpServiceClient client_;
};

}  // namespace squadtx
