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

// SQuAD 2.0 style scoring: exact match, token F1, has-answer / no-answer
// breakdown, and corpus BLEU-1 / BLEU-2.
//
// Normalization: NFC, lowercase, punctuation removed, whitespace collapsed.
// English article stripping is deliberately not applied.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "squadtx/squad.hpp"

namespace squadtx {

std::string normalize_answer(std::string_view s);

// golds empty means the question has no answer: 1 iff pred normalizes to "".
int exact_match(std::string_view pred, const std::vector<std::string>& golds);
double f1_score(std::string_view pred, const std::vector<std::string>& golds);

// Corpus BLEU over normalized whitespace tokens with orders 1..max_n,
// uniform weights, brevity penalty exp(min(0, 1 - r/c)), and no smoothing:
// any order with zero matched n-grams (or no candidate n-grams) yields 0.
// Pairs where both sides normalize to empty are skipped; a corpus with no
// scored pairs yields 0. Throws PreconditionError on a length mismatch or
// max_n outside {1, 2, 3, 4}.
double bleu(const std::vector<std::string>& predictions,
            const std::vector<std::string>& references, int max_n);

using Predictions = std::map<std::string, std::string>;

struct EvalReport {
  // Percentages in [0, 100].
  double em = 0;
  double f1 = 0;
  double em_has_ans = 0;
  double f1_has_ans = 0;
  double em_no_ans = 0;
  double f1_no_ans = 0;
  double bleu1 = 0;
  double bleu2 = 0;
  std::size_t total = 0;
  std::size_t has_ans_count = 0;
  std::size_t no_ans_count = 0;
  std::vector<std::string> missing_ids;
};

// Missing predictions score 0 on EM/F1 and count as empty for BLEU. For BLEU
// the first gold answer is the reference; unanswerable items use "".
EvalReport evaluate(const Predictions& predictions, const Dataset& gold);

// JSON object of question id -> answer string.
Predictions parse_predictions(std::string_view json_text);
Predictions load_predictions(const std::filesystem::path& path);

OrderedJson to_json(const EvalReport& r);

}  // namespace squadtx
