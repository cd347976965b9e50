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

// End-to-end dataset translation.
//
// Per paragraph: segment the context into sentences (merging sentences that
// an answer straddles), translate each sentence through the cache, join the
// translations into the target context, then for every answer translate the
// source sentence and the answer text, align the answer inside the
// translated sentence, and shift the offset into the joined context.
// Transliteration runs last over context, question, title and answers, and
// each answer is re-located in the transliterated context.
//
// Every input QA ends up either in the output dataset or in the failure
// report, never both. Output order follows input order.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "squadtx/segmentation.hpp"
#include "squadtx/similarity.hpp"
#include "squadtx/span_align.hpp"
#include "squadtx/squad.hpp"
#include "squadtx/translation.hpp"
#include "squadtx/transliteration.hpp"

namespace squadtx {

enum class FailureStage { kTranslation, kAlignment, kTransliteration };
const char* to_string(FailureStage s) noexcept;

struct FailureRecord {
  std::string qa_id;
  FailureStage stage = FailureStage::kTranslation;
  std::string reason;
  std::optional<double> base_score;

  friend bool operator==(const FailureRecord&, const FailureRecord&) = default;
};

enum class TransliterationMode {
  kAuto,  // on when the target language is written in Devanagari
  kOn,
  kOff,
};

struct PipelineConfig {
  std::string src_lang = "en";
  std::string tgt_lang = "mr";
  AlignConfig align;
  bool align_plausible = true;
  bool fold_camel_case = true;
  TransliterationMode transliteration = TransliterationMode::kAuto;
  std::size_t workers = 1;
  // Adds "align_score" to every emitted answer object.
  bool emit_scores = false;

  // Throws PreconditionError.
  void validate() const;
  bool transliteration_enabled() const;
};

// Non-owning handles to the collaborators of a run.
struct PipelineServices {
  Translator* translator = nullptr;
  TranslationCache* cache = nullptr;
  const Similarity* similarity = nullptr;           // default: lexical
  TransliterationEngine* transliteration = nullptr;  // default: flag only
  const AbbreviationSet* abbreviations = nullptr;    // default set
};

struct RunSummary {
  std::size_t input_qas = 0;
  std::size_t output_qas = 0;
  std::map<std::string, std::size_t> failures_by_stage;
  std::size_t paragraphs = 0;
  std::size_t merged_sentence_groups = 0;
  std::size_t plausible_dropped = 0;
  std::size_t backend_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t latin_flags = 0;
  std::size_t transliterated_runs = 0;
  std::size_t workers = 1;
  double elapsed_seconds = 0;
};

struct PipelineResult {
  Dataset output;
  std::vector<FailureRecord> failures;
  RunSummary summary;
};

struct TranslatedExample {
  std::string title;
  std::string context;
  QaItem qa;
};

using ExampleOutcome = std::variant<TranslatedExample, FailureRecord>;

// Translates a single QA in its paragraph. Never throws for stage errors;
// CacheWriteError propagates.
ExampleOutcome translate_example(const std::string& article_title,
                                 const Paragraph& paragraph, const QaItem& qa,
                                 const PipelineConfig& cfg,
                                 const PipelineServices& services);

// Throws PreconditionError on a bad config or missing services, and
// CacheWriteError when the cache cannot be written.
PipelineResult run_pipeline(const Dataset& dataset, const PipelineConfig& cfg,
                            const PipelineServices& services);

// Uniform sample of n QAs without replacement, in input order. Full records
// (title, context) are kept. Throws PreconditionError when n > qa_count.
Dataset sample_gold(const Dataset& dataset, std::size_t n, std::uint64_t seed);

OrderedJson to_json(const FailureRecord& f);
OrderedJson to_json(const RunSummary& s);
// {"summary": ..., "failures": [...]}
OrderedJson failure_report_json(const PipelineResult& r);

}  // namespace squadtx
