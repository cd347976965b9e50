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

#include <csignal>
#include <filesystem>
#include <set>

#include <sys/resource.h>
#include <unistd.h>

#include "doctest.h"
#include "oracles.hpp"
#include "squadtx/errors.hpp"
#include "squadtx/pipeline.hpp"
#include "squadtx/text.hpp"
#include "synth.hpp"

using namespace squadtx;
namespace fs = std::filesystem;

namespace {

// Identity except for listed inputs, which come back unrelated.
class SabotageTranslator final : public Translator {
 public:
  explicit SabotageTranslator(std::set<std::string> targets)
      : targets_(std::move(targets)) {}
  std::string translate(std::string_view text, std::string_view,
                        std::string_view) override {
    if (targets_.count(std::string(text))) return "qqqq zzzz";
    return std::string(text);
  }
  std::string id() const override { return "sabotage"; }

 private:
  std::set<std::string> targets_;
};

PipelineConfig english() {
  PipelineConfig cfg;
  cfg.tgt_lang = "en";
  cfg.fold_camel_case = false;
  return cfg;
}

AnswerSpan span_of(const std::string& context, const std::string& answer) {
  const auto u = text::decode(context);
  const auto pos = u.find(text::decode(answer));
  REQUIRE(pos != std::u32string::npos);
  return {answer, static_cast<std::int64_t>(pos), OrderedJson::object()};
}

Dataset one_paragraph(const std::string& context, std::vector<QaItem> qas) {
  Dataset d;
  d.version = "v2.0";
  Article a;
  a.title = "Cats";
  Paragraph p;
  p.context = context;
  p.qas = std::move(qas);
  a.paragraphs.push_back(std::move(p));
  d.data.push_back(std::move(a));
  return d;
}

QaItem answerable(const std::string& id, std::vector<AnswerSpan> answers) {
  QaItem q;
  q.id = id;
  q.question = "Where?";
  q.answers = std::move(answers);
  return q;
}

std::vector<const QaItem*> all_qas(const Dataset& d) {
  std::vector<const QaItem*> out;
  for (const auto& a : d.data) {
    for (const auto& p : a.paragraphs) {
      for (const auto& q : p.qas) out.push_back(&q);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("empty dataset gives empty output") {
  IdentityTranslator id;
  TranslationCache cache;
  const auto r = run_pipeline(Dataset{}, english(), {&id, &cache});
  CHECK(r.output.data.empty());
  CHECK(r.failures.empty());
  CHECK(r.summary.input_qas == 0);
  CHECK(r.summary.failures_by_stage.at("alignment") == 0);
}

TEST_CASE("missing services and bad config are precondition errors") {
  IdentityTranslator id;
  TranslationCache cache;
  CHECK_THROWS_AS(run_pipeline(Dataset{}, english(), {nullptr, &cache}), PreconditionError);
  auto cfg = english();
  cfg.workers = 0;
  CHECK_THROWS_AS(run_pipeline(Dataset{}, cfg, {&id, &cache}), PreconditionError);
  cfg = english();
  cfg.align.threshold_ratio = 0;
  CHECK_THROWS_AS(run_pipeline(Dataset{}, cfg, {&id, &cache}), PreconditionError);
}

TEST_CASE("identity backend reproduces 1,000 answers") {
  const auto corpus = testing::make_corpus(41, {.qa_count = 1000});
  IdentityTranslator id;
  TranslationCache cache;
  const auto r = run_pipeline(corpus.dataset, english(), {&id, &cache});
  CHECK(r.failures.empty());
  CHECK(validate_spans(r.output).empty());
  const auto in = all_qas(corpus.dataset);
  const auto out = all_qas(r.output);
  REQUIRE(in.size() == out.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    CHECK(out[i]->id == in[i]->id);
    CHECK(out[i]->question == in[i]->question);
    REQUIRE(out[i]->answers.size() == in[i]->answers.size());
    for (std::size_t k = 0; k < in[i]->answers.size(); ++k) {
      CHECK(out[i]->answers[k].text == in[i]->answers[k].text);
    }
  }
  CHECK(r.summary.merged_sentence_groups > 0);
}

TEST_CASE("bijective dictionary answers equal the word-mapped originals") {
  const auto corpus = testing::make_corpus(43, {.qa_count = 1000});
  const auto map = testing::bijective_dictionary(corpus.vocabulary, 43);
  DictionaryTranslator dict(map, "bijective");
  TranslationCache cache;
  PipelineConfig cfg;
  cfg.fold_camel_case = false;
  const auto r = run_pipeline(corpus.dataset, cfg, {&dict, &cache});
  CHECK(r.failures.empty());
  CHECK(validate_spans(r.output).empty());
  const auto in = all_qas(corpus.dataset);
  const auto out = all_qas(r.output);
  REQUIRE(in.size() == out.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    REQUIRE(out[i]->answers.size() == in[i]->answers.size());
    for (std::size_t k = 0; k < in[i]->answers.size(); ++k) {
      const auto expected = transliterate_digits(oracle::map_words(in[i]->answers[k].text, map));
      CHECK(out[i]->answers[k].text == expected);
    }
  }
}

TEST_CASE("an answer the backend mangles is an alignment failure") {
  const std::string ctx = "The cat sat on the mat. It was warm.";
  const auto d = one_paragraph(ctx, {answerable("good", {span_of(ctx, "the mat.")}),
                                     answerable("bad", {span_of(ctx, "warm.")})});
  SabotageTranslator t({"warm."});
  TranslationCache cache;
  const auto r = run_pipeline(d, english(), {&t, &cache});
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].qa_id == "bad");
  CHECK(r.failures[0].stage == FailureStage::kAlignment);
  REQUIRE(r.failures[0].base_score.has_value());
  CHECK(*r.failures[0].base_score < 0.35);
  CHECK(r.summary.output_qas + r.failures.size() == r.summary.input_qas);
  CHECK(r.summary.failures_by_stage.at("alignment") == 1);
  CHECK(failure_report_json(r)["failures"][0]["stage"] == "alignment");
}

TEST_CASE("one failed gold answer fails the whole QA") {
  const std::string ctx = "The cat sat on the mat. It was warm.";
  const auto d = one_paragraph(
      ctx, {answerable("two", {span_of(ctx, "the mat."), span_of(ctx, "warm.")})});
  SabotageTranslator t({"warm."});
  TranslationCache cache;
  const auto r = run_pipeline(d, english(), {&t, &cache});
  CHECK(r.output.data.empty());
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].qa_id == "two");
}

TEST_CASE("an answer across a sentence boundary merges the sentences") {
  const std::string ctx = "The cat sat on the mat. It was warm. Then rain came.";
  const auto d = one_paragraph(ctx, {answerable("s", {span_of(ctx, "mat. It")}),
                                     answerable("t", {span_of(ctx, "rain")})});
  IdentityTranslator id;
  TranslationCache cache;
  const auto r = run_pipeline(d, english(), {&id, &cache});
  CHECK(r.failures.empty());
  CHECK(r.summary.merged_sentence_groups == 1);
  REQUIRE(r.output.data.size() == 1);
  const auto& p = r.output.data[0].paragraphs[0];
  CHECK(p.context == ctx);
  CHECK(p.qas[0].answers[0].text == "mat. It");
  CHECK(p.qas[0].answers[0].answer_start == 19);
}

TEST_CASE("duplicate answers collapse, plausible failures are dropped") {
  const std::string ctx = "The cat sat on the mat. It was warm.";
  auto dup = answerable("dup", {span_of(ctx, "the mat."), span_of(ctx, "the mat.")});
  QaItem imp;
  imp.id = "imp";
  imp.question = "Why?";
  imp.is_impossible = true;
  imp.plausible_answers = std::vector<AnswerSpan>{span_of(ctx, "cat"), span_of(ctx, "warm.")};
  const auto d = one_paragraph(ctx, {dup, imp});
  SabotageTranslator t({"warm."});
  TranslationCache cache;
  const auto r = run_pipeline(d, english(), {&t, &cache});
  CHECK(r.failures.empty());
  const auto& qas = r.output.data.at(0).paragraphs.at(0).qas;
  REQUIRE(qas.size() == 2);
  CHECK(qas[0].answers.size() == 1);
  CHECK(qas[1].is_impossible);
  CHECK(qas[1].answers.empty());
  REQUIRE(qas[1].plausible_answers.has_value());
  REQUIRE(qas[1].plausible_answers->size() == 1);
  CHECK((*qas[1].plausible_answers)[0].text == "cat");
  CHECK(r.summary.plausible_dropped == 1);

  auto cfg = english();
  cfg.align_plausible = false;
  TranslationCache fresh;
  const auto skipped = run_pipeline(d, cfg, {&t, &fresh});
  CHECK_FALSE(skipped.output.data[0].paragraphs[0].qas[1].plausible_answers.has_value());
}

TEST_CASE("CamelCase folding applies to context and answers alike") {
  const std::string ctx = "People watch YouTube daily. It is big.";
  const auto d = one_paragraph(ctx, {answerable("c", {span_of(ctx, "YouTube")})});
  IdentityTranslator id;
  TranslationCache cache;
  auto cfg = english();
  cfg.fold_camel_case = true;
  const auto r = run_pipeline(d, cfg, {&id, &cache});
  REQUIRE(r.failures.empty());
  const auto& p = r.output.data[0].paragraphs[0];
  CHECK(p.context == "People watch youtube daily. It is big.");
  CHECK(p.qas[0].answers[0].text == "youtube");
  CHECK(p.qas[0].answers[0].answer_start == 13);
}

TEST_CASE("scores are emitted on request") {
  const std::string ctx = "The cat sat.";
  const auto d = one_paragraph(ctx, {answerable("x", {span_of(ctx, "cat")})});
  IdentityTranslator id;
  TranslationCache cache;
  auto cfg = english();
  cfg.emit_scores = true;
  const auto r = run_pipeline(d, cfg, {&id, &cache});
  CHECK(r.output.data[0].paragraphs[0].qas[0].answers[0].extra["align_score"] == 1.0);
}

TEST_CASE("digits become Devanagari for a Devanagari target") {
  const std::string ctx = "Founded in 1947 by them.";
  const auto d = one_paragraph(ctx, {answerable("n", {span_of(ctx, "1947")})});
  IdentityTranslator id;
  TranslationCache cache;
  PipelineConfig cfg;
  cfg.fold_camel_case = false;
  const auto r = run_pipeline(d, cfg, {&id, &cache});
  REQUIRE(r.failures.empty());
  const auto& p = r.output.data[0].paragraphs[0];
  CHECK(p.context == "Founded in १९४७ by them.");
  CHECK(p.qas[0].answers[0].text == "१९४७");
  CHECK(p.qas[0].answers[0].answer_start == 11);
  CHECK(r.summary.latin_flags > 0);
}

TEST_CASE("output does not depend on the worker count") {
  const auto corpus = testing::make_corpus(47, {.qa_count = 400});
  const auto map = testing::bijective_dictionary(corpus.vocabulary, 47);
  DictionaryTranslator dict(map, "bijective");
  std::string reference;
  for (std::size_t workers : {1, 4, 8}) {
    TranslationCache cache;
    PipelineConfig cfg;
    cfg.workers = workers;
    const auto r = run_pipeline(corpus.dataset, cfg, {&dict, &cache});
    const auto text = serialize_dataset(r.output) + failure_report_json(r)["failures"].dump();
    if (reference.empty()) {
      reference = text;
    } else {
      CHECK(text == reference);
    }
  }
}

TEST_CASE("a completed run replays without backend calls") {
  const auto corpus = testing::make_corpus(53, {.qa_count = 200});
  const auto path = fs::temp_directory_path() / ("squadtx_pipe_" + std::to_string(::getpid()));
  fs::remove(path);
  IdentityTranslator id;
  testing::CountingTranslator counting(id);
  {
    TranslationCache cache(path);
    const auto r = run_pipeline(corpus.dataset, english(), {&counting, &cache});
    CHECK(r.summary.backend_calls == counting.calls());
    CHECK(counting.calls() > 0);
  }
  counting.reset();
  {
    TranslationCache cache(path);
    const auto r = run_pipeline(corpus.dataset, english(), {&counting, &cache});
    CHECK(counting.calls() == 0);
    CHECK(r.summary.backend_calls == 0);
    CHECK(r.summary.cache_hits > 0);
  }
  fs::remove(path);
}

TEST_CASE("a cache write failure aborts the run") {
  const auto path = fs::temp_directory_path() / ("squadtx_full_" + std::to_string(::getpid()));
  fs::remove(path);
  const auto corpus = testing::make_corpus(59, {.qa_count = 50});
  IdentityTranslator id;
  TranslationCache cache(path);
  // Cap the file size so appends fail with EFBIG instead of a signal.
  auto* old_handler = std::signal(SIGXFSZ, SIG_IGN);
  rlimit old_limit{};
  ::getrlimit(RLIMIT_FSIZE, &old_limit);
  rlimit tight = old_limit;
  tight.rlim_cur = 64;
  ::setrlimit(RLIMIT_FSIZE, &tight);
  CHECK_THROWS_AS(run_pipeline(corpus.dataset, english(), {&id, &cache}), CacheWriteError);
  ::setrlimit(RLIMIT_FSIZE, &old_limit);
  std::signal(SIGXFSZ, old_handler);
  fs::remove(path);
}

TEST_CASE("single example translation") {
  const std::string ctx = "The cat sat on the mat.";
  const auto qa = answerable("q", {span_of(ctx, "mat.")});
  Paragraph p;
  p.context = ctx;
  IdentityTranslator id;
  TranslationCache cache;
  const auto ok = translate_example("Cats", p, qa, english(), {&id, &cache});
  REQUIRE(std::holds_alternative<TranslatedExample>(ok));
  CHECK(std::get<TranslatedExample>(ok).qa.answers[0].answer_start == 19);
  SabotageTranslator t({"mat."});
  const auto bad = translate_example("Cats", p, qa, english(), {&t, &cache});
  REQUIRE(std::holds_alternative<FailureRecord>(bad));
  CHECK(std::get<FailureRecord>(bad).stage == FailureStage::kAlignment);
}

TEST_CASE("a failed context translation fails every QA in the paragraph") {
  const std::string ctx = "The cat sat. It was warm.";
  const auto d = one_paragraph(ctx, {answerable("a", {span_of(ctx, "cat")}),
                                     answerable("b", {span_of(ctx, "warm.")})});
  class Empty final : public Translator {
   public:
    std::string translate(std::string_view t, std::string_view, std::string_view) override {
      return t == "It was warm." ? "  " : std::string(t);
    }
    std::string id() const override { return "empty"; }
  } t;
  TranslationCache cache;
  const auto r = run_pipeline(d, english(), {&t, &cache});
  CHECK(r.output.data.empty());
  REQUIRE(r.failures.size() == 2);
  CHECK(r.failures[0].stage == FailureStage::kTranslation);
  CHECK(r.summary.output_qas + r.failures.size() == r.summary.input_qas);
}

TEST_CASE("gold sampling") {
  const auto corpus = testing::make_corpus(61, {.qa_count = 300});
  const auto& d = corpus.dataset;
  CHECK(sample_gold(d, 300, 1) == d);
  CHECK(sample_gold(d, 0, 1).data.empty());
  const auto a = sample_gold(d, 50, 7);
  CHECK(testing::qa_count(a) == 50);
  CHECK(a == sample_gold(d, 50, 7));
  CHECK_FALSE(a == sample_gold(d, 50, 8));
  CHECK_THROWS_AS(sample_gold(d, 301, 1), PreconditionError);
  // Sampled ids keep input order and carry their full records.
  std::vector<std::string> order;
  for (const auto* q : all_qas(d)) order.push_back(q->id);
  std::size_t cursor = 0;
  for (const auto& art : a.data) {
    for (const auto& p : art.paragraphs) {
      for (const auto& q : p.qas) {
        while (cursor < order.size() && order[cursor] != q.id) ++cursor;
        CHECK(cursor < order.size());
      }
    }
  }
  CHECK(validate_spans(a).empty());
}
