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

#include "squadtx/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <memory>
#include <mutex>
#include <random>
#include <thread>

#include "squadtx/errors.hpp"
#include "squadtx/text.hpp"

namespace squadtx {

namespace {

// Serializes a similarity that is not safe for concurrent calls.
class LockedSimilarity final : public Similarity {
 public:
  explicit LockedSimilarity(const Similarity& inner) : inner_(inner) {}
  double score(std::string_view a, std::string_view b) const override {
    std::lock_guard lock(mu_);
    return inner_.score(a, b);
  }

 private:
  const Similarity& inner_;
  mutable std::mutex mu_;
};

// Lets transliteration results share the translation cache.
class EngineAsTranslator final : public Translator {
 public:
  explicit EngineAsTranslator(TransliterationEngine& engine) : engine_(engine) {}
  std::string translate(std::string_view text, std::string_view,
                        std::string_view) override {
    return engine_.transliterate(text);
  }
  std::string id() const override { return "translit:" + engine_.id(); }

 private:
  TransliterationEngine& engine_;
};

class CachedEngine final : public TransliterationEngine {
 public:
  CachedEngine(TransliterationEngine& engine, TranslationCache& cache,
               std::string tgt)
      : adapter_(engine), cached_(adapter_, cache), tgt_(std::move(tgt)) {}
  std::string transliterate(std::string_view run) override {
    return cached_.translate(run, "Latn", tgt_);
  }
  std::string id() const override { return adapter_.id(); }

 private:
  EngineAsTranslator adapter_;
  CachedTranslator cached_;
  std::string tgt_;
};

struct Tally {
  std::size_t merged_groups = 0;
  std::size_t plausible_dropped = 0;
  std::size_t latin_flags = 0;
  std::size_t transliterated_runs = 0;
};

struct ParagraphOutcome {
  Paragraph paragraph;  // successful QAs only
  std::vector<FailureRecord> failures;
  Tally tally;
};

struct TitleOutcome {
  std::string title;
  std::optional<std::string> error;
  Tally tally;
};

class Runtime {
 public:
  Runtime(const PipelineConfig& cfg, const PipelineServices& services)
      : cfg_(cfg),
        translator_(*services.translator, *services.cache),
        abbreviations_(services.abbreviations != nullptr
                           ? *services.abbreviations
                           : default_abbreviations()),
        translit_(cfg.transliteration_enabled()) {
    const Similarity& sim = services.similarity != nullptr
                                ? *services.similarity
                                : default_similarity();
    if (sim.concurrent_safe()) {
      sim_ = &sim;
    } else {
      locked_ = std::make_unique<LockedSimilarity>(sim);
      sim_ = locked_.get();
    }
    if (services.transliteration != nullptr) {
      engine_ = std::make_unique<CachedEngine>(*services.transliteration,
                                               *services.cache, cfg.tgt_lang);
    }
  }

  TitleOutcome translate_title(const std::string& title);
  ParagraphOutcome process_paragraph(const Paragraph& p,
                                     const std::optional<std::string>& title_error);

  const TranslationStats& stats() const { return translator_.stats(); }

 private:
  static const AbbreviationSet& default_abbreviations() {
    static const AbbreviationSet set = AbbreviationSet::defaults();
    return set;
  }

  std::string fold(const std::string& s) const {
    return cfg_.fold_camel_case ? normalize_camel_case(s) : s;
  }

  std::string translate(const std::string& input) {
    auto out = std::string(text::trim(
        translator_.translate(input, cfg_.src_lang, cfg_.tgt_lang)));
    if (out.empty()) {
      throw Error("backend returned an empty translation for \"" + input +
                  "\"");
    }
    return out;
  }

  // Digit, diacritic and Latin-residue passes, in that order.
  std::string post(const std::string& s, Tally& tally, bool count_flags) {
    if (!translit_) return s;
    const auto r = transliterate_residue(
        transliterate_digits(fold_special_latin(s)), engine_.get());
    if (count_flags) {
      tally.latin_flags += r.flags.size();
      tally.transliterated_runs += r.replaced;
    }
    return r.text;
  }

  const PipelineConfig& cfg_;
  CachedTranslator translator_;
  const AbbreviationSet& abbreviations_;
  const Similarity* sim_ = nullptr;
  std::unique_ptr<LockedSimilarity> locked_;
  std::unique_ptr<CachedEngine> engine_;
  bool translit_;
};

bool is_fatal(const std::exception& e) {
  return dynamic_cast<const CacheWriteError*>(&e) != nullptr;
}

TitleOutcome Runtime::translate_title(const std::string& title) {
  TitleOutcome out;
  try {
    out.title = post(translate(fold(title)), out.tally, true);
  } catch (const std::exception& e) {
    if (is_fatal(e)) throw;
    out.error = std::string("title: ") + e.what();
  }
  return out;
}

// Maximal unions of overlapping ranges, sorted by first index.
std::vector<SegmentRange> union_ranges(std::vector<SegmentRange> ranges) {
  std::sort(ranges.begin(), ranges.end(),
            [](const SegmentRange& a, const SegmentRange& b) {
              return a.first < b.first ||
                     (a.first == b.first && a.last < b.last);
            });
  std::vector<SegmentRange> out;
  for (const auto& r : ranges) {
    if (!out.empty() && r.first <= out.back().last) {
      out.back().last = std::max(out.back().last, r.last);
    } else {
      out.push_back(r);
    }
  }
  return out;
}

ParagraphOutcome Runtime::process_paragraph(
    const Paragraph& p, const std::optional<std::string>& title_error) {
  ParagraphOutcome out;
  out.paragraph.extra = p.extra;
  std::vector<bool> failed(p.qas.size(), false);
  auto fail = [&](std::size_t i, FailureStage stage, std::string reason,
                  std::optional<double> base = std::nullopt) {
    if (failed[i]) return;
    failed[i] = true;
    out.failures.push_back({p.qas[i].id, stage, std::move(reason), base});
  };
  auto fail_all = [&](FailureStage stage, const std::string& reason) {
    for (std::size_t i = 0; i < p.qas.size(); ++i) fail(i, stage, reason);
  };

  if (title_error) {
    fail_all(FailureStage::kTranslation, *title_error);
    return out;
  }

  // Sentences, with straddled boundaries merged so every span lies in one.
  auto sc = segment_sentences(p.context, abbreviations_);
  std::vector<SegmentRange> straddles;
  for (std::size_t i = 0; i < p.qas.size(); ++i) {
    const auto& qa = p.qas[i];
    try {
      for (const auto& a : qa.answers) {
        const auto r = locate_answer_segments(sc, a);
        if (r.first != r.last) straddles.push_back(r);
      }
    } catch (const InvariantError& e) {
      fail(i, FailureStage::kAlignment, e.what());
      continue;
    }
    if (cfg_.align_plausible && qa.plausible_answers) {
      for (const auto& a : *qa.plausible_answers) {
        try {
          const auto r = locate_answer_segments(sc, a);
          if (r.first != r.last) straddles.push_back(r);
        } catch (const InvariantError&) {
          // Dropped later when it fails to align.
        }
      }
    }
  }
  const auto merges = union_ranges(std::move(straddles));
  for (auto it = merges.rbegin(); it != merges.rend(); ++it) {
    sc = merge_segments(sc, *it);
  }
  out.tally.merged_groups += merges.size();

  const auto folded = text::decode(fold(p.context));
  const std::u32string_view folded_view(folded);
  auto folded_slice = [&](std::size_t start, std::size_t len) {
    return text::encode(folded_view.substr(start, len));
  };

  std::vector<std::string> translated;
  translated.reserve(sc.segments.size());
  try {
    for (const auto& seg : sc.segments) {
      translated.push_back(
          translate(folded_slice(seg.start, text::length(seg.text))));
    }
  } catch (const std::exception& e) {
    if (is_fatal(e)) throw;
    fail_all(FailureStage::kTranslation, std::string("context: ") + e.what());
    return out;
  }
  const auto tc = build_translated_context(translated);
  out.paragraph.context = post(tc.full_text, out.tally, true);
  const auto context_out = text::decode(out.paragraph.context);

  using SpanOutcome = std::variant<AnswerSpan, FailureRecord>;
  auto align_span = [&](const QaItem& qa, const AnswerSpan& span) -> SpanOutcome {
    SegmentRange range;
    try {
      range = locate_answer_segments(sc, span);
    } catch (const InvariantError& e) {
      return FailureRecord{qa.id, FailureStage::kAlignment, e.what(), {}};
    }
    if (range.first != range.last) {
      return FailureRecord{qa.id, FailureStage::kAlignment,
                           "answer still straddles a sentence boundary", {}};
    }
    const auto k = range.first;
    std::string translated_answer;
    try {
      translated_answer = translate(folded_slice(
          static_cast<std::size_t>(span.answer_start), text::length(span.text)));
    } catch (const std::exception& e) {
      if (is_fatal(e)) throw;
      return FailureRecord{qa.id, FailureStage::kTranslation,
                           std::string("answer: ") + e.what(), {}};
    }
    const auto res = align_answer(translated[k], translated_answer, cfg_.align,
                                  *sim_);
    if (res.status == AlignStatus::kBelowFloor) {
      return FailureRecord{qa.id, FailureStage::kAlignment,
                           "best phrase scored " + std::to_string(res.base_score) +
                               ", below the floor " +
                               std::to_string(cfg_.align.min_accept_floor),
                           res.base_score};
    }
    const auto offset = compute_global_offset(tc, k, res.start_in_sentence,
                                              text::length(res.answer_text));
    AnswerSpan a;
    a.text = res.answer_text;
    a.answer_start = static_cast<std::int64_t>(offset);
    if (translit_) {
      Tally ignored;
      a.text = post(res.answer_text, ignored, false);
      const auto pos = relocate(context_out, text::decode(a.text), offset);
      if (!pos) {
        return FailureRecord{qa.id, FailureStage::kTransliteration,
                             "transliterated answer \"" + a.text +
                                 "\" not found in the transliterated context",
                             res.base_score};
      }
      a.answer_start = static_cast<std::int64_t>(*pos);
    }
    if (cfg_.emit_scores) a.extra["align_score"] = res.score;
    return a;
  };

  auto dedupe = [](std::vector<AnswerSpan>& spans) {
    std::vector<AnswerSpan> unique;
    for (auto& s : spans) {
      const bool seen = std::any_of(unique.begin(), unique.end(), [&](const auto& u) {
        return u.text == s.text && u.answer_start == s.answer_start;
      });
      if (!seen) unique.push_back(std::move(s));
    }
    spans = std::move(unique);
  };

  for (std::size_t i = 0; i < p.qas.size(); ++i) {
    if (failed[i]) continue;
    const auto& qa = p.qas[i];
    QaItem q;
    q.id = qa.id;
    q.is_impossible = qa.is_impossible;
    q.extra = qa.extra;
    try {
      q.question = post(translate(fold(qa.question)), out.tally, true);
    } catch (const std::exception& e) {
      if (is_fatal(e)) throw;
      fail(i, FailureStage::kTranslation, std::string("question: ") + e.what());
      continue;
    }
    bool ok = true;
    for (const auto& span : qa.answers) {
      auto r = align_span(qa, span);
      if (auto* f = std::get_if<FailureRecord>(&r)) {
        fail(i, f->stage, f->reason, f->base_score);
        ok = false;
        break;
      }
      q.answers.push_back(std::get<AnswerSpan>(std::move(r)));
    }
    if (!ok) continue;
    dedupe(q.answers);
    if (cfg_.align_plausible && qa.plausible_answers) {
      std::vector<AnswerSpan> plausible;
      for (const auto& span : *qa.plausible_answers) {
        auto r = align_span(qa, span);
        if (std::holds_alternative<FailureRecord>(r)) {
          ++out.tally.plausible_dropped;
          continue;
        }
        plausible.push_back(std::get<AnswerSpan>(std::move(r)));
      }
      dedupe(plausible);
      q.plausible_answers = std::move(plausible);
    }
    out.paragraph.qas.push_back(std::move(q));
  }

  // Last line of defence: nothing with a broken span leaves the pipeline.
  const auto violations = validate_spans(out.paragraph);
  if (!violations.empty()) {
    std::vector<QaItem> kept;
    for (auto& q : out.paragraph.qas) {
      const auto bad = std::find_if(
          violations.begin(), violations.end(),
          [&](const SpanViolation& v) { return v.qa_id == q.id; });
      if (bad == violations.end()) {
        kept.push_back(std::move(q));
        continue;
      }
      out.failures.push_back(
          {q.id,
           translit_ ? FailureStage::kTransliteration : FailureStage::kAlignment,
           "span check failed: expected \"" + bad->expected + "\", found \"" +
               bad->actual + "\"",
           {}});
    }
    out.paragraph.qas = std::move(kept);
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> threads;
    const auto count = std::min(workers, n);
    threads.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
      threads.emplace_back([&] {
        while (!stop.load()) {
          const auto i = next.fetch_add(1);
          if (i >= n) break;
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
            stop = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

void check_services(const PipelineConfig& cfg,
                    const PipelineServices& services) {
  cfg.validate();
  if (services.translator == nullptr || services.cache == nullptr) {
    throw PreconditionError("pipeline needs a translator and a cache");
  }
}

// Uniform integer in [0, bound) from the raw engine output, so samples do
// not depend on the standard library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}

}  // namespace

const char* to_string(FailureStage s) noexcept {
  switch (s) {
    case FailureStage::kTranslation:
      return "translation";
    case FailureStage::kAlignment:
      return "alignment";
    case FailureStage::kTransliteration:
      return "transliteration";
  }
  return "unknown";
}

void PipelineConfig::validate() const {
  if (workers < 1) throw PreconditionError("worker count must be >= 1");
  if (src_lang.empty() || tgt_lang.empty()) {
    throw PreconditionError("source and target languages are required");
  }
  align.validate();
}

bool PipelineConfig::transliteration_enabled() const {
  switch (transliteration) {
    case TransliterationMode::kOn:
      return true;
    case TransliterationMode::kOff:
      return false;
    case TransliterationMode::kAuto:
      return uses_devanagari(tgt_lang);
  }
  return false;
}

ExampleOutcome translate_example(const std::string& article_title,
                                 const Paragraph& paragraph, const QaItem& qa,
                                 const PipelineConfig& cfg,
                                 const PipelineServices& services) {
  check_services(cfg, services);
  Runtime rt(cfg, services);
  const auto title = rt.translate_title(article_title);
  Paragraph single;
  single.context = paragraph.context;
  single.qas.push_back(qa);
  auto outcome = rt.process_paragraph(single, title.error);
  if (!outcome.failures.empty()) return outcome.failures.front();
  return TranslatedExample{title.title, outcome.paragraph.context,
                           std::move(outcome.paragraph.qas.front())};
}

PipelineResult run_pipeline(const Dataset& dataset, const PipelineConfig& cfg,
                            const PipelineServices& services) {
  check_services(cfg, services);
  const auto started = std::chrono::steady_clock::now();
  Runtime rt(cfg, services);

  std::vector<TitleOutcome> titles(dataset.data.size());
  parallel_for(dataset.data.size(), cfg.workers, [&](std::size_t a) {
    titles[a] = rt.translate_title(dataset.data[a].title);
  });

  struct Job {
    std::size_t article;
    std::size_t paragraph;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < dataset.data.size(); ++a) {
    for (std::size_t p = 0; p < dataset.data[a].paragraphs.size(); ++p) {
      jobs.push_back({a, p});
    }
  }
  std::vector<ParagraphOutcome> outcomes(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t j) {
    const auto& job = jobs[j];
    outcomes[j] = rt.process_paragraph(
        dataset.data[job.article].paragraphs[job.paragraph],
        titles[job.article].error);
  });

  PipelineResult result;
  result.output.version = dataset.version;
  result.output.extra = dataset.extra;
  auto& summary = result.summary;
  summary.workers = cfg.workers;
  summary.paragraphs = jobs.size();
  for (const auto* stage : {"translation", "alignment", "transliteration"}) {
    summary.failures_by_stage[stage] = 0;
  }
  auto add_tally = [&](const Tally& t) {
    summary.merged_sentence_groups += t.merged_groups;
    summary.plausible_dropped += t.plausible_dropped;
    summary.latin_flags += t.latin_flags;
    summary.transliterated_runs += t.transliterated_runs;
  };

  std::size_t j = 0;
  for (std::size_t a = 0; a < dataset.data.size(); ++a) {
    const auto& in_article = dataset.data[a];
    add_tally(titles[a].tally);
    Article article;
    article.title = titles[a].error ? in_article.title : titles[a].title;
    article.extra = in_article.extra;
    for (std::size_t p = 0; p < in_article.paragraphs.size(); ++p, ++j) {
      auto& outcome = outcomes[j];
      const auto& in_para = in_article.paragraphs[p];
      summary.input_qas += in_para.qas.size();
      summary.output_qas += outcome.paragraph.qas.size();
      add_tally(outcome.tally);
      for (auto& f : outcome.failures) {
        ++summary.failures_by_stage[to_string(f.stage)];
        result.failures.push_back(std::move(f));
      }
      if (!outcome.paragraph.qas.empty() ||
          (in_para.qas.empty() && !outcome.paragraph.context.empty())) {
        article.paragraphs.push_back(std::move(outcome.paragraph));
      }
    }
    if (titles[a].error && in_article.paragraphs.empty()) continue;
    if (!article.paragraphs.empty() || in_article.paragraphs.empty()) {
      result.output.data.push_back(std::move(article));
    }
  }
  summary.backend_calls = rt.stats().misses.load();
  summary.cache_hits = rt.stats().hits.load();
  summary.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return result;
}

Dataset sample_gold(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
  struct Pos {
    std::size_t a;
    std::size_t p;
    std::size_t q;
  };
  std::vector<Pos> all;
  for (std::size_t a = 0; a < dataset.data.size(); ++a) {
    const auto& article = dataset.data[a];
    for (std::size_t p = 0; p < article.paragraphs.size(); ++p) {
      for (std::size_t q = 0; q < article.paragraphs[p].qas.size(); ++q) {
        all.push_back({a, p, q});
      }
    }
  }
  if (n > all.size()) {
    throw PreconditionError("cannot sample " + std::to_string(n) +
                            " items from " + std::to_string(all.size()));
  }
  // Partial Fisher-Yates over indices.
  std::vector<std::size_t> idx(all.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + bounded(rng, idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::size_t> chosen(idx.begin(), idx.begin() + n);
  std::sort(chosen.begin(), chosen.end());

  Dataset out;
  out.version = dataset.version;
  out.extra = dataset.extra;
  std::optional<std::size_t> cur_a;
  std::optional<std::size_t> cur_p;
  for (auto k : chosen) {
    const auto& pos = all[k];
    const auto& article = dataset.data[pos.a];
    if (cur_a != pos.a) {
      Article copy;
      copy.title = article.title;
      copy.extra = article.extra;
      out.data.push_back(std::move(copy));
      cur_a = pos.a;
      cur_p.reset();
    }
    const auto& para = article.paragraphs[pos.p];
    if (cur_p != pos.p) {
      Paragraph copy;
      copy.context = para.context;
      copy.extra = para.extra;
      out.data.back().paragraphs.push_back(std::move(copy));
      cur_p = pos.p;
    }
    out.data.back().paragraphs.back().qas.push_back(para.qas[pos.q]);
  }
  return out;
}

OrderedJson to_json(const FailureRecord& f) {
  OrderedJson o = OrderedJson::object();
  o["qa_id"] = f.qa_id;
  o["stage"] = to_string(f.stage);
  o["reason"] = f.reason;
  if (f.base_score) o["base_score"] = *f.base_score;
  return o;
}

OrderedJson to_json(const RunSummary& s) {
  OrderedJson o = OrderedJson::object();
  o["input_qas"] = s.input_qas;
  o["output_qas"] = s.output_qas;
  o["failures"] = s.failures_by_stage;
  o["paragraphs"] = s.paragraphs;
  o["merged_sentence_groups"] = s.merged_sentence_groups;
  o["plausible_dropped"] = s.plausible_dropped;
  o["backend_calls"] = s.backend_calls;
  o["cache_hits"] = s.cache_hits;
  o["latin_flags"] = s.latin_flags;
  o["transliterated_runs"] = s.transliterated_runs;
  o["workers"] = s.workers;
  o["elapsed_seconds"] = s.elapsed_seconds;
  return o;
}

OrderedJson failure_report_json(const PipelineResult& r) {
  OrderedJson o = OrderedJson::object();
  o["summary"] = to_json(r.summary);
  OrderedJson failures = OrderedJson::array();
  for (const auto& f : r.failures) failures.push_back(to_json(f));
  o["failures"] = std::move(failures);
  return o;
}

}  // namespace squadtx
