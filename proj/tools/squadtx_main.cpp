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

// squadtx command line: translate, validate, stats, sample-gold, evaluate,
// serve-review.
//
// Exit codes: 0 success, 1 fatal error, 2 completed with failures (failed
// QAs, span violations).

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "squadtx/errors.hpp"
#include "squadtx/eval.hpp"
#include "squadtx/pipeline.hpp"
#include "squadtx/review.hpp"
#include "squadtx/squad.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFatal = 1;
constexpr int kPartial = 2;

using squadtx::OrderedJson;

struct Options {
  std::string input;
  std::string output;
  std::string cache;
  std::string backend = "identity";
  std::string http_config;
  std::string similarity_config;
  std::string src = "en";
  std::string tgt = "mr";
  std::size_t jobs = 1;
  double min_score = squadtx::AlignConfig{}.min_accept_floor;
  double threshold_ratio = squadtx::AlignConfig{}.threshold_ratio;
  std::size_t max_phrase_words = 0;
  std::string report;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::string transliteration = "auto";
  std::string translit_map;
  std::string translit_config;
  std::string abbreviations;
  bool no_camel_fold = false;
  bool no_plausible = false;
  bool emit_scores = false;
  std::string predictions;
  std::string verdicts;
  std::string static_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  int indent = -1;
  std::string log_level = "info";
};

void write_text(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw squadtx::Error("cannot write " + path);
  out << body << '\n';
  if (!out) throw squadtx::Error("cannot write " + path);
}

squadtx::Dataset load_input(const Options& o) {
  if (o.input.empty()) throw squadtx::Error("--input is required");
  return squadtx::load_dataset(o.input);
}

std::unique_ptr<squadtx::Translator> make_backend(const Options& o) {
  if (o.backend == "identity") {
    return std::make_unique<squadtx::IdentityTranslator>();
  }
  if (o.backend.rfind("dict:", 0) == 0) {
    return squadtx::DictionaryTranslator::from_file(o.backend.substr(5));
  }
  if (o.backend == "http") {
    if (o.http_config.empty()) {
      throw squadtx::Error("--backend http needs --http-config FILE");
    }
    return std::make_unique<squadtx::HttpTranslator>(
        squadtx::HttpServiceConfig::from_file(o.http_config));
  }
  throw squadtx::Error("unknown backend \"" + o.backend +
                       "\" (identity | dict:FILE | http)");
}

squadtx::TransliterationMode parse_mode(const std::string& s) {
  if (s == "auto") return squadtx::TransliterationMode::kAuto;
  if (s == "on") return squadtx::TransliterationMode::kOn;
  if (s == "off") return squadtx::TransliterationMode::kOff;
  throw squadtx::Error("--transliteration must be auto, on or off");
}

int cmd_translate(const Options& o) {
  const auto dataset = load_input(o);
  auto backend = make_backend(o);
  squadtx::TranslationCache cache(o.cache);
  if (cache.skipped_on_open() > 0) {
    spdlog::warn("cache: skipped {} unreadable lines", cache.skipped_on_open());
  }

  squadtx::PipelineConfig cfg;
  cfg.src_lang = o.src;
  cfg.tgt_lang = o.tgt;
  cfg.workers = o.jobs;
  cfg.align.min_accept_floor = o.min_score;
  cfg.align.threshold_ratio = o.threshold_ratio;
  if (o.max_phrase_words > 0) cfg.align.max_phrase_words = o.max_phrase_words;
  cfg.fold_camel_case = !o.no_camel_fold;
  cfg.align_plausible = !o.no_plausible;
  cfg.transliteration = parse_mode(o.transliteration);
  cfg.emit_scores = o.emit_scores;

  squadtx::PipelineServices services;
  services.translator = backend.get();
  services.cache = &cache;

  std::unique_ptr<squadtx::Similarity> similarity;
  if (!o.similarity_config.empty()) {
    similarity = std::make_unique<squadtx::HttpSimilarity>(
        squadtx::HttpServiceConfig::from_file(o.similarity_config));
    services.similarity = similarity.get();
  }
  std::unique_ptr<squadtx::TransliterationEngine> engine;
  if (!o.translit_map.empty()) {
    engine = squadtx::MapTransliterator::from_file(o.translit_map);
  } else if (!o.translit_config.empty()) {
    engine = std::make_unique<squadtx::HttpTransliterator>(
        squadtx::HttpServiceConfig::from_file(o.translit_config), o.tgt);
  }
  services.transliteration = engine.get();
  std::optional<squadtx::AbbreviationSet> abbreviations;
  if (!o.abbreviations.empty()) {
    abbreviations = squadtx::AbbreviationSet::defaults();
    abbreviations->merge(squadtx::AbbreviationSet::from_file(o.abbreviations));
    services.abbreviations = &*abbreviations;
  }

  const auto result = squadtx::run_pipeline(dataset, cfg, services);
  if (o.output.empty()) throw squadtx::Error("--output is required");
  squadtx::save_dataset(result.output, o.output, o.indent);
  if (!o.report.empty()) {
    write_text(o.report, squadtx::failure_report_json(result).dump(2));
  }
  const auto& s = result.summary;
  spdlog::info("{} of {} QAs translated, {} failed, {} backend calls, {} cache hits, {:.2f}s",
               s.output_qas, s.input_qas, result.failures.size(),
               s.backend_calls, s.cache_hits, s.elapsed_seconds);
  return result.failures.empty() ? kOk : kPartial;
}

int cmd_validate(const Options& o) {
  const auto dataset = load_input(o);
  const auto violations = squadtx::validate_spans(dataset);
  OrderedJson out = OrderedJson::object();
  out["violations"] = OrderedJson::array();
  for (const auto& v : violations) out["violations"].push_back(squadtx::to_json(v));
  out["count"] = violations.size();
  write_text(o.report.empty() ? o.output : o.report, out.dump(2));
  return violations.empty() ? kOk : kPartial;
}

int cmd_stats(const Options& o) {
  const auto dataset = load_input(o);
  write_text(o.output, squadtx::to_json(squadtx::dataset_stats(dataset)).dump(2));
  return kOk;
}

int cmd_sample_gold(const Options& o) {
  const auto dataset = load_input(o);
  if (o.output.empty()) throw squadtx::Error("--output is required");
  const auto sample = squadtx::sample_gold(dataset, o.count, o.seed);
  squadtx::save_dataset(sample, o.output, o.indent);
  spdlog::info("sampled {} QAs with seed {}", o.count, o.seed);
  return kOk;
}

int cmd_evaluate(const Options& o) {
  const auto gold = load_input(o);
  if (o.predictions.empty()) throw squadtx::Error("--predictions is required");
  const auto report =
      squadtx::evaluate(squadtx::load_predictions(o.predictions), gold);
  write_text(o.report.empty() ? o.output : o.report,
             squadtx::to_json(report).dump(2));
  return kOk;
}

squadtx::ReviewServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int cmd_serve_review(const Options& o) {
  if (o.verdicts.empty()) throw squadtx::Error("--verdicts is required");
  squadtx::ReviewStore store(load_input(o), o.verdicts);
  std::optional<std::filesystem::path> static_dir;
  if (!o.static_dir.empty()) static_dir = o.static_dir;
  squadtx::ReviewServer server(store, static_dir);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  spdlog::info("review service on http://{}:{} ({} candidates)", o.host,
               o.port, store.size());
  server.run(o.host, o.port);
  g_server = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Translate SQuAD 2.0 datasets with answer span re-alignment"};
  app.set_config("--config", "", "TOML or INI file mirroring the flags");
  app.require_subcommand(1);
  app.add_option("--log-level", o.log_level, "trace|debug|info|warn|error")
      ->capture_default_str();

  auto* translate = app.add_subcommand("translate", "Translate a dataset");
  auto* validate = app.add_subcommand("validate", "Check every answer span");
  auto* stats = app.add_subcommand("stats", "Count articles, paragraphs and QAs");
  auto* sample = app.add_subcommand("sample-gold", "Sample a review candidate set");
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions (EM, F1, BLEU)");
  auto* serve = app.add_subcommand("serve-review", "Serve the gold-set review API");

  for (auto* sub : {translate, validate, stats, sample, evaluate, serve}) {
    sub->add_option("--input,-i", o.input, "Input SQuAD 2.0 JSON")->required();
  }
  for (auto* sub : {translate, validate, stats, sample, evaluate}) {
    sub->add_option("--output,-o", o.output, "Output file ('-' for stdout)");
  }
  for (auto* sub : {translate, validate, evaluate}) {
    sub->add_option("--report", o.report, "Report file");
  }
  for (auto* sub : {translate, sample}) {
    sub->add_option("--indent", o.indent, "JSON indent (-1 for compact)");
  }

  translate->add_option("--cache", o.cache, "Translation cache (JSONL)");
  translate->add_option("--backend", o.backend, "identity | dict:FILE | http")
      ->capture_default_str();
  translate->add_option("--http-config", o.http_config,
                        "JSON config for the http backend");
  translate->add_option("--similarity-config", o.similarity_config,
                        "JSON config for an embedding similarity service");
  translate->add_option("--src", o.src, "Source language")->capture_default_str();
  translate->add_option("--tgt", o.tgt, "Target language")->capture_default_str();
  translate->add_option("--jobs,-j", o.jobs, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  translate->add_option("--min-score", o.min_score, "Alignment acceptance floor")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  translate->add_option("--threshold-ratio", o.threshold_ratio,
                        "Phrase extension ratio")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  translate->add_option("--max-phrase-words", o.max_phrase_words,
                        "Longest candidate phrase (0 for automatic)");
  translate->add_option("--transliteration", o.transliteration, "auto | on | off")
      ->check(CLI::IsMember({"auto", "on", "off"}))
      ->capture_default_str();
  translate->add_option("--translit-map", o.translit_map,
                        "TSV map for residual Latin runs");
  translate->add_option("--translit-config", o.translit_config,
                        "JSON config for an http transliteration engine");
  translate->add_option("--abbreviations", o.abbreviations,
                        "Extra abbreviations, one per line");
  translate->add_flag("--no-camel-fold", o.no_camel_fold,
                      "Keep CamelCase tokens as they are");
  translate->add_flag("--no-plausible", o.no_plausible,
                      "Do not align plausible_answers");
  translate->add_flag("--emit-scores", o.emit_scores,
                      "Add align_score to every answer");

  sample->add_option("--count,-n", o.count, "Number of QAs")->required();
  sample->add_option("--seed", o.seed, "Random seed")->capture_default_str();

  evaluate->add_option("--predictions,-p", o.predictions,
                       "JSON object of id -> answer")
      ->required();

  serve->add_option("--verdicts", o.verdicts, "Verdict log (JSONL)")->required();
  serve->add_option("--static-dir", o.static_dir, "Review UI assets");
  serve->add_option("--host", o.host, "Bind address")->capture_default_str();
  serve->add_option("--port", o.port, "Port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFatal;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("squadtx"));
  spdlog::set_level(spdlog::level::from_str(o.log_level));

  try {
    if (*translate) return cmd_translate(o);
    if (*validate) return cmd_validate(o);
    if (*stats) return cmd_stats(o);
    if (*sample) return cmd_sample_gold(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*serve) return cmd_serve_review(o);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFatal;
  }
  return kFatal;
}
