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


// Python extension. Datasets cross the boundary as JSON text; the package
// wrapper converts to and from Python objects.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "squadtx/errors.hpp"
#include "squadtx/eval.hpp"
#include "squadtx/pipeline.hpp"
#include "squadtx/squad.hpp"
#include "squadtx/translation.hpp"
#include "squadtx/transliteration.hpp"

namespace py = pybind11;
using namespace squadtx;

namespace {

std::string violations_json(const Dataset& d) {
  auto arr = OrderedJson::array();
  for (const auto& v : validate_spans(d)) arr.push_back(to_json(v));
  return arr.dump();
}

std::string translate_json(const std::string& dataset_json,
                           const std::string& backend,
                           const std::map<std::string, std::string>& dictionary,
                           const std::string& src, const std::string& tgt,
                           double min_score, double threshold_ratio,
                           std::optional<std::size_t> max_phrase_words,
                           std::size_t workers, const std::string& cache_path,
                           bool fold_camel_case) {
  const auto dataset = parse_dataset(dataset_json);
  PipelineConfig cfg;
  cfg.src_lang = src;
  cfg.tgt_lang = tgt;
  cfg.align.min_accept_floor = min_score;
  cfg.align.threshold_ratio = threshold_ratio;
  cfg.align.max_phrase_words = max_phrase_words;
  cfg.workers = workers;
  cfg.fold_camel_case = fold_camel_case;

  std::unique_ptr<Translator> translator;
  if (backend == "identity") {
    translator = std::make_unique<IdentityTranslator>();
  } else if (backend == "dict") {
    translator = std::make_unique<DictionaryTranslator>(
        std::unordered_map<std::string, std::string>(dictionary.begin(),
                                                     dictionary.end()),
        "python");
  } else {
    throw PreconditionError("backend must be \"identity\" or \"dict\", got \"" +
                            backend + "\"");
  }
  TranslationCache cache(cache_path);
  PipelineResult result;
  {
    py::gil_scoped_release release;
    result = run_pipeline(dataset, cfg, {translator.get(), &cache});
  }
  OrderedJson out = OrderedJson::object();
  out["output"] = to_json(result.output);
  out["report"] = failure_report_json(result);
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_squadtx, m) {
  m.doc() = "SQuAD 2.0 translation and span re-alignment";

  // Every library error, subclasses included, surfaces as SquadtxError.
  py::register_exception<Error>(m, "SquadtxError", PyExc_RuntimeError);

  m.def("canonicalize", [](const std::string& text) {
    return serialize_dataset(parse_dataset(text));
  }, "Parse and re-serialize a dataset, raising on schema errors.");
  m.def("validate_spans", [](const std::string& text) {
    return violations_json(parse_dataset(text));
  });
  m.def("stats", [](const std::string& text) {
    return to_json(dataset_stats(parse_dataset(text))).dump();
  });
  m.def("translate", &translate_json, py::arg("dataset"),
        py::arg("backend") = "identity",
        py::arg("dictionary") = std::map<std::string, std::string>{},
        py::arg("src") = "en", py::arg("tgt") = "mr",
        py::arg("min_score") = 0.35, py::arg("threshold_ratio") = 0.99,
        py::arg("max_phrase_words") = std::nullopt, py::arg("jobs") = 1,
        py::arg("cache") = "", py::arg("fold_camel_case") = true);
  m.def("sample_gold", [](const std::string& text, std::size_t n, std::uint64_t seed) {
    return serialize_dataset(sample_gold(parse_dataset(text), n, seed));
  });
  m.def("evaluate", [](const std::string& predictions, const std::string& gold) {
    return to_json(evaluate(parse_predictions(predictions), parse_dataset(gold))).dump();
  });
  m.def("normalize_answer", &normalize_answer);
  m.def("exact_match", &exact_match);
  m.def("f1_score", &f1_score);
  m.def("bleu", &bleu, py::arg("predictions"), py::arg("references"),
        py::arg("max_n"));
  m.def("transliterate_digits", &transliterate_digits);
}
