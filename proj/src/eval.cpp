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

#include "squadtx/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "squadtx/errors.hpp"
#include "squadtx/text.hpp"

namespace squadtx {

namespace {

std::vector<std::string> normalized_tokens(std::string_view s) {
  return text::split_whitespace(normalize_answer(s));
}

double token_f1_single(const std::vector<std::string>& pred,
                       const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::unordered_map<std::string_view, int> counts;
  for (const auto& t : gold) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double p = static_cast<double>(common) / pred.size();
  const double r = static_cast<double>(common) / gold.size();
  return 2 * p * r / (p + r);
}

using NgramCounts = std::map<std::vector<std::string_view>, int>;

NgramCounts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> g(tokens.begin() + i, tokens.begin() + i + n);
    ++out[std::move(g)];
  }
  return out;
}

}  // namespace

std::string normalize_answer(std::string_view s) {
  const auto u = text::decode(text::nfc(s));
  std::u32string out;
  out.reserve(u.size());
  bool pending_space = false;
  for (char32_t c : u) {
    if (text::is_punct(c)) continue;
    if (text::is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(text::is_latin_letter(c) ? text::to_lower(c) : c);
  }
  return text::encode(out);
}

int exact_match(std::string_view pred, const std::vector<std::string>& golds) {
  const auto p = normalize_answer(pred);
  if (golds.empty()) return p.empty() ? 1 : 0;
  for (const auto& g : golds) {
    if (normalize_answer(g) == p) return 1;
  }
  return 0;
}

double f1_score(std::string_view pred, const std::vector<std::string>& golds) {
  const auto p = normalized_tokens(pred);
  if (golds.empty()) return p.empty() ? 1.0 : 0.0;
  double best = 0.0;
  for (const auto& g : golds) {
    best = std::max(best, token_f1_single(p, normalized_tokens(g)));
  }
  return best;
}

double bleu(const std::vector<std::string>& predictions,
            const std::vector<std::string>& references, int max_n) {
  if (predictions.size() != references.size()) {
    throw PreconditionError("bleu: " + std::to_string(predictions.size()) +
                            " predictions vs " +
                            std::to_string(references.size()) + " references");
  }
  if (max_n < 1 || max_n > 4) {
    throw PreconditionError("bleu: max_n must be in 1..4");
  }
  const auto orders = static_cast<std::size_t>(max_n);
  std::vector<std::size_t> matched(orders, 0);
  std::vector<std::size_t> possible(orders, 0);
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
  bool any_pair = false;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const auto cand = normalized_tokens(predictions[k]);
    const auto ref = normalized_tokens(references[k]);
    if (cand.empty() && ref.empty()) continue;
    any_pair = true;
    cand_len += cand.size();
    ref_len += ref.size();
    for (std::size_t n = 1; n <= orders; ++n) {
      const auto c = ngrams(cand, n);
      const auto r = ngrams(ref, n);
      for (const auto& [g, count] : c) {
        possible[n - 1] += static_cast<std::size_t>(count);
        if (auto it = r.find(g); it != r.end()) {
          matched[n - 1] += static_cast<std::size_t>(std::min(count, it->second));
        }
      }
    }
  }
  if (!any_pair || cand_len == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < orders; ++n) {
    if (possible[n] == 0 || matched[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched[n]) /
                        static_cast<double>(possible[n]));
  }
  const double bp = std::exp(std::min(
      0.0, 1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len)));
  return bp * std::exp(log_sum / static_cast<double>(orders));
}

EvalReport evaluate(const Predictions& predictions, const Dataset& gold) {
  EvalReport r;
  double em_has = 0;
  double f1_has = 0;
  double em_no = 0;
  double f1_no = 0;
  std::vector<std::string> preds;
  std::vector<std::string> refs;
  for (const auto& article : gold.data) {
    for (const auto& para : article.paragraphs) {
      for (const auto& qa : para.qas) {
        std::vector<std::string> golds;
        if (!qa.is_impossible) {
          for (const auto& a : qa.answers) golds.push_back(a.text);
        }
        double em = 0;
        double f1 = 0;
        std::string pred;
        if (auto it = predictions.find(qa.id); it != predictions.end()) {
          pred = it->second;
          em = exact_match(pred, golds);
          f1 = f1_score(pred, golds);
        } else {
          r.missing_ids.push_back(qa.id);
        }
        ++r.total;
        if (qa.is_impossible) {
          ++r.no_ans_count;
          em_no += em;
          f1_no += f1;
        } else {
          ++r.has_ans_count;
          em_has += em;
          f1_has += f1;
        }
        preds.push_back(std::move(pred));
        refs.push_back(golds.empty() ? std::string() : golds.front());
      }
    }
  }
  auto pct = [](double sum, std::size_t n) {
    return n == 0 ? 0.0 : 100.0 * sum / static_cast<double>(n);
  };
  r.em = pct(em_has + em_no, r.total);
  r.f1 = pct(f1_has + f1_no, r.total);
  r.em_has_ans = pct(em_has, r.has_ans_count);
  r.f1_has_ans = pct(f1_has, r.has_ans_count);
  r.em_no_ans = pct(em_no, r.no_ans_count);
  r.f1_no_ans = pct(f1_no, r.no_ans_count);
  r.bleu1 = 100.0 * bleu(preds, refs, 1);
  r.bleu2 = 100.0 * bleu(preds, refs, 2);
  return r;
}

Predictions parse_predictions(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  if (!j.is_object()) {
    throw SchemaError("$", "predictions must be an object of id -> answer");
  }
  Predictions out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) {
      throw SchemaError("$." + it.key(), "prediction must be a string",
                        it.key());
    }
    out.emplace(it.key(), it.value().get<std::string>());
  }
  return out;
}

Predictions load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_predictions(buf.str());
}

OrderedJson to_json(const EvalReport& r) {
  OrderedJson o = OrderedJson::object();
  o["exact"] = r.em;
  o["f1"] = r.f1;
  o["total"] = r.total;
  o["HasAns_exact"] = r.em_has_ans;
  o["HasAns_f1"] = r.f1_has_ans;
  o["HasAns_total"] = r.has_ans_count;
  o["NoAns_exact"] = r.em_no_ans;
  o["NoAns_f1"] = r.f1_no_ans;
  o["NoAns_total"] = r.no_ans_count;
  o["bleu1"] = r.bleu1;
  o["bleu2"] = r.bleu2;
  o["missing_ids"] = r.missing_ids;
  return o;
}

}  // namespace squadtx
