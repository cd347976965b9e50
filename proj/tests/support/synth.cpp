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

#include "synth.hpp"

#include <algorithm>
#include <set>

#include "squadtx/segmentation.hpp"

namespace squadtx::testing {

namespace {

constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool chance(std::mt19937_64& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::vector<std::string> make_vocabulary(std::mt19937_64& rng, std::size_t n) {
  const auto abbreviations = AbbreviationSet::defaults();
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w;
    const auto syllables = 2 + pick(rng, 3);
    for (std::size_t s = 0; s < syllables; ++s) {
      w += kConsonants[pick(rng, 14)];
      w += kVowels[pick(rng, 5)];
    }
    if (abbreviations.contains(w) || !seen.insert(w).second) continue;
    out.push_back(w);
  }
  return out;
}

struct Sentence {
  std::vector<std::string> tokens;  // terminator attached to the last
  std::size_t start = 0;            // code points in the context
};

// Code-point offset of token k inside a sentence of ASCII tokens.
std::size_t token_offset(const Sentence& s, std::size_t k) {
  std::size_t off = s.start;
  for (std::size_t i = 0; i < k; ++i) off += s.tokens[i].size() + 1;
  return off;
}

std::string join(const std::vector<std::string>& tokens, std::size_t b,
                 std::size_t e) {
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    if (i > b) out += ' ';
    out += tokens[i];
  }
  return out;
}

bool is_number(const std::string& t) {
  return !t.empty() && std::isdigit(static_cast<unsigned char>(t[0]));
}

}  // namespace

std::string capitalize(const std::string& word) {
  std::string out = word;
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = out[0] - 'a' + 'A';
  return out;
}

std::size_t qa_count(const Dataset& d) {
  std::size_t n = 0;
  for (const auto& a : d.data) {
    for (const auto& p : a.paragraphs) n += p.qas.size();
  }
  return n;
}

SynthCorpus make_corpus(std::uint64_t seed, const SynthOptions& opts) {
  std::mt19937_64 rng(seed);
  SynthCorpus corpus;
  corpus.vocabulary = make_vocabulary(rng, opts.vocabulary_size);
  const auto& vocab = corpus.vocabulary;
  corpus.dataset.version = "v2.0";

  auto word = [&]() -> std::string {
    if (chance(rng, opts.number_rate)) {
      return std::to_string(10 + pick(rng, 2990));
    }
    return vocab[pick(rng, vocab.size())];
  };

  std::size_t made = 0;
  std::size_t article_no = 0;
  while (made < opts.qa_count) {
    Article article;
    article.title = capitalize(vocab[pick(rng, vocab.size())]) + " " +
                    std::to_string(article_no);
    for (std::size_t p = 0;
         p < opts.paragraphs_per_article && made < opts.qa_count; ++p) {
      std::vector<Sentence> sentences(3 + pick(rng, 4));
      std::size_t offset = 0;
      std::string context;
      std::vector<std::size_t> starts;
      for (auto& s : sentences) {
        const auto len = 5 + pick(rng, 8);
        s.tokens.push_back(capitalize(vocab[pick(rng, vocab.size())]));
        for (std::size_t k = 1; k < len; ++k) s.tokens.push_back(word());
        if (opts.digit_seeded) {
          s.tokens[1 + pick(rng, len - 1)] = std::to_string(10 + pick(rng, 2990));
        }
        s.tokens.back() += chance(rng, 0.1) ? "?" : ".";
        if (!context.empty()) {
          context += ' ';
          ++offset;
        }
        s.start = offset;
        starts.push_back(offset);
        const auto text = join(s.tokens, 0, s.tokens.size());
        context += text;
        offset += text.size();
      }

      Paragraph para;
      para.context = context;
      const auto n_qas = std::min(opts.qas_per_paragraph, opts.qa_count - made);
      for (std::size_t q = 0; q < n_qas; ++q) {
        QaItem qa;
        qa.id = "syn" + std::to_string(seed % 1000) + "a" +
                std::to_string(article_no) + "p" + std::to_string(p) + "q" +
                std::to_string(q);
        AnswerSpan span;
        if (sentences.size() > 1 && chance(rng, opts.straddle_rate)) {
          const auto s = pick(rng, sentences.size() - 1);
          const auto& a = sentences[s];
          const auto& b = sentences[s + 1];
          const auto left = 1 + pick(rng, 2);
          const auto right = 1 + pick(rng, 2);
          span.text = join(a.tokens, a.tokens.size() - left, a.tokens.size()) +
                      " " + join(b.tokens, 0, right);
          span.answer_start = static_cast<std::int64_t>(
              token_offset(a, a.tokens.size() - left));
        } else {
          const auto s = pick(rng, sentences.size());
          const auto& sent = sentences[s];
          const auto len = 1 + pick(rng, std::min<std::size_t>(4, sent.tokens.size()));
          std::size_t b = pick(rng, sent.tokens.size() - len + 1);
          if (opts.digit_seeded) {
            // Pick a window that covers a number.
            for (std::size_t t = 0; t < sent.tokens.size(); ++t) {
              if (is_number(sent.tokens[t])) {
                b = std::min(t, sent.tokens.size() - len);
                break;
              }
            }
          }
          span.text = join(sent.tokens, b, b + len);
          span.answer_start = static_cast<std::int64_t>(token_offset(sent, b));
          if (b + len == sent.tokens.size() && opts.bare_end_rate > 0 &&
              chance(rng, opts.bare_end_rate)) {
            span.text.pop_back();
          }
        }
        qa.question = "What about " + vocab[pick(rng, vocab.size())] + " " +
                      word() + "?";
        if (chance(rng, opts.impossible_rate)) {
          qa.is_impossible = true;
          qa.plausible_answers = std::vector<AnswerSpan>{span};
        } else {
          qa.answers.push_back(span);
        }
        para.qas.push_back(std::move(qa));
        ++made;
      }
      corpus.sentence_starts.push_back(starts);
      article.paragraphs.push_back(std::move(para));
    }
    corpus.dataset.data.push_back(std::move(article));
    ++article_no;
  }
  return corpus;
}

std::unordered_map<std::string, std::string> bijective_dictionary(
    const std::vector<std::string>& vocabulary, std::uint64_t seed) {
  static const std::vector<std::string> kSyllables = {
      "क", "ख", "ग", "घ", "च", "ज", "ट", "ड", "त", "द", "न", "प",
      "ब", "म", "य", "र", "ल", "व", "स", "ह", "का", "कि", "मा", "रु"};
  std::mt19937_64 rng(seed);
  std::set<std::string> used;
  std::unordered_map<std::string, std::string> map;
  auto fresh = [&] {
    for (;;) {
      std::string w;
      const auto n = 2 + pick(rng, 3);
      for (std::size_t i = 0; i < n; ++i) w += kSyllables[pick(rng, kSyllables.size())];
      if (used.insert(w).second) return w;
    }
  };
  for (const auto& w : vocabulary) {
    map.emplace(w, fresh());
    map.emplace(capitalize(w), fresh());
  }
  return map;
}

}  // namespace squadtx::testing
