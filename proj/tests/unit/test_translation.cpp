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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <unistd.h>

#include "doctest.h"
#include "squadtx/errors.hpp"
#include "squadtx/segmentation.hpp"
#include "squadtx/text.hpp"
#include "squadtx/translation.hpp"
#include "synth.hpp"

using namespace squadtx;
namespace fs = std::filesystem;
using WordMap = std::unordered_map<std::string, std::string>;

namespace {

fs::path temp_file(const std::string& name) {
  auto p = fs::temp_directory_path() / ("squadtx_" + name + "_" +
                                        std::to_string(::getpid()));
  fs::remove(p);
  return p;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

// Fails after a fixed number of calls, like a process killed mid-run.
class DyingTranslator final : public Translator {
 public:
  explicit DyingTranslator(std::size_t budget) : budget_(budget) {}
  std::string translate(std::string_view text, std::string_view,
                        std::string_view) override {
    if (calls_ == budget_) throw std::runtime_error("killed");
    ++calls_;
    return "T(" + std::string(text) + ")";
  }
  std::string id() const override { return "dying"; }
  std::size_t calls() const { return calls_; }

 private:
  std::size_t budget_;
  std::size_t calls_ = 0;
};

class SlowTranslator final : public Translator {
 public:
  std::string translate(std::string_view text, std::string_view,
                        std::string_view) override {
    ++calls;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    return std::string(text);
  }
  std::string id() const override { return "slow"; }
  std::atomic<int> calls{0};
};

}  // namespace

TEST_CASE("identity backend") {
  IdentityTranslator t;
  CHECK(t.translate("hello world", "en", "mr") == "hello world");
  CHECK(t.id() == "identity");
}

TEST_CASE("dictionary backend") {
  DictionaryTranslator t(WordMap{{"cat", "X1"}, {"sat", "X2"}});
  CHECK(t.translate("cat sat", "en", "mr") == "X1 X2");
  CHECK(t.translate("cat  sat.", "en", "mr") == "X1 X2.");
  CHECK(t.translate("(cat) dog", "en", "mr") == "(X1) dog");
  DictionaryTranslator other(WordMap{{"cat", "Y"}});
  CHECK(t.id() != other.id());
}

TEST_CASE("dictionary file loads tab-separated pairs") {
  const auto path = temp_file("dict.tsv");
  {
    std::ofstream out(path);
    out << "# comment\ncat\tमांजर\nsat\tबसले\n";
  }
  const auto t = DictionaryTranslator::from_file(path);
  CHECK(t->translate("cat sat", "en", "mr") == "मांजर बसले");
  fs::remove(path);
}

TEST_CASE("empty text is a precondition error") {
  TranslationCache cache;
  IdentityTranslator id;
  CHECK_THROWS_AS(cached_translate(cache, id, "   ", "en", "mr"), PreconditionError);
}

TEST_CASE("cache hit makes no backend call") {
  TranslationCache cache;
  IdentityTranslator id;
  testing::CountingTranslator counting(id);
  CachedTranslator ct(counting, cache);
  CHECK(ct.translate("hello", "en", "mr") == "hello");
  CHECK(ct.translate("hello", "en", "mr") == "hello");
  CHECK(counting.calls() == 1);
  CHECK(ct.stats().hits == 1);
  CHECK(ct.stats().misses == 1);
  CHECK(cached_translate(cache, counting, "hello", "en", "mr") == "hello");
  CHECK(counting.calls() == 1);
}

TEST_CASE("two backends, same text, two entries") {
  const auto path = temp_file("two.jsonl");
  {
    TranslationCache cache(path);
    IdentityTranslator id;
    DictionaryTranslator dict(WordMap{{"hi", "नमस्कार"}});
    CHECK(cached_translate(cache, id, "hi", "en", "mr") == "hi");
    CHECK(cached_translate(cache, dict, "hi", "en", "mr") == "नमस्कार");
    CHECK(cache.size() == 2);
  }
  CHECK(line_count(path) == 2);
  TranslationCache reopened(path);
  CHECK(reopened.size() == 2);
  CHECK(reopened.lookup("hi", "en", "mr", "identity") == "hi");
  fs::remove(path);
}

TEST_CASE("kill and restart over 100 sentences costs 100 backend calls") {
  const auto path = temp_file("resume.jsonl");
  std::vector<std::string> sentences;
  for (int i = 0; i < 100; ++i) sentences.push_back("sentence number " + std::to_string(i));

  std::size_t total = 0;
  {
    TranslationCache cache(path);
    DyingTranslator first(37);
    CachedTranslator ct(first, cache);
    CHECK_THROWS([&] {
      for (const auto& s : sentences) ct.translate(s, "en", "mr");
    }());
    total += first.calls();
  }
  {
    TranslationCache cache(path);
    CHECK(cache.size() == 37);
    DyingTranslator second(1000);
    CachedTranslator ct(second, cache);
    for (const auto& s : sentences) {
      CHECK(ct.translate(s, "en", "mr") == "T(" + s + ")");
    }
    total += second.calls();
  }
  CHECK(total == 100);
  CHECK(line_count(path) == 100);

  // Replaying a completed run changes nothing.
  const auto size_before = fs::file_size(path);
  {
    TranslationCache cache(path);
    DyingTranslator third(0);
    CachedTranslator ct(third, cache);
    for (const auto& s : sentences) ct.translate(s, "en", "mr");
    CHECK(third.calls() == 0);
  }
  CHECK(fs::file_size(path) == size_before);
  fs::remove(path);
}

TEST_CASE("a truncated final line is dropped on reopen") {
  const auto path = temp_file("trunc.jsonl");
  {
    TranslationCache cache(path);
    IdentityTranslator id;
    cached_translate(cache, id, "one", "en", "mr");
    cached_translate(cache, id, "two", "en", "mr");
  }
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << R"({"source_text":"three","target_te)";
  }
  {
    TranslationCache cache(path);
    CHECK(cache.skipped_on_open() == 1);
    CHECK(cache.size() == 2);
    IdentityTranslator id;
    testing::CountingTranslator counting(id);
    cached_translate(cache, counting, "three", "en", "mr");
    CHECK(counting.calls() == 1);
  }
  CHECK(line_count(path) == 3);
  TranslationCache again(path);
  CHECK(again.skipped_on_open() == 0);
  CHECK(again.size() == 3);
  fs::remove(path);
}

TEST_CASE("unwritable cache is a CacheWriteError") {
  CHECK_THROWS_AS(TranslationCache(fs::path("/proc/definitely/not/here.jsonl")),
                  CacheWriteError);
}

TEST_CASE("concurrent misses for one key share a backend call") {
  TranslationCache cache;
  SlowTranslator slow;
  CachedTranslator ct(slow, cache);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] { CHECK(ct.translate("same", "en", "mr") == "same"); });
  }
  for (auto& t : threads) t.join();
  CHECK(slow.calls == 1);
}

TEST_CASE("build translated context") {
  const auto tc = build_translated_context({"अ", "ब"});
  CHECK(tc.full_text == "अ ब");
  CHECK(tc.sentence_offsets == std::vector<std::size_t>{0, 2});
  const auto one = build_translated_context({"केवळ एक"});
  CHECK(one.full_text == "केवळ एक");
  CHECK(one.sentence_offsets == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(build_translated_context({"a", ""}), PreconditionError);
}

TEST_CASE("100 random sentences slice back out of the joined context") {
  std::mt19937_64 rng(4);
  const std::u32string alphabet = U"abcxyzअबकमराठीé1 ";
  std::vector<std::string> sentences;
  for (int i = 0; i < 100; ++i) {
    std::u32string s;
    s += alphabet[rng() % 15];
    const auto len = rng() % 20;
    for (std::size_t k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
    sentences.push_back(text::encode(s));
  }
  const auto tc = build_translated_context(sentences);
  const auto full = text::decode(tc.full_text);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto s = text::decode(sentences[i]);
    CHECK(full.substr(tc.sentence_offsets[i], s.size()) == s);
    if (i > 0) CHECK(tc.sentence_offsets[i] > tc.sentence_offsets[i - 1]);
  }
}

TEST_CASE("identity translation of single-space joined segments is verbatim") {
  const auto corpus = testing::make_corpus(2, {.qa_count = 100});
  IdentityTranslator id;
  for (const auto& a : corpus.dataset.data) {
    for (const auto& p : a.paragraphs) {
      std::vector<std::string> parts;
      for (const auto& seg : segment_sentences(p.context).segments) {
        parts.push_back(id.translate(seg.text, "en", "en"));
      }
      CHECK(build_translated_context(parts).full_text == p.context);
    }
  }
}
