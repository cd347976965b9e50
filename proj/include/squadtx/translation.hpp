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

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "squadtx/http_service.hpp"

namespace squadtx {

// Sentence-level translator. Implementations must be safe to call from
// several workers at once.
class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::string translate(std::string_view text, std::string_view src,
                                std::string_view tgt) = 0;
  // Part of the cache key; changes whenever the output could change.
  virtual std::string id() const = 0;
};

class IdentityTranslator final : public Translator {
 public:
  std::string translate(std::string_view text, std::string_view src,
                        std::string_view tgt) override;
  std::string id() const override { return "identity"; }
};

// Word-by-word substitution. Tokens are whitespace-separated; leading and
// trailing punctuation is kept around the mapped core. Unmapped words pass
// through unchanged and the output is joined with single spaces.
class DictionaryTranslator final : public Translator {
 public:
  explicit DictionaryTranslator(std::unordered_map<std::string, std::string> map,
                                std::string name = "inline");
  // Tab-separated "source<TAB>target" lines; '#' comments and blank lines
  // are skipped.
  static std::unique_ptr<DictionaryTranslator> from_file(
      const std::filesystem::path& path);

  std::string translate(std::string_view text, std::string_view src,
                        std::string_view tgt) override;
  std::string id() const override { return id_; }
  const std::unordered_map<std::string, std::string>& map() const noexcept {
    return map_;
  }

 private:
  std::unordered_map<std::string, std::string> map_;
  std::string id_;
};

// Remote service; {{text}}, {{src}} and {{tgt}} are available to the
// request templates and the reply at response_path must be a string.
class HttpTranslator final : public Translator {
 public:
  explicit HttpTranslator(HttpServiceConfig cfg);
  std::string translate(std::string_view text, std::string_view src,
                        std::string_view tgt) override;
  std::string id() const override;
  HttpServiceClient& client() noexcept { return client_; }

 private:
  HttpServiceClient client_;
};

struct TranslationRecord {
  std::string source_text;
  std::string target_text;
  std::string src_lang;
  std::string tgt_lang;
  std::string backend_id;

  friend bool operator==(const TranslationRecord&,
                         const TranslationRecord&) = default;
};

// Append-only JSONL cache of TranslationRecords with an in-memory index.
// Lookups take a shared lock; appends go through one writer mutex and are
// flushed before the call returns, so a crash loses at most the line being
// written. On open, a truncated final line is dropped with a warning.
class TranslationCache {
 public:
  // An empty path keeps the cache in memory only.
  explicit TranslationCache(std::filesystem::path path = {});
  TranslationCache(const TranslationCache&) = delete;
  TranslationCache& operator=(const TranslationCache&) = delete;

  std::optional<std::string> lookup(std::string_view text, std::string_view src,
                                    std::string_view tgt,
                                    std::string_view backend_id) const;
  // Idempotent: a key already present is not written again.
  // Throws CacheWriteError.
  void store(const TranslationRecord& record);

  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return path_; }
  // Lines skipped while loading (truncated or unparseable).
  std::size_t skipped_on_open() const noexcept { return skipped_on_open_; }

  static std::string key(std::string_view text, std::string_view src,
                         std::string_view tgt, std::string_view backend_id);

 private:
  void load();

  std::filesystem::path path_;
  std::ofstream out_;
  mutable std::shared_mutex index_mu_;
  std::mutex write_mu_;
  std::unordered_map<std::string, std::string> index_;
  std::size_t skipped_on_open_ = 0;
};

struct TranslationStats {
  std::atomic<std::size_t> hits{0};
  std::atomic<std::size_t> misses{0};
};

// Cache in front of a backend. Concurrent misses for the same key share a
// single backend call.
class CachedTranslator {
 public:
  CachedTranslator(Translator& backend, TranslationCache& cache);

  std::string translate(std::string_view text, std::string_view src,
                        std::string_view tgt);

  const TranslationStats& stats() const noexcept { return stats_; }
  Translator& backend() noexcept { return backend_; }

 private:
  Translator& backend_;
  TranslationCache& cache_;
  std::string backend_id_;
  std::mutex inflight_mu_;
  std::unordered_map<std::string, std::shared_future<std::string>> inflight_;
  TranslationStats stats_;
};

// Free-function form of CachedTranslator::translate for one-off calls.
std::string cached_translate(TranslationCache& store, Translator& backend,
                             std::string_view text, std::string_view src,
                             std::string_view tgt);

struct TranslatedContext {
  std::string full_text;
  std::vector<std::size_t> sentence_offsets;  // code points
  std::vector<std::size_t> sentence_lengths;  // code points

  friend bool operator==(const TranslatedContext&,
                         const TranslatedContext&) = default;
};

// Joins with exactly one space. Throws PreconditionError on an empty
// sentence.
TranslatedContext build_translated_context(
    const std::vector<std::string>& translated_sentences);

}  // namespace squadtx
