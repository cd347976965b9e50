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

// Post-processing of translated text into Devanagari-script output.

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "squadtx/http_service.hpp"

namespace squadtx {

// ASCII 0-9 -> U+0966..U+096F. Length preserving.
std::string transliterate_digits(std::string_view text);

// Strips diacritics from Latin letters (é -> e, ü -> u, ø -> o), including
// combining marks that follow a Latin base. Other scripts are untouched.
std::string fold_special_latin(std::string_view text);

class TransliterationEngine {
 public:
  virtual ~TransliterationEngine() = default;
  // Converts one Latin-letter run. May throw ServiceError.
  virtual std::string transliterate(std::string_view latin_run) = 0;
  virtual std::string id() const = 0;
};

class MapTransliterator final : public TransliterationEngine {
 public:
  explicit MapTransliterator(std::unordered_map<std::string, std::string> map,
                             std::string name = "inline");
  // "latin<TAB>devanagari" per line, '#' comments.
  static std::unique_ptr<MapTransliterator> from_file(
      const std::filesystem::path& path);

  // Throws Error for runs missing from the map.
  std::string transliterate(std::string_view latin_run) override;
  std::string id() const override { return "map:" + name_; }

 private:
  std::unordered_map<std::string, std::string> map_;
  std::string name_;
};

// {{text}} and {{tgt}} are available to the request templates.
class HttpTransliterator final : public TransliterationEngine {
 public:
  HttpTransliterator(HttpServiceConfig cfg, std::string tgt_lang);
  std::string transliterate(std::string_view latin_run) override;
  std::string id() const override;

 private:
  HttpServiceClient client_;
  std::string tgt_lang_;
};

struct LatinRun {
  std::string text;
  std::size_t start = 0;  // code points into the returned text

  friend bool operator==(const LatinRun&, const LatinRun&) = default;
};

struct ResidueResult {
  std::string text;
  std::vector<LatinRun> flags;  // runs still Latin in `text`
  std::size_t replaced = 0;
};

// Without an engine the text is returned unchanged and every maximal
// Latin-letter run is flagged. With one, each run is replaced by the engine
// output; a run whose conversion throws stays in place and is flagged.
ResidueResult transliterate_residue(std::string_view text,
                                    TransliterationEngine* engine);

std::vector<LatinRun> latin_runs(std::string_view text);

// Position of `needle` in `haystack` closest to `near` (ties go to the
// earlier one), or nullopt when absent.
std::optional<std::size_t> relocate(std::u32string_view haystack,
                                    std::u32string_view needle,
                                    std::size_t near);

// Languages written in Devanagari (mr, hi, ne, sa, ...), with or without a
// region/script suffix.
bool uses_devanagari(std::string_view lang);

}  // namespace squadtx
