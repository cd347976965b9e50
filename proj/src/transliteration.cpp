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

#include "squadtx/transliteration.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>

#include "squadtx/errors.hpp"
#include "squadtx/text.hpp"

namespace squadtx {

namespace {

constexpr char32_t kDevanagariZero = 0x0966;

// Latin letters with no canonical decomposition but an obvious base.
char32_t undecomposable_base(char32_t c) {
  switch (c) {
    case U'ø': return U'o';
    case U'Ø': return U'O';
    case U'ł': return U'l';
    case U'Ł': return U'L';
    case U'đ': return U'd';
    case U'Đ': return U'D';
    case U'ħ': return U'h';
    case U'Ħ': return U'H';
    case U'ı': return U'i';
    default: return c;
  }
}

}  // namespace

std::string transliterate_digits(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  for (unsigned char c : input) {
    if (c >= '0' && c <= '9') {
      out += text::encode(kDevanagariZero + (c - '0'));
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

std::string fold_special_latin(std::string_view input) {
  const auto u = text::decode(input);
  std::u32string out;
  out.reserve(u.size());
  bool after_latin = false;
  for (char32_t c : u) {
    if (text::is_combining_mark(c)) {
      if (!after_latin) out.push_back(c);
      continue;
    }
    if (!text::is_latin_letter(c)) {
      out.push_back(c);
      after_latin = false;
      continue;
    }
    after_latin = true;
    if (c < 0x80) {
      out.push_back(c);
      continue;
    }
    const auto decomposed = text::nfd(std::u32string_view(&c, 1));
    for (char32_t d : decomposed) {
      if (!text::is_combining_mark(d)) out.push_back(undecomposable_base(d));
    }
  }
  return text::encode(out);
}

MapTransliterator::MapTransliterator(
    std::unordered_map<std::string, std::string> map, std::string name)
    : map_(std::move(map)), name_(std::move(name)) {}

std::unique_ptr<MapTransliterator> MapTransliterator::from_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open transliteration map " + path.string());
  std::unordered_map<std::string, std::string> map;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    map.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return std::make_unique<MapTransliterator>(std::move(map),
                                             path.filename().string());
}

std::string MapTransliterator::transliterate(std::string_view latin_run) {
  auto it = map_.find(std::string(latin_run));
  if (it == map_.end()) {
    throw Error("no transliteration for \"" + std::string(latin_run) + "\"");
  }
  return it->second;
}

HttpTransliterator::HttpTransliterator(HttpServiceConfig cfg,
                                       std::string tgt_lang)
    : client_(std::move(cfg)), tgt_lang_(std::move(tgt_lang)) {}

std::string HttpTransliterator::transliterate(std::string_view latin_run) {
  const auto value =
      client_.call({{"text", std::string(latin_run)}, {"tgt", tgt_lang_}});
  if (!value.is_string()) {
    throw ResponseFormatError("transliteration is not a string");
  }
  return value.get<std::string>();
}

std::string HttpTransliterator::id() const {
  return "http:" + client_.config().base_url + client_.config().path_template;
}

std::vector<LatinRun> latin_runs(std::string_view input) {
  const auto u = text::decode(input);
  std::vector<LatinRun> runs;
  std::size_t i = 0;
  while (i < u.size()) {
    if (!text::is_latin_letter(u[i])) {
      ++i;
      continue;
    }
    const std::size_t b = i;
    while (i < u.size() &&
           (text::is_latin_letter(u[i]) || text::is_combining_mark(u[i]))) {
      ++i;
    }
    runs.push_back({text::encode(std::u32string_view(u).substr(b, i - b)), b});
  }
  return runs;
}

ResidueResult transliterate_residue(std::string_view input,
                                    TransliterationEngine* engine) {
  ResidueResult result;
  auto runs = latin_runs(input);
  if (engine == nullptr || runs.empty()) {
    result.text = std::string(input);
    result.flags = std::move(runs);
    return result;
  }
  const auto u = text::decode(input);
  std::u32string out;
  std::size_t cursor = 0;
  for (const auto& run : runs) {
    out.append(u, cursor, run.start - cursor);
    const auto run_len = text::length(run.text);
    cursor = run.start + run_len;
    try {
      const auto replacement = text::decode(engine->transliterate(run.text));
      out += replacement;
      ++result.replaced;
    } catch (const std::exception& e) {
      spdlog::debug("transliteration of \"{}\" failed: {}", run.text,
                    e.what());
      result.flags.push_back({run.text, out.size()});
      out += text::decode(run.text);
    }
  }
  out.append(u, cursor, std::u32string::npos);
  result.text = text::encode(out);
  return result;
}

std::optional<std::size_t> relocate(std::u32string_view haystack,
                                    std::u32string_view needle,
                                    std::size_t near) {
  if (needle.empty()) {
    return near <= haystack.size() ? std::optional(near) : std::nullopt;
  }
  std::optional<std::size_t> best;
  std::size_t best_dist = 0;
  for (auto pos = haystack.find(needle); pos != std::u32string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    const auto dist = pos > near ? pos - near : near - pos;
    if (!best || dist < best_dist) {
      best = pos;
      best_dist = dist;
    }
    if (pos > near) break;
  }
  return best;
}

bool uses_devanagari(std::string_view lang) {
  static constexpr std::array<std::string_view, 10> kLangs = {
      "mr", "hi", "ne", "sa", "kok", "mai", "bho", "new", "doi", "brx"};
  std::string base(lang.substr(0, lang.find_first_of("-_")));
  std::transform(base.begin(), base.end(), base.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lang.find("Deva") != std::string_view::npos) return true;
  return std::find(kLangs.begin(), kLangs.end(), base) != kLangs.end();
}

}  // namespace squadtx
