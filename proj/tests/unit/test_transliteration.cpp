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

#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "squadtx/text.hpp"
#include "squadtx/transliteration.hpp"

using namespace squadtx;

TEST_CASE("ASCII digits map to Devanagari digits") {
  CHECK(transliterate_digits("1947") == "१९४७");
  CHECK(transliterate_digits("v2.0") == "v२.०");
  CHECK(transliterate_digits("no digits") == "no digits");
  CHECK(transliterate_digits("") == "");
  // Each ASCII digit d maps to U+0966 + d, independently decoded.
  const auto out = oracle::utf8_decode(transliterate_digits("0123456789"));
  REQUIRE(out.size() == 10);
  for (char32_t d = 0; d < 10; ++d) CHECK(out[d] == 0x0966 + d);
}

TEST_CASE("digit mapping keeps code-point length and is idempotent") {
  std::mt19937_64 rng(3);
  const std::u32string alphabet = U"0123456789 abक.é";
  for (int n = 0; n < 300; ++n) {
    std::u32string s;
    for (std::size_t i = 0, len = rng() % 20; i < len; ++i) {
      s += alphabet[rng() % alphabet.size()];
    }
    const auto in = oracle::utf8_encode(s);
    const auto once = transliterate_digits(in);
    CHECK(text::length(once) == s.size());
    CHECK(transliterate_digits(once) == once);
    for (char c : once) CHECK_FALSE((c >= '0' && c <= '9'));
  }
}

TEST_CASE("accented Latin folds to base letters") {
  CHECK(fold_special_latin("café") == "cafe");
  CHECK(fold_special_latin("Beyoncé 2016") == "Beyonce 2016");
  CHECK(fold_special_latin("Łódź Ørsted") == "Lodz Orsted");
  CHECK(fold_special_latin("café") == "cafe");
  CHECK(fold_special_latin("मराठी भाषा") == "मराठी भाषा");
  CHECK(transliterate_digits(fold_special_latin("Beyoncé 2016")) == "Beyonce २०१६");
}

TEST_CASE("Latin runs are found with code-point offsets") {
  const auto runs = latin_runs("मी YouTube वर 2 videos");
  REQUIRE(runs.size() == 2);
  CHECK(runs[0] == LatinRun{"YouTube", 3});
  CHECK(runs[1] == LatinRun{"videos", 16});
  CHECK(latin_runs("केवळ मराठी").empty());
}

TEST_CASE("residue without an engine only flags") {
  const auto r = transliterate_residue("मी YouTube पाहतो", nullptr);
  CHECK(r.text == "मी YouTube पाहतो");
  CHECK(r.replaced == 0);
  REQUIRE(r.flags.size() == 1);
  CHECK(r.flags[0].text == "YouTube");
}

TEST_CASE("residue with a map engine replaces known runs") {
  MapTransliterator engine(std::unordered_map<std::string, std::string>{{"YouTube", "यूट्यूब"}}, "test");
  CHECK(engine.id() == "map:test");
  const auto r = transliterate_residue("मी YouTube आणि Vimeo पाहतो", &engine);
  CHECK(r.text == "मी यूट्यूब आणि Vimeo पाहतो");
  CHECK(r.replaced == 1);
  REQUIRE(r.flags.size() == 1);
  CHECK(r.flags[0] == LatinRun{"Vimeo", 15});
  // Flag offsets point into the returned text.
  CHECK(text::substr(r.text, r.flags[0].start, 5) == "Vimeo");
  // A second pass changes nothing.
  CHECK(transliterate_residue(r.text, &engine).text == r.text);
}

TEST_CASE("map engine loads from a file") {
  const auto path = std::filesystem::temp_directory_path() / "squadtx_translit.tsv";
  {
    std::ofstream out(path);
    out << "# map\nGoogle\tगूगल\n";
  }
  const auto engine = MapTransliterator::from_file(path);
  CHECK(transliterate_residue("Google", engine.get()).text == "गूगल");
  std::filesystem::remove(path);
}

TEST_CASE("relocate picks the occurrence nearest the hint") {
  const std::u32string hay = U"ab xx ab xx ab";
  CHECK(relocate(hay, U"ab", 0) == 0u);
  CHECK(relocate(hay, U"ab", 7) == 6u);
  CHECK(relocate(hay, U"ab", 10) == 12u);
  CHECK(relocate(hay, U"ab", 9) == 6u);
  CHECK_FALSE(relocate(hay, U"zz", 0).has_value());
  CHECK(relocate(hay, U"", 3) == 3u);
}

TEST_CASE("Devanagari target languages") {
  CHECK(uses_devanagari("mr"));
  CHECK(uses_devanagari("hi-IN"));
  CHECK(uses_devanagari("sa_Deva"));
  CHECK_FALSE(uses_devanagari("en"));
  CHECK_FALSE(uses_devanagari("ta"));
}
