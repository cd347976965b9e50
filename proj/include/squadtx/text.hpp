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

// Code-point level text helpers. Every offset in the toolkit counts Unicode
// code points, never bytes, so all string slicing goes through here.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace squadtx::text {

// Invalid UTF-8 sequences decode to U+FFFD.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view cps);
std::string encode(char32_t cp);

std::size_t length(std::string_view utf8);

// Code-point slice [start, start + count). Clamped to the string end.
std::string substr(std::string_view utf8, std::size_t start,
                   std::size_t count);

bool is_space(char32_t c);
bool is_upper(char32_t c);
bool is_lower(char32_t c);
bool is_letter(char32_t c);
bool is_punct(char32_t c);
bool is_combining_mark(char32_t c);
bool is_latin_letter(char32_t c);
bool is_ascii_digit(char32_t c) noexcept;

// Simple (one-to-one) case mapping, so lengths are preserved.
char32_t to_lower(char32_t c);

std::string_view trim(std::string_view s);
std::u32string_view trim(std::u32string_view s);

// Maximal runs of non-whitespace, as half-open code-point ranges.
struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const Range&, const Range&) = default;
};
std::vector<Range> word_ranges(std::u32string_view s);

std::vector<std::string> split_whitespace(std::string_view utf8);

// NFC / NFD via ICU.
std::string nfc(std::string_view utf8);
std::u32string nfd(std::u32string_view cps);

}  // namespace squadtx::text
