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

#include "squadtx/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace squadtx::text {

std::u32string decode(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto n = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    out.push_back(c < 0 ? U'\uFFFD' : static_cast<char32_t>(c));
  }
  return out;
}

std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t c : cps) {
    uint8_t buf[U8_MAX_LENGTH];
    int32_t len = 0;
    UBool err = false;
    U8_APPEND(buf, len, U8_MAX_LENGTH, static_cast<UChar32>(c), err);
    if (err) {
      // Lone surrogate or out-of-range value.
      out += "\xEF\xBF\xBD";
      continue;
    }
    out.append(reinterpret_cast<const char*>(buf), len);
  }
  return out;
}

std::string encode(char32_t cp) { return encode(std::u32string_view(&cp, 1)); }

std::size_t length(std::string_view utf8) {
  std::size_t n = 0;
  for (unsigned char b : utf8) {
    if ((b & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string substr(std::string_view utf8, std::size_t start,
                   std::size_t count) {
  std::size_t cp = 0;
  std::size_t i = 0;
  const std::size_t n = utf8.size();
  auto advance = [&] {
    ++i;
    while (i < n && (static_cast<unsigned char>(utf8[i]) & 0xC0) == 0x80) ++i;
  };
  while (i < n && cp < start) {
    advance();
    ++cp;
  }
  const std::size_t begin = i;
  std::size_t taken = 0;
  while (i < n && taken < count) {
    advance();
    ++taken;
  }
  return std::string(utf8.substr(begin, i - begin));
}

bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }
bool is_upper(char32_t c) {
  const auto u = static_cast<UChar32>(c);
  return u_isUUppercase(u) || u_istitle(u);
}
bool is_lower(char32_t c) { return u_isULowercase(static_cast<UChar32>(c)); }
bool is_letter(char32_t c) { return u_isUAlphabetic(static_cast<UChar32>(c)); }
bool is_punct(char32_t c) { return u_ispunct(static_cast<UChar32>(c)); }

bool is_combining_mark(char32_t c) {
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(c));
  return (mask & (U_GC_MN_MASK | U_GC_MC_MASK | U_GC_ME_MASK)) != 0;
}

bool is_latin_letter(char32_t c) {
  UErrorCode status = U_ZERO_ERROR;
  const auto u = static_cast<UChar32>(c);
  return u_isalpha(u) && uscript_getScript(u, &status) == USCRIPT_LATIN &&
         U_SUCCESS(status);
}

bool is_ascii_digit(char32_t c) noexcept { return c >= U'0' && c <= U'9'; }

char32_t to_lower(char32_t c) {
  return static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
}

std::string_view trim(std::string_view s) {
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  int32_t first = -1;
  int32_t last_end = 0;
  int32_t i = 0;
  while (i < n) {
    const int32_t at = i;
    UChar32 c;
    U8_NEXT(p, i, n, c);
    if (c < 0 || !u_isUWhiteSpace(c)) {
      if (first < 0) first = at;
      last_end = i;
    }
  }
  if (first < 0) return s.substr(0, 0);
  return s.substr(static_cast<std::size_t>(first),
                  static_cast<std::size_t>(last_end - first));
}

std::u32string_view trim(std::u32string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::vector<Range> word_ranges(std::u32string_view s) {
  std::vector<Range> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    if (i == s.size()) break;
    const std::size_t b = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    out.push_back({b, i});
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view utf8) {
  const auto u = decode(utf8);
  std::vector<std::string> out;
  for (const auto& r : word_ranges(u)) {
    out.push_back(encode(std::u32string_view(u).substr(r.begin, r.size())));
  }
  return out;
}

namespace {

const icu::Normalizer2& normalizer(bool compose) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = compose ? icu::Normalizer2::getNFCInstance(status)
                                      : icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw std::runtime_error("ICU normalizer unavailable");
  }
  return *n;
}

}  // namespace

std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const auto src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  const auto out = normalizer(true).normalize(src, status);
  if (U_FAILURE(status)) return std::string(utf8);
  std::string result;
  out.toUTF8String(result);
  return result;
}

std::u32string nfd(std::u32string_view cps) {
  UErrorCode status = U_ZERO_ERROR;
  const auto src = icu::UnicodeString::fromUTF32(
      reinterpret_cast<const UChar32*>(cps.data()),
      static_cast<int32_t>(cps.size()));
  const auto out = normalizer(false).normalize(src, status);
  if (U_FAILURE(status)) return std::u32string(cps);
  std::u32string result(static_cast<std::size_t>(out.countChar32()), U'\0');
  UErrorCode status2 = U_ZERO_ERROR;
  out.toUTF32(reinterpret_cast<UChar32*>(result.data()),
              static_cast<int32_t>(result.size()), status2);
  return result;
}

}  // namespace squadtx::text
