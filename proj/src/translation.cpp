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

#include "squadtx/translation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include "squadtx/errors.hpp"
#include "squadtx/text.hpp"

namespace squadtx {

namespace {

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void require_text(std::string_view text) {
  if (text::trim(text).empty()) {
    throw PreconditionError("cannot translate empty text");
  }
}

}  // namespace

std::string IdentityTranslator::translate(std::string_view text,
                                          std::string_view, std::string_view) {
  require_text(text);
  return std::string(text);
}

DictionaryTranslator::DictionaryTranslator(
    std::unordered_map<std::string, std::string> map, std::string name)
    : map_(std::move(map)) {
  std::vector<std::pair<std::string, std::string>> entries(map_.begin(),
                                                           map_.end());
  std::sort(entries.begin(), entries.end());
  std::string digest;
  for (const auto& [k, v] : entries) {
    digest += k;
    digest += '\t';
    digest += v;
    digest += '\n';
  }
  id_ = "dict:" + name + "@" + fnv1a_hex(digest);
}

std::unique_ptr<DictionaryTranslator> DictionaryTranslator::from_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dictionary " + path.string());
  std::unordered_map<std::string, std::string> map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(path.string() + ":" + std::to_string(lineno) +
                  ": expected source<TAB>target");
    }
    map.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return std::make_unique<DictionaryTranslator>(std::move(map),
                                                path.filename().string());
}

std::string DictionaryTranslator::translate(std::string_view input,
                                            std::string_view,
                                            std::string_view) {
  require_text(input);
  const auto u = text::decode(input);
  const std::u32string_view uv(u);
  std::string out;
  for (const auto& r : text::word_ranges(u)) {
    if (!out.empty()) out += ' ';
    const auto token = text::encode(uv.substr(r.begin, r.size()));
    if (auto it = map_.find(token); it != map_.end()) {
      out += it->second;
      continue;
    }
    std::size_t b = r.begin;
    std::size_t e = r.end;
    while (b < e && text::is_punct(u[b])) ++b;
    while (e > b && text::is_punct(u[e - 1])) --e;
    auto it = map_.find(text::encode(uv.substr(b, e - b)));
    if (b == e || it == map_.end()) {
      out += token;
      continue;
    }
    out += text::encode(uv.substr(r.begin, b - r.begin));
    out += it->second;
    out += text::encode(uv.substr(e, r.end - e));
  }
  return out;
}

HttpTranslator::HttpTranslator(HttpServiceConfig cfg)
    : client_(std::move(cfg)) {}

std::string HttpTranslator::translate(std::string_view text,
                                      std::string_view src,
                                      std::string_view tgt) {
  require_text(text);
  const auto value = client_.call({{"text", std::string(text)},
                                   {"src", std::string(src)},
                                   {"tgt", std::string(tgt)}});
  if (!value.is_string()) {
    throw ResponseFormatError("translation at \"" +
                              client_.config().response_path +
                              "\" is not a string");
  }
  return value.get<std::string>();
}

std::string HttpTranslator::id() const {
  const auto& c = client_.config();
  return "http:" + c.base_url + c.path_template + "@" +
         fnv1a_hex(c.body_template + "\n" + c.response_path);
}

// --- TranslationCache -------------------------------------------------------

std::string TranslationCache::key(std::string_view text, std::string_view src,
                                  std::string_view tgt,
                                  std::string_view backend_id) {
  std::string k;
  k.reserve(text.size() + src.size() + tgt.size() + backend_id.size() + 3);
  k.append(backend_id).push_back('\x1f');
  k.append(src).push_back('\x1f');
  k.append(tgt).push_back('\x1f');
  k.append(text);
  return k;
}

TranslationCache::TranslationCache(std::filesystem::path path)
    : path_(std::move(path)) {
  if (path_.empty()) return;
  load();
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw CacheWriteError("cannot open cache " + path_.string());
}

void TranslationCache::load() {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return;
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw CacheWriteError("cannot read cache " + path_.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  in.close();

  std::size_t pos = 0;
  std::size_t lineno = 0;
  std::size_t complete_end = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    ++lineno;
    if (nl == std::string::npos) {
      spdlog::warn("{}: dropping truncated final line {}", path_.string(),
                   lineno);
      ++skipped_on_open_;
      break;
    }
    const std::string_view line(data.data() + pos, nl - pos);
    pos = nl + 1;
    complete_end = pos;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto k = key(j.at("source_text").get<std::string>(),
                   j.at("src_lang").get<std::string>(),
                   j.at("tgt_lang").get<std::string>(),
                   j.at("backend_id").get<std::string>());
      index_.emplace(std::move(k), j.at("target_text").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      spdlog::warn("{}: skipping unreadable line {}: {}", path_.string(),
                   lineno, e.what());
      ++skipped_on_open_;
    }
  }
  if (complete_end < data.size()) {
    // Cut the partial line so the next append starts on a fresh line.
    std::filesystem::resize_file(path_, complete_end, ec);
    if (ec) {
      throw CacheWriteError("cannot repair cache " + path_.string() + ": " +
                            ec.message());
    }
  }
}

std::optional<std::string> TranslationCache::lookup(
    std::string_view text, std::string_view src, std::string_view tgt,
    std::string_view backend_id) const {
  const auto k = key(text, src, tgt, backend_id);
  std::shared_lock lock(index_mu_);
  if (auto it = index_.find(k); it != index_.end()) return it->second;
  return std::nullopt;
}

void TranslationCache::store(const TranslationRecord& r) {
  auto k = key(r.source_text, r.src_lang, r.tgt_lang, r.backend_id);
  std::lock_guard write_lock(write_mu_);
  {
    std::shared_lock lock(index_mu_);
    if (index_.count(k) != 0) return;
  }
  if (!path_.empty()) {
    nlohmann::json j;
    j["source_text"] = r.source_text;
    j["target_text"] = r.target_text;
    j["src_lang"] = r.src_lang;
    j["tgt_lang"] = r.tgt_lang;
    j["backend_id"] = r.backend_id;
    out_ << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace)
         << '\n';
    out_.flush();
    if (!out_) {
      throw CacheWriteError("failed to append to cache " + path_.string());
    }
  }
  std::unique_lock lock(index_mu_);
  index_.emplace(std::move(k), r.target_text);
}

std::size_t TranslationCache::size() const {
  std::shared_lock lock(index_mu_);
  return index_.size();
}

// --- CachedTranslator -------------------------------------------------------

CachedTranslator::CachedTranslator(Translator& backend,
                                   TranslationCache& cache)
    : backend_(backend), cache_(cache), backend_id_(backend.id()) {}

std::string CachedTranslator::translate(std::string_view text,
                                        std::string_view src,
                                        std::string_view tgt) {
  require_text(text);
  if (auto hit = cache_.lookup(text, src, tgt, backend_id_)) {
    ++stats_.hits;
    return *std::move(hit);
  }
  const auto k = TranslationCache::key(text, src, tgt, backend_id_);
  std::promise<std::string> promise;
  std::shared_future<std::string> shared;
  {
    std::lock_guard lock(inflight_mu_);
    if (auto it = inflight_.find(k); it != inflight_.end()) {
      shared = it->second;
    } else {
      inflight_.emplace(k, promise.get_future().share());
    }
  }
  if (shared.valid()) {
    ++stats_.hits;
    return shared.get();
  }
  auto finish = [&] {
    std::lock_guard lock(inflight_mu_);
    inflight_.erase(k);
  };
  try {
    std::string out;
    if (auto hit = cache_.lookup(text, src, tgt, backend_id_)) {
      ++stats_.hits;
      out = *std::move(hit);
    } else {
      ++stats_.misses;
      out = backend_.translate(text, src, tgt);
      cache_.store({std::string(text), out, std::string(src), std::string(tgt),
                    backend_id_});
    }
    promise.set_value(out);
    finish();
    return out;
  } catch (...) {
    promise.set_exception(std::current_exception());
    finish();
    throw;
  }
}

std::string cached_translate(TranslationCache& store, Translator& backend,
                             std::string_view text, std::string_view src,
                             std::string_view tgt) {
  CachedTranslator ct(backend, store);
  return ct.translate(text, src, tgt);
}

TranslatedContext build_translated_context(
    const std::vector<std::string>& translated_sentences) {
  TranslatedContext tc;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < translated_sentences.size(); ++i) {
    const auto& s = translated_sentences[i];
    if (s.empty()) {
      throw PreconditionError("translated sentence " + std::to_string(i) +
                              " is empty");
    }
    if (i > 0) {
      tc.full_text += ' ';
      ++offset;
    }
    const auto len = text::length(s);
    tc.sentence_offsets.push_back(offset);
    tc.sentence_lengths.push_back(len);
    tc.full_text += s;
    offset += len;
  }
  return tc;
}

}  // namespace squadtx
