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

#include "squadtx/squad.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <unordered_set>

#include "squadtx/errors.hpp"
#include "squadtx/text.hpp"

namespace squadtx {

namespace {

std::string index_path(const std::string& parent, const char* key,
                       std::size_t i) {
  return parent + "." + key + "[" + std::to_string(i) + "]";
}

const OrderedJson& require(const OrderedJson& obj, const char* key,
                           const std::string& path,
                           const std::string& qa_id = {}) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(path + "." + key, std::string("missing required field \"") + key +
                                "\"",
                      qa_id);
  }
  return *it;
}

std::string require_string(const OrderedJson& obj, const char* key,
                           const std::string& path,
                           const std::string& qa_id = {}) {
  const auto& v = require(obj, key, path, qa_id);
  if (!v.is_string()) {
    throw SchemaError(path + "." + key, "expected a string", qa_id);
  }
  return v.get<std::string>();
}

const OrderedJson& require_array(const OrderedJson& obj, const char* key,
                                 const std::string& path,
                                 const std::string& qa_id = {}) {
  const auto& v = require(obj, key, path, qa_id);
  if (!v.is_array()) {
    throw SchemaError(path + "." + key, "expected an array", qa_id);
  }
  return v;
}

void require_object(const OrderedJson& v, const std::string& path,
                    const std::string& qa_id = {}) {
  if (!v.is_object()) throw SchemaError(path, "expected an object", qa_id);
}

OrderedJson collect_extra(const OrderedJson& obj,
                          std::initializer_list<std::string_view> known,
                          const ParseOptions& opts) {
  OrderedJson extra = OrderedJson::object();
  if (!opts.keep_unknown_fields) return extra;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (auto k : known) {
      if (it.key() == k) {
        is_known = true;
        break;
      }
    }
    if (!is_known) extra[it.key()] = it.value();
  }
  return extra;
}

std::vector<AnswerSpan> parse_answers(const OrderedJson& arr,
                                      const std::string& path,
                                      const std::string& qa_id,
                                      std::size_t context_len,
                                      const ParseOptions& opts) {
  std::vector<AnswerSpan> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& a = arr[i];
    const auto apath = path + "[" + std::to_string(i) + "]";
    require_object(a, apath, qa_id);
    AnswerSpan span;
    span.text = require_string(a, "text", apath, qa_id);
    const auto& start = require(a, "answer_start", apath, qa_id);
    if (!start.is_number_integer()) {
      throw SchemaError(apath + ".answer_start", "expected an integer", qa_id);
    }
    span.answer_start = start.get<std::int64_t>();
    const auto len = static_cast<std::int64_t>(text::length(span.text));
    if (span.answer_start < 0 ||
        span.answer_start + len > static_cast<std::int64_t>(context_len)) {
      throw SchemaError(apath + ".answer_start",
                        "answer span [" + std::to_string(span.answer_start) +
                            ", " + std::to_string(span.answer_start + len) +
                            ") lies outside the context (length " +
                            std::to_string(context_len) + ") for qa id " +
                            qa_id,
                        qa_id);
    }
    span.extra = collect_extra(a, {"text", "answer_start"}, opts);
    out.push_back(std::move(span));
  }
  return out;
}

QaItem parse_qa(const OrderedJson& q, const std::string& path,
                std::size_t context_len, const ParseOptions& opts) {
  require_object(q, path);
  QaItem qa;
  qa.id = require_string(q, "id", path);
  qa.question = require_string(q, "question", path, qa.id);
  const auto& imp = require(q, "is_impossible", path, qa.id);
  if (!imp.is_boolean()) {
    throw SchemaError(path + ".is_impossible", "expected a boolean", qa.id);
  }
  qa.is_impossible = imp.get<bool>();
  qa.answers = parse_answers(require_array(q, "answers", path, qa.id),
                             path + ".answers", qa.id, context_len, opts);
  if (qa.is_impossible && !qa.answers.empty()) {
    throw SchemaError(path + ".answers",
                      "impossible question " + qa.id + " has answers", qa.id);
  }
  if (!qa.is_impossible && qa.answers.empty()) {
    throw SchemaError(path + ".answers",
                      "answerable question " + qa.id + " has no answers",
                      qa.id);
  }
  if (auto it = q.find("plausible_answers"); it != q.end()) {
    if (!it->is_array()) {
      throw SchemaError(path + ".plausible_answers", "expected an array",
                        qa.id);
    }
    auto plausible = parse_answers(*it, path + ".plausible_answers", qa.id,
                                   context_len, opts);
    if (opts.keep_plausible_answers) qa.plausible_answers = std::move(plausible);
  }
  qa.extra = collect_extra(
      q, {"id", "question", "is_impossible", "answers", "plausible_answers"},
      opts);
  return qa;
}

OrderedJson answers_json(const std::vector<AnswerSpan>& answers) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& a : answers) {
    OrderedJson o = OrderedJson::object();
    o["text"] = a.text;
    o["answer_start"] = a.answer_start;
    for (auto it = a.extra.begin(); it != a.extra.end(); ++it) {
      o[it.key()] = it.value();
    }
    arr.push_back(std::move(o));
  }
  return arr;
}

void append_extra(OrderedJson& o, const OrderedJson& extra) {
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    o[it.key()] = it.value();
  }
}

void check_answers(const std::u32string& context, const QaItem& qa,
                   const std::vector<AnswerSpan>& answers, const char* field,
                   std::vector<SpanViolation>& out) {
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const auto& a = answers[i];
    const auto t = text::decode(a.text);
    if (span_matches(context, a.answer_start, t)) continue;
    std::string actual;
    if (a.answer_start >= 0 &&
        static_cast<std::size_t>(a.answer_start) < context.size()) {
      actual = text::encode(std::u32string_view(context).substr(
          static_cast<std::size_t>(a.answer_start), t.size()));
    }
    out.push_back({qa.id, field, i, a.answer_start, a.text, actual});
  }
}

}  // namespace

Dataset parse_dataset(std::string_view json_text, const ParseOptions& opts) {
  OrderedJson root;
  try {
    root = OrderedJson::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  require_object(root, "$");
  Dataset d;
  if (auto it = root.find("version"); it != root.end()) {
    if (!it->is_string()) throw SchemaError("$.version", "expected a string");
    d.version = it->get<std::string>();
    if (*d.version != kSquadVersion) {
      spdlog::warn("dataset version is \"{}\", expected \"{}\"", *d.version,
                   kSquadVersion);
    }
  }
  const auto& data = require_array(root, "data", "$");
  std::unordered_set<std::string> ids;
  d.data.reserve(data.size());
  for (std::size_t ai = 0; ai < data.size(); ++ai) {
    const auto apath = index_path("$", "data", ai);
    const auto& a = data[ai];
    require_object(a, apath);
    Article article;
    article.title = require_string(a, "title", apath);
    if (article.title.empty()) throw SchemaError(apath + ".title", "empty title");
    const auto& paragraphs = require_array(a, "paragraphs", apath);
    article.paragraphs.reserve(paragraphs.size());
    for (std::size_t pi = 0; pi < paragraphs.size(); ++pi) {
      const auto ppath = index_path(apath, "paragraphs", pi);
      const auto& p = paragraphs[pi];
      require_object(p, ppath);
      Paragraph para;
      para.context = require_string(p, "context", ppath);
      const auto context_len = text::length(para.context);
      const auto& qas = require_array(p, "qas", ppath);
      para.qas.reserve(qas.size());
      for (std::size_t qi = 0; qi < qas.size(); ++qi) {
        auto qa = parse_qa(qas[qi], index_path(ppath, "qas", qi), context_len,
                           opts);
        if (!ids.insert(qa.id).second) {
          throw SchemaError(index_path(ppath, "qas", qi) + ".id",
                            "duplicate qa id " + qa.id, qa.id);
        }
        para.qas.push_back(std::move(qa));
      }
      para.extra = collect_extra(p, {"context", "qas"}, opts);
      article.paragraphs.push_back(std::move(para));
    }
    article.extra = collect_extra(a, {"title", "paragraphs"}, opts);
    d.data.push_back(std::move(article));
  }
  d.extra = collect_extra(root, {"version", "data"}, opts);
  return d;
}

Dataset load_dataset(const std::filesystem::path& path,
                     const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), opts);
}

OrderedJson to_json(const Dataset& d) {
  OrderedJson root = OrderedJson::object();
  if (d.version) root["version"] = *d.version;
  OrderedJson data = OrderedJson::array();
  for (const auto& article : d.data) {
    OrderedJson a = OrderedJson::object();
    a["title"] = article.title;
    OrderedJson paragraphs = OrderedJson::array();
    for (const auto& para : article.paragraphs) {
      OrderedJson p = OrderedJson::object();
      p["context"] = para.context;
      OrderedJson qas = OrderedJson::array();
      for (const auto& qa : para.qas) {
        OrderedJson q = OrderedJson::object();
        q["question"] = qa.question;
        q["id"] = qa.id;
        q["answers"] = answers_json(qa.answers);
        q["is_impossible"] = qa.is_impossible;
        if (qa.plausible_answers) {
          q["plausible_answers"] = answers_json(*qa.plausible_answers);
        }
        append_extra(q, qa.extra);
        qas.push_back(std::move(q));
      }
      p["qas"] = std::move(qas);
      append_extra(p, para.extra);
      paragraphs.push_back(std::move(p));
    }
    a["paragraphs"] = std::move(paragraphs);
    append_extra(a, article.extra);
    data.push_back(std::move(a));
  }
  root["data"] = std::move(data);
  append_extra(root, d.extra);
  return root;
}

std::string serialize_dataset(const Dataset& d, int indent) {
  return to_json(d).dump(indent, ' ', false,
                         nlohmann::json::error_handler_t::strict);
}

void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  int indent) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_dataset(d, indent) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

bool span_matches(std::u32string_view context, std::int64_t start,
                  std::u32string_view t) {
  if (start < 0) return false;
  const auto s = static_cast<std::size_t>(start);
  if (s + t.size() > context.size()) return false;
  return context.substr(s, t.size()) == t;
}

std::vector<SpanViolation> validate_spans(const Paragraph& p) {
  std::vector<SpanViolation> out;
  const auto context = text::decode(p.context);
  for (const auto& qa : p.qas) {
    check_answers(context, qa, qa.answers, "answers", out);
    if (qa.plausible_answers) {
      check_answers(context, qa, *qa.plausible_answers, "plausible_answers",
                    out);
    }
  }
  return out;
}

std::vector<SpanViolation> validate_spans(const Dataset& d) {
  std::vector<SpanViolation> out;
  for (const auto& article : d.data) {
    for (const auto& para : article.paragraphs) {
      auto v = validate_spans(para);
      out.insert(out.end(), std::make_move_iterator(v.begin()),
                 std::make_move_iterator(v.end()));
    }
  }
  return out;
}

DatasetStats dataset_stats(const Dataset& d) {
  DatasetStats s;
  s.article_count = static_cast<std::int64_t>(d.data.size());
  for (const auto& article : d.data) {
    s.paragraph_count += static_cast<std::int64_t>(article.paragraphs.size());
    for (const auto& para : article.paragraphs) {
      for (const auto& qa : para.qas) {
        ++s.qa_count;
        if (qa.is_impossible) {
          ++s.unanswerable_count;
        } else {
          ++s.answerable_count;
        }
      }
    }
  }
  return s;
}

OrderedJson to_json(const DatasetStats& s) {
  OrderedJson o = OrderedJson::object();
  o["article_count"] = s.article_count;
  o["paragraph_count"] = s.paragraph_count;
  o["qa_count"] = s.qa_count;
  o["answerable_count"] = s.answerable_count;
  o["unanswerable_count"] = s.unanswerable_count;
  return o;
}

OrderedJson to_json(const SpanViolation& v) {
  OrderedJson o = OrderedJson::object();
  o["qa_id"] = v.qa_id;
  o["field"] = v.field;
  o["answer_index"] = v.answer_index;
  o["answer_start"] = v.answer_start;
  o["expected"] = v.expected;
  o["actual"] = v.actual;
  return o;
}

}  // namespace squadtx
