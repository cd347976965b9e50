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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace squadtx {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed JSON input. `byte_offset` is the position reported by the parser.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Well-formed JSON that does not follow the SQuAD 2.0 schema.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what,
              std::string qa_id = {})
      : Error(path + ": " + what),
        path_(std::move(path)),
        qa_id_(std::move(qa_id)) {}
  const std::string& path() const noexcept { return path_; }
  // Empty when the offending node is not inside a QA item.
  const std::string& qa_id() const noexcept { return qa_id_; }

 private:
  std::string path_;
  std::string qa_id_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

// Remote-service failures. All of them are retryable by classification;
// the client decides whether to actually retry.
class ServiceError : public Error {
 public:
  using Error::Error;
  virtual bool retryable() const noexcept { return true; }
};

class TransportError : public ServiceError {
 public:
  using ServiceError::ServiceError;
};

class RateLimitError : public ServiceError {
 public:
  RateLimitError(const std::string& what, std::optional<double> retry_after)
      : ServiceError(what), retry_after_(retry_after) {}
  // Seconds, from the Retry-After response header when the service sent one.
  std::optional<double> retry_after() const noexcept { return retry_after_; }

 private:
  std::optional<double> retry_after_;
};

class HttpStatusError : public ServiceError {
 public:
  HttpStatusError(const std::string& what, int status, std::string body)
      : ServiceError(what), status_(status), body_(std::move(body)) {}
  int status() const noexcept { return status_; }
  const std::string& body() const noexcept { return body_; }
  bool retryable() const noexcept override {
    return status_ >= 500 || status_ == 408;
  }

 private:
  int status_;
  std::string body_;
};

// The service answered, but not in the configured shape.
class ResponseFormatError : public ServiceError {
 public:
  using ServiceError::ServiceError;
  bool retryable() const noexcept override { return false; }
};

// Persisting to the translation cache failed. Always fatal for a run.
class CacheWriteError : public Error {
 public:
  using Error::Error;
};

}  // namespace squadtx
