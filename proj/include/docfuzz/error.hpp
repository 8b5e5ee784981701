// Copyright 2026 The docfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace docfuzz {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A signature line that cannot be split into name / inputs / outputs.
class MalformedSignature : public Error {
 public:
  using Error::Error;
};

// A JSON document that does not match the expected shape. `pointer` is the
// JSON pointer of the offending node ("" for the document root).
class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& what)
      : Error((pointer.empty() ? std::string("/") : pointer) + ": " + what),
        pointer_(std::move(pointer)) {}

  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

// Dependency edges that loop back on themselves.
class CyclicDependency : public Error {
 public:
  explicit CyclicDependency(std::vector<std::string> cycle)
      : Error(Describe(cycle)), cycle_(std::move(cycle)) {}

  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  static std::string Describe(const std::vector<std::string>& cycle) {
    std::string out = "cyclic dependency: ";
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      if (i) out += " -> ";
      out += cycle[i];
    }
    return out;
  }

  std::vector<std::string> cycle_;
};

// Structural problem in an API description that is not a cycle (unknown
// dependency source, duplicated parameter, ...).
class InvalidApiInfo : public Error {
 public:
  using Error::Error;
};

// The external enrichment backend could not be reached or timed out.
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

// The worker process could not be started or did not complete the handshake.
class WorkerSpawnFailure : public Error {
 public:
  using Error::Error;
};

// The worker replied with something that is not a protocol-v1 response.
class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

// A configuration value outside its documented domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace docfuzz
