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

#include <atomic>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "docfuzz/detail/json_reader.hpp"

namespace docfuzz::log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kOff = 4 };

inline std::string_view ToString(Level l) {
  switch (l) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
    case Level::kOff: return "off";
  }
  return "?";
}

inline std::optional<Level> ParseLevel(std::string_view s) {
  for (Level l : {Level::kDebug, Level::kInfo, Level::kWarn, Level::kError, Level::kOff}) {
    if (ToString(l) == s) return l;
  }
  return std::nullopt;
}

namespace detail {
inline std::atomic<Level>& Threshold() {
  static std::atomic<Level> level{Level::kWarn};
  return level;
}
inline std::mutex& SinkMutex() {
  static std::mutex m;
  return m;
}
inline std::ostream*& Sink() {
  static std::ostream* sink = &std::cerr;
  return sink;
}
}  // namespace detail

inline void SetLevel(Level l) { detail::Threshold().store(l); }
inline Level GetLevel() { return detail::Threshold().load(); }

// Redirects output (tests); pass nullptr to restore stderr.
inline void SetSink(std::ostream* sink) {
  std::lock_guard lock(detail::SinkMutex());
  detail::Sink() = sink ? sink : &std::cerr;
}

// Emits one JSON object per line: {"level", "msg", ...fields}.
inline void Write(Level level, std::string_view msg, Json fields = Json::object()) {
  if (level < GetLevel()) return;
  Json line = Json::object();
  line["level"] = ToString(level);
  line["msg"] = msg;
  for (auto it = fields.begin(); it != fields.end(); ++it) line[it.key()] = it.value();
  std::string text = line.dump(-1, ' ', false, Json::error_handler_t::replace);
  std::lock_guard lock(detail::SinkMutex());
  *detail::Sink() << text << '\n';
  detail::Sink()->flush();
}

inline void Debug(std::string_view msg, Json fields = Json::object()) {
  Write(Level::kDebug, msg, std::move(fields));
}
inline void Info(std::string_view msg, Json fields = Json::object()) {
  Write(Level::kInfo, msg, std::move(fields));
}
inline void Warn(std::string_view msg, Json fields = Json::object()) {
  Write(Level::kWarn, msg, std::move(fields));
}
inline void Error(std::string_view msg, Json fields = Json::object()) {
  Write(Level::kError, msg, std::move(fields));
}

}  // namespace docfuzz::log
