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

#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "docfuzz/detail/json_reader.hpp"
#include "docfuzz/generation.hpp"
#include "docfuzz/value.hpp"

namespace docfuzz {

struct OkOutcome {
  std::vector<EncodedValue> outputs;
  bool nan_detected = false;
  std::int64_t duration_ms = 0;
  bool operator==(const OkOutcome&) const = default;
};

struct ExceptionOutcome {
  std::string type_name;
  std::string message;
  std::int64_t duration_ms = 0;
  bool operator==(const ExceptionOutcome&) const = default;
};

struct TimeoutOutcome {
  bool operator==(const TimeoutOutcome&) const = default;
};

struct WorkerDeathOutcome {
  std::optional<int> exit_code;
  std::optional<int> signal;
  std::string detail;  // e.g. "protocol violation: ..."
  bool operator==(const WorkerDeathOutcome&) const = default;
};

// The worker exceeded the resident-memory limit after answering.
struct ResourceLimitOutcome {
  std::uint64_t rss_bytes = 0;
  bool operator==(const ResourceLimitOutcome&) const = default;
};

using Outcome = std::variant<OkOutcome, ExceptionOutcome, TimeoutOutcome, WorkerDeathOutcome,
                             ResourceLimitOutcome>;

struct ExecutionResult {
  std::size_t case_index = 0;
  Outcome outcome;
  bool operator==(const ExecutionResult&) const = default;
};

enum class Verdict { kPass, kCrashBug, kNanBug, kExceptionBug };

inline constexpr Verdict kAllVerdicts[] = {Verdict::kPass, Verdict::kCrashBug,
                                           Verdict::kNanBug, Verdict::kExceptionBug};

inline std::string_view ToString(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kCrashBug: return "crash_bug";
    case Verdict::kNanBug: return "nan_bug";
    case Verdict::kExceptionBug: return "exception_bug";
  }
  return "?";
}

inline std::optional<Verdict> ParseVerdict(std::string_view s) {
  for (Verdict v : kAllVerdicts) {
    if (ToString(v) == s) return v;
  }
  return std::nullopt;
}

struct OracleConfig {
  // Exception types accepted as graceful rejection of adversarial input.
  std::vector<std::string> allowlist{"TypeError", "ValueError"};
  // Message fragments that mark an internal fault rather than a rejection.
  std::vector<std::string> internal_markers{"INTERNAL_ASSERT", "Assertion failed",
                                            "assertion failed", "Segmentation fault",
                                            "core dumped", "SIGSEGV", "SIGABRT"};
  bool operator==(const OracleConfig&) const = default;
};

inline bool OutputsNonFinite(const OkOutcome& ok) {
  for (const auto& o : ok.outputs) {
    if (ContainsNonFinite(o)) return true;
  }
  return false;
}

inline Verdict Classify(const ExecutionResult& res, ValidityMode mode, const OracleConfig& cfg) {
  return std::visit(
      [&](const auto& o) -> Verdict {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, OkOutcome>) {
          bool nan = o.nan_detected || OutputsNonFinite(o);
          return nan && mode == ValidityMode::kValidOnly ? Verdict::kNanBug : Verdict::kPass;
        } else if constexpr (std::is_same_v<T, ExceptionOutcome>) {
          if (mode == ValidityMode::kValidOnly) return Verdict::kExceptionBug;
          for (const auto& t : cfg.allowlist) {
            if (t == o.type_name) return Verdict::kPass;
          }
          for (const auto& m : cfg.internal_markers) {
            if (!m.empty() && (o.message.find(m) != std::string::npos ||
                               o.type_name.find(m) != std::string::npos)) {
              return Verdict::kExceptionBug;
            }
          }
          return Verdict::kPass;
        } else {
          return Verdict::kCrashBug;
        }
      },
      res.outcome);
}

inline Verdict Classify(const ExecutionResult& res, const TestCase& tc, const OracleConfig& cfg) {
  return Classify(res, tc.validity_mode, cfg);
}

// Replaces "0x<hex>" with "0x?" and every other digit run with "#".
inline std::string MaskVolatile(std::string_view text) {
  std::string out;
  std::size_t i = 0;
  auto is_hex = [](char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; };
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  while (i < text.size()) {
    if (text[i] == '0' && i + 2 < text.size() && (text[i + 1] == 'x' || text[i + 1] == 'X') &&
        is_hex(text[i + 2])) {
      out += "0x?";
      i += 2;
      while (i < text.size() && is_hex(text[i])) ++i;
    } else if (is_digit(text[i])) {
      out += '#';
      while (i < text.size() && is_digit(text[i])) ++i;
    } else {
      out += text[i++];
    }
  }
  return out;
}

inline std::string DedupSignature(const ExecutionResult& res) {
  return std::visit(
      [](const auto& o) -> std::string {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, OkOutcome>) {
          std::string idx;
          for (std::size_t i = 0; i < o.outputs.size(); ++i) {
            if (ContainsNonFinite(o.outputs[i])) {
              if (!idx.empty()) idx += ',';
              idx += std::to_string(i);
            }
          }
          return "nan:" + (idx.empty() ? std::string("?") : idx);
        } else if constexpr (std::is_same_v<T, ExceptionOutcome>) {
          std::string_view msg = o.message;
          std::size_t nl = msg.find('\n');
          if (nl != std::string_view::npos) msg = msg.substr(0, nl);
          return o.type_name + ": " + MaskVolatile(msg);
        } else if constexpr (std::is_same_v<T, TimeoutOutcome>) {
          return "timeout";
        } else if constexpr (std::is_same_v<T, ResourceLimitOutcome>) {
          return "rss-limit";
        } else {
          return "exit:" + (o.exit_code ? std::to_string(*o.exit_code) : std::string("none")) +
                 "|signal:" + (o.signal ? std::to_string(*o.signal) : std::string("none"));
        }
      },
      res.outcome);
}

// ---- JSON -------------------------------------------------------------------

inline Json ToJson(const ExecutionResult& r) {
  Json j = Json::object();
  j["case_index"] = r.case_index;
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, OkOutcome>) {
          j["outcome"] = "ok";
          Json outs = Json::array();
          for (const auto& v : o.outputs) outs.push_back(ToJson(v));
          j["outputs"] = std::move(outs);
          j["nan_detected"] = o.nan_detected;
          j["duration_ms"] = o.duration_ms;
        } else if constexpr (std::is_same_v<T, ExceptionOutcome>) {
          j["outcome"] = "exception";
          j["type"] = o.type_name;
          j["message"] = o.message;
          j["duration_ms"] = o.duration_ms;
        } else if constexpr (std::is_same_v<T, TimeoutOutcome>) {
          j["outcome"] = "timeout";
        } else if constexpr (std::is_same_v<T, WorkerDeathOutcome>) {
          j["outcome"] = "worker_death";
          j["exit_code"] = o.exit_code ? Json(*o.exit_code) : Json(nullptr);
          j["signal"] = o.signal ? Json(*o.signal) : Json(nullptr);
          j["detail"] = o.detail;
        } else {
          j["outcome"] = "resource_limit";
          j["rss_bytes"] = o.rss_bytes;
        }
      },
      r.outcome);
  return j;
}

inline ExecutionResult ExecutionResultFromJson(const Json& j, const std::string& pointer) {
  detail::ObjectReader r(j, pointer);
  ExecutionResult res;
  res.case_index = r.UInt("case_index");
  std::string kind = r.String("outcome");
  auto opt_int = [&](std::string_view key) -> std::optional<int> {
    const Json* v = r.Optional(key);
    if (!v) return std::nullopt;
    return static_cast<int>(detail::ObjectReader::AsInt(*v, r.Path(key)));
  };
  if (kind == "ok") {
    OkOutcome ok;
    const Json& outs = detail::RequireArray(r.Required("outputs"), r.Path("outputs"));
    for (std::size_t i = 0; i < outs.size(); ++i) {
      ok.outputs.push_back(ValueFromJson(outs[i], detail::ChildPointer(r.Path("outputs"), i)));
    }
    ok.nan_detected = r.Bool("nan_detected");
    ok.duration_ms = r.Int("duration_ms");
    res.outcome = std::move(ok);
  } else if (kind == "exception") {
    ExceptionOutcome ex;
    ex.type_name = r.String("type");
    ex.message = r.String("message");
    ex.duration_ms = r.Int("duration_ms");
    res.outcome = std::move(ex);
  } else if (kind == "timeout") {
    res.outcome = TimeoutOutcome{};
  } else if (kind == "worker_death") {
    WorkerDeathOutcome d;
    d.exit_code = opt_int("exit_code");
    d.signal = opt_int("signal");
    d.detail = r.String("detail");
    res.outcome = std::move(d);
  } else if (kind == "resource_limit") {
    res.outcome = ResourceLimitOutcome{r.UInt("rss_bytes")};
  } else {
    throw SchemaError(r.Path("outcome"), "unknown outcome '" + kind + "'");
  }
  r.RejectUnknown();
  return res;
}

}  // namespace docfuzz
