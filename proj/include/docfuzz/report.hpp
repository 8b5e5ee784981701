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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "docfuzz/campaign.hpp"
#include "docfuzz/error.hpp"

namespace docfuzz {

namespace detail {

inline void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

inline std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Durations vary run to run; persisted results carry zero so reruns are
// byte-identical.
inline ExecutionResult WithoutTiming(ExecutionResult r) {
  if (auto* ok = std::get_if<OkOutcome>(&r.outcome)) ok->duration_ms = 0;
  if (auto* ex = std::get_if<ExceptionOutcome>(&r.outcome)) ex->duration_ms = 0;
  return r;
}

inline Json StringArray(const std::vector<std::string>& v) {
  Json a = Json::array();
  for (const auto& s : v) a.push_back(s);
  return a;
}

inline constexpr const char* kReproducerTemplate = R"PY(#!/usr/bin/env python3
# Reproducer for @ID@ (@VERDICT@) in @API@.
# Prints the observed verdict and exits 1 when it matches the recorded one.
# DOCFUZZ_WORKER overrides the worker command for worker-based targets.
import base64
import json
import math
import os
import shlex
import struct
import subprocess
import sys

CASE = json.loads(@CASE@)
EXPECTED = @EXPECTED@
TARGET = @TARGET@
WORKER = @WORKER@
TIMEOUT_MS = @TIMEOUT@
ALLOWLIST = @ALLOWLIST@
INTERNAL_MARKERS = @MARKERS@

_FORMATS = {"uint8": "B", "int32": "i", "float32": "f", "float64": "d", "bool": "?"}


def non_finite(value):
    kind = value.get("kind")
    if kind == "float":
        v = value.get("value")
        return isinstance(v, str) or not math.isfinite(v)
    if kind == "seq":
        return any(non_finite(v) for v in value.get("items", []))
    if kind == "ndarray" and value.get("dtype") in ("float32", "float64"):
        raw = base64.b64decode(value["data"])
        fmt = _FORMATS[value["dtype"]]
        count = len(raw) // struct.calcsize(fmt)
        return any(not math.isfinite(x) for x in struct.unpack("<%d%s" % (count, fmt), raw))
    return False


def classify(status, detail):
    mode = CASE["validity_mode"]
    if status == "crash":
        return "crash_bug"
    if status == "ok":
        return "nan_bug" if detail and mode == "valid_only" else "pass"
    etype, message = detail
    if mode == "valid_only":
        return "exception_bug"
    if etype in ALLOWLIST:
        return "pass"
    if any(m and (m in message or m in etype) for m in INTERNAL_MARKERS):
        return "exception_bug"
    return "pass"


def interpret(reply):
    if reply.get("status") == "ok":
        outputs = reply.get("outputs") or []
        return "ok", bool(reply.get("nan_detected")) or any(non_finite(o) for o in outputs)
    exc = reply.get("exception") or {}
    return "exception", (exc.get("type", ""), exc.get("message", ""))


def via_worker():
    env_cmd = os.environ.get("DOCFUZZ_WORKER")
    cmd = shlex.split(env_cmd) if env_cmd else list(WORKER)
    request = {"id": 1, "op": "call", "api": CASE["api_name"],
               "args": list(CASE["args"].values()), "timeout_ms": TIMEOUT_MS}
    proc = subprocess.Popen(cmd + ["--target", TARGET], stdin=subprocess.PIPE,
                            stdout=subprocess.PIPE, stderr=subprocess.DEVNULL, text=True)
    try:
        out, _ = proc.communicate(json.dumps(request) + "\n", timeout=TIMEOUT_MS / 1000.0)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.communicate()
        return "crash", "timeout"
    lines = [line for line in out.splitlines() if line.strip()]
    if len(lines) < 2:
        return "crash", "worker exited with %s" % proc.returncode
    return interpret(json.loads(lines[1]))


def decode(value):
    import numpy as np
    kind = value["kind"]
    if kind in ("int", "bool", "str"):
        return value["value"]
    if kind == "float":
        return float(value["value"])
    if kind == "null":
        return None
    if kind == "enum":
        return value["value"]
    if kind == "seq":
        return tuple(decode(v) for v in value["items"])
    dtype = {"bool": np.bool_}.get(value["dtype"], value["dtype"])
    raw = base64.b64decode(value["data"])
    return np.frombuffer(raw, dtype=np.dtype(dtype).newbyteorder("<")).reshape(value["shape"]).copy()


def call_module():
    import importlib
    import numpy as np
    fn = importlib.import_module(TARGET.split(":", 1)[1])
    for part in CASE["api_name"].split("."):
        fn = getattr(fn, part)
    args = [decode(v) for v in CASE["args"].values()]
    try:
        result = fn(*args)
    except Exception as e:  # reported, not raised
        return {"status": "exception", "exception": {"type": type(e).__name__, "message": str(e)}}
    results = result if isinstance(result, tuple) else (result,)
    nan = False
    for r in results:
        if isinstance(r, np.ndarray) and r.dtype.kind == "f":
            nan = nan or not bool(np.isfinite(r).all())
        elif isinstance(r, float):
            nan = nan or not math.isfinite(r)
    return {"status": "ok", "nan_detected": nan}


def via_module():
    try:
        proc = subprocess.run([sys.executable, os.path.abspath(__file__), "--child"],
                              capture_output=True, text=True, timeout=TIMEOUT_MS / 1000.0)
    except subprocess.TimeoutExpired:
        return "crash", "timeout"
    lines = [line for line in proc.stdout.splitlines() if line.strip()]
    if proc.returncode != 0 or not lines:
        return "crash", "call exited with %s" % proc.returncode
    return interpret(json.loads(lines[-1]))


def main():
    if "--child" in sys.argv:
        print(json.dumps(call_module()))
        return 0
    status, detail = via_module() if TARGET.startswith("module:") else via_worker()
    verdict = classify(status, detail)
    print("VERDICT: %s (recorded: %s)" % (verdict, EXPECTED))
    return 1 if verdict == EXPECTED else 0


if __name__ == "__main__":
    sys.exit(main())
)PY";

inline void ReplaceAll(std::string& text, std::string_view key, const std::string& value) {
  for (std::size_t pos = text.find(key); pos != std::string::npos;
       pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
}

// JSON text is also a valid Python literal for the values used here.
inline std::string PyLiteral(const Json& j) {
  return j.dump(-1, ' ', true);
}

}  // namespace detail

// Standalone script that replays `bug.first_case` against the target.
inline std::string RenderReproducer(const BugReport& bug, const CampaignConfig& cfg) {
  std::string text = detail::kReproducerTemplate;
  detail::ReplaceAll(text, "@ID@", bug.id);
  detail::ReplaceAll(text, "@VERDICT@", std::string(ToString(bug.verdict)));
  detail::ReplaceAll(text, "@API@", bug.api_name);
  detail::ReplaceAll(text, "@CASE@", detail::PyLiteral(Json(Serialize(bug.first_case))));
  detail::ReplaceAll(text, "@EXPECTED@", detail::PyLiteral(Json(ToString(bug.verdict))));
  detail::ReplaceAll(text, "@TARGET@", detail::PyLiteral(Json(cfg.target)));
  detail::ReplaceAll(text, "@WORKER@", detail::PyLiteral(detail::StringArray(cfg.worker_command)));
  detail::ReplaceAll(text, "@TIMEOUT@", std::to_string(cfg.timeout_ms));
  detail::ReplaceAll(text, "@ALLOWLIST@", detail::PyLiteral(detail::StringArray(cfg.oracle.allowlist)));
  detail::ReplaceAll(text, "@MARKERS@",
                     detail::PyLiteral(detail::StringArray(cfg.oracle.internal_markers)));
  return text;
}

inline Json ToJson(const StrategyFlags& f) {
  return Json{{"type", f.type},
              {"size", f.size},
              {"value_noise", f.value_noise},
              {"value_mask", f.value_mask},
              {"value_division", f.value_division}};
}

inline Json ToJson(const ApiStats& s) {
  Json verdicts = Json::object();
  for (Verdict v : kAllVerdicts) {
    auto it = s.verdicts.find(v);
    verdicts[std::string(ToString(v))] = it == s.verdicts.end() ? 0 : it->second;
  }
  return Json{{"api_name", s.api_name},
              {"cases_executed", s.cases_executed},
              {"verdicts", std::move(verdicts)},
              {"valid_cases", s.valid_cases},
              {"adversarial_cases", s.adversarial_cases},
              {"constraint_count", s.constraint_count},
              {"generation_success_rate", s.generation_success_rate()}};
}

inline Json BugSummaryJson(const BugReport& b) {
  return Json{{"id", b.id},
              {"api_name", b.api_name},
              {"verdict", ToString(b.verdict)},
              {"signature", b.signature},
              {"occurrences", b.occurrences},
              {"first_case_index", b.first_case.case_index},
              {"validity_mode", ToString(b.first_case.validity_mode)},
              {"bug_file", "bugs/" + b.id + ".json"},
              {"reproducer_path", b.reproducer_path}};
}

inline Json BugFileJson(const BugReport& b) {
  Json j = BugSummaryJson(b);
  j["first_case"] = ToJson(b.first_case);
  j["first_result"] = ToJson(detail::WithoutTiming(b.first_result));
  return j;
}

// Timing-free campaign summary; see WriteCampaignReport.
inline Json CampaignJson(const CampaignReport& report, const CampaignConfig& cfg) {
  Json config = Json{{"target", cfg.target},
                     {"budget_per_api", cfg.gen.budget_per_api},
                     {"rng_seed", cfg.gen.rng_seed},
                     {"adversarial_ratio", cfg.gen.adversarial_ratio},
                     {"strategies", ToJson(cfg.gen.flags)},
                     {"timeout_ms", cfg.timeout_ms},
                     {"parallel_workers", cfg.parallel_workers},
                     {"allowlist", detail::StringArray(cfg.oracle.allowlist)}};
  Json apis = Json::array();
  for (const auto& s : report.apis) apis.push_back(ToJson(s));
  Json bugs = Json::array();
  Json by_verdict = Json::object();
  for (Verdict v : kAllVerdicts) {
    if (v != Verdict::kPass) by_verdict[std::string(ToString(v))] = 0;
  }
  for (const auto& b : report.bugs) {
    bugs.push_back(BugSummaryJson(b));
    by_verdict[std::string(ToString(b.verdict))] =
        by_verdict[std::string(ToString(b.verdict))].get<std::size_t>() + 1;
  }
  Json totals = Json{{"apis", report.apis.size()},
                     {"cases_executed", report.cases_executed},
                     {"valid_cases", report.valid_cases},
                     {"generation_success_rate", report.generation_success_rate()},
                     {"bugs", report.bugs.size()},
                     {"bugs_by_verdict", std::move(by_verdict)},
                     {"cancelled", report.cancelled}};
  return Json{{"config", std::move(config)},
              {"totals", std::move(totals)},
              {"apis", std::move(apis)},
              {"bugs", std::move(bugs)}};
}

// Writes campaign.json, bugs/<id>.json, repro/<id>.py and timing.json under
// `out_dir`. Everything except timing.json is deterministic for a fixed
// configuration.
inline void WriteCampaignReport(const CampaignReport& report, const CampaignConfig& cfg,
                                const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  fs::remove_all(out_dir / "bugs");
  fs::remove_all(out_dir / "repro");
  detail::WriteTextFile(out_dir / "campaign.json", CampaignJson(report, cfg).dump(2) + "\n");
  for (const auto& b : report.bugs) {
    detail::WriteTextFile(out_dir / "bugs" / (b.id + ".json"), BugFileJson(b).dump(2) + "\n");
    fs::path script = out_dir / b.reproducer_path;
    detail::WriteTextFile(script, RenderReproducer(b, cfg));
    fs::permissions(script, fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec,
                    fs::perm_options::add);
  }
  Json per_api = Json::object();
  for (const auto& s : report.apis) per_api[s.api_name] = s.wall_ms;
  detail::WriteTextFile(out_dir / "timing.json",
                        Json{{"wall_ms", report.wall_ms}, {"per_api_ms", per_api}}.dump(2) + "\n");
}

// ---- Reading a written report -------------------------------------------------

struct SweepPoint {
  std::size_t cases_per_api = 0;
  std::size_t cumulative_bugs = 0;
  bool operator==(const SweepPoint&) const = default;
};

// Distinct bugs found within the first b cases of every API, for b in
// step, 2*step, ... up to the budget (the budget itself is always included).
inline std::vector<SweepPoint> BudgetSweep(const std::vector<std::size_t>& first_case_indices,
                                           std::size_t budget, std::size_t step = 50) {
  if (step == 0) throw ConfigError("sweep step must be >= 1");
  std::vector<std::size_t> sorted = first_case_indices;
  std::sort(sorted.begin(), sorted.end());
  std::vector<SweepPoint> out;
  for (std::size_t b = step;; b += step) {
    std::size_t capped = std::min(b, budget);
    auto found = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), capped) - sorted.begin());
    out.push_back({capped, found});
    if (capped >= budget) break;
  }
  return out;
}

inline std::string SweepCsv(const std::vector<SweepPoint>& points) {
  std::string csv = "cases_per_api,cumulative_bugs\n";
  for (const auto& p : points) {
    csv += std::to_string(p.cases_per_api) + "," + std::to_string(p.cumulative_bugs) + "\n";
  }
  return csv;
}

inline Json LoadCampaignJson(const std::filesystem::path& path) {
  std::string text = detail::ReadTextFile(path);
  try {
    Json j = Json::parse(text);
    if (!j.is_object() || !j.contains("apis") || !j.contains("bugs") || !j.contains("config")) {
      throw SchemaError("", "not a campaign report");
    }
    return j;
  } catch (const Json::exception& e) {
    throw SchemaError("", std::string("malformed campaign report: ") + e.what());
  }
}

inline std::vector<SweepPoint> SweepFromCampaign(const Json& campaign, std::size_t step = 50) {
  try {
    std::vector<std::size_t> firsts;
    for (const auto& b : campaign.at("bugs")) firsts.push_back(b.at("first_case_index"));
    std::size_t budget = campaign.at("config").at("budget_per_api");
    return BudgetSweep(firsts, budget, step);
  } catch (const Json::exception& e) {
    throw SchemaError("", std::string("malformed campaign report: ") + e.what());
  }
}

// Fixed-width text table of per-API verdict counts followed by the bug list.
inline std::string RenderTable(const Json& campaign) {
  try {
    std::size_t width = 8;
    for (const auto& a : campaign.at("apis")) {
      width = std::max(width, a.at("api_name").get<std::string>().size());
    }
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-*s %7s %7s %7s %7s %9s %7s\n", static_cast<int>(width),
                  "api", "cases", "pass", "crash", "nan", "exception", "srg%");
    out += buf;
    for (const auto& a : campaign.at("apis")) {
      const Json& v = a.at("verdicts");
      std::snprintf(buf, sizeof buf, "%-*s %7zu %7zu %7zu %7zu %9zu %7.2f\n",
                    static_cast<int>(width), a.at("api_name").get<std::string>().c_str(),
                    a.at("cases_executed").get<std::size_t>(), v.at("pass").get<std::size_t>(),
                    v.at("crash_bug").get<std::size_t>(), v.at("nan_bug").get<std::size_t>(),
                    v.at("exception_bug").get<std::size_t>(),
                    100.0 * a.at("generation_success_rate").get<double>());
      out += buf;
    }
    const Json& t = campaign.at("totals");
    std::snprintf(buf, sizeof buf, "\ntotal cases: %zu  valid cases: %zu  srg: %.2f%%  bugs: %zu\n",
                  t.at("cases_executed").get<std::size_t>(), t.at("valid_cases").get<std::size_t>(),
                  100.0 * t.at("generation_success_rate").get<double>(),
                  t.at("bugs").get<std::size_t>());
    out += buf;
    if (!campaign.at("bugs").empty()) {
      out += "\nbugs:\n";
      for (const auto& b : campaign.at("bugs")) {
        std::snprintf(buf, sizeof buf, "  %-28s %-14s x%-5zu first@%-5zu %s\n",
                      b.at("id").get<std::string>().c_str(),
                      b.at("verdict").get<std::string>().c_str(),
                      b.at("occurrences").get<std::size_t>(),
                      b.at("first_case_index").get<std::size_t>(),
                      b.at("signature").get<std::string>().c_str());
        out += buf;
      }
    }
    return out;
  } catch (const Json::exception& e) {
    throw SchemaError("", std::string("malformed campaign report: ") + e.what());
  }
}

}  // namespace docfuzz
