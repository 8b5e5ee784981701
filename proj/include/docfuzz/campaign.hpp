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
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "docfuzz/constraints.hpp"
#include "docfuzz/error.hpp"
#include "docfuzz/generation.hpp"
#include "docfuzz/log.hpp"
#include "docfuzz/oracle.hpp"
#include "docfuzz/worker.hpp"

namespace docfuzz {

struct CampaignConfig {
  GenConfig gen;
  std::string target = "mock";               // "mock" or "module:<name>"
  std::vector<std::string> worker_command;  // argv; "--target <target>" is appended
  std::uint64_t timeout_ms = 10000;
  std::size_t parallel_workers = 1;
  OracleConfig oracle;
  std::uint64_t rss_limit_bytes = 2ULL << 30;
  std::optional<std::string> replay_path;
  std::optional<std::string> record_path;
  std::optional<std::string> dump_cases_dir;
  bool inherit_worker_stderr = false;

  void Check() const {
    gen.Check();
    if (timeout_ms < 1) throw ConfigError("timeout_ms must be >= 1");
    if (parallel_workers < 1) throw ConfigError("parallel_workers must be >= 1");
    if (target != "mock" && (target.rfind("module:", 0) != 0 || target.size() <= 7)) {
      throw ConfigError("target must be 'mock' or 'module:<name>'");
    }
    if (!replay_path && worker_command.empty()) {
      throw ConfigError("no worker command configured");
    }
  }

  std::vector<std::string> WorkerArgv() const {
    std::vector<std::string> argv = worker_command;
    argv.push_back("--target");
    argv.push_back(target);
    return argv;
  }
};

struct ApiStats {
  std::string api_name;
  std::size_t cases_executed = 0;
  std::map<Verdict, std::size_t> verdicts;
  std::size_t valid_cases = 0;
  std::size_t valid_accepted = 0;  // ValidOnly cases not judged crash/exception
  std::size_t adversarial_cases = 0;
  std::size_t constraint_count = 0;
  std::int64_t wall_ms = 0;

  double generation_success_rate() const {
    return valid_cases ? static_cast<double>(valid_accepted) / static_cast<double>(valid_cases)
                       : 1.0;
  }
};

struct BugReport {
  std::string id;  // "<api>-<n>"
  std::string api_name;
  Verdict verdict = Verdict::kPass;
  std::string signature;
  TestCase first_case;
  ExecutionResult first_result;
  std::size_t occurrences = 0;
  std::string reproducer_path;  // relative to the report directory
};

struct CampaignReport {
  std::vector<ApiStats> apis;
  std::vector<BugReport> bugs;
  std::size_t cases_executed = 0;
  std::size_t valid_cases = 0;
  std::size_t valid_accepted = 0;
  std::int64_t wall_ms = 0;
  bool cancelled = false;

  double generation_success_rate() const {
    return valid_cases ? static_cast<double>(valid_accepted) / static_cast<double>(valid_cases)
                       : 1.0;
  }
};

using WorkerFactory = std::function<std::unique_ptr<Worker>()>;

// Subprocess worker, optionally recording into `transcript`; or a replay
// worker when the config names a transcript to replay.
inline WorkerFactory DefaultWorkerFactory(const CampaignConfig& cfg,
                                          std::shared_ptr<Transcript> record_into = nullptr) {
  if (cfg.replay_path) {
    auto transcript = std::make_shared<const Transcript>(Transcript::Load(*cfg.replay_path));
    return [transcript] { return std::make_unique<ReplayWorker>(transcript); };
  }
  WorkerOptions opts;
  opts.argv = cfg.WorkerArgv();
  opts.rss_limit_bytes = cfg.rss_limit_bytes;
  opts.inherit_stderr = cfg.inherit_worker_stderr;
  return [opts, record_into]() -> std::unique_ptr<Worker> {
    auto w = std::make_unique<SubprocessWorker>(opts);
    if (record_into) return std::make_unique<RecordingWorker>(std::move(w), record_into);
    return w;
  };
}

namespace detail {

struct ApiRun {
  ApiStats stats;
  std::vector<BugReport> bugs;
};

inline ApiRun FuzzOneApi(const ApiConstraintSet& cs, const CampaignConfig& cfg, Worker& worker,
                         const std::atomic<bool>* cancel) {
  using Clock = std::chrono::steady_clock;
  auto t0 = Clock::now();
  ApiRun run;
  run.stats.api_name = cs.api_name;
  run.stats.constraint_count = cs.constraint_count;
  for (Verdict v : kAllVerdicts) run.stats.verdicts[v] = 0;

  std::ofstream dump;
  if (cfg.dump_cases_dir) {
    std::filesystem::create_directories(*cfg.dump_cases_dir);
    auto path = std::filesystem::path(*cfg.dump_cases_dir) / (cs.api_name + ".jsonl");
    dump.open(path, std::ios::binary | std::ios::trunc);
    if (!dump) throw Error("cannot write " + path.string());
  }

  std::map<std::pair<Verdict, std::string>, std::size_t> index;
  CaseStream stream(cs, cfg.gen);
  while (auto tc = stream.Next()) {
    if (cancel && cancel->load()) break;
    if (dump) dump << Serialize(*tc) << '\n';
    ExecutionResult res = worker.Execute(*tc, cfg.timeout_ms);
    Verdict verdict = Classify(res, *tc, cfg.oracle);
    ++run.stats.cases_executed;
    ++run.stats.verdicts[verdict];
    if (tc->validity_mode == ValidityMode::kValidOnly) {
      ++run.stats.valid_cases;
      if (verdict != Verdict::kCrashBug && verdict != Verdict::kExceptionBug) {
        ++run.stats.valid_accepted;
      }
    } else {
      ++run.stats.adversarial_cases;
    }
    if (verdict == Verdict::kPass) continue;
    std::string sig = DedupSignature(res);
    auto [it, inserted] = index.try_emplace({verdict, sig}, run.bugs.size());
    if (inserted) {
      BugReport bug;
      bug.api_name = cs.api_name;
      bug.id = cs.api_name + "-" + std::to_string(run.bugs.size() + 1);
      bug.verdict = verdict;
      bug.signature = sig;
      bug.first_case = *tc;
      bug.first_result = res;
      bug.reproducer_path = "repro/" + bug.id + ".py";
      run.bugs.push_back(std::move(bug));
      log::Info("new bug", {{"api", cs.api_name},
                            {"verdict", ToString(verdict)},
                            {"signature", sig},
                            {"case_index", tc->case_index}});
    }
    ++run.bugs[it->second].occurrences;
  }
  run.stats.wall_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  return run;
}

}  // namespace detail

// Fuzzes every API through `parallel_workers` lanes. Each lane owns one
// worker and handles the APIs whose position modulo the lane count equals
// its number, one at a time; results are merged back in input order.
inline CampaignReport RunCampaign(const std::vector<ApiConstraintSet>& sets,
                                  const CampaignConfig& cfg, const WorkerFactory& factory,
                                  std::atomic<bool>* cancel = nullptr) {
  using Clock = std::chrono::steady_clock;
  cfg.gen.Check();
  auto t0 = Clock::now();
  std::atomic<bool> local_cancel{false};
  std::atomic<bool>* stop = cancel ? cancel : &local_cancel;

  std::vector<std::optional<detail::ApiRun>> slots(sets.size());
  std::size_t lanes = std::max<std::size_t>(1, std::min(cfg.parallel_workers, sets.size()));
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto lane_body = [&](std::size_t lane) {
    try {
      std::unique_ptr<Worker> worker = factory();
      for (std::size_t i = lane; i < sets.size(); i += lanes) {
        if (stop->load()) break;
        log::Info("fuzzing api", {{"api", sets[i].api_name}, {"lane", lane}});
        slots[i] = detail::FuzzOneApi(sets[i], cfg, *worker, stop);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
      stop->store(true);
    }
  };

  if (lanes == 1) {
    lane_body(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t l = 0; l < lanes; ++l) threads.emplace_back(lane_body, l);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  CampaignReport report;
  report.cancelled = cancel && cancel->load();
  for (auto& slot : slots) {
    if (!slot) continue;
    report.cases_executed += slot->stats.cases_executed;
    report.valid_cases += slot->stats.valid_cases;
    report.valid_accepted += slot->stats.valid_accepted;
    report.apis.push_back(std::move(slot->stats));
    for (auto& b : slot->bugs) report.bugs.push_back(std::move(b));
  }
  report.wall_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  return report;
}

// Records into cfg.record_path when set, then saves the transcript.
inline CampaignReport RunCampaign(const std::vector<ApiConstraintSet>& sets,
                                  const CampaignConfig& cfg,
                                  std::atomic<bool>* cancel = nullptr) {
  cfg.Check();
  std::shared_ptr<Transcript> transcript;
  if (cfg.record_path && !cfg.replay_path) transcript = std::make_shared<Transcript>();
  CampaignReport report = RunCampaign(sets, cfg, DefaultWorkerFactory(cfg, transcript), cancel);
  if (transcript) transcript->Save(*cfg.record_path);
  return report;
}

}  // namespace docfuzz
