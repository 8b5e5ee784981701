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

#include "docfuzz/campaign.hpp"

#include <gtest/gtest.h>

#include <csignal>

#include "support/test_support.hpp"

namespace docfuzz {
namespace {

std::vector<ApiConstraintSet> Pick(const std::vector<std::string>& names) {
  static const auto all = testing::MockConstraintSets();
  std::vector<ApiConstraintSet> out;
  for (const auto& n : names) out.push_back(testing::FindSet(all, n));
  return out;
}

ApiConstraintSet HookSet(const std::string& hook) {
  return ExtractConstraints(StandardizedApiInfo{hook, {}});
}

// Scripted in-process worker.
class FakeWorker : public Worker {
 public:
  explicit FakeWorker(std::function<Outcome(const TestCase&)> fn) : fn_(std::move(fn)) {}
  ExecutionResult Execute(const TestCase& tc, std::uint64_t) override {
    ++calls;
    return {tc.case_index, fn_(tc)};
  }
  std::size_t calls = 0;

 private:
  std::function<Outcome(const TestCase&)> fn_;
};

TEST(CampaignTest, CleanApisProduceNoBugs) {
  auto report = RunCampaign(Pick({"circle", "absdiff"}), testing::MockCampaign(80, 1));
  EXPECT_TRUE(report.bugs.empty());
  EXPECT_EQ(report.cases_executed, 160u);
  for (const auto& s : report.apis) {
    EXPECT_EQ(s.cases_executed, 80u);
    EXPECT_EQ(s.valid_cases + s.adversarial_cases, 80u);
    EXPECT_DOUBLE_EQ(s.generation_success_rate(), 1.0);
  }
}

TEST(CampaignTest, CrashingApiFirstDoesNotStarveLaterApis) {
  std::vector<ApiConstraintSet> sets{HookSet("__abort")};
  for (auto& s : Pick({"circle", "line"})) sets.push_back(s);
  auto report = RunCampaign(sets, testing::MockCampaign(40, 3));
  ASSERT_EQ(report.apis.size(), 3u);
  for (const auto& s : report.apis) EXPECT_EQ(s.cases_executed, 40u) << s.api_name;
  ASSERT_EQ(report.bugs.size(), 1u);
  EXPECT_EQ(report.bugs[0].verdict, Verdict::kCrashBug);
  EXPECT_EQ(report.bugs[0].occurrences, 40u);
  EXPECT_EQ(report.bugs[0].signature, "exit:none|signal:" + std::to_string(SIGABRT));
}

TEST(CampaignTest, DedupCountsOccurrences) {
  CampaignConfig cfg;
  cfg.gen.budget_per_api = 30;
  auto sets = Pick({"circle"});
  auto report = RunCampaign(sets, cfg, [] {
    return std::make_unique<FakeWorker>([](const TestCase& tc) -> Outcome {
      if (tc.case_index % 2) return ExceptionOutcome{"error", "bad " + std::to_string(tc.case_index), 0};
      return OkOutcome{};
    });
  });
  // Adversarial cases accept this exception type; valid ones report it.
  ASSERT_EQ(report.bugs.size(), 1u);
  EXPECT_EQ(report.bugs[0].signature, "error: bad #");
  EXPECT_EQ(report.bugs[0].first_case.validity_mode, ValidityMode::kValidOnly);
  EXPECT_EQ(report.bugs[0].id, "circle-1");
  EXPECT_LE(report.bugs[0].occurrences, 15u);
}

TEST(CampaignTest, CancellationStopsEarly) {
  CampaignConfig cfg;
  cfg.gen.budget_per_api = 1000;
  std::atomic<bool> cancel{false};
  auto sets = Pick({"circle", "line"});
  auto report = RunCampaign(
      sets, cfg,
      [&] {
        return std::make_unique<FakeWorker>([&](const TestCase& tc) -> Outcome {
          if (tc.case_index == 10) cancel.store(true);
          return OkOutcome{};
        });
      },
      &cancel);
  EXPECT_TRUE(report.cancelled);
  EXPECT_EQ(report.cases_executed, 11u);
}

TEST(CampaignTest, ParallelLanesMatchSerialResults) {
  auto sets = Pick({"resizeArea", "circle", "gainStretch", "line"});
  CampaignConfig serial = testing::MockCampaign(120, 5);
  CampaignConfig parallel = serial;
  parallel.parallel_workers = 3;
  auto a = RunCampaign(sets, serial);
  auto b = RunCampaign(sets, parallel);
  EXPECT_EQ(testing::BugApis(a), testing::BugApis(b));
  ASSERT_EQ(a.bugs.size(), b.bugs.size());
  for (std::size_t i = 0; i < a.bugs.size(); ++i) {
    EXPECT_EQ(a.bugs[i].signature, b.bugs[i].signature);
    EXPECT_EQ(a.bugs[i].first_case, b.bugs[i].first_case);
  }
}

TEST(CampaignTest, RecordedCampaignReplaysWithoutWorker) {
  testing::TempDir dir;
  auto sets = Pick({"gainStretch", "addWeighted"});
  CampaignConfig rec = testing::MockCampaign(100, 2);
  rec.record_path = dir.file("t.jsonl");
  auto live = RunCampaign(sets, rec);

  CampaignConfig replay;
  replay.gen = rec.gen;
  replay.replay_path = rec.record_path;
  auto again = RunCampaign(sets, replay);
  ASSERT_EQ(live.bugs.size(), again.bugs.size());
  for (std::size_t i = 0; i < live.bugs.size(); ++i) {
    EXPECT_EQ(live.bugs[i].signature, again.bugs[i].signature);
    EXPECT_EQ(live.bugs[i].occurrences, again.bugs[i].occurrences);
  }
  // A different seed produces cases the transcript never saw.
  replay.gen.rng_seed = 99;
  EXPECT_THROW(RunCampaign(sets, replay), Error);
}

TEST(CampaignTest, DumpCasesWritesOneLinePerCase) {
  testing::TempDir dir;
  CampaignConfig cfg = testing::MockCampaign(25, 0);
  cfg.dump_cases_dir = dir.file("cases");
  RunCampaign(Pick({"circle"}), cfg);
  std::ifstream in(dir.file("cases/circle.jsonl"));
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) {
    EXPECT_NO_THROW(TestCaseFromJson(Json::parse(l), ""));
    ++lines;
  }
  EXPECT_EQ(lines, 25u);
}

TEST(CampaignConfigTest, Check) {
  CampaignConfig cfg;
  EXPECT_THROW(cfg.Check(), ConfigError);  // no worker
  cfg.worker_command = {"w"};
  EXPECT_NO_THROW(cfg.Check());
  cfg.target = "module:";
  EXPECT_THROW(cfg.Check(), ConfigError);
  cfg.target = "module:cv2";
  EXPECT_EQ(cfg.WorkerArgv(), (std::vector<std::string>{"w", "--target", "module:cv2"}));
  cfg.parallel_workers = 0;
  EXPECT_THROW(cfg.Check(), ConfigError);
}

}  // namespace
}  // namespace docfuzz
