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

#include "docfuzz/worker.hpp"

#include <gtest/gtest.h>

#include <csignal>

#include "support/test_support.hpp"

namespace docfuzz {
namespace {

TestCase Call(std::string api, Args args = {}, std::size_t index = 0) {
  TestCase tc;
  tc.api_name = std::move(api);
  tc.case_index = index;
  tc.args = std::move(args);
  return tc;
}

WorkerOptions MockOptions() {
  WorkerOptions o;
  o.argv = testing::MockWorkerCommand();
  return o;
}

TEST(WireTest, EncodedRequestMatchesJsonTree) {
  auto sets = testing::MockConstraintSets();
  GenConfig cfg;
  cfg.budget_per_api = 20;
  for (const auto& cs : sets) {
    for (const auto& tc : GenerateStream(cs, cfg)) {
      EXPECT_EQ(EncodeCallRequest(9, tc, 1000), MakeCallRequest(9, tc, 1000).dump());
    }
  }
}

TEST(WireTest, ResponseParsing) {
  auto ok = ParseCallResponse(R"({"id":3,"status":"ok","outputs":[{"kind":"int","value":2}],"duration_ms":1})", 3);
  ASSERT_TRUE(std::holds_alternative<OkOutcome>(ok));
  EXPECT_EQ(std::get<OkOutcome>(ok).outputs.size(), 1u);
  auto ex = ParseCallResponse(
      R"({"id":3,"status":"exception","exception":{"type":"E","message":"m"},"duration_ms":1})", 3);
  EXPECT_EQ(std::get<ExceptionOutcome>(ex).type_name, "E");
  EXPECT_THROW(ParseCallResponse(R"({"id":4,"status":"ok","duration_ms":1})", 3), ProtocolViolation);
  EXPECT_THROW(ParseCallResponse("not json", 3), ProtocolViolation);
  EXPECT_THROW(ParseCallResponse(R"({"id":3,"status":"weird","duration_ms":1})", 3),
               ProtocolViolation);
  EXPECT_THROW(ParseCallResponse(R"({"id":3,"status":"ok","duration_ms":1,"x":1})", 3),
               ProtocolViolation);
}

TEST(SubprocessWorkerTest, HandshakeAndEcho) {
  SubprocessWorker w(MockOptions());
  w.Start();
  EXPECT_EQ(w.handshake_target(), "mock");
  Outcome o = w.Call(Call("__echo", {{"a", EncodedValue::Int(5)}}), 2000);
  ASSERT_TRUE(std::holds_alternative<OkOutcome>(o));
  EXPECT_EQ(std::get<OkOutcome>(o).outputs, (std::vector<EncodedValue>{EncodedValue::Int(5)}));
  EXPECT_EQ(w.spawn_count(), 1u);
}

TEST(SubprocessWorkerTest, ArraysSurviveTheWire) {
  SubprocessWorker w(MockOptions());
  NdArray a(ScalarType::kFloat32, {3, 4, 2});
  for (std::size_t i = 0; i < a.size(); ++i) a.Set(i, 0.25 * static_cast<double>(i));
  Outcome o = w.Call(Call("__echo", {{"a", EncodedValue::Array(a)}}), 2000);
  ASSERT_TRUE(std::holds_alternative<OkOutcome>(o));
  EXPECT_EQ(std::get<OkOutcome>(o).outputs[0].as_array(), a);
}

TEST(SubprocessWorkerTest, TimeoutKillsAndRespawns) {
  SubprocessWorker w(MockOptions());
  EXPECT_TRUE(std::holds_alternative<TimeoutOutcome>(w.Call(Call("__hang"), 200)));
  EXPECT_FALSE(w.running());
  EXPECT_TRUE(std::holds_alternative<OkOutcome>(w.Call(Call("__echo"), 2000)));
  EXPECT_EQ(w.spawn_count(), 2u);
}

TEST(SubprocessWorkerTest, DeathsReportSignalOrExitCode) {
  SubprocessWorker w(MockOptions());
  auto abort = std::get<WorkerDeathOutcome>(w.Call(Call("__abort"), 2000));
  EXPECT_EQ(abort.signal, SIGABRT);
  auto segv = std::get<WorkerDeathOutcome>(w.Call(Call("__segv"), 2000));
  EXPECT_EQ(segv.signal, SIGSEGV);
  auto exited = std::get<WorkerDeathOutcome>(w.Call(Call("__exit", {{"c", EncodedValue::Int(4)}}), 2000));
  EXPECT_EQ(exited.exit_code, 4);
  EXPECT_FALSE(exited.signal.has_value());
  EXPECT_EQ(w.spawn_count(), 3u);
}

TEST(SubprocessWorkerTest, GarbageIsAProtocolViolation) {
  SubprocessWorker w(MockOptions());
  auto death = std::get<WorkerDeathOutcome>(w.Call(Call("__garbage"), 2000));
  EXPECT_NE(death.detail.find("protocol violation"), std::string::npos);
  EXPECT_TRUE(std::holds_alternative<OkOutcome>(w.Call(Call("__echo"), 2000)));
}

TEST(SubprocessWorkerTest, RssLimit) {
  WorkerOptions o = MockOptions();
  o.rss_limit_bytes = 32ULL << 20;
  SubprocessWorker w(o);
  Outcome out = w.Call(Call("__alloc", {{"mb", EncodedValue::Int(96)}}), 5000);
  ASSERT_TRUE(std::holds_alternative<ResourceLimitOutcome>(out));
  EXPECT_GT(std::get<ResourceLimitOutcome>(out).rss_bytes, 32ULL << 20);
}

TEST(SubprocessWorkerTest, ExceptionsAndNan) {
  SubprocessWorker w(MockOptions());
  auto ex = std::get<ExceptionOutcome>(
      w.Call(Call("__raise", {{"t", EncodedValue::Str("ValueError")},
                              {"m", EncodedValue::Str("nope")}}),
             2000));
  EXPECT_EQ(ex.type_name, "ValueError");
  EXPECT_EQ(ex.message, "nope");
  auto ok = std::get<OkOutcome>(w.Call(Call("__nan", {{"i", EncodedValue::Int(1)}}), 2000));
  EXPECT_TRUE(ok.nan_detected);
  EXPECT_EQ(DedupSignature({0, ok}), "nan:1");
}

TEST(SubprocessWorkerTest, SpawnFailures) {
  WorkerOptions missing;
  missing.argv = {"/nonexistent/worker-binary"};
  SubprocessWorker w(missing);
  EXPECT_THROW(w.Start(), WorkerSpawnFailure);

  WorkerOptions silent;
  silent.argv = {"/bin/sh", "-c", "sleep 5"};
  silent.startup_timeout = std::chrono::milliseconds(200);
  SubprocessWorker s(silent);
  EXPECT_THROW(s.Start(), WorkerSpawnFailure);

  WorkerOptions wrong;
  wrong.argv = {"/bin/sh", "-c", "echo '{\"op\":\"ready\",\"protocol\":99}'; sleep 5"};
  SubprocessWorker v(wrong);
  EXPECT_THROW(v.Start(), WorkerSpawnFailure);

  EXPECT_THROW(SubprocessWorker(WorkerOptions{}), WorkerSpawnFailure);
}

TEST(TranscriptTest, RecordThenReplay) {
  testing::TempDir dir;
  auto sink = std::make_shared<Transcript>();
  std::vector<TestCase> cases{Call("__echo", {{"a", EncodedValue::Int(1)}}, 0),
                              Call("__nan", {}, 1), Call("__abort", {}, 2)};
  std::vector<ExecutionResult> live;
  {
    RecordingWorker rec(std::make_unique<SubprocessWorker>(MockOptions()), sink);
    for (const auto& tc : cases) live.push_back(rec.Execute(tc, 2000));
  }
  sink->Save(dir.file("t.jsonl"));
  auto loaded = std::make_shared<const Transcript>(Transcript::Load(dir.file("t.jsonl")));
  EXPECT_EQ(loaded->size(), 3u);
  ReplayWorker replay(loaded);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    ExecutionResult r = replay.Execute(cases[i], 0);
    EXPECT_EQ(DedupSignature(r), DedupSignature(live[i]));
    EXPECT_EQ(r.outcome.index(), live[i].outcome.index());
  }
  TestCase changed = cases[0];
  changed.args[0].second = EncodedValue::Int(2);
  EXPECT_THROW(replay.Execute(changed, 0), Error);
  EXPECT_THROW(replay.Execute(Call("__echo", {}, 99), 0), Error);
}

}  // namespace
}  // namespace docfuzz
