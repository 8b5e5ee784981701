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

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/prctl.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "docfuzz/error.hpp"
#include "docfuzz/generation.hpp"
#include "docfuzz/log.hpp"
#include "docfuzz/oracle.hpp"

namespace docfuzz {

inline constexpr int kProtocolVersion = 1;

// Executes test cases somewhere; implementations own their process state.
class Worker {
 public:
  virtual ~Worker() = default;
  virtual ExecutionResult Execute(const TestCase& tc, std::uint64_t timeout_ms) = 0;
};

// ---- Wire messages ------------------------------------------------------------

inline Json MakeCallRequest(std::uint64_t id, const TestCase& tc, std::uint64_t timeout_ms) {
  Json args = Json::array();
  for (const auto& [name, value] : tc.args) args.push_back(ToJson(value));
  Json j = Json::object();
  j["id"] = id;
  j["op"] = "call";
  j["api"] = tc.api_name;
  j["args"] = std::move(args);
  j["timeout_ms"] = timeout_ms;
  return j;
}

// Same text as MakeCallRequest(...).dump(), built without a JSON tree.
inline std::string EncodeCallRequest(std::uint64_t id, const TestCase& tc,
                                     std::uint64_t timeout_ms) {
  std::string out = "{\"id\":" + std::to_string(id) + ",\"op\":\"call\",\"api\":";
  out += Json(tc.api_name).dump();
  out += ",\"args\":[";
  bool first = true;
  for (const auto& [name, value] : tc.args) {
    if (!first) out += ',';
    first = false;
    AppendWire(out, value);
  }
  out += "],\"timeout_ms\":" + std::to_string(timeout_ms) + "}";
  return out;
}

// Validates a response line against request `id`; throws ProtocolViolation.
inline Outcome ParseCallResponse(std::string_view line, std::uint64_t id) {
  Json j;
  try {
    j = detail::ParseWireJson(line);
  } catch (const Json::parse_error& e) {
    throw ProtocolViolation(std::string("malformed JSON: ") + e.what());
  }
  try {
    detail::ObjectReader r(j, "");
    if (r.UInt("id") != id) throw ProtocolViolation("response id does not match request");
    std::string status = r.String("status");
    std::int64_t duration = r.Int("duration_ms");
    if (status == "ok") {
      OkOutcome ok;
      ok.duration_ms = duration;
      if (const Json* outs = r.Optional("outputs")) {
        detail::RequireArray(*outs, "/outputs");
        for (std::size_t i = 0; i < outs->size(); ++i) {
          ok.outputs.push_back(ValueFromJson((*outs)[i], detail::ChildPointer("/outputs", i)));
        }
      }
      if (const Json* nan = r.Optional("nan_detected")) {
        if (!nan->is_boolean()) throw SchemaError("/nan_detected", "expected a boolean");
        ok.nan_detected = nan->get<bool>();
      }
      r.Optional("exception");
      r.RejectUnknown();
      return ok;
    }
    if (status == "exception") {
      detail::ObjectReader ex(r.Required("exception"), "/exception");
      ExceptionOutcome out;
      out.type_name = ex.String("type");
      out.message = ex.String("message");
      out.duration_ms = duration;
      ex.RejectUnknown();
      r.Optional("outputs");
      r.Optional("nan_detected");
      r.RejectUnknown();
      return out;
    }
    throw ProtocolViolation("unknown status '" + status + "'");
  } catch (const SchemaError& e) {
    throw ProtocolViolation(e.what());
  }
}

// ---- Subprocess worker ----------------------------------------------------------

struct WorkerOptions {
  std::vector<std::string> argv;
  std::chrono::milliseconds startup_timeout{10000};
  std::uint64_t rss_limit_bytes = 2ULL << 30;  // 0 disables the check
  bool inherit_stderr = false;
};

// Resident set size of `pid` from /proc, or 0 when unavailable.
inline std::uint64_t ReadRssBytes(pid_t pid) {
  std::ifstream in("/proc/" + std::to_string(pid) + "/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmRSS:", 0) == 0) {
      std::istringstream fields(line.substr(6));
      std::uint64_t kb = 0;
      fields >> kb;
      return kb * 1024;
    }
  }
  return 0;
}

// One supervised worker process speaking newline-delimited JSON over a
// socket pair bound to its stdin and stdout. Crashed or hung workers are
// killed (whole process group) and respawned on the next call.
class SubprocessWorker : public Worker {
 public:
  using Clock = std::chrono::steady_clock;

  explicit SubprocessWorker(WorkerOptions options) : options_(std::move(options)) {
    if (options_.argv.empty()) throw WorkerSpawnFailure("empty worker command");
  }
  ~SubprocessWorker() override { Stop(); }

  SubprocessWorker(const SubprocessWorker&) = delete;
  SubprocessWorker& operator=(const SubprocessWorker&) = delete;

  bool running() const { return pid_ > 0; }
  pid_t pid() const { return pid_; }
  std::size_t spawn_count() const { return spawns_; }
  const std::string& handshake_target() const { return target_; }

  void Start() {
    if (running()) return;
    int sv[2];
    if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
      throw WorkerSpawnFailure(std::string("socketpair: ") + std::strerror(errno));
    }
    int err_pipe[2];
    if (pipe2(err_pipe, O_CLOEXEC) != 0) {
      close(sv[0]);
      close(sv[1]);
      throw WorkerSpawnFailure(std::string("pipe: ") + std::strerror(errno));
    }
    std::vector<char*> argv;
    for (auto& a : options_.argv) argv.push_back(a.data());
    argv.push_back(nullptr);
    const pid_t parent = getpid();

    pid_t pid = fork();
    if (pid < 0) {
      close(sv[0]);
      close(sv[1]);
      close(err_pipe[0]);
      close(err_pipe[1]);
      throw WorkerSpawnFailure(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
      setpgid(0, 0);
      prctl(PR_SET_PDEATHSIG, SIGKILL);
      if (getppid() != parent) _exit(127);
      signal(SIGPIPE, SIG_DFL);
      sigset_t none;
      sigemptyset(&none);
      sigprocmask(SIG_SETMASK, &none, nullptr);
      dup2(sv[1], STDIN_FILENO);
      dup2(sv[1], STDOUT_FILENO);
      if (!options_.inherit_stderr) {
        int devnull = open("/dev/null", O_WRONLY);
        if (devnull >= 0) dup2(devnull, STDERR_FILENO);
      }
      execvp(argv[0], argv.data());
      int e = errno;
      ssize_t ignored = write(err_pipe[1], &e, sizeof e);
      (void)ignored;
      _exit(127);
    }
    setpgid(pid, pid);
    close(sv[1]);
    close(err_pipe[1]);
    int child_errno = 0;
    ssize_t n;
    do {
      n = read(err_pipe[0], &child_errno, sizeof child_errno);
    } while (n < 0 && errno == EINTR);
    close(err_pipe[0]);
    pid_ = pid;
    fd_ = sv[0];
    buffer_.clear();
    ++spawns_;
    if (n > 0) {
      Kill();
      throw WorkerSpawnFailure("cannot execute '" + options_.argv[0] +
                               "': " + std::strerror(child_errno));
    }
    auto deadline = Clock::now() + options_.startup_timeout;
    std::string line;
    ReadStatus st = ReadLine(deadline, &line);
    if (st != ReadStatus::kLine) {
      Kill();
      throw WorkerSpawnFailure(st == ReadStatus::kTimeout ? "worker handshake timed out"
                                                          : "worker exited before handshake");
    }
    try {
      Json hello = Json::parse(line);
      if (hello.value("op", "") != "ready" || hello.value("protocol", 0) != kProtocolVersion) {
        throw WorkerSpawnFailure("unexpected handshake: " + line);
      }
      target_ = hello.value("target", "");
    } catch (const Json::exception&) {
      Kill();
      throw WorkerSpawnFailure("malformed handshake: " + line);
    } catch (const WorkerSpawnFailure&) {
      Kill();
      throw;
    }
    log::Debug("worker started", {{"pid", pid_}, {"target", target_}});
  }

  void Stop() {
    if (!running()) return;
    Kill();
  }

  ExecutionResult Execute(const TestCase& tc, std::uint64_t timeout_ms) override {
    return {tc.case_index, Call(tc, timeout_ms)};
  }

  Outcome Call(const TestCase& tc, std::uint64_t timeout_ms) {
    return CallRaw(EncodeCallRequest(next_id_, tc, timeout_ms), timeout_ms);
  }

  // Sends one already-serialized request line; exposed for protocol tests.
  Outcome CallRaw(const std::string& request, std::uint64_t timeout_ms) {
    Start();
    const std::uint64_t id = next_id_++;
    auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    if (!WriteAll(request + "\n", deadline)) {
      if (Clock::now() >= deadline) {
        Kill();
        return TimeoutOutcome{};
      }
      return Reap("");
    }
    std::string line;
    switch (ReadLine(deadline, &line)) {
      case ReadStatus::kTimeout:
        Kill();
        return TimeoutOutcome{};
      case ReadStatus::kEof:
        return Reap("");
      case ReadStatus::kLine:
        break;
    }
    Outcome out;
    try {
      out = ParseCallResponse(line, id);
    } catch (const ProtocolViolation& e) {
      log::Warn("protocol violation, restarting worker",
                {{"api", tc_api(request)}, {"error", e.what()}});
      Kill();
      return WorkerDeathOutcome{std::nullopt, std::nullopt,
                                std::string("protocol violation: ") + e.what()};
    }
    if (options_.rss_limit_bytes > 0) {
      std::uint64_t rss = ReadRssBytes(pid_);
      if (rss > options_.rss_limit_bytes) {
        Kill();
        return ResourceLimitOutcome{rss};
      }
    }
    return out;
  }

 private:
  enum class ReadStatus { kLine, kTimeout, kEof };

  static std::string tc_api(const std::string& request) {
    try {
      return Json::parse(request).value("api", "");
    } catch (const Json::exception&) {
      return "";
    }
  }

  static int RemainingMs(Clock::time_point deadline) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    return static_cast<int>(std::clamp<std::int64_t>(left.count(), 0, 1 << 30));
  }

  bool WriteAll(const std::string& data, Clock::time_point deadline) {
    std::size_t off = 0;
    while (off < data.size()) {
      ssize_t n = send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL | MSG_DONTWAIT);
      if (n > 0) {
        off += static_cast<std::size_t>(n);
        continue;
      }
      if (n < 0 && errno == EINTR) continue;
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
        pollfd p{fd_, POLLOUT, 0};
        int r = poll(&p, 1, RemainingMs(deadline));
        if (r == 0) return false;
        if (r < 0 && errno != EINTR) return false;
        if (p.revents & (POLLERR | POLLHUP)) return false;
        continue;
      }
      return false;
    }
    return true;
  }

  ReadStatus ReadLine(Clock::time_point deadline, std::string* line) {
    while (true) {
      std::size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        *line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return ReadStatus::kLine;
      }
      pollfd p{fd_, POLLIN, 0};
      int r = poll(&p, 1, RemainingMs(deadline));
      if (r < 0) {
        if (errno == EINTR) continue;
        return ReadStatus::kEof;
      }
      if (r == 0) return ReadStatus::kTimeout;
      char chunk[1 << 16];
      ssize_t n = recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return ReadStatus::kEof;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  // Collects the exit status after the worker closed its end.
  WorkerDeathOutcome Reap(std::string detail) {
    WorkerDeathOutcome death;
    death.detail = std::move(detail);
    int status = 0;
    pid_t r = 0;
    for (int i = 0; i < 200 && r == 0; ++i) {
      r = waitpid(pid_, &status, WNOHANG);
      if (r == 0) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (r == 0) {
      kill(-pid_, SIGKILL);
      kill(pid_, SIGKILL);
      r = waitpid(pid_, &status, 0);
    }
    kill(-pid_, SIGKILL);  // stray grandchildren
    if (r == pid_) {
      if (WIFEXITED(status)) death.exit_code = WEXITSTATUS(status);
      if (WIFSIGNALED(status)) death.signal = WTERMSIG(status);
    }
    CloseFd();
    pid_ = -1;
    return death;
  }

  void Kill() {
    if (pid_ > 0) {
      kill(-pid_, SIGKILL);
      kill(pid_, SIGKILL);
      int status = 0;
      while (waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
      }
    }
    CloseFd();
    pid_ = -1;
  }

  void CloseFd() {
    if (fd_ >= 0) close(fd_);
    fd_ = -1;
    buffer_.clear();
  }

  WorkerOptions options_;
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
  std::uint64_t next_id_ = 1;
  std::size_t spawns_ = 0;
  std::string target_;
};

// ---- Transcripts ------------------------------------------------------------------

struct TranscriptEntry {
  std::string api;
  std::size_t case_index = 0;
  std::string case_digest;
  ExecutionResult result;
};

inline Json ToJson(const TranscriptEntry& e) {
  return Json{{"api", e.api},
              {"case_index", e.case_index},
              {"case_digest", e.case_digest},
              {"result", ToJson(e.result)}};
}

inline TranscriptEntry TranscriptEntryFromJson(const Json& j, const std::string& pointer) {
  detail::ObjectReader r(j, pointer);
  TranscriptEntry e;
  e.api = r.String("api");
  e.case_index = r.UInt("case_index");
  e.case_digest = r.String("case_digest");
  e.result = ExecutionResultFromJson(r.Required("result"), r.Path("result"));
  r.RejectUnknown();
  return e;
}

// Thread-safe collection of worker responses, saved as JSON lines sorted by
// (api, case_index).
class Transcript {
 public:
  Transcript() = default;
  Transcript(Transcript&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    entries_ = std::move(other.entries_);
  }
  Transcript& operator=(Transcript&& other) noexcept {
    if (this != &other) {
      std::scoped_lock lock(mutex_, other.mutex_);
      entries_ = std::move(other.entries_);
    }
    return *this;
  }

  void Add(TranscriptEntry e) {
    std::lock_guard lock(mutex_);
    entries_[{e.api, e.case_index}] = std::move(e);
  }

  const TranscriptEntry* Find(const std::string& api, std::size_t index) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find({api, index});
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

  void Save(const std::string& path) const {
    std::lock_guard lock(mutex_);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write transcript " + path);
    for (const auto& [key, e] : entries_) out << ToJson(e).dump() << '\n';
  }

  static Transcript Load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read transcript " + path);
    Transcript t;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (detail::Trim(line).empty()) continue;
      t.Add(TranscriptEntryFromJson(detail::ParseJson(line), "/" + std::to_string(n)));
    }
    return t;
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::size_t>, TranscriptEntry> entries_;
};

// Answers from a recorded transcript; the case digest must match.
class ReplayWorker : public Worker {
 public:
  explicit ReplayWorker(std::shared_ptr<const Transcript> transcript)
      : transcript_(std::move(transcript)) {}

  ExecutionResult Execute(const TestCase& tc, std::uint64_t) override {
    const TranscriptEntry* e = transcript_->Find(tc.api_name, tc.case_index);
    if (!e) {
      throw Error("transcript has no entry for " + tc.api_name + "#" +
                  std::to_string(tc.case_index));
    }
    if (e->case_digest != CaseDigest(tc)) {
      throw Error("transcript case mismatch for " + tc.api_name + "#" +
                  std::to_string(tc.case_index));
    }
    ExecutionResult r = e->result;
    r.case_index = tc.case_index;
    return r;
  }

 private:
  std::shared_ptr<const Transcript> transcript_;
};

// Forwards to another worker and records every response.
class RecordingWorker : public Worker {
 public:
  RecordingWorker(std::unique_ptr<Worker> inner, std::shared_ptr<Transcript> sink)
      : inner_(std::move(inner)), sink_(std::move(sink)) {}

  ExecutionResult Execute(const TestCase& tc, std::uint64_t timeout_ms) override {
    ExecutionResult r = inner_->Execute(tc, timeout_ms);
    sink_->Add({tc.api_name, tc.case_index, CaseDigest(tc), r});
    return r;
  }

 private:
  std::unique_ptr<Worker> inner_;
  std::shared_ptr<Transcript> sink_;
};

}  // namespace docfuzz
