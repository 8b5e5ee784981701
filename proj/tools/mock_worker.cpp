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

// Mock target served over the worker wire protocol. Clean APIs return the
// sum of their numeric inputs; six APIs carry planted faults, and APIs named
// "__*" are hooks for exercising the supervisor.

#include <signal.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "docfuzz/value.hpp"

namespace {

using docfuzz::EncodedValue;
using docfuzz::Json;
using docfuzz::NdArray;
using docfuzz::ScalarType;

struct PyError {
  std::string type;
  std::string message;
};

using Values = std::vector<EncodedValue>;
using Api = std::function<Values(const Values&)>;

void RequireArity(const Values& args, std::size_t n) {
  if (args.size() != n) {
    throw PyError{"TypeError", "function takes exactly " + std::to_string(n) +
                                   " arguments (" + std::to_string(args.size()) + " given)"};
  }
}

// Shared argument screening: strings are rejected, empty arrays too.
void Screen(const Values& args) {
  for (const auto& a : args) {
    if (a.is_str()) throw PyError{"TypeError", "Expected a numeric argument, got str"};
    if (a.is_array() && a.as_array().size() == 0) {
      throw PyError{"ValueError", "empty array argument"};
    }
    if (a.is_seq()) {
      for (const auto& item : a.as_seq().items) {
        if (item.is_str()) throw PyError{"TypeError", "Expected a numeric sequence"};
      }
    }
  }
}

double SumOf(const EncodedValue& v) {
  if (v.is_array()) {
    double s = 0;
    const NdArray& a = v.as_array();
    for (std::size_t i = 0; i < a.size(); ++i) s += a.Get(i);
    return s;
  }
  if (v.is_seq()) {
    double s = 0;
    for (const auto& item : v.as_seq().items) s += SumOf(item);
    return s;
  }
  if (v.is_enum()) return static_cast<double>(v.as_enum().value);
  if (auto n = v.as_number()) return *n;
  return 0;
}

Values Clean(const Values& args) {
  Screen(args);
  double s = 0;
  for (const auto& a : args) s += SumOf(a);
  return {EncodedValue::Float(s)};
}

const NdArray* ArrayArg(const Values& args, std::size_t i) {
  return args[i].is_array() ? &args[i].as_array() : nullptr;
}

// Aborts the process when any dimension reaches 4096.
Values ResizeArea(const Values& args) {
  RequireArity(args, 3);
  Screen(args);
  if (const NdArray* src = ArrayArg(args, 0)) {
    for (std::size_t d : src->shape()) {
      if (d >= 4096) std::abort();
    }
  }
  return Clean(args);
}

// Segfaults on a single-channel float32 8x8 patch holding a constant 2x2
// block.
Values NormalizePatch(const Values& args) {
  RequireArity(args, 1);
  Screen(args);
  const NdArray* p = ArrayArg(args, 0);
  if (p && p->dtype() == ScalarType::kFloat32 && p->rank() == 2 && p->shape()[0] == 8 &&
      p->shape()[1] == 8) {
    for (std::size_t r = 0; r + 1 < 8; ++r) {
      for (std::size_t c = 0; c + 1 < 8; ++c) {
        double v = p->Get(r * 8 + c);
        if (p->Get(r * 8 + c + 1) == v && p->Get((r + 1) * 8 + c) == v &&
            p->Get((r + 1) * 8 + c + 1) == v) {
          ::raise(SIGSEGV);
        }
      }
    }
  }
  return Clean(args);
}

// Logarithmic stretch against (max - 127); a uint8 input whose maximum is
// at most 127 yields -inf/NaN.
Values GainStretch(const Values& args) {
  RequireArity(args, 2);
  Screen(args);
  const NdArray* src = ArrayArg(args, 0);
  double gain = args[1].as_number().value_or(1.0);
  if (!src || src->dtype() != ScalarType::kUInt8) return Clean(args);
  double max = 0;
  std::set<double> distinct;
  for (std::size_t i = 0; i < src->size(); ++i) {
    max = std::max(max, src->Get(i));
    if (distinct.size() < 3) distinct.insert(src->Get(i));
  }
  NdArray out(ScalarType::kFloat32, src->shape());
  bool fault = src->size() >= 12 && distinct.size() >= 3 && max <= 127;
  for (std::size_t i = 0; i < src->size(); ++i) {
    double v = src->Get(i);
    double y = fault ? gain * std::log(v + 1.0) / std::log(max - 127.0)
                     : (max > 0 ? gain * v / max : 0.0);
    out.Set(i, y);
  }
  return {EncodedValue::Array(std::move(out))};
}

// Elementwise square root; negative inputs give NaN.
Values SqrtMagnitude(const Values& args) {
  RequireArity(args, 1);
  Screen(args);
  const NdArray* m = ArrayArg(args, 0);
  if (!m) return Clean(args);
  NdArray out(docfuzz::IsFloating(m->dtype()) ? m->dtype() : ScalarType::kFloat32, m->shape());
  for (std::size_t i = 0; i < m->size(); ++i) out.Set(i, std::sqrt(m->Get(i)));
  return {EncodedValue::Array(std::move(out))};
}

// Assertion-style failure when the two arrays differ in dtype.
Values AddWeighted(const Values& args) {
  RequireArity(args, 5);
  Screen(args);
  const NdArray* a = ArrayArg(args, 0);
  const NdArray* b = ArrayArg(args, 2);
  if (a && b) {
    if (a->dtype() != b->dtype()) {
      throw PyError{"error",
                    "(-215:Assertion failed) src1.type() == src2.type() in function 'arithm_op'"};
    }
    if (a->shape() != b->shape()) {
      throw PyError{"ValueError", "src1 and src2 must have the same size"};
    }
  }
  return Clean(args);
}

// Rejects mixed float32/float64 among objectPoints, rvec and tvec.
Values ProjectPoints(const Values& args) {
  RequireArity(args, 5);
  Screen(args);
  const NdArray* pts = ArrayArg(args, 0);
  const NdArray* rvec = ArrayArg(args, 1);
  const NdArray* tvec = ArrayArg(args, 2);
  if (pts && rvec && tvec &&
      (pts->dtype() != rvec->dtype() || rvec->dtype() != tvec->dtype())) {
    throw PyError{"error",
                  "(-205:Formats of input arguments "
                  "do not match) All the matrices must have the same data type in function "
                  "'cvRodrigues2'"};
  }
  return Clean(args);
}

// ---- Hooks --------------------------------------------------------------------------

std::int64_t IntArg(const Values& args, std::size_t i, std::int64_t fallback) {
  if (i < args.size()) {
    if (auto n = args[i].as_number()) return static_cast<std::int64_t>(*n);
  }
  return fallback;
}

std::string StrArg(const Values& args, std::size_t i, std::string fallback) {
  return i < args.size() && args[i].is_str() ? args[i].as_str() : fallback;
}

std::map<std::string, Api> BuildRegistry() {
  std::map<std::string, Api> apis;
  for (const char* name :
       {"getRotationMatrix2D", "polarToCart", "circle", "line", "polylines", "cvtColor",
        "threshold", "absdiff", "bitwise_and", "GaussianBlur", "findHomography", "rectangle",
        "calcBackProject", "warpAffine", "blur", "multiply"}) {
    apis[name] = Clean;
  }
  apis["resizeArea"] = ResizeArea;
  apis["normalizePatch"] = NormalizePatch;
  apis["gainStretch"] = GainStretch;
  apis["sqrtMagnitude"] = SqrtMagnitude;
  apis["addWeighted"] = AddWeighted;
  apis["projectPoints"] = ProjectPoints;

  apis["__echo"] = [](const Values& args) { return args; };
  apis["__hang"] = [](const Values&) -> Values {
    for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
  };
  apis["__sleep"] = [](const Values& args) -> Values {
    std::this_thread::sleep_for(std::chrono::milliseconds(IntArg(args, 0, 100)));
    return {};
  };
  apis["__exit"] = [](const Values& args) -> Values {
    std::cout.flush();
    std::_Exit(static_cast<int>(IntArg(args, 0, 3)));
  };
  apis["__abort"] = [](const Values&) -> Values { std::abort(); };
  apis["__segv"] = [](const Values&) -> Values {
    ::raise(SIGSEGV);
    return {};
  };
  apis["__garbage"] = [](const Values&) -> Values {
    std::cout << "this is not json" << std::endl;
    for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
  };
  apis["__alloc"] = [](const Values& args) -> Values {
    auto bytes = static_cast<std::size_t>(IntArg(args, 0, 64)) << 20;
    auto* block = static_cast<char*>(std::malloc(bytes));
    if (block) std::memset(block, 1, bytes);  // touched, so it counts as resident
    return {EncodedValue::Int(static_cast<std::int64_t>(bytes))};
  };
  apis["__nan"] = [](const Values& args) -> Values {
    Values out;
    auto index = IntArg(args, 0, 0);
    for (std::int64_t i = 0; i <= index; ++i) {
      out.push_back(EncodedValue::Float(i == index ? std::nan("") : 1.0));
    }
    return out;
  };
  apis["__raise"] = [](const Values& args) -> Values {
    throw PyError{StrArg(args, 0, "RuntimeError"), StrArg(args, 1, "raised on request")};
  };
  return apis;
}

bool AnyNonFinite(const Values& outs) {
  for (const auto& o : outs) {
    if (docfuzz::ContainsNonFinite(o)) return true;
  }
  return false;
}

void Reply(const Json& j) {
  std::cout << j.dump() << '\n';
  std::cout.flush();
}

Json ExceptionReply(const Json& id, const PyError& e, std::int64_t ms) {
  return Json{{"id", id},
              {"status", "exception"},
              {"exception", {{"type", e.type}, {"message", e.message}}},
              {"duration_ms", ms}};
}

}  // namespace

int main(int argc, char** argv) {
  std::string target = "mock";
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--target" && i + 1 < argc) {
      target = argv[++i];
    } else if (a == "--help") {
      std::cout << "usage: docfuzz-mock-worker [--target mock]\n";
      return 0;
    } else {
      std::cerr << "docfuzz-mock-worker: unknown argument " << a << "\n";
      return 2;
    }
  }
  if (target != "mock") {
    std::cerr << "docfuzz-mock-worker: only the mock target is available\n";
    return 2;
  }
  std::ios::sync_with_stdio(false);
  const auto apis = BuildRegistry();
  Reply(Json{{"op", "ready"}, {"protocol", 1}, {"target", target}});

  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::steady_clock::now() - t0)
          .count();
    };
    Json id = 0;
    Values args;
    std::string api;
    try {
      Json req = docfuzz::detail::ParseWireJson(line);
      if (!req.is_object()) throw std::runtime_error("request is not an object");
      id = req.at("id");
      if (!id.is_number_integer()) throw std::runtime_error("id must be an integer");
      if (req.at("op") != "call") throw std::runtime_error("unsupported op");
      api = req.at("api").get<std::string>();
      const Json& raw = req.at("args");
      if (!raw.is_array()) throw std::runtime_error("args must be an array");
      for (std::size_t i = 0; i < raw.size(); ++i) {
        args.push_back(docfuzz::ValueFromJson(raw[i], "/args/" + std::to_string(i)));
      }
    } catch (const std::exception& e) {
      Reply(ExceptionReply(id, {"ProtocolError", e.what()}, elapsed()));
      continue;
    }
    auto it = apis.find(api);
    if (it == apis.end()) {
      Reply(ExceptionReply(id, {"AttributeError", "module 'mock' has no attribute '" + api + "'"},
                           elapsed()));
      continue;
    }
    try {
      Values outs = it->second(args);
      std::string reply = "{\"id\":" + id.dump() + ",\"status\":\"ok\",\"outputs\":[";
      for (std::size_t i = 0; i < outs.size(); ++i) {
        if (i) reply += ',';
        docfuzz::AppendWire(reply, outs[i]);
      }
      reply += "],\"nan_detected\":";
      reply += AnyNonFinite(outs) ? "true" : "false";
      reply += ",\"duration_ms\":" + std::to_string(elapsed()) + "}\n";
      std::cout << reply;
      std::cout.flush();
    } catch (const PyError& e) {
      Reply(ExceptionReply(id, e, elapsed()));
    } catch (const std::exception& e) {
      Reply(ExceptionReply(id, {"RuntimeError", e.what()}, elapsed()));
    }
  }
  return 0;
}
