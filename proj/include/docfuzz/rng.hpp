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

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "docfuzz/detail/text.hpp"

namespace docfuzz {

// Seeded generator whose output is identical on every platform: the engine
// is xoshiro256** seeded through splitmix64, and all distributions are
// implemented here rather than taken from <random>, whose distribution
// algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (auto& word : state_) {
      seed += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = seed;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t Next() {
    const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, n); n == 0 yields 0. Lemire's multiply-and-reject.
  std::uint64_t Below(std::uint64_t n) {
    if (n <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>(Next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(Next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform integer in [lo, hi]; requires lo <= hi.
  std::int64_t Range(std::int64_t lo, std::int64_t hi) {
    auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == UINT64_MAX) return static_cast<std::int64_t>(Next());
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) +
                                     Below(span + 1));
  }

  // Uniform in [0, 1) with 53 random bits.
  double Unit() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double Uniform(double lo, double hi) {
    double v = lo + (hi - lo) * Unit();
    return v < hi ? v : std::nextafter(hi, lo);
  }

  bool Chance(double p) { return Unit() < p; }

  // Standard normal via Box-Muller; each pair of uniforms yields two
  // variates, the second of which is returned by the next call.
  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - Unit();  // (0, 1]
    double u2 = Unit();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  template <typename Container>
  const auto& Pick(const Container& c) {
    return c[static_cast<std::size_t>(Below(c.size()))];
  }

 private:
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer.
inline std::uint64_t MixBits(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of the random stream owned by one (api, case, parameter) triple:
// FNV-1a over the little-endian seed, the api name, a 0x1f separator, the
// little-endian case index, another separator and the parameter name, then
// one splitmix64 round. Adding or renaming a parameter never perturbs the
// streams of the others.
inline std::uint64_t DeriveStreamSeed(std::uint64_t seed, std::string_view api,
                                      std::uint64_t case_index,
                                      std::string_view param) {
  detail::Fnv1a h;
  h.Update(seed);
  h.Update(api);
  h.Update(std::string_view("\x1f", 1));
  h.Update(case_index);
  h.Update(std::string_view("\x1f", 1));
  h.Update(param);
  return MixBits(h.digest());
}

// Reserved stream name for per-case decisions (adversarial roll, strategy).
inline constexpr std::string_view kCaseStream = "\x1e" "case";

}  // namespace docfuzz
