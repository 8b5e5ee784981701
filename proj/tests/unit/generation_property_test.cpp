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

#include <gtest/gtest.h>

#include <set>

#include "docfuzz/generation.hpp"
#include "support/test_support.hpp"

namespace docfuzz {
namespace {

class GenerationPropertyTest : public ::testing::TestWithParam<std::uint64_t> {
 protected:
  static void SetUpTestSuite() {
    sets_ = new std::vector<ApiConstraintSet>(testing::MockConstraintSets());
  }
  static void TearDownTestSuite() { delete sets_; }
  static std::vector<ApiConstraintSet>* sets_;
};
std::vector<ApiConstraintSet>* GenerationPropertyTest::sets_ = nullptr;

std::string Describe(const std::vector<CaseViolation>& v) {
  std::string out;
  for (const auto& x : v) out += ToString(x) + "; ";
  return out;
}

// Dependents inherit a corrupted source's type or shape.
bool DependsOn(const ResolvedSpec& spec, const std::string& source) {
  return std::any_of(spec.deps.begin(), spec.deps.end(),
                     [&](const DependencyEdge& e) { return e.source == source; });
}

TEST_P(GenerationPropertyTest, ValidOnlyCasesSatisfyAllConstraints) {
  GenConfig cfg;
  cfg.rng_seed = GetParam();
  cfg.budget_per_api = 150;
  for (const auto& cs : *sets_) {
    for (const auto& tc : GenerateStream(cs, cfg)) {
      if (tc.validity_mode != ValidityMode::kValidOnly) continue;
      auto v = CheckCase(cs, tc.args);
      ASSERT_TRUE(v.empty()) << cs.api_name << " #" << tc.case_index << ": " << Describe(v);
    }
  }
}

TEST_P(GenerationPropertyTest, AdversarialCasesCorruptExactlyOneParam) {
  GenConfig cfg;
  cfg.rng_seed = GetParam();
  cfg.budget_per_api = 150;
  cfg.adversarial_ratio = 0.5;
  std::size_t adversarial = 0;
  for (const auto& cs : *sets_) {
    for (const auto& tc : GenerateStream(cs, cfg)) {
      bool corrupted = tc.validity_mode == ValidityMode::kAdversarial;
      ASSERT_EQ(corrupted, tc.applied.corrupted_param.has_value());
      if (!corrupted) continue;
      ++adversarial;
      const std::string& target = *tc.applied.corrupted_param;
      bool type_bad = tc.applied.type_strategy == std::optional<std::string>("invalid");
      bool size_bad = tc.applied.size_strategy == std::optional<std::string>("extreme");
      EXPECT_NE(type_bad, size_bad) << cs.api_name;
      // Violations stay on the target or on params derived from it.
      for (const auto& v : CheckCase(cs, tc.args)) {
        bool attributable = v.param == target ||
                            v.rule.find("(" + target + ")") != std::string::npos ||
                            DependsOn(cs.spec(v.param), target);
        EXPECT_TRUE(attributable) << cs.api_name << ": " << ToString(v) << " target " << target;
      }
      if (type_bad) {
        EXPECT_FALSE(CheckCase(cs, tc.args).empty()) << cs.api_name;
      }
    }
  }
  EXPECT_GT(adversarial, 0u);
}

TEST_P(GenerationPropertyTest, StreamsAreDeterministic) {
  GenConfig cfg;
  cfg.rng_seed = GetParam();
  cfg.budget_per_api = 60;
  for (const auto& cs : *sets_) {
    EXPECT_EQ(GenerateStream(cs, cfg), GenerateStream(cs, cfg)) << cs.api_name;
  }
}

TEST_P(GenerationPropertyTest, ShorterBudgetIsAPrefix) {
  GenConfig small;
  small.rng_seed = GetParam();
  small.budget_per_api = 40;
  GenConfig large = small;
  large.budget_per_api = 120;
  for (const auto& cs : *sets_) {
    auto a = GenerateStream(cs, small);
    auto b = GenerateStream(cs, large);
    ASSERT_EQ(a.size(), 40u);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin())) << cs.api_name;
  }
}

TEST_P(GenerationPropertyTest, DisabledValueStrategiesNeverApply) {
  const char* names[] = {"value_noise", "value_mask", "value_division"};
  const ValueStrategy kinds[] = {ValueStrategy::kNoise, ValueStrategy::kMask,
                                 ValueStrategy::kDivision};
  for (int k = 0; k < 3; ++k) {
    GenConfig cfg;
    cfg.rng_seed = GetParam();
    cfg.budget_per_api = 60;
    cfg.flags.Disable(names[k]);
    std::set<ValueStrategy> seen;
    for (const auto& cs : *sets_) {
      for (const auto& tc : GenerateStream(cs, cfg)) {
        if (tc.applied.value_strategy) seen.insert(*tc.applied.value_strategy);
      }
    }
    EXPECT_EQ(seen.count(kinds[k]), 0u) << names[k];
    EXPECT_EQ(seen.size(), 2u) << names[k];
  }
}

TEST_P(GenerationPropertyTest, ZeroRatioNeverCorrupts) {
  GenConfig cfg;
  cfg.rng_seed = GetParam();
  cfg.budget_per_api = 80;
  cfg.adversarial_ratio = 0.0;
  for (const auto& cs : *sets_) {
    for (const auto& tc : GenerateStream(cs, cfg)) {
      EXPECT_EQ(tc.validity_mode, ValidityMode::kValidOnly);
    }
  }
}

TEST_P(GenerationPropertyTest, SeedsDiverge) {
  GenConfig a;
  a.rng_seed = GetParam();
  a.budget_per_api = 5;
  GenConfig b = a;
  b.rng_seed = GetParam() + 1;
  std::size_t differing = 0;
  for (const auto& cs : *sets_) {
    differing += GenerateStream(cs, a) != GenerateStream(cs, b);
  }
  EXPECT_GT(differing, sets_->size() / 2);
}

INSTANTIATE_TEST_SUITE_P(Seeds, GenerationPropertyTest, ::testing::Values(0u, 1u, 7u, 12345u));

}  // namespace
}  // namespace docfuzz
