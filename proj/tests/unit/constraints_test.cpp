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

#include "docfuzz/constraints.hpp"

#include <gtest/gtest.h>

#include "support/test_support.hpp"

namespace docfuzz {
namespace {

ParamInfo Param(std::string name, std::vector<ScalarType> types,
                std::optional<SizeSpec> size = std::nullopt) {
  ParamInfo p;
  p.name = std::move(name);
  p.type_domain = std::move(types);
  p.size_spec = std::move(size);
  return p;
}

StandardizedApiInfo BlendInfo() {
  StandardizedApiInfo info{"blend", {}};
  info.params.push_back(Param("src1", {ScalarType::kUInt8, ScalarType::kFloat32}, RgbImageSize()));
  ParamInfo src2 = Param("src2", {}, RgbImageSize());
  src2.description.depends_on = {{"src1", DependencyKind::kSameType},
                                 {"src1", DependencyKind::kSameShape}};
  info.params.push_back(src2);
  ParamInfo alpha = Param("alpha", {ScalarType::kFloat64});
  alpha.description.value_range = Interval{0.0, 1.0};
  info.params.push_back(alpha);
  ParamInfo mode = Param("mode", {});
  mode.flag = false;
  mode.description.options = std::vector<EncodedValue>{EncodedValue::Int(1), EncodedValue::Int(3)};
  mode.default_value = EncodedValue::Int(5);
  info.params.push_back(mode);
  info.output_count = 1;
  return info;
}

Args ValidBlendArgs() {
  NdArray img(ScalarType::kUInt8, {4, 5, 3});
  return {{"src1", EncodedValue::Array(img)},
          {"src2", EncodedValue::Array(img)},
          {"alpha", EncodedValue::Float(0.5)},
          {"mode", EncodedValue::Int(3)}};
}

bool HasViolation(const std::vector<CaseViolation>& v, const std::string& param,
                  const std::string& rule) {
  return std::find(v.begin(), v.end(), CaseViolation{param, rule}) != v.end();
}

TEST(ExtractTest, ResolvesDependenciesAndChoices) {
  ApiConstraintSet cs = ExtractConstraints(BlendInfo());
  EXPECT_EQ(cs.order, (std::vector<std::string>{"src1", "src2", "alpha", "mode"}));
  const ResolvedSpec& src2 = cs.spec("src2");
  EXPECT_EQ(src2.type_domain, cs.spec("src1").type_domain);
  EXPECT_EQ(src2.size_template, cs.spec("src1").size_template);
  const ResolvedSpec& mode = cs.spec("mode");
  EXPECT_FALSE(mode.modifiable);
  ASSERT_TRUE(mode.fixed_choices.has_value());
  EXPECT_EQ(mode.fixed_choices->size(), 3u);  // the default joins the options
  EXPECT_EQ(mode.type_domain, (std::vector<ScalarType>{ScalarType::kInt32}));
  // src1: type + 3 dims; src2: type + 3 dims + 2 edges; alpha: type + range;
  // mode: type + choices.
  EXPECT_EQ(cs.constraint_count, 4u + 6u + 2u + 2u);
}

TEST(ExtractTest, UnconstrainedTypeDefaultsToFloat) {
  ApiConstraintSet cs = ExtractConstraints({"f", {Param("x", {})}});
  EXPECT_EQ(cs.spec("x").type_domain, (std::vector<ScalarType>{ScalarType::kFloat32}));
}

TEST(ExtractTest, ForwardReferencesAreReordered) {
  StandardizedApiInfo info{"f", {}};
  ParamInfo b = Param("b", {}, RgbImageSize());
  b.description.depends_on = {{"a", DependencyKind::kSameShape}};
  info.params = {b, Param("a", {ScalarType::kUInt8}, RgbImageSize())};
  ApiConstraintSet cs = ExtractConstraints(info);
  EXPECT_EQ(cs.order, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(cs.specs[0].name, "b");  // declaration order is kept
}

TEST(ExtractTest, CyclesAreRejected) {
  StandardizedApiInfo info{"f", {}};
  ParamInfo a = Param("a", {ScalarType::kUInt8}, RgbImageSize());
  ParamInfo b = Param("b", {ScalarType::kUInt8}, RgbImageSize());
  a.description.depends_on = {{"b", DependencyKind::kSameType}};
  b.description.depends_on = {{"a", DependencyKind::kSameType}};
  info.params = {a, b};
  EXPECT_THROW(ExtractConstraints(info), CyclicDependency);
}

TEST(ExtractTest, InvalidInfoIsRejected) {
  EXPECT_THROW(ExtractConstraints({"f", {Param("x", {}), Param("x", {})}}), InvalidApiInfo);
}

TEST(CheckCaseTest, ValidArgsPass) {
  ApiConstraintSet cs = ExtractConstraints(BlendInfo());
  EXPECT_TRUE(CheckCase(cs, ValidBlendArgs()).empty());
}

TEST(CheckCaseTest, EachRuleIsReported) {
  ApiConstraintSet cs = ExtractConstraints(BlendInfo());
  {
    Args a = ValidBlendArgs();
    a[1].second = EncodedValue::Array(NdArray(ScalarType::kFloat32, {4, 5, 3}));
    auto v = CheckCase(cs, a);
    EXPECT_TRUE(HasViolation(v, "src2", "SameType(src1)"));
  }
  {
    Args a = ValidBlendArgs();
    a[1].second = EncodedValue::Array(NdArray(ScalarType::kUInt8, {4, 6, 3}));
    EXPECT_TRUE(HasViolation(CheckCase(cs, a), "src2", "SameShape(src1)"));
  }
  {
    Args a = ValidBlendArgs();
    a[0].second = EncodedValue::Array(NdArray(ScalarType::kUInt8, {4, 5, 2}));
    EXPECT_TRUE(HasViolation(CheckCase(cs, a), "src1", "Dim"));
  }
  {
    Args a = ValidBlendArgs();
    a[0].second = EncodedValue::Array(NdArray(ScalarType::kUInt8, {4, 5}));
    EXPECT_TRUE(HasViolation(CheckCase(cs, a), "src1", "Shape"));
  }
  {
    Args a = ValidBlendArgs();
    a[2].second = EncodedValue::Float(1.0);
    EXPECT_TRUE(HasViolation(CheckCase(cs, a), "alpha", "Range"));
  }
  {
    Args a = ValidBlendArgs();
    a[2].second = EncodedValue::Str("0.5");
    EXPECT_TRUE(HasViolation(CheckCase(cs, a), "alpha", "Type"));
  }
  {
    Args a = ValidBlendArgs();
    a[3].second = EncodedValue::Int(2);
    EXPECT_TRUE(HasViolation(CheckCase(cs, a), "mode", "FixedChoice"));
  }
  {
    Args a = ValidBlendArgs();
    a.pop_back();
    a.emplace_back("extra", EncodedValue::Null());
    auto v = CheckCase(cs, a);
    EXPECT_TRUE(HasViolation(v, "mode", "Missing"));
    EXPECT_TRUE(HasViolation(v, "extra", "Unknown"));
  }
}

TEST(CheckCaseTest, BoundedPoints) {
  StandardizedApiInfo info{"draw", {}};
  info.params.push_back(Param("img", {ScalarType::kUInt8}, RgbImageSize()));
  ParamInfo pts = Param("pts", {ScalarType::kInt32}, PointListSize());
  pts.description.depends_on = {{"img", DependencyKind::kBoundedByShape, {1, 0}}};
  info.params.push_back(pts);
  ApiConstraintSet cs = ExtractConstraints(info);

  NdArray img(ScalarType::kUInt8, {10, 20, 3});
  NdArray p(ScalarType::kInt32, {1, 1, 2});
  p.Set(0, 19);  // x bounded by width (axis 1)
  p.Set(1, 9);   // y bounded by height (axis 0)
  Args ok{{"img", EncodedValue::Array(img)}, {"pts", EncodedValue::Array(p)}};
  EXPECT_TRUE(CheckCase(cs, ok).empty());
  p.Set(1, 10);
  Args bad{{"img", EncodedValue::Array(img)}, {"pts", EncodedValue::Array(p)}};
  EXPECT_TRUE(HasViolation(CheckCase(cs, bad), "pts", "BoundedByShape(img)"));
}

TEST(CheckCaseTest, IntegralScalarsMustFit) {
  StandardizedApiInfo info{"f", {Param("n", {ScalarType::kUInt8})}};
  ApiConstraintSet cs = ExtractConstraints(info);
  EXPECT_TRUE(CheckCase(cs, {{"n", EncodedValue::Int(255)}}).empty());
  EXPECT_TRUE(HasViolation(CheckCase(cs, {{"n", EncodedValue::Int(256)}}), "n", "Type"));
}

TEST(ConstraintJsonTest, MockCorpusRoundTrips) {
  auto sets = testing::MockConstraintSets();
  ASSERT_EQ(sets.size(), 22u);
  EXPECT_EQ(ConstraintSetsFromJsonText(ConstraintSetsToJsonText(sets)), sets);
}

TEST(ConstraintJsonTest, OrderMustBeAPermutation) {
  Json j = ToJson(ExtractConstraints(BlendInfo()));
  j["order"] = Json::array({"src1", "src2", "alpha"});
  EXPECT_THROW(ConstraintSetFromJson(j, ""), SchemaError);
}

}  // namespace
}  // namespace docfuzz
