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

#include "docfuzz/keywords.hpp"

#include <gtest/gtest.h>

namespace docfuzz::keywords {
namespace {

TEST(KeywordsTest, TypesInOrderOfAppearance) {
  EXPECT_EQ(InferTypes("Input 8-bit or floating-point image."),
            (std::vector<ScalarType>{ScalarType::kUInt8, ScalarType::kFloat32}));
  EXPECT_EQ(InferTypes("A double precision value, or an integer."),
            (std::vector<ScalarType>{ScalarType::kFloat64, ScalarType::kInt32}));
  EXPECT_TRUE(InferTypes("Unrelated text about floats").empty());
}

TEST(KeywordsTest, Ranges) {
  EXPECT_EQ(InferRange("Value in [0, 255]."), (Interval{0, 256}));
  EXPECT_EQ(InferRange("Weight in [0.0, 1.0)."), (Interval{0, 1}));
  EXPECT_EQ(InferRange("Offset in [-5, 5)."), (Interval{-5, 5}));
  EXPECT_FALSE(InferRange("Empty [3, 3).").has_value());
  EXPECT_FALSE(InferRange("No range here").has_value());
}

TEST(KeywordsTest, EnumOptionsAndDefault) {
  auto opts = InferOptions("Interpolation, one of #INTER_LINEAR, #INTER_AREA. Default is #INTER_AREA.");
  ASSERT_TRUE(opts.has_value());
  ASSERT_EQ(opts->size(), 2u);
  EXPECT_EQ((*opts)[1], EncodedValue::Enum("INTER_AREA", 1));
  EXPECT_EQ(InferDefault("Default is #INTER_AREA.", opts), EncodedValue::Enum("INTER_AREA", 1));
}

TEST(KeywordsTest, IntegerOptions) {
  auto opts = InferOptions("Aperture size, one of 1, 3 or 5.");
  ASSERT_TRUE(opts.has_value());
  EXPECT_EQ(*opts, (std::vector<EncodedValue>{EncodedValue::Int(1), EncodedValue::Int(3),
                                               EncodedValue::Int(5)}));
}

TEST(KeywordsTest, NumericDefaults) {
  EXPECT_EQ(InferDefault("The default value is 0.5", std::nullopt), EncodedValue::Float(0.5));
  EXPECT_EQ(InferDefault("default is -3", std::nullopt), EncodedValue::Int(-3));
  EXPECT_EQ(InferDefault("Default is true", std::nullopt), EncodedValue::Bool(true));
  EXPECT_FALSE(InferDefault("nothing", std::nullopt).has_value());
}

TEST(KeywordsTest, SizeTemplates) {
  bool pts = false, color = false;
  EXPECT_EQ(InferSize("src", "Input image, 3-channel.", &pts, &color), RgbImageSize({3}));
  EXPECT_EQ(InferSize("src", "Input grayscale image.", &pts, &color), RgbImageSize({1}));
  EXPECT_EQ(InferSize("m", "2x3 transformation matrix.", &pts, &color),
            (SizeSpec{{FixedDim{2}, FixedDim{3}}}));
  EXPECT_EQ(InferSize("pts", "Array of polygon vertices.", &pts, &color), PointListSize());
  EXPECT_TRUE(pts);
  EXPECT_EQ(InferSize("color", "Circle color.", &pts, &color), (SizeSpec{{FixedDim{3}}}));
  EXPECT_TRUE(color);
  EXPECT_EQ(InferSize("center", "Center of the rotation.", &pts, &color),
            (SizeSpec{{FixedDim{2}}}));
  EXPECT_FALSE(InferSize("angle", "Rotation angle in degrees.", &pts, &color).has_value());
}

TEST(KeywordsTest, DependencyPhrases) {
  ParamInfo src;
  src.name = "src1";
  src.size_spec = RgbImageSize();
  src.type_domain = {ScalarType::kUInt8};
  auto deps = InferDependencies("Second array of the same size and type as src1.", {src});
  EXPECT_EQ(deps.size(), 2u);
  auto only_type = InferDependencies("Output of the same depth as src1.", {src});
  ASSERT_EQ(only_type.size(), 1u);
  EXPECT_EQ(only_type[0].kind, DependencyKind::kSameType);
  auto bounded = InferDependencies("Points lying within img.", {src});
  EXPECT_TRUE(bounded.empty());  // no parameter named img
}

TEST(KeywordsTest, PointsBoundedByEarlierImage) {
  ParamInfo img = InferParamInfo("img", "Input image.", {});
  ParamInfo pts = InferParamInfo("pts", "Polygon points, int32.", {img});
  ASSERT_EQ(pts.description.depends_on.size(), 1u);
  EXPECT_EQ(pts.description.depends_on[0].kind, DependencyKind::kBoundedByShape);
  EXPECT_EQ(pts.type_domain, (std::vector<ScalarType>{ScalarType::kInt32}));
}

TEST(KeywordsTest, OptionsMakeParameterUnmodifiable) {
  ParamInfo p = InferParamInfo("flag", "One of #A, #B.", {});
  EXPECT_FALSE(p.flag);
  ParamInfo q = InferParamInfo("alpha", "Weight, float in [0, 1).", {});
  EXPECT_TRUE(q.flag);
  EXPECT_EQ(q.type_domain, (std::vector<ScalarType>{ScalarType::kFloat32}));
}

TEST(KeywordsTest, EmptyTextYieldsBareParam) {
  ParamInfo p = InferParamInfo("x", "   ", {});
  EXPECT_TRUE(p.type_domain.empty());
  EXPECT_FALSE(p.size_spec.has_value());
  EXPECT_TRUE(p.flag);
}

TEST(KeywordsTest, WholeWordMatching) {
  EXPECT_TRUE(detail::HasWord("an image here", "image"));
  EXPECT_FALSE(detail::HasWord("imagery", "image"));
}

}  // namespace
}  // namespace docfuzz::keywords
