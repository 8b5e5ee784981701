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

#include "docfuzz/schema.hpp"

#include <gtest/gtest.h>

#include "docfuzz/rng.hpp"

namespace docfuzz {
namespace {

ParamInfo ImageParam(std::string name) {
  ParamInfo p;
  p.name = std::move(name);
  p.type_domain = {ScalarType::kUInt8, ScalarType::kFloat32};
  p.size_spec = RgbImageSize({1, 3});
  return p;
}

ParamInfo ScalarParam(std::string name, ScalarType t = ScalarType::kFloat64) {
  ParamInfo p;
  p.name = std::move(name);
  p.type_domain = {t};
  return p;
}

bool HasRule(const ValidationReport& r, std::string_view rule) {
  return std::any_of(r.begin(), r.end(), [&](const Violation& v) { return v.rule == rule; });
}

TEST(ValidateTest, CleanInfoHasNoViolations) {
  StandardizedApiInfo info{"blend", {ImageParam("src1"), ImageParam("src2"), ScalarParam("alpha")}};
  info.params[1].description.depends_on = {{"src1", DependencyKind::kSameType},
                                           {"src1", DependencyKind::kSameShape}};
  info.params[2].description.value_range = Interval{0.0, 1.0};
  EXPECT_TRUE(Validate(info).empty());
}

TEST(ValidateTest, EachRuleFires) {
  auto check = [](StandardizedApiInfo info, std::string_view rule) {
    EXPECT_TRUE(HasRule(Validate(info), rule)) << rule;
  };
  check({"", {}}, rules::kEmptyApiName);
  check({"f", {ScalarParam("1bad")}}, rules::kInvalidName);
  check({"f", {ScalarParam("a"), ScalarParam("a")}}, rules::kDuplicateParam);
  {
    ParamInfo p = ScalarParam("a");
    p.flag = false;
    check({"f", {p}}, rules::kUnmodifiableWithoutDomain);
  }
  {
    ParamInfo p = ScalarParam("a");
    p.type_domain = {ScalarType::kInt32, ScalarType::kInt32};
    check({"f", {p}}, rules::kDuplicateType);
  }
  {
    ParamInfo p = ImageParam("a");
    p.type_domain = {ScalarType::kString};
    check({"f", {p}}, rules::kNonNumericArray);
  }
  {
    ParamInfo p = ScalarParam("a");
    p.description.options = std::vector<EncodedValue>{};
    check({"f", {p}}, rules::kEmptyOptions);
  }
  {
    ParamInfo p = ScalarParam("a");
    p.description.value_range = Interval{2.0, 1.0};
    check({"f", {p}}, rules::kInvalidRange);
  }
  {
    ParamInfo b = ImageParam("b");
    b.description.depends_on = {{"a", DependencyKind::kSameType}};
    check({"f", {b, ImageParam("a")}}, rules::kForwardDependency);
  }
  {
    ParamInfo b = ImageParam("b");
    b.description.depends_on = {{"zzz", DependencyKind::kSameType}};
    check({"f", {b}}, rules::kUnknownDependency);
  }
  {
    ParamInfo b = ImageParam("b");
    b.description.depends_on = {{"b", DependencyKind::kSameType}};
    check({"f", {b}}, rules::kSelfDependency);
  }
  {
    ParamInfo b = ImageParam("b");
    b.description.depends_on = {{"s", DependencyKind::kSameShape}};
    check({"f", {ScalarParam("s"), b}}, rules::kShapeOfScalar);
  }
  {
    ParamInfo pts = ScalarParam("pt");
    pts.description.depends_on = {{"img", DependencyKind::kBoundedByShape}};
    check({"f", {ImageParam("img"), pts}}, rules::kBoundedShape);
  }
  {
    ParamInfo pts = ScalarParam("pts", ScalarType::kInt32);
    pts.size_spec = PointListSize();
    pts.description.depends_on = {{"img", DependencyKind::kBoundedByShape, {0, 7}}};
    check({"f", {ImageParam("img"), pts}}, rules::kBoundedAxes);
  }
  {
    ParamInfo p = ImageParam("a");
    p.size_spec = SizeSpec{{FixedDim{0}}};
    check({"f", {p}}, rules::kFixedDim);
  }
  {
    ParamInfo p = ImageParam("a");
    p.size_spec = SizeSpec{{VarDim{}, ChannelSetDim{{5}}}};
    check({"f", {p}}, rules::kChannelSet);
  }
  {
    ParamInfo p = ImageParam("a");
    p.size_spec = SizeSpec{{RefDim{"later", 0}}};
    check({"f", {p, ImageParam("later")}}, rules::kRefDim);
  }
}

TEST(SchemaJsonTest, RejectsUnknownKeysAndKinds) {
  Json j = ToJson(StandardizedApiInfo{"f", {ImageParam("a")}});
  j["bogus"] = 1;
  EXPECT_THROW(ApiInfoFromJson(j, ""), SchemaError);

  Json k = ToJson(StandardizedApiInfo{"f", {ImageParam("a")}});
  k["params"][0]["size_spec"]["dims"][0]["kind"] = "wild";
  EXPECT_THROW(ApiInfoFromJson(k, ""), SchemaError);

  Json t = ToJson(StandardizedApiInfo{"f", {ImageParam("a")}});
  t["params"][0]["type_domain"] = Json::array({"uint8", "uint8"});
  EXPECT_THROW(ApiInfoFromJson(t, ""), SchemaError);

  Json p = ToJson(StandardizedApiInfo{"f", {}});
  p["provenance"] = "guessed";
  EXPECT_THROW(ApiInfoFromJson(p, ""), SchemaError);
}

TEST(SchemaJsonTest, ErrorCarriesPointer) {
  Json j = ToJson(StandardizedApiInfo{"f", {ImageParam("a"), ImageParam("b")}});
  j["params"][1]["flag"] = "yes";
  try {
    ApiInfoFromJson(j, "");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("/params/1/flag"), std::string::npos) << e.what();
  }
}

// Random valid infos survive serialization unchanged.
TEST(SchemaJsonTest, RoundTripProperty) {
  Rng rng(99);
  const ScalarType numeric[] = {ScalarType::kUInt8, ScalarType::kInt32, ScalarType::kFloat32,
                                ScalarType::kFloat64};
  for (int iter = 0; iter < 300; ++iter) {
    StandardizedApiInfo info;
    info.api_name = "api" + std::to_string(iter);
    info.output_count = static_cast<std::size_t>(rng.Range(0, 3));
    info.provenance = rng.Chance(0.5) ? Provenance::kParsed : Provenance::kEnriched;
    auto n = rng.Range(1, 6);
    for (int i = 0; i < n; ++i) {
      ParamInfo p;
      p.name = "p" + std::to_string(i);
      p.type_domain = {numeric[rng.Below(4)]};
      if (rng.Chance(0.5)) {
        p.size_spec = rng.Chance(0.5) ? RgbImageSize({1, 3, 4}) : SizeSpec{{FixedDim{3}}};
      }
      if (rng.Chance(0.3)) p.description.value_range = Interval{-1.0 * i, 10.0 + i};
      if (rng.Chance(0.3)) {
        p.description.options =
            std::vector<EncodedValue>{EncodedValue::Int(i), EncodedValue::Enum("K", 2)};
      }
      if (rng.Chance(0.2)) p.default_value = EncodedValue::Float(0.5);
      if (i > 0 && rng.Chance(0.4)) {
        p.description.depends_on.push_back({"p0", DependencyKind::kSameType});
      }
      p.description.raw_text = "text " + std::to_string(i);
      info.params.push_back(std::move(p));
    }
    StandardizedApiInfo back = ApiInfoFromJsonText(ToJsonText(info));
    EXPECT_EQ(back, info) << ToJsonText(info);
  }
}

TEST(SchemaJsonTest, ArrayFileRoundTrip) {
  std::vector<StandardizedApiInfo> infos{{"a", {ImageParam("x")}}, {"b", {ScalarParam("y")}}};
  EXPECT_EQ(InfosFromJsonText(InfosToJsonText(infos)), infos);
  EXPECT_THROW(InfosFromJsonText("{}"), SchemaError);
}

TEST(SizeSpecTest, TupleDetection) {
  EXPECT_TRUE((SizeSpec{{FixedDim{3}}}).is_tuple());
  EXPECT_FALSE(RgbImageSize().is_tuple());
  EXPECT_FALSE(PointListSize().is_tuple());
}

}  // namespace
}  // namespace docfuzz
