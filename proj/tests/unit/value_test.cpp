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

#include "docfuzz/value.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "docfuzz/detail/base64.hpp"
#include "docfuzz/detail/json_reader.hpp"

namespace docfuzz {
namespace {

TEST(Base64Test, KnownVectors) {
  auto enc = [](std::string_view s) {
    return detail::Base64Encode(std::vector<std::uint8_t>(s.begin(), s.end()));
  };
  EXPECT_EQ(enc(""), "");
  EXPECT_EQ(enc("f"), "Zg==");
  EXPECT_EQ(enc("fo"), "Zm8=");
  EXPECT_EQ(enc("foo"), "Zm9v");
  EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
}

TEST(Base64Test, RoundTripsEveryLength) {
  for (std::size_t n = 0; n < 40; ++n) {
    std::vector<std::uint8_t> bytes(n);
    for (std::size_t i = 0; i < n; ++i) bytes[i] = static_cast<std::uint8_t>(i * 37 + 11);
    auto decoded = detail::Base64Decode(detail::Base64Encode(bytes));
    ASSERT_TRUE(decoded.has_value()) << n;
    EXPECT_EQ(*decoded, bytes) << n;
  }
}

TEST(Base64Test, RejectsMalformed) {
  EXPECT_FALSE(detail::Base64Decode("Zg=").has_value());
  EXPECT_FALSE(detail::Base64Decode("Z===").has_value());
  EXPECT_FALSE(detail::Base64Decode("Zm9v!A==").has_value());
  EXPECT_FALSE(detail::Base64Decode("Z=9v").has_value());
}

TEST(ScalarTypeTest, NamesRoundTrip) {
  for (ScalarType t : kAllScalarTypes) {
    EXPECT_EQ(ParseScalarType(ToString(t)), t);
  }
  EXPECT_FALSE(ParseScalarType("complex64").has_value());
  EXPECT_EQ(ElementSize(ScalarType::kFloat64), 8u);
  EXPECT_EQ(ElementSize(ScalarType::kInt32), 4u);
  EXPECT_FALSE(IsArrayDtype(ScalarType::kString));
}

TEST(NdArrayTest, SetRoundsHalfAwayAndSaturates) {
  NdArray a(ScalarType::kUInt8, {5});
  a.Set(0, 2.5);
  a.Set(1, -3.0);
  a.Set(2, 300.0);
  a.Set(3, std::nan(""));
  a.Set(4, 1.49);
  EXPECT_EQ(a.Get(0), 3.0);
  EXPECT_EQ(a.Get(1), 0.0);
  EXPECT_EQ(a.Get(2), 255.0);
  EXPECT_EQ(a.Get(3), 0.0);
  EXPECT_EQ(a.Get(4), 1.0);

  NdArray b(ScalarType::kInt32, {2});
  b.Set(0, -2.5);
  b.Set(1, 1e12);
  EXPECT_EQ(b.Get(0), -3.0);
  EXPECT_EQ(b.Get(1), 2147483647.0);
}

TEST(NdArrayTest, FloatStorage) {
  NdArray a(ScalarType::kFloat32, {2, 2});
  a.Set(3, 0.1);
  EXPECT_EQ(a.Get(3), static_cast<double>(0.1f));
  EXPECT_EQ(a.bytes().size(), 16u);
  EXPECT_EQ(a.size(), 4u);
}

TEST(NdArrayTest, FromBytesChecksLength) {
  EXPECT_THROW(NdArray::FromBytes(ScalarType::kInt32, {3}, std::vector<std::uint8_t>(11)),
               InvalidApiInfo);
  EXPECT_NO_THROW(NdArray::FromBytes(ScalarType::kInt32, {3}, std::vector<std::uint8_t>(12)));
  EXPECT_THROW(NdArray(ScalarType::kString, {1}), InvalidApiInfo);
}

TEST(NdArrayTest, ZeroSizedAxis) {
  NdArray a(ScalarType::kFloat64, {0, 4});
  EXPECT_EQ(a.size(), 0u);
  EXPECT_TRUE(a.bytes().empty());
  auto back = ValueFromJson(ToJson(EncodedValue::Array(a)), "");
  EXPECT_EQ(back.as_array(), a);
}

std::vector<EncodedValue> SampleValues() {
  NdArray arr(ScalarType::kFloat32, {2, 3});
  for (std::size_t i = 0; i < arr.size(); ++i) arr.Set(i, i * 0.5 - 1.0);
  NdArray u8(ScalarType::kUInt8, {4, 1, 3});
  for (std::size_t i = 0; i < u8.size(); ++i) u8.Set(i, static_cast<double>(i * 20));
  return {EncodedValue::Int(-7),
          EncodedValue::Float(3.25),
          EncodedValue::Float(std::numeric_limits<double>::quiet_NaN()),
          EncodedValue::Float(-std::numeric_limits<double>::infinity()),
          EncodedValue::Bool(true),
          EncodedValue::Str("line\n\"quoted\""),
          EncodedValue::Null(),
          EncodedValue::Enum("INTER_AREA", 3),
          EncodedValue::Seq({EncodedValue::Int(1), EncodedValue::Float(2.5)}),
          EncodedValue::Array(arr),
          EncodedValue::Array(u8)};
}

TEST(EncodedValueTest, JsonRoundTrip) {
  for (const auto& v : SampleValues()) {
    Json j = ToJson(v);
    EncodedValue back = ValueFromJson(Json::parse(j.dump()), "");
    EXPECT_EQ(back, v) << j.dump();
  }
}

TEST(EncodedValueTest, NonFiniteTravelsAsString) {
  Json j = ToJson(EncodedValue::Float(std::numeric_limits<double>::infinity()));
  EXPECT_EQ(j["value"], "inf");
  EXPECT_EQ(ToJson(EncodedValue::Float(std::nan("")))["value"], "nan");
}

TEST(EncodedValueTest, AppendWireMatchesDump) {
  for (const auto& v : SampleValues()) {
    std::string fast;
    AppendWire(fast, v);
    EXPECT_EQ(fast, ToJson(v).dump());
  }
}

TEST(EncodedValueTest, ParseWireJsonRestoresPayloads) {
  NdArray big(ScalarType::kUInt8, {300});
  for (std::size_t i = 0; i < big.size(); ++i) big.Set(i, static_cast<double>(i % 251));
  Json msg = Json::object();
  msg["args"] = Json::array({ToJson(EncodedValue::Array(big)),
                             ToJson(EncodedValue::Str("\"data\":\"x")),
                             ToJson(EncodedValue::Array(NdArray(ScalarType::kInt32, {1})))});
  std::string text = msg.dump();
  EXPECT_EQ(detail::ParseWireJson(text), Json::parse(text));
}

TEST(EncodedValueTest, RejectsMalformedValues) {
  auto bad = [](const char* text) {
    EXPECT_THROW(ValueFromJson(Json::parse(text), ""), SchemaError) << text;
  };
  bad(R"({"kind":"complex","value":1})");
  bad(R"({"kind":"int","value":1.5})");
  bad(R"({"kind":"ndarray","dtype":"uint8","shape":[2],"data":"AA=="})");
  bad(R"({"kind":"ndarray","dtype":"str","shape":[1],"data":""})");
  bad(R"({"kind":"float","value":"huge"})");
  bad(R"({"kind":"int","value":1,"extra":true})");
}

TEST(EncodedValueTest, NonFiniteDetection) {
  NdArray a(ScalarType::kFloat64, {3});
  EXPECT_FALSE(ContainsNonFinite(EncodedValue::Array(a)));
  a.Set(2, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(ContainsNonFinite(EncodedValue::Array(a)));
  EXPECT_TRUE(ContainsNonFinite(
      EncodedValue::Seq({EncodedValue::Int(1), EncodedValue::Float(std::nan(""))})));
  EXPECT_FALSE(ContainsNonFinite(EncodedValue::Array(NdArray(ScalarType::kUInt8, {4}))));
}

TEST(EncodedValueTest, TypeTags) {
  EXPECT_EQ(TypeTag(EncodedValue::Array(NdArray(ScalarType::kInt32, {1}))), "int32");
  EXPECT_EQ(TypeTag(EncodedValue::Int(1)), "int");
  EXPECT_EQ(TypeTag(EncodedValue::Null()), "null");
}

}  // namespace
}  // namespace docfuzz
