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

#include "docfuzz/doc_parser.hpp"

#include <gtest/gtest.h>

#include "docfuzz/rng.hpp"
#include "support/test_support.hpp"

namespace docfuzz {
namespace {

TEST(ParseSignatureTest, PlainSignature) {
  SignatureInfo s = ParseSignature("getRotationMatrix2D(center, angle, scale) -> retval");
  EXPECT_EQ(s.api_name, "getRotationMatrix2D");
  EXPECT_EQ(s.inputs, (std::vector<std::string>{"center", "angle", "scale"}));
  EXPECT_EQ(s.outputs, (std::vector<std::string>{"retval"}));
  EXPECT_TRUE(s.optional_buffer_params.empty());
}

TEST(ParseSignatureTest, OptionalBuffersBecomeOutputs) {
  SignatureInfo s = ParseSignature("calcBackProject(images, channels, hist, ranges, scale[, dst]) -> dst");
  EXPECT_EQ(s.inputs,
            (std::vector<std::string>{"images", "channels", "hist", "ranges", "scale"}));
  EXPECT_EQ(s.optional_buffer_params, (std::vector<std::string>{"dst"}));
  EXPECT_EQ(s.outputs, (std::vector<std::string>{"dst"}));
}

TEST(ParseSignatureTest, NestedOptionalGroups) {
  SignatureInfo s = ParseSignature("f(a[, b[, c]]) -> x, y");
  EXPECT_EQ(s.inputs, (std::vector<std::string>{"a"}));
  EXPECT_EQ(s.optional_buffer_params, (std::vector<std::string>{"b", "c"}));
  EXPECT_EQ(s.outputs, (std::vector<std::string>{"x", "y", "b", "c"}));
}

TEST(ParseSignatureTest, ParenthesizedOutputsAndQualifiedName) {
  SignatureInfo s = ParseSignature("aruco.detect(img) -> (corners, ids)");
  EXPECT_EQ(s.api_name, "aruco.detect");
  EXPECT_EQ(s.outputs, (std::vector<std::string>{"corners", "ids"}));
}

TEST(ParseSignatureTest, NoInputs) {
  SignatureInfo s = ParseSignature("getTickCount() -> retval");
  EXPECT_TRUE(s.inputs.empty());
  EXPECT_EQ(RenderSignature(s), "getTickCount() -> retval");
}

TEST(ParseSignatureTest, RejectsMalformed) {
  for (const char* bad :
       {"f(a, b -> x", "f(a,, b) -> x", "f(a b) -> x", "f(a) x", "f(a) ->", "(a) -> x",
        "f(a]) -> x", "f(a[, b) -> x", "f(a, a) -> x", "f([, b], c) -> x", "f(a,) -> x",
        "f(a) -> 1x", "f(a-b) -> x", "f(a[]) -> x"}) {
    EXPECT_THROW(ParseSignature(bad), MalformedSignature) << bad;
  }
}

TEST(ParseSignatureTest, RenderRoundTripProperty) {
  Rng rng(2024);
  for (int iter = 0; iter < 500; ++iter) {
    SignatureInfo s;
    s.api_name = "fn" + std::to_string(iter);
    auto n_in = rng.Range(0, 5), n_opt = rng.Range(0, 3), n_out = rng.Range(1, 3);
    for (int i = 0; i < n_in; ++i) s.inputs.push_back("in" + std::to_string(i));
    for (int i = 0; i < n_opt; ++i) s.optional_buffer_params.push_back("buf" + std::to_string(i));
    for (int i = 0; i < n_out; ++i) s.outputs.push_back("out" + std::to_string(i));
    for (const auto& b : s.optional_buffer_params) s.outputs.push_back(b);
    EXPECT_EQ(ParseSignature(RenderSignature(s)), s) << RenderSignature(s);
  }
}

TEST(ClassifyDocTest, ThreeClasses) {
  EXPECT_EQ(ClassifyDoc({"cv2.x", ""}), DocClass::kUndocumented);
  EXPECT_EQ(ClassifyDoc({"cv2.x", "  No documentation available \n"}), DocClass::kUndocumented);
  EXPECT_EQ(ClassifyDoc({"cv2.x", "x(a) -> y"}), DocClass::kPoorlyDocumented);
  EXPECT_EQ(ClassifyDoc({"cv2.x", "x(a) -> y\n. @param a The input."}),
            DocClass::kWellDocumented);
  EXPECT_EQ(ClassifyDoc({"cv2.x", "x(a) -> y\n. @brief Does x."}), DocClass::kWellDocumented);
  // Free prose without a parsable signature counts as documentation.
  EXPECT_EQ(ClassifyDoc({"cv2.x", "Some prose about x."}), DocClass::kWellDocumented);
}

TEST(ParamDescriptionTest, FoldsContinuationLines) {
  auto params = ParseParamDescriptions(
      "f(a, b) -> c\n"
      ". @param a First line\n"
      ".   continued here.\n"
      ".\n"
      ". @param b Second.\n"
      ". @sa other\n"
      ". not part of b\n");
  ASSERT_EQ(params.size(), 2u);
  EXPECT_EQ(params[0].name, "a");
  EXPECT_EQ(params[0].text, "First line continued here.");
  EXPECT_EQ(params[1].text, "Second.");
}

TEST(ParseDocTest, ListingFixture) {
  auto docs = testing::LoadRawDocs("listings.json");
  ASSERT_EQ(docs.size(), 3u);

  ParsedDoc rot = ParseDoc(docs[0]);
  EXPECT_EQ(rot.doc_class, DocClass::kWellDocumented);
  ASSERT_TRUE(rot.signature.has_value());
  EXPECT_EQ(*rot.signature,
            (SignatureInfo{"getRotationMatrix2D", {"center", "angle", "scale"}, {"retval"}, {}}));
  ASSERT_EQ(rot.params.size(), 3u);
  EXPECT_EQ(rot.params[1].name, "angle");
  EXPECT_EQ(rot.brief, "Calculates an affine matrix of 2D rotation.");

  ParsedDoc back = ParseDoc(docs[1]);
  EXPECT_EQ(back.doc_class, DocClass::kPoorlyDocumented);
  ASSERT_TRUE(back.signature.has_value());
  EXPECT_EQ(*back.signature,
            (SignatureInfo{"calcBackProject",
                           {"images", "channels", "hist", "ranges", "scale"},
                           {"dst"},
                           {"dst"}}));
  EXPECT_TRUE(back.params.empty());

  ParsedDoc none = ParseDoc(docs[2]);
  EXPECT_EQ(none.doc_class, DocClass::kUndocumented);
  EXPECT_FALSE(none.signature.has_value());
}

TEST(ParseDocTest, FirstSignatureWinsAndOverloadsAreCounted) {
  ParsedDoc p = ParseDoc({"cv2.f", "f(a) -> x\nf(a, b) -> x\n. @param a A."});
  ASSERT_TRUE(p.signature.has_value());
  EXPECT_EQ(p.signature->inputs.size(), 1u);
  EXPECT_EQ(p.extra_overloads, 1u);
}

TEST(ParseDocTest, MalformedSignatureIsReported) {
  ParsedDoc p = ParseDoc({"cv2.f", "f(a,, b) -> x\n. @param a A."});
  EXPECT_EQ(p.doc_class, DocClass::kWellDocumented);
  EXPECT_FALSE(p.signature.has_value());
  EXPECT_FALSE(p.error.empty());
}

TEST(ParseDocTest, JsonRoundTrip) {
  for (const auto& d : testing::LoadRawDocs("mock_docs.json")) {
    ParsedDoc p = ParseDoc(d);
    ParsedDoc back = ParsedDocFromJson(Json::parse(ToJson(p).dump()), "");
    EXPECT_EQ(back.doc.api_path, p.doc.api_path);
    EXPECT_EQ(back.doc_class, p.doc_class);
    EXPECT_EQ(back.signature, p.signature);
    EXPECT_EQ(back.params, p.params);
    EXPECT_EQ(back.brief, p.brief);
  }
}

TEST(ParseDocTest, RawDocsSchema) {
  EXPECT_THROW(RawDocsFromJson(Json::parse(R"([{"api_path":"x"}])")), SchemaError);
  EXPECT_THROW(RawDocsFromJson(Json::parse(R"({"api_path":"x","body":""})")), SchemaError);
  EXPECT_THROW(RawDocsFromJson(Json::parse(R"([{"api_path":"x","body":"","extra":1}])")),
               SchemaError);
}

TEST(TargetApiNameTest, DropsRootModule) {
  SignatureInfo s{"detect", {}, {"x"}, {}};
  EXPECT_EQ(TargetApiName({"cv2.aruco.detect", ""}, s), "aruco.detect");
  EXPECT_EQ(TargetApiName({"resize", ""}, s), "detect");
}

}  // namespace
}  // namespace docfuzz
