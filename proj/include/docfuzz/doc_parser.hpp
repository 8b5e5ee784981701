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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docfuzz/detail/json_reader.hpp"
#include "docfuzz/detail/text.hpp"
#include "docfuzz/error.hpp"

namespace docfuzz {

struct RawApiDoc {
  std::string api_path;  // e.g. "cv2.getRotationMatrix2D"
  std::string body;      // full docstring, may be empty
};

enum class DocClass { kWellDocumented, kPoorlyDocumented, kUndocumented };

inline std::string_view ToString(DocClass c) {
  switch (c) {
    case DocClass::kWellDocumented: return "well_documented";
    case DocClass::kPoorlyDocumented: return "poorly_documented";
    case DocClass::kUndocumented: return "undocumented";
  }
  return "?";
}

inline std::optional<DocClass> ParseDocClass(std::string_view s) {
  for (DocClass c : {DocClass::kWellDocumented, DocClass::kPoorlyDocumented,
                     DocClass::kUndocumented}) {
    if (ToString(c) == s) return c;
  }
  return std::nullopt;
}

struct SignatureInfo {
  std::string api_name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  // Names written inside [...] in the parameter list; they are also outputs.
  std::vector<std::string> optional_buffer_params;

  bool operator==(const SignatureInfo&) const = default;
};

struct ParamDescription {
  std::string name;
  std::string text;
  bool operator==(const ParamDescription&) const = default;
};

inline constexpr std::string_view kNoDocumentationSentinel =
    "No documentation available";

namespace detail {

// Strips the ". " prefix OpenCV puts in front of every docstring line after
// the signature, plus the surrounding whitespace.
inline std::string_view StripDocLine(std::string_view line) {
  line = Trim(line);
  if (!line.empty() && line.front() == '.') {
    std::string_view rest = line.substr(1);
    if (rest.empty() || IsSpace(rest.front())) line = Trim(rest);
  }
  return line;
}

inline bool LooksLikeSignature(std::string_view line) {
  line = Trim(line);
  if (line.empty() || line.front() == '@' || line.front() == '.') return false;
  return line.find('(') != line.npos && line.find("->") != line.npos;
}

inline bool HasDocTags(std::string_view body) {
  for (std::string_view raw : SplitLines(body)) {
    std::string_view line = StripDocLine(raw);
    if (line.starts_with("@param") || line.starts_with("@brief")) return true;
  }
  return false;
}

}  // namespace detail

// Parses "name(a, b[, c[, d]]) -> x, y". Bracketed names become optional
// buffer params and are appended to the outputs when the arrow list does
// not already name them.
inline SignatureInfo ParseSignature(std::string_view sig_line) {
  using detail::IsIdentChar;
  using detail::IsSpace;
  using detail::Trim;
  std::string_view line = Trim(sig_line);
  std::size_t open = line.find('(');
  if (open == line.npos) throw MalformedSignature("missing '('");
  SignatureInfo info;
  info.api_name = std::string(Trim(line.substr(0, open)));
  if (info.api_name.empty()) throw MalformedSignature("empty API name");
  if (!detail::IsQualifiedIdentifier(info.api_name)) {
    throw MalformedSignature("invalid API name '" + info.api_name + "'");
  }

  // Walk the parameter list. `prev` remembers the last significant token
  // kind so that stray commas and juxtaposed names are rejected.
  enum class Prev { kOpen, kIdent, kComma, kBracketOpen, kBracketClose };
  Prev prev = Prev::kOpen;
  int depth = 0;
  bool optional_seen = false;
  std::size_t i = open + 1;
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return;
    if (!detail::IsIdentifier(token)) {
      throw MalformedSignature("invalid parameter name '" + token + "'");
    }
    if (prev == Prev::kIdent) throw MalformedSignature("missing ',' before " + token);
    if (depth > 0) {
      info.optional_buffer_params.push_back(token);
    } else {
      if (optional_seen) {
        throw MalformedSignature("required parameter after optional group");
      }
      info.inputs.push_back(token);
    }
    prev = Prev::kIdent;
    token.clear();
  };
  bool closed = false;
  for (; i < line.size(); ++i) {
    char c = line[i];
    if (IsIdentChar(c)) {
      token += c;
      continue;
    }
    flush();
    if (IsSpace(c)) continue;
    if (c == ',') {
      if (prev != Prev::kIdent && prev != Prev::kBracketOpen &&
          prev != Prev::kBracketClose) {
        throw MalformedSignature("unexpected ','");
      }
      prev = Prev::kComma;
    } else if (c == '[') {
      ++depth;
      optional_seen = true;
      prev = Prev::kBracketOpen;
    } else if (c == ']') {
      if (depth == 0) throw MalformedSignature("unbalanced ']'");
      if (prev == Prev::kComma || prev == Prev::kBracketOpen) {
        throw MalformedSignature("empty optional group");
      }
      --depth;
      prev = Prev::kBracketClose;
    } else if (c == ')') {
      closed = true;
      break;
    } else {
      throw MalformedSignature(std::string("unexpected character '") + c + "'");
    }
  }
  if (!closed) throw MalformedSignature("unbalanced '('");
  if (depth != 0) throw MalformedSignature("unbalanced '['");
  if (prev == Prev::kComma) throw MalformedSignature("trailing ','");

  std::string_view rest = Trim(line.substr(i + 1));
  if (!rest.starts_with("->")) throw MalformedSignature("missing '->'");
  rest = Trim(rest.substr(2));
  if (!rest.empty() && rest.front() == '(' && rest.back() == ')') {
    rest = Trim(rest.substr(1, rest.size() - 2));
  }
  if (rest.empty()) throw MalformedSignature("no outputs after '->'");
  std::size_t start = 0;
  while (start <= rest.size()) {
    std::size_t comma = rest.find(',', start);
    std::string_view name = Trim(rest.substr(
        start, comma == rest.npos ? rest.npos : comma - start));
    if (!detail::IsIdentifier(name)) {
      throw MalformedSignature("invalid output name '" + std::string(name) + "'");
    }
    info.outputs.emplace_back(name);
    if (comma == rest.npos) break;
    start = comma + 1;
  }

  std::vector<std::string> seen = info.inputs;
  for (const auto& name : info.optional_buffer_params) {
    if (std::find(seen.begin(), seen.end(), name) != seen.end()) {
      throw MalformedSignature("duplicate parameter '" + name + "'");
    }
    seen.push_back(name);
  }
  for (std::size_t a = 0; a < info.inputs.size(); ++a) {
    for (std::size_t b = a + 1; b < info.inputs.size(); ++b) {
      if (info.inputs[a] == info.inputs[b]) {
        throw MalformedSignature("duplicate parameter '" + info.inputs[a] + "'");
      }
    }
  }
  for (const auto& name : info.optional_buffer_params) {
    if (std::find(info.outputs.begin(), info.outputs.end(), name) ==
        info.outputs.end()) {
      info.outputs.push_back(name);
    }
  }
  return info;
}

// Canonical text form; ParseSignature(RenderSignature(s)) == s.
inline std::string RenderSignature(const SignatureInfo& sig) {
  std::string out = sig.api_name + "(";
  for (std::size_t i = 0; i < sig.inputs.size(); ++i) {
    if (i) out += ", ";
    out += sig.inputs[i];
  }
  for (std::size_t i = 0; i < sig.optional_buffer_params.size(); ++i) {
    out += (i == 0 && sig.inputs.empty()) ? "[" : "[, ";
    out += sig.optional_buffer_params[i];
  }
  out.append(sig.optional_buffer_params.size(), ']');
  out += ") -> ";
  for (std::size_t i = 0; i < sig.outputs.size(); ++i) {
    if (i) out += ", ";
    out += sig.outputs[i];
  }
  return out;
}

inline DocClass ClassifyDoc(const RawApiDoc& doc) {
  std::string_view body = detail::Trim(doc.body);
  if (body.empty() || body == kNoDocumentationSentinel) {
    return DocClass::kUndocumented;
  }
  if (detail::HasDocTags(body)) return DocClass::kWellDocumented;
  for (std::string_view line : detail::SplitLines(body)) {
    if (!detail::LooksLikeSignature(line)) continue;
    try {
      ParseSignature(line);
      return DocClass::kPoorlyDocumented;
    } catch (const MalformedSignature&) {
    }
    break;
  }
  return DocClass::kWellDocumented;
}

// One entry per "@param" line; continuation lines are folded in with a
// single space. Blank lines, "..." elisions and other tags end a block.
inline std::vector<ParamDescription> ParseParamDescriptions(std::string_view body) {
  std::vector<ParamDescription> out;
  bool open = false;
  for (std::string_view raw : detail::SplitLines(body)) {
    std::string_view line = detail::StripDocLine(raw);
    if (line.starts_with("@param")) {
      std::string_view rest = line.substr(6);
      if (!rest.empty() && !detail::IsSpace(rest.front())) {
        open = false;
        continue;
      }
      rest = detail::Trim(rest);
      std::size_t end = 0;
      while (end < rest.size() && !detail::IsSpace(rest[end])) ++end;
      out.push_back({std::string(rest.substr(0, end)),
                     std::string(detail::Trim(rest.substr(end)))});
      open = true;
    } else if (line.empty() || line == "..." || line.front() == '@' ||
               detail::LooksLikeSignature(line)) {
      open = false;
    } else if (open) {
      std::string& text = out.back().text;
      if (!text.empty()) text += ' ';
      text += line;
    }
  }
  return out;
}

inline std::string ParseBrief(std::string_view body) {
  std::string brief;
  bool open = false;
  for (std::string_view raw : detail::SplitLines(body)) {
    std::string_view line = detail::StripDocLine(raw);
    if (line.starts_with("@brief")) {
      brief = std::string(detail::Trim(line.substr(6)));
      open = true;
    } else if (line.empty() || line == "..." || line.front() == '@') {
      open = false;
    } else if (open) {
      brief += ' ';
      brief += line;
    }
  }
  return brief;
}

// Output record of the parse stage.
struct ParsedDoc {
  RawApiDoc doc;
  DocClass doc_class = DocClass::kUndocumented;
  std::optional<SignatureInfo> signature;
  std::vector<ParamDescription> params;
  std::string brief;
  std::size_t extra_overloads = 0;
  std::string error;  // why the signature could not be parsed, if it couldn't
};

inline ParsedDoc ParseDoc(const RawApiDoc& doc) {
  ParsedDoc out;
  out.doc = doc;
  out.doc_class = ClassifyDoc(doc);
  if (out.doc_class == DocClass::kUndocumented) return out;
  bool first = true;
  for (std::string_view line : detail::SplitLines(doc.body)) {
    if (!detail::LooksLikeSignature(line)) continue;
    if (!first) {
      ++out.extra_overloads;
      continue;
    }
    first = false;
    try {
      out.signature = ParseSignature(line);
    } catch (const MalformedSignature& e) {
      out.error = e.what();
    }
  }
  if (first) out.error = "no signature line";
  if (out.doc_class == DocClass::kWellDocumented) {
    out.params = ParseParamDescriptions(doc.body);
    out.brief = ParseBrief(doc.body);
  }
  return out;
}

// Name used on the wire: the api path without its root module, so that
// "cv2.aruco.foo" is resolved as "aruco.foo" inside the target namespace.
inline std::string TargetApiName(const RawApiDoc& doc, const SignatureInfo& sig) {
  std::size_t dot = doc.api_path.find('.');
  if (dot == std::string::npos || dot + 1 >= doc.api_path.size()) {
    return sig.api_name;
  }
  return doc.api_path.substr(dot + 1);
}

// ---- JSON ---------------------------------------------------------------

inline std::vector<RawApiDoc> RawDocsFromJson(const Json& j) {
  detail::RequireArray(j, "");
  std::vector<RawApiDoc> docs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    detail::ObjectReader r(j[i], detail::ChildPointer("", i));
    RawApiDoc d;
    d.api_path = r.String("api_path");
    if (d.api_path.empty()) throw SchemaError(r.Path("api_path"), "empty api_path");
    d.body = r.String("body");
    r.RejectUnknown();
    docs.push_back(std::move(d));
  }
  return docs;
}

inline Json ToJson(const SignatureInfo& s) {
  Json j = Json::object();
  j["api_name"] = s.api_name;
  j["inputs"] = s.inputs;
  j["outputs"] = s.outputs;
  j["optional_buffer_params"] = s.optional_buffer_params;
  return j;
}

inline std::vector<std::string> StringListFromJson(const Json& j,
                                                   const std::string& pointer) {
  detail::RequireArray(j, pointer);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) {
      throw SchemaError(detail::ChildPointer(pointer, i), "expected a string");
    }
    out.push_back(j[i].get<std::string>());
  }
  return out;
}

inline SignatureInfo SignatureFromJson(const Json& j, const std::string& pointer) {
  detail::ObjectReader r(j, pointer);
  SignatureInfo s;
  s.api_name = r.String("api_name");
  s.inputs = StringListFromJson(r.Required("inputs"), r.Path("inputs"));
  s.outputs = StringListFromJson(r.Required("outputs"), r.Path("outputs"));
  s.optional_buffer_params = StringListFromJson(
      r.Required("optional_buffer_params"), r.Path("optional_buffer_params"));
  r.RejectUnknown();
  return s;
}

inline Json ToJson(const ParsedDoc& p) {
  Json j = Json::object();
  j["api_path"] = p.doc.api_path;
  j["doc_class"] = ToString(p.doc_class);
  j["signature"] = p.signature ? ToJson(*p.signature) : Json(nullptr);
  Json params = Json::array();
  for (const auto& d : p.params) params.push_back({{"name", d.name}, {"text", d.text}});
  j["params"] = std::move(params);
  j["brief"] = p.brief;
  j["extra_overloads"] = p.extra_overloads;
  j["error"] = p.error;
  return j;
}

inline ParsedDoc ParsedDocFromJson(const Json& j, const std::string& pointer) {
  detail::ObjectReader r(j, pointer);
  ParsedDoc p;
  p.doc.api_path = r.String("api_path");
  auto cls = ParseDocClass(r.String("doc_class"));
  if (!cls) throw SchemaError(r.Path("doc_class"), "unknown doc class");
  p.doc_class = *cls;
  if (const Json* s = r.Optional("signature")) {
    p.signature = SignatureFromJson(*s, r.Path("signature"));
  }
  const Json& params = detail::RequireArray(r.Required("params"), r.Path("params"));
  for (std::size_t i = 0; i < params.size(); ++i) {
    detail::ObjectReader pr(params[i], detail::ChildPointer(r.Path("params"), i));
    p.params.push_back({pr.String("name"), pr.String("text")});
    pr.RejectUnknown();
  }
  p.brief = r.String("brief");
  p.extra_overloads = r.UInt("extra_overloads");
  p.error = r.String("error");
  r.RejectUnknown();
  return p;
}

}  // namespace docfuzz
