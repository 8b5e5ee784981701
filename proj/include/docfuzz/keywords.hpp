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

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "docfuzz/detail/text.hpp"
#include "docfuzz/schema.hpp"
#include "docfuzz/value.hpp"

// Offline keyword rules that turn a free-text parameter description into
// structured ParamInfo fields.
namespace docfuzz::keywords {

namespace detail {

inline bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Position of `word` in `text` delimited by non-word characters.
inline std::size_t FindWord(std::string_view text, std::string_view word,
                            std::size_t from = 0) {
  while (true) {
    std::size_t pos = text.find(word, from);
    if (pos == std::string_view::npos) return pos;
    bool left = pos == 0 || !IsWordChar(text[pos - 1]);
    std::size_t end = pos + word.size();
    bool right = end >= text.size() || !IsWordChar(text[end]);
    if (left && right) return pos;
    from = pos + 1;
  }
}

inline bool HasWord(std::string_view text, std::string_view word) {
  return FindWord(text, word) != std::string_view::npos;
}

inline bool HasAnyWord(std::string_view text,
                       std::initializer_list<std::string_view> words) {
  return std::any_of(words.begin(), words.end(),
                     [&](std::string_view w) { return HasWord(text, w); });
}

inline std::string FirstSentence(std::string_view lower) {
  std::size_t dot = lower.find(". ");
  if (dot == std::string_view::npos) dot = lower.find('.');
  return std::string(lower.substr(0, dot));
}

}  // namespace detail

// Lowercased head of the description up to the first connective, e.g.
// "center" for "Center of the rotation in the source image.".
inline std::string LeadingPhrase(std::string_view text) {
  std::string lower = docfuzz::detail::ToLower(text);
  std::size_t cut = lower.size();
  for (std::string_view d : {" of ", " in ", " for ", " to ", " with ", ",", ";",
                             ".", " that ", " where "}) {
    cut = std::min(cut, lower.find(d));
  }
  return std::string(docfuzz::detail::Trim(std::string_view(lower).substr(0, cut)));
}

inline bool MentionsArray(std::string_view text) {
  std::string lead = LeadingPhrase(text);
  return detail::HasAnyWord(lead, {"image", "images", "array", "arrays"});
}

// Scalar types named in the text, ordered by first appearance.
inline std::vector<ScalarType> InferTypes(std::string_view text) {
  static const std::pair<std::string_view, ScalarType> kTable[] = {
      {"uint8", ScalarType::kUInt8},          {"8-bit", ScalarType::kUInt8},
      {"float32", ScalarType::kFloat32},      {"floating-point", ScalarType::kFloat32},
      {"float", ScalarType::kFloat32},        {"float64", ScalarType::kFloat64},
      {"double", ScalarType::kFloat64},       {"int32", ScalarType::kInt32},
      {"integer", ScalarType::kInt32},        {"bool", ScalarType::kBool},
      {"boolean", ScalarType::kBool},         {"string", ScalarType::kString},
  };
  std::string lower = docfuzz::detail::ToLower(text);
  std::vector<std::pair<std::size_t, ScalarType>> hits;
  for (const auto& [word, type] : kTable) {
    std::size_t pos = detail::FindWord(lower, word);
    if (pos != std::string::npos) hits.emplace_back(pos, type);
  }
  std::stable_sort(hits.begin(), hits.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ScalarType> out;
  for (const auto& [pos, type] : hits) {
    if (std::find(out.begin(), out.end(), type) == out.end()) out.push_back(type);
  }
  return out;
}

inline std::vector<int> InferChannels(std::string_view text) {
  std::string lower = docfuzz::detail::ToLower(text);
  std::vector<int> out;
  auto add = [&](int c, std::initializer_list<std::string_view> words) {
    if (detail::HasAnyWord(lower, words)) out.push_back(c);
  };
  add(1, {"grayscale", "single-channel", "1-channel", "single channel"});
  add(2, {"two-channel", "2-channel"});
  add(3, {"three-channel", "3-channel"});
  add(4, {"four-channel", "4-channel"});
  return out;
}

// "[a, b)" or "[a, b]"; closed integer ranges become half-open.
inline std::optional<Interval> InferRange(std::string_view text) {
  static const std::regex kRange(
      R"(\[\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*([\])]))");
  std::string s(text);
  std::smatch m;
  if (!std::regex_search(s, m, kRange)) return std::nullopt;
  double lo = std::strtod(m[1].str().c_str(), nullptr);
  double hi = std::strtod(m[2].str().c_str(), nullptr);
  bool integral = m[2].str().find('.') == std::string::npos;
  if (m[3].str() == "]" && integral) hi += 1.0;
  if (!(lo < hi)) return std::nullopt;
  return Interval{lo, hi};
}

// "#NAME" constants in order of appearance, as enum values indexed by
// position; otherwise "one of 1, 3, 5" integer lists.
inline std::optional<std::vector<EncodedValue>> InferOptions(std::string_view text) {
  static const std::regex kEnum(R"(#([A-Za-z_][A-Za-z0-9_]*))");
  static const std::regex kOneOf(R"(one of\s+(-?\d+(?:\s*(?:,|or|,\s*or)\s*-?\d+)*))",
                                 std::regex::icase);
  static const std::regex kInt(R"(-?\d+)");
  std::string s(text);
  std::vector<std::string> names;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kEnum);
       it != std::sregex_iterator(); ++it) {
    std::string name = (*it)[1].str();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      names.push_back(name);
    }
  }
  if (!names.empty()) {
    std::vector<EncodedValue> out;
    for (std::size_t i = 0; i < names.size(); ++i) {
      out.push_back(EncodedValue::Enum(names[i], static_cast<std::int64_t>(i)));
    }
    return out;
  }
  std::smatch m;
  if (std::regex_search(s, m, kOneOf)) {
    std::string list = m[1].str();
    std::vector<EncodedValue> out;
    for (auto it = std::sregex_iterator(list.begin(), list.end(), kInt);
         it != std::sregex_iterator(); ++it) {
      auto v = EncodedValue::Int(std::strtoll(it->str().c_str(), nullptr, 10));
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    if (!out.empty()) return out;
  }
  return std::nullopt;
}

inline std::optional<EncodedValue> InferDefault(
    std::string_view text, const std::optional<std::vector<EncodedValue>>& options) {
  static const std::regex kDefault(
      R"(default(?: value)? is\s+(#?[A-Za-z_][A-Za-z0-9_]*|-?\d+(?:\.\d+)?))",
      std::regex::icase);
  std::string s(text);
  std::smatch m;
  if (!std::regex_search(s, m, kDefault)) return std::nullopt;
  std::string token = m[1].str();
  if (token.front() == '#') {
    std::string name = token.substr(1);
    if (options) {
      for (const auto& o : *options) {
        if (o.is_enum() && o.as_enum().name == name) return o;
      }
    }
    return EncodedValue::Enum(name, 0);
  }
  std::string lower = docfuzz::detail::ToLower(token);
  if (lower == "true") return EncodedValue::Bool(true);
  if (lower == "false") return EncodedValue::Bool(false);
  if (std::isdigit(static_cast<unsigned char>(token.back()))) {
    if (token.find('.') != std::string::npos) {
      return EncodedValue::Float(std::strtod(token.c_str(), nullptr));
    }
    return EncodedValue::Int(std::strtoll(token.c_str(), nullptr, 10));
  }
  return std::nullopt;
}

inline bool IsImageLike(const ParamInfo& p) {
  if (!p.size_spec || p.size_spec->dims.size() < 2) return false;
  return std::holds_alternative<VarDim>(p.size_spec->dims[0]) &&
         std::holds_alternative<VarDim>(p.size_spec->dims[1]);
}

// Dependency phrases naming an earlier parameter.
inline std::vector<DependencyEdge> InferDependencies(
    std::string_view text, const std::vector<ParamInfo>& earlier) {
  static const std::regex kAs(R"(\bas\s+([A-Za-z_]\w*))", std::regex::icase);
  static const std::regex kWithin(R"(\b(?:within|inside)\s+(?:the\s+)?([A-Za-z_]\w*))",
                                  std::regex::icase);
  std::string s(text);
  std::string lower = docfuzz::detail::ToLower(text);
  std::vector<DependencyEdge> out;
  auto add = [&](DependencyEdge e) {
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(std::move(e));
  };
  auto resolve = [&](const std::string& word) -> const ParamInfo* {
    std::string w = docfuzz::detail::ToLower(word);
    for (const auto& p : earlier) {
      if (docfuzz::detail::ToLower(p.name) == w) return &p;
    }
    return nullptr;
  };
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kAs);
       it != std::sregex_iterator(); ++it) {
    const ParamInfo* src = resolve((*it)[1].str());
    if (!src) continue;
    std::size_t pos = static_cast<std::size_t>(it->position(0));
    std::size_t start = lower.find_last_of(".;", pos);
    std::string clause = lower.substr(start == std::string::npos ? 0 : start + 1,
                                      pos - (start == std::string::npos ? 0 : start + 1));
    bool shape = detail::HasAnyWord(clause, {"size", "shape", "dimensions"});
    bool type = detail::HasAnyWord(clause, {"type", "depth"});
    if (type || !shape) add({src->name, DependencyKind::kSameType, {0, 1}});
    if (shape) add({src->name, DependencyKind::kSameShape, {0, 1}});
  }
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kWithin);
       it != std::sregex_iterator(); ++it) {
    if (const ParamInfo* src = resolve((*it)[1].str())) {
      add({src->name, DependencyKind::kBoundedByShape, {0, 1}});
    }
  }
  return out;
}

// Size template from the description, in priority order: explicit "AxB" or
// "Nx2", point lists, images/arrays, matrices, vectors, single points and
// colours.
inline std::optional<SizeSpec> InferSize(std::string_view name, std::string_view text,
                                         bool* is_points, bool* is_color) {
  static const std::regex kExplicit(R"(\b(\d+|[nN])x(\d+)\b)");
  std::string s(text);
  std::string lower = docfuzz::detail::ToLower(text);
  std::string lname = docfuzz::detail::ToLower(name);
  std::string lead = LeadingPhrase(text);
  *is_points = false;
  *is_color = false;
  std::smatch m;
  if (std::regex_search(s, m, kExplicit)) {
    SizeSpec spec;
    std::string first = m[1].str();
    if (first == "n" || first == "N") {
      spec.dims.push_back(VarDim{DimSymbol::kN});
    } else {
      spec.dims.push_back(FixedDim{std::stoul(first)});
    }
    spec.dims.push_back(FixedDim{std::stoul(m[2].str())});
    bool ok = std::all_of(spec.dims.begin(), spec.dims.end(), [](const DimSpec& d) {
      const auto* f = std::get_if<FixedDim>(&d);
      return !f || f->n >= 1;
    });
    if (ok) return spec;
  }
  std::string first = detail::FirstSentence(lower);
  if (detail::HasAnyWord(first, {"points", "pts"}) ||
      lname.find("points") != std::string::npos ||
      lname.find("pts") != std::string::npos) {
    *is_points = true;
    return PointListSize();
  }
  std::vector<int> channels = InferChannels(text);
  if (detail::HasAnyWord(lead, {"image", "images", "array", "arrays"})) {
    return RgbImageSize(channels.empty() ? std::vector<int>{3} : channels);
  }
  if (detail::HasWord(lead, "matrix")) {
    SizeSpec spec{{VarDim{DimSymbol::kH}, VarDim{DimSymbol::kW}}};
    if (!channels.empty() && channels != std::vector<int>{1}) {
      spec.dims.push_back(ChannelSetDim{channels});
    }
    return spec;
  }
  if (detail::HasWord(lead, "vector")) return SizeSpec{{VarDim{DimSymbol::kN}}};
  if (detail::HasAnyWord(lead, {"point", "center"})) return SizeSpec{{FixedDim{2}}};
  if (lname.find("color") != std::string::npos || detail::HasWord(lead, "color")) {
    *is_color = true;
    return SizeSpec{{FixedDim{3}}};
  }
  return std::nullopt;
}

// Applies every rule to one parameter. `earlier` holds the parameters
// declared before it (already inferred).
inline ParamInfo InferParamInfo(std::string_view name, std::string_view text,
                                const std::vector<ParamInfo>& earlier) {
  ParamInfo p;
  p.name = std::string(name);
  p.description.raw_text = std::string(text);
  if (docfuzz::detail::Trim(text).empty()) return p;

  bool is_points = false;
  bool is_color = false;
  p.type_domain = InferTypes(text);
  p.size_spec = InferSize(name, text, &is_points, &is_color);
  p.description.value_range = InferRange(text);
  p.description.options = InferOptions(text);
  p.default_value = InferDefault(text, p.description.options);
  p.description.depends_on = InferDependencies(text, earlier);

  if (is_color) {
    if (!p.description.value_range) p.description.value_range = Interval{0, 256};
    if (p.type_domain.empty()) p.type_domain = {ScalarType::kUInt8};
  }
  if (p.size_spec) {
    std::erase_if(p.type_domain, [](ScalarType t) { return !IsArrayDtype(t); });
    if (p.size_spec->is_tuple() && p.type_domain.empty()) {
      p.type_domain = {ScalarType::kFloat32};
    }
  }
  if (is_points) {
    bool has_bound = std::any_of(
        p.description.depends_on.begin(), p.description.depends_on.end(),
        [](const DependencyEdge& e) { return e.kind == DependencyKind::kBoundedByShape; });
    if (!has_bound) {
      for (const auto& e : earlier) {
        if (IsImageLike(e)) {
          p.description.depends_on.push_back(
              {e.name, DependencyKind::kBoundedByShape, {0, 1}});
          break;
        }
      }
    }
  }
  // Shape-only rules need both ends to be arrays; an unsized dependent
  // takes the template of its source.
  std::vector<DependencyEdge> kept;
  for (const auto& e : p.description.depends_on) {
    const ParamInfo* src = nullptr;
    for (const auto& q : earlier) {
      if (q.name == e.source) src = &q;
    }
    if (!src) continue;
    bool src_array = src->size_spec && !src->size_spec->is_tuple();
    if (e.kind == DependencyKind::kSameShape) {
      if (!src_array) continue;
      if (!p.size_spec) p.size_spec = src->size_spec;
      if (p.size_spec->is_tuple()) continue;
    } else if (e.kind == DependencyKind::kBoundedByShape) {
      if (!src_array || !p.size_spec || p.size_spec->dims.size() < 2) continue;
      const auto* last = std::get_if<FixedDim>(&p.size_spec->dims.back());
      if (!last || last->n != 2) continue;
    } else if (p.type_domain.empty()) {
      p.type_domain = src->type_domain;
      if (p.size_spec) {
        std::erase_if(p.type_domain, [](ScalarType t) { return !IsArrayDtype(t); });
      }
    }
    kept.push_back(e);
  }
  p.description.depends_on = std::move(kept);
  p.flag = !p.description.options.has_value();
  return p;
}

}  // namespace docfuzz::keywords
