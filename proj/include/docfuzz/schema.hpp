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
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "docfuzz/detail/json_reader.hpp"
#include "docfuzz/detail/text.hpp"
#include "docfuzz/error.hpp"
#include "docfuzz/value.hpp"

namespace docfuzz {

// ---- Size specifications --------------------------------------------------

enum class DimSymbol { kH, kW, kN };

inline std::string_view ToString(DimSymbol s) {
  switch (s) {
    case DimSymbol::kH: return "H";
    case DimSymbol::kW: return "W";
    case DimSymbol::kN: return "N";
  }
  return "?";
}

struct FixedDim {
  std::size_t n = 1;
  bool operator==(const FixedDim&) const = default;
};
struct VarDim {
  DimSymbol symbol = DimSymbol::kN;
  bool operator==(const VarDim&) const = default;
};
// Same extent as axis `axis` of an earlier parameter.
struct RefDim {
  std::string param;
  std::size_t axis = 0;
  bool operator==(const RefDim&) const = default;
};
struct ChannelSetDim {
  std::vector<int> allowed;  // sorted, distinct, subset of {1,2,3,4}
  bool operator==(const ChannelSetDim&) const = default;
};

using DimSpec = std::variant<FixedDim, VarDim, RefDim, ChannelSetDim>;

struct SizeSpec {
  std::vector<DimSpec> dims;
  bool operator==(const SizeSpec&) const = default;

  // A single fixed extent (a colour triple, a 2-D point) is generated as a
  // tuple-like SeqValue rather than an array.
  bool is_tuple() const {
    return dims.size() == 1 && std::holds_alternative<FixedDim>(dims[0]);
  }
};

inline SizeSpec RgbImageSize(std::vector<int> channels = {3}) {
  return SizeSpec{{VarDim{DimSymbol::kH}, VarDim{DimSymbol::kW},
                   ChannelSetDim{std::move(channels)}}};
}

inline SizeSpec PointListSize() {
  return SizeSpec{{VarDim{DimSymbol::kN}, FixedDim{1}, FixedDim{2}}};
}

// ---- Descriptions and dependencies ---------------------------------------

enum class DependencyKind { kSameType, kSameShape, kBoundedByShape };

inline std::string_view ToString(DependencyKind k) {
  switch (k) {
    case DependencyKind::kSameType: return "same_type";
    case DependencyKind::kSameShape: return "same_shape";
    case DependencyKind::kBoundedByShape: return "bounded_by_shape";
  }
  return "?";
}

inline std::string_view RuleName(DependencyKind k) {
  switch (k) {
    case DependencyKind::kSameType: return "SameType";
    case DependencyKind::kSameShape: return "SameShape";
    case DependencyKind::kBoundedByShape: return "BoundedByShape";
  }
  return "?";
}

struct DependencyEdge {
  std::string source;
  DependencyKind kind = DependencyKind::kSameType;
  // For kBoundedByShape: coordinate k of each point is bounded by axis
  // axes[k] of the source array.
  std::array<std::size_t, 2> axes{0, 1};
  bool operator==(const DependencyEdge&) const = default;
};

// Half-open [lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

struct DescriptionSpec {
  std::string raw_text;
  std::optional<Interval> value_range;
  std::optional<std::vector<EncodedValue>> options;
  std::vector<DependencyEdge> depends_on;
  bool operator==(const DescriptionSpec&) const = default;
};

struct ParamInfo {
  std::string name;
  bool flag = true;  // modifiable by the generation strategies
  std::optional<EncodedValue> default_value;
  std::vector<ScalarType> type_domain;  // empty = unconstrained
  std::optional<SizeSpec> size_spec;    // absent = scalar
  DescriptionSpec description;
  bool operator==(const ParamInfo&) const = default;
};

enum class Provenance { kParsed, kEnriched };

inline std::string_view ToString(Provenance p) {
  return p == Provenance::kParsed ? "parsed" : "enriched";
}

struct StandardizedApiInfo {
  std::string api_name;
  std::vector<ParamInfo> params;
  std::size_t output_count = 0;
  Provenance provenance = Provenance::kParsed;
  bool operator==(const StandardizedApiInfo&) const = default;

  const ParamInfo* find(std::string_view name) const {
    for (const auto& p : params) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
};

// ---- Validation -----------------------------------------------------------

struct Violation {
  std::string param;  // empty for API-level rules
  std::string rule;
  std::string message;
  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

namespace rules {
inline constexpr std::string_view kEmptyApiName = "empty api name";
inline constexpr std::string_view kInvalidName = "invalid parameter name";
inline constexpr std::string_view kDuplicateParam = "duplicate parameter";
inline constexpr std::string_view kUnmodifiableWithoutDomain =
    "unmodifiable without domain";
inline constexpr std::string_view kDuplicateType = "duplicate type";
inline constexpr std::string_view kNonNumericArray = "non-numeric array type";
inline constexpr std::string_view kEmptyOptions = "empty options";
inline constexpr std::string_view kInvalidRange = "invalid range";
inline constexpr std::string_view kForwardDependency = "forward dependency";
inline constexpr std::string_view kUnknownDependency = "unknown dependency";
inline constexpr std::string_view kSelfDependency = "self dependency";
inline constexpr std::string_view kShapeOfScalar = "shape dependency on scalar";
inline constexpr std::string_view kBoundedShape = "bounded parameter shape";
inline constexpr std::string_view kBoundedAxes = "bounded axes out of range";
inline constexpr std::string_view kFixedDim = "fixed dimension";
inline constexpr std::string_view kChannelSet = "channel set";
inline constexpr std::string_view kRefDim = "reference dimension";
}  // namespace rules

inline ValidationReport Validate(const StandardizedApiInfo& info) {
  ValidationReport report;
  auto add = [&](const std::string& param, std::string_view rule,
                 std::string message) {
    report.push_back({param, std::string(rule), std::move(message)});
  };
  if (info.api_name.empty()) add("", rules::kEmptyApiName, "api_name is empty");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < info.params.size(); ++i) {
    const auto& p = info.params[i];
    if (!detail::IsIdentifier(p.name)) {
      add(p.name, rules::kInvalidName, "'" + p.name + "' is not an identifier");
    }
    if (!index.emplace(p.name, i).second) {
      add(p.name, rules::kDuplicateParam, "name declared more than once");
    }
  }

  for (std::size_t i = 0; i < info.params.size(); ++i) {
    const auto& p = info.params[i];
    const auto& d = p.description;
    if (!p.flag && !(d.options && !d.options->empty()) && !p.default_value) {
      add(p.name, rules::kUnmodifiableWithoutDomain,
          "flag is false but neither options nor default are given");
    }
    std::set<ScalarType> types;
    for (ScalarType t : p.type_domain) {
      if (!types.insert(t).second) {
        add(p.name, rules::kDuplicateType,
            "type " + std::string(ToString(t)) + " listed twice");
      }
      if (p.size_spec && !IsArrayDtype(t)) {
        add(p.name, rules::kNonNumericArray,
            std::string(ToString(t)) + " cannot be an element type");
      }
    }
    if (d.options && d.options->empty()) {
      add(p.name, rules::kEmptyOptions, "options present but empty");
    }
    if (d.value_range) {
      const auto& r = *d.value_range;
      if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.lo < r.hi)) {
        add(p.name, rules::kInvalidRange, "value_range requires lo < hi");
      }
    }
    if (p.size_spec) {
      for (std::size_t axis = 0; axis < p.size_spec->dims.size(); ++axis) {
        const DimSpec& dim = p.size_spec->dims[axis];
        if (const auto* f = std::get_if<FixedDim>(&dim); f && f->n < 1) {
          add(p.name, rules::kFixedDim, "Fixed(n) requires n >= 1");
        } else if (const auto* c = std::get_if<ChannelSetDim>(&dim)) {
          bool ok = !c->allowed.empty();
          for (int ch : c->allowed) ok = ok && ch >= 1 && ch <= 4;
          if (!ok) add(p.name, rules::kChannelSet, "channels must be in {1,2,3,4}");
        } else if (const auto* ref = std::get_if<RefDim>(&dim)) {
          auto it = index.find(ref->param);
          if (it == index.end() || it->second >= i) {
            add(p.name, rules::kRefDim, "Ref must name an earlier parameter");
          } else {
            const auto& src = info.params[it->second];
            if (!src.size_spec || ref->axis >= src.size_spec->dims.size()) {
              add(p.name, rules::kRefDim, "Ref axis out of range");
            }
          }
        }
      }
    }
    for (const auto& e : d.depends_on) {
      if (e.source == p.name) {
        add(p.name, rules::kSelfDependency, "depends on itself");
        continue;
      }
      auto it = index.find(e.source);
      if (it == index.end()) {
        add(p.name, rules::kUnknownDependency, "unknown source '" + e.source + "'");
        continue;
      }
      if (it->second > i) {
        add(p.name, rules::kForwardDependency,
            "source '" + e.source + "' is declared later");
        continue;
      }
      const auto& src = info.params[it->second];
      if (e.kind == DependencyKind::kSameShape ||
          e.kind == DependencyKind::kBoundedByShape) {
        if (!src.size_spec || src.size_spec->is_tuple()) {
          add(p.name, rules::kShapeOfScalar,
              "source '" + e.source + "' is not an array");
          continue;
        }
      }
      if (e.kind == DependencyKind::kSameShape &&
          (!p.size_spec || p.size_spec->is_tuple())) {
        add(p.name, rules::kShapeOfScalar, "SameShape on a non-array parameter");
      }
      if (e.kind == DependencyKind::kBoundedByShape) {
        const auto* last = p.size_spec && !p.size_spec->dims.empty()
                               ? std::get_if<FixedDim>(&p.size_spec->dims.back())
                               : nullptr;
        if (!last || last->n != 2 || p.size_spec->dims.size() < 2) {
          add(p.name, rules::kBoundedShape,
              "BoundedByShape needs an array whose last axis is Fixed(2)");
        }
        std::size_t rank = src.size_spec->dims.size();
        if (e.axes[0] >= rank || e.axes[1] >= rank) {
          add(p.name, rules::kBoundedAxes, "axes exceed the source rank");
        }
      }
    }
  }
  return report;
}

inline std::string ToString(const Violation& v) {
  return (v.param.empty() ? std::string("<api>") : v.param) + ": " + v.rule +
         " (" + v.message + ")";
}

// ---- JSON -------------------------------------------------------------------

inline Json ToJson(const DimSpec& dim) {
  Json j = Json::object();
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, FixedDim>) {
          j["kind"] = "fixed";
          j["n"] = d.n;
        } else if constexpr (std::is_same_v<T, VarDim>) {
          j["kind"] = "var";
          j["symbol"] = ToString(d.symbol);
        } else if constexpr (std::is_same_v<T, RefDim>) {
          j["kind"] = "ref";
          j["param"] = d.param;
          j["axis"] = d.axis;
        } else {
          j["kind"] = "channel_set";
          j["allowed"] = d.allowed;
        }
      },
      dim);
  return j;
}

inline Json ToJson(const SizeSpec& s) {
  Json dims = Json::array();
  for (const auto& d : s.dims) dims.push_back(ToJson(d));
  return Json{{"dims", std::move(dims)}};
}

inline Json ToJson(const DependencyEdge& e) {
  Json j = Json::object();
  j["source"] = e.source;
  j["kind"] = ToString(e.kind);
  if (e.kind == DependencyKind::kBoundedByShape) j["axes"] = e.axes;
  return j;
}

inline Json ToJson(const Interval& r) { return Json::array({r.lo, r.hi}); }

inline Json ToJson(const ParamInfo& p) {
  Json j = Json::object();
  j["name"] = p.name;
  j["flag"] = p.flag;
  j["default"] = p.default_value ? ToJson(*p.default_value) : Json(nullptr);
  Json types = Json::array();
  for (ScalarType t : p.type_domain) types.push_back(ToString(t));
  j["type_domain"] = std::move(types);
  j["size_spec"] = p.size_spec ? ToJson(*p.size_spec) : Json(nullptr);
  Json d = Json::object();
  d["raw_text"] = p.description.raw_text;
  d["value_range"] =
      p.description.value_range ? ToJson(*p.description.value_range) : Json(nullptr);
  if (p.description.options) {
    Json opts = Json::array();
    for (const auto& o : *p.description.options) opts.push_back(ToJson(o));
    d["options"] = std::move(opts);
  } else {
    d["options"] = nullptr;
  }
  Json deps = Json::array();
  for (const auto& e : p.description.depends_on) deps.push_back(ToJson(e));
  d["depends_on"] = std::move(deps);
  j["description"] = std::move(d);
  return j;
}

inline Json ToJson(const StandardizedApiInfo& info) {
  Json j = Json::object();
  j["api_name"] = info.api_name;
  Json params = Json::array();
  for (const auto& p : info.params) params.push_back(ToJson(p));
  j["params"] = std::move(params);
  j["output_count"] = info.output_count;
  j["provenance"] = ToString(info.provenance);
  return j;
}

namespace detail {

inline std::size_t RequireIndex(const Json& v, const std::string& pointer) {
  if (!v.is_number_unsigned()) {
    throw SchemaError(pointer, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

inline DimSpec DimFromJson(const Json& j, const std::string& pointer) {
  ObjectReader r(j, pointer);
  std::string kind = r.String("kind");
  DimSpec out;
  if (kind == "fixed") {
    out = FixedDim{RequireIndex(r.Required("n"), r.Path("n"))};
  } else if (kind == "var") {
    std::string s = r.String("symbol");
    if (s == "H") {
      out = VarDim{DimSymbol::kH};
    } else if (s == "W") {
      out = VarDim{DimSymbol::kW};
    } else if (s == "N") {
      out = VarDim{DimSymbol::kN};
    } else {
      throw SchemaError(r.Path("symbol"), "expected H, W or N");
    }
  } else if (kind == "ref") {
    std::string param = r.String("param");
    out = RefDim{param, RequireIndex(r.Required("axis"), r.Path("axis"))};
  } else if (kind == "channel_set") {
    const Json& a = RequireArray(r.Required("allowed"), r.Path("allowed"));
    ChannelSetDim c;
    for (std::size_t i = 0; i < a.size(); ++i) {
      c.allowed.push_back(static_cast<int>(
          ObjectReader::AsInt(a[i], ChildPointer(r.Path("allowed"), i))));
    }
    std::vector<int> sorted = c.allowed;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw SchemaError(r.Path("allowed"), "duplicate channel count");
    }
    c.allowed = sorted;
    out = std::move(c);
  } else {
    throw SchemaError(r.Path("kind"), "unknown dimension kind '" + kind + "'");
  }
  r.RejectUnknown();
  return out;
}

inline SizeSpec SizeFromJson(const Json& j, const std::string& pointer) {
  ObjectReader r(j, pointer);
  const Json& dims = RequireArray(r.Required("dims"), r.Path("dims"));
  SizeSpec s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    s.dims.push_back(DimFromJson(dims[i], ChildPointer(r.Path("dims"), i)));
  }
  r.RejectUnknown();
  return s;
}

inline Interval IntervalFromJson(const Json& j, const std::string& pointer) {
  RequireArray(j, pointer);
  if (j.size() != 2) throw SchemaError(pointer, "expected [lo, hi]");
  return {RequireNumber(j[0], ChildPointer(pointer, 0)),
          RequireNumber(j[1], ChildPointer(pointer, 1))};
}

inline DependencyEdge EdgeFromJson(const Json& j, const std::string& pointer) {
  ObjectReader r(j, pointer);
  DependencyEdge e;
  e.source = r.String("source");
  std::string kind = r.String("kind");
  if (kind == "same_type") {
    e.kind = DependencyKind::kSameType;
  } else if (kind == "same_shape") {
    e.kind = DependencyKind::kSameShape;
  } else if (kind == "bounded_by_shape") {
    e.kind = DependencyKind::kBoundedByShape;
    if (const Json* axes = r.Optional("axes")) {
      RequireArray(*axes, r.Path("axes"));
      if (axes->size() != 2) throw SchemaError(r.Path("axes"), "expected two axes");
      e.axes = {RequireIndex((*axes)[0], ChildPointer(r.Path("axes"), 0)),
                RequireIndex((*axes)[1], ChildPointer(r.Path("axes"), 1))};
    }
  } else {
    throw SchemaError(r.Path("kind"), "unknown dependency kind '" + kind + "'");
  }
  r.RejectUnknown();
  return e;
}

inline std::vector<ScalarType> TypeDomainFromJson(const Json& j,
                                                  const std::string& pointer) {
  RequireArray(j, pointer);
  std::vector<ScalarType> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string item_ptr = ChildPointer(pointer, i);
    if (!j[i].is_string()) throw SchemaError(item_ptr, "expected a type name");
    auto t = ParseScalarType(j[i].get<std::string>());
    if (!t) throw SchemaError(item_ptr, "unknown type '" + j[i].get<std::string>() + "'");
    if (std::find(out.begin(), out.end(), *t) != out.end()) {
      throw SchemaError(item_ptr, "duplicate type '" + j[i].get<std::string>() + "'");
    }
    out.push_back(*t);
  }
  return out;
}

}  // namespace detail

inline ParamInfo ParamFromJson(const Json& j, const std::string& pointer) {
  detail::ObjectReader r(j, pointer);
  ParamInfo p;
  p.name = r.String("name");
  p.flag = r.Bool("flag");
  if (const Json* d = r.Optional("default")) {
    p.default_value = ValueFromJson(*d, r.Path("default"));
  }
  p.type_domain = detail::TypeDomainFromJson(r.Required("type_domain"),
                                             r.Path("type_domain"));
  if (const Json* s = r.Optional("size_spec")) {
    p.size_spec = detail::SizeFromJson(*s, r.Path("size_spec"));
  }
  detail::ObjectReader dr(r.Required("description"), r.Path("description"));
  p.description.raw_text = dr.String("raw_text");
  if (const Json* vr = dr.Optional("value_range")) {
    p.description.value_range = detail::IntervalFromJson(*vr, dr.Path("value_range"));
  }
  if (const Json* opts = dr.Optional("options")) {
    detail::RequireArray(*opts, dr.Path("options"));
    std::vector<EncodedValue> values;
    for (std::size_t i = 0; i < opts->size(); ++i) {
      values.push_back(ValueFromJson(
          (*opts)[i], detail::ChildPointer(dr.Path("options"), i)));
    }
    p.description.options = std::move(values);
  }
  if (const Json* deps = dr.Optional("depends_on")) {
    detail::RequireArray(*deps, dr.Path("depends_on"));
    for (std::size_t i = 0; i < deps->size(); ++i) {
      p.description.depends_on.push_back(detail::EdgeFromJson(
          (*deps)[i], detail::ChildPointer(dr.Path("depends_on"), i)));
    }
  }
  dr.RejectUnknown();
  r.RejectUnknown();
  return p;
}

inline StandardizedApiInfo ApiInfoFromJson(const Json& j, const std::string& pointer) {
  detail::ObjectReader r(j, pointer);
  StandardizedApiInfo info;
  info.api_name = r.String("api_name");
  const Json& params = detail::RequireArray(r.Required("params"), r.Path("params"));
  for (std::size_t i = 0; i < params.size(); ++i) {
    info.params.push_back(
        ParamFromJson(params[i], detail::ChildPointer(r.Path("params"), i)));
  }
  info.output_count =
      detail::RequireIndex(r.Required("output_count"), r.Path("output_count"));
  std::string prov = r.String("provenance");
  if (prov == "parsed") {
    info.provenance = Provenance::kParsed;
  } else if (prov == "enriched") {
    info.provenance = Provenance::kEnriched;
  } else {
    throw SchemaError(r.Path("provenance"), "expected parsed or enriched");
  }
  r.RejectUnknown();
  return info;
}

inline std::string ToJsonText(const StandardizedApiInfo& info) {
  return ToJson(info).dump(2);
}

inline StandardizedApiInfo ApiInfoFromJsonText(std::string_view text) {
  return ApiInfoFromJson(detail::ParseJson(text), "");
}

// The canonical file: a top-level array of StandardizedApiInfo documents.
inline std::string InfosToJsonText(const std::vector<StandardizedApiInfo>& infos) {
  Json arr = Json::array();
  for (const auto& i : infos) arr.push_back(ToJson(i));
  return arr.dump(2) + "\n";
}

inline std::vector<StandardizedApiInfo> InfosFromJsonText(std::string_view text) {
  Json j = detail::ParseJson(text);
  detail::RequireArray(j, "");
  std::vector<StandardizedApiInfo> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(ApiInfoFromJson(j[i], detail::ChildPointer("", i)));
  }
  return out;
}

}  // namespace docfuzz
