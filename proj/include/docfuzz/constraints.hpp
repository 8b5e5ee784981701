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
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "docfuzz/doc_parser.hpp"
#include "docfuzz/error.hpp"
#include "docfuzz/keywords.hpp"
#include "docfuzz/schema.hpp"
#include "docfuzz/value.hpp"

namespace docfuzz {

struct ResolvedSpec {
  std::string name;
  bool modifiable = true;
  std::optional<std::vector<EncodedValue>> fixed_choices;
  std::vector<ScalarType> type_domain;  // never empty
  std::optional<SizeSpec> size_template;  // absent = scalar
  std::optional<Interval> value_range;
  std::vector<DependencyEdge> deps;
  std::size_t constraint_count = 0;

  bool operator==(const ResolvedSpec&) const = default;

  bool is_array() const { return size_template && !size_template->is_tuple(); }
  bool is_tuple() const { return size_template && size_template->is_tuple(); }
  bool has_type_choice() const { return type_domain.size() > 1; }
};

struct ApiConstraintSet {
  std::string api_name;
  std::size_t output_count = 0;
  std::vector<ResolvedSpec> specs;  // declaration order
  std::vector<std::string> order;   // generation order
  std::size_t constraint_count = 0;

  bool operator==(const ApiConstraintSet&) const = default;

  const ResolvedSpec* find(std::string_view name) const {
    for (const auto& s : specs) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }
  const ResolvedSpec& spec(std::string_view name) const {
    const ResolvedSpec* s = find(name);
    if (!s) throw InvalidApiInfo("unknown parameter " + std::string(name));
    return *s;
  }
};

namespace detail {

inline ScalarType NaturalTypeOf(const EncodedValue& v) {
  if (v.is_enum()) return ScalarType::kEnum;
  if (v.is_int()) return ScalarType::kInt32;
  if (v.is_float()) return ScalarType::kFloat64;
  if (v.is_bool()) return ScalarType::kBool;
  if (v.is_str()) return ScalarType::kString;
  if (v.is_array()) return v.as_array().dtype();
  return ScalarType::kFloat32;
}

// Sources of every generation-order edge of `p`: dependencies plus Ref dims.
inline std::vector<std::string> EdgeSources(const ParamInfo& p) {
  std::vector<std::string> out;
  for (const auto& e : p.description.depends_on) out.push_back(e.source);
  if (p.size_spec) {
    for (const auto& d : p.size_spec->dims) {
      if (const auto* r = std::get_if<RefDim>(&d)) out.push_back(r->param);
    }
  }
  return out;
}

// Stable Kahn sort: among ready parameters the earliest declared goes first.
inline std::vector<std::string> TopologicalOrder(const StandardizedApiInfo& info) {
  const auto& params = info.params;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < params.size(); ++i) index.emplace(params[i].name, i);
  std::vector<std::vector<std::size_t>> preds(params.size());
  std::vector<std::vector<std::size_t>> succs(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (const auto& src : EdgeSources(params[i])) {
      auto it = index.find(src);
      if (it == index.end()) {
        throw InvalidApiInfo(params[i].name + " depends on unknown parameter " + src);
      }
      preds[i].push_back(it->second);
      succs[it->second].push_back(i);
    }
  }
  std::vector<std::size_t> indegree(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) indegree[i] = preds[i].size();
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (indegree[i] == 0) ready.insert(i);
  }
  std::vector<std::string> order;
  std::vector<bool> done(params.size(), false);
  while (!ready.empty()) {
    std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    done[i] = true;
    order.push_back(params[i].name);
    for (std::size_t s : succs[i]) {
      if (--indegree[s] == 0) ready.insert(s);
    }
  }
  if (order.size() == params.size()) return order;

  // Walk predecessor links among unfinished nodes until one repeats.
  std::size_t start = 0;
  while (done[start]) ++start;
  std::vector<std::size_t> path;
  std::map<std::size_t, std::size_t> seen;
  std::size_t cur = start;
  while (!seen.count(cur)) {
    seen[cur] = path.size();
    path.push_back(cur);
    std::size_t next = cur;
    for (std::size_t p : preds[cur]) {
      if (!done[p]) {
        next = p;
        break;
      }
    }
    cur = next;
  }
  std::vector<std::string> cycle;
  for (std::size_t k = seen[cur]; k < path.size(); ++k) {
    cycle.push_back(params[path[k]].name);
  }
  std::reverse(cycle.begin(), cycle.end());
  cycle.push_back(cycle.front());
  throw CyclicDependency(cycle);
}

inline std::size_t CountConstraints(const ResolvedSpec& s) {
  std::size_t n = 1;  // type bound
  if (s.size_template) n += s.size_template->dims.size();
  if (s.value_range) ++n;
  n += s.deps.size();
  if (s.fixed_choices) ++n;
  return n;
}

}  // namespace detail

inline ApiConstraintSet ExtractConstraints(const StandardizedApiInfo& info) {
  ApiConstraintSet cs;
  cs.api_name = info.api_name;
  cs.output_count = info.output_count;
  cs.order = detail::TopologicalOrder(info);

  for (const auto& v : Validate(info)) {
    // Declaration order is irrelevant once a generation order exists.
    if (v.rule == rules::kForwardDependency) continue;
    throw InvalidApiInfo(info.api_name + ": " + ToString(v));
  }

  std::map<std::string, ResolvedSpec> resolved;
  for (const auto& name : cs.order) {
    const ParamInfo& p = *info.find(name);
    ResolvedSpec s;
    s.name = p.name;
    s.modifiable = p.flag;
    s.type_domain = p.type_domain;
    s.size_template = p.size_spec;
    s.value_range = p.description.value_range;
    s.deps = p.description.depends_on;
    if (!p.flag) {
      std::vector<EncodedValue> choices =
          p.description.options.value_or(std::vector<EncodedValue>{});
      if (p.default_value &&
          std::find(choices.begin(), choices.end(), *p.default_value) == choices.end()) {
        choices.push_back(*p.default_value);
      }
      s.fixed_choices = std::move(choices);
      if (s.type_domain.empty()) {
        for (const auto& c : *s.fixed_choices) {
          ScalarType t = detail::NaturalTypeOf(c);
          if (std::find(s.type_domain.begin(), s.type_domain.end(), t) ==
              s.type_domain.end()) {
            s.type_domain.push_back(t);
          }
        }
      }
    }
    if (!s.size_template && p.flag && keywords::MentionsArray(p.description.raw_text)) {
      s.size_template = RgbImageSize();
    }
    for (const auto& e : s.deps) {
      const ResolvedSpec& src = resolved.at(e.source);
      if (e.kind == DependencyKind::kSameType) {
        s.type_domain = src.type_domain;
      } else if (e.kind == DependencyKind::kSameShape && src.size_template) {
        SizeSpec merged = *src.size_template;
        if (s.size_template) {
          for (std::size_t a = 0; a < merged.dims.size() && a < s.size_template->dims.size();
               ++a) {
            if (std::holds_alternative<ChannelSetDim>(s.size_template->dims[a])) {
              merged.dims[a] = s.size_template->dims[a];
            }
          }
        }
        s.size_template = std::move(merged);
      }
    }
    if (s.type_domain.empty()) s.type_domain = {ScalarType::kFloat32};
    if (s.size_template) {
      std::erase_if(s.type_domain, [](ScalarType t) { return !IsArrayDtype(t); });
      if (s.type_domain.empty()) s.type_domain = {ScalarType::kFloat32};
    }
    s.constraint_count = detail::CountConstraints(s);
    resolved.emplace(name, std::move(s));
  }
  for (const auto& p : info.params) {
    cs.specs.push_back(std::move(resolved.at(p.name)));
    cs.constraint_count += cs.specs.back().constraint_count;
  }
  return cs;
}

// ---- Checker ----------------------------------------------------------------

struct CaseViolation {
  std::string param;
  std::string rule;
  bool operator==(const CaseViolation&) const = default;
};

inline std::string ToString(const CaseViolation& v) { return v.param + ": " + v.rule; }

using Args = std::vector<std::pair<std::string, EncodedValue>>;

inline const EncodedValue* FindArg(const Args& args, std::string_view name) {
  for (const auto& [k, v] : args) {
    if (k == name) return &v;
  }
  return nullptr;
}

// Element type a value carries when judged against `spec`; nullopt when it
// cannot belong to any scalar type.
inline std::optional<ScalarType> ValueType(const ResolvedSpec& spec, const EncodedValue& v) {
  auto pick = [&](bool integral) -> std::optional<ScalarType> {
    for (ScalarType t : spec.type_domain) {
      if (integral ? IsIntegral(t) : IsFloating(t)) return t;
    }
    return integral ? ScalarType::kInt32 : ScalarType::kFloat64;
  };
  if (v.is_array()) return v.as_array().dtype();
  if (v.is_int()) return pick(true);
  if (v.is_float()) return pick(false);
  if (v.is_bool()) return ScalarType::kBool;
  if (v.is_str()) return ScalarType::kString;
  if (v.is_enum()) return ScalarType::kEnum;
  if (v.is_seq()) {
    const auto& items = v.as_seq().items;
    if (items.empty()) return std::nullopt;
    bool ints = std::all_of(items.begin(), items.end(),
                            [](const EncodedValue& e) { return e.is_int(); });
    bool floats = std::all_of(items.begin(), items.end(),
                              [](const EncodedValue& e) { return e.is_float(); });
    if (ints) return pick(true);
    if (floats) return pick(false);
  }
  return std::nullopt;
}

namespace detail {

inline bool InRange(double x, const Interval& r) { return x >= r.lo && x < r.hi; }

inline bool ValuesInRange(const EncodedValue& v, const Interval& r) {
  if (v.is_array()) {
    const NdArray& a = v.as_array();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!InRange(a.Get(i), r)) return false;
    }
    return true;
  }
  if (v.is_seq()) {
    for (const auto& item : v.as_seq().items) {
      if (!ValuesInRange(item, r)) return false;
    }
    return true;
  }
  if (auto n = v.as_number()) return InRange(*n, r);
  return true;
}

inline bool IntegralFits(const EncodedValue& v, ScalarType t) {
  auto [lo, hi] = IntegralLimits(t);
  auto fits = [&](const EncodedValue& x) {
    return !x.is_int() || (static_cast<double>(x.as_int()) >= lo &&
                           static_cast<double>(x.as_int()) <= hi);
  };
  if (v.is_seq()) {
    return std::all_of(v.as_seq().items.begin(), v.as_seq().items.end(), fits);
  }
  return fits(v);
}

}  // namespace detail

inline std::vector<CaseViolation> CheckCase(const ApiConstraintSet& cs, const Args& args) {
  std::vector<CaseViolation> out;
  auto add = [&](const std::string& p, std::string rule) {
    out.push_back({p, std::move(rule)});
  };
  for (const auto& [name, value] : args) {
    if (!cs.find(name)) add(name, "Unknown");
  }
  for (const auto& spec : cs.specs) {
    const EncodedValue* v = FindArg(args, spec.name);
    if (!v) {
      add(spec.name, "Missing");
      continue;
    }
    if (spec.fixed_choices) {
      const auto& c = *spec.fixed_choices;
      if (std::find(c.begin(), c.end(), *v) == c.end()) add(spec.name, "FixedChoice");
      continue;
    }
    auto type = ValueType(spec, *v);
    bool type_ok = type && std::find(spec.type_domain.begin(), spec.type_domain.end(),
                                     *type) != spec.type_domain.end();
    if (type_ok && IsIntegral(*type) && !v->is_array()) {
      type_ok = detail::IntegralFits(*v, *type);
    }
    if (!type_ok) add(spec.name, "Type");

    bool shape_ok = true;
    if (!spec.size_template) {
      shape_ok = !v->is_array() && !v->is_seq();
      if (!shape_ok) add(spec.name, "Shape");
    } else if (spec.is_tuple()) {
      std::size_t n = std::get<FixedDim>(spec.size_template->dims[0]).n;
      shape_ok = v->is_seq() && v->as_seq().items.size() == n;
      if (!shape_ok) add(spec.name, "Shape");
    } else {
      const auto& dims = spec.size_template->dims;
      shape_ok = v->is_array() && v->as_array().rank() == dims.size();
      if (!shape_ok) {
        add(spec.name, "Shape");
      } else {
        const auto& shape = v->as_array().shape();
        bool dims_ok = true;
        for (std::size_t a = 0; a < dims.size(); ++a) {
          std::size_t ext = shape[a];
          std::visit(
              [&](const auto& d) {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, FixedDim>) {
                  dims_ok = dims_ok && ext == d.n;
                } else if constexpr (std::is_same_v<T, VarDim>) {
                  dims_ok = dims_ok && ext >= 1;
                } else if constexpr (std::is_same_v<T, ChannelSetDim>) {
                  dims_ok = dims_ok && std::find(d.allowed.begin(), d.allowed.end(),
                                                 static_cast<int>(ext)) != d.allowed.end();
                } else {
                  const EncodedValue* src = FindArg(args, d.param);
                  dims_ok = dims_ok && src && src->is_array() &&
                            d.axis < src->as_array().rank() &&
                            src->as_array().shape()[d.axis] == ext;
                }
              },
              dims[a]);
        }
        if (!dims_ok) add(spec.name, "Dim");
      }
    }
    if (spec.value_range && !detail::ValuesInRange(*v, *spec.value_range)) {
      add(spec.name, "Range");
    }

    for (const auto& e : spec.deps) {
      const EncodedValue* src = FindArg(args, e.source);
      std::string rule = std::string(RuleName(e.kind)) + "(" + e.source + ")";
      if (!src) {
        add(spec.name, rule);
        continue;
      }
      bool ok = true;
      if (e.kind == DependencyKind::kSameType) {
        const ResolvedSpec& sspec = cs.spec(e.source);
        ok = ValueType(spec, *v) == ValueType(sspec, *src) && TypeTag(*v) == TypeTag(*src);
      } else if (e.kind == DependencyKind::kSameShape) {
        ok = v->is_array() && src->is_array() &&
             v->as_array().rank() == src->as_array().rank();
        if (ok) {
          const auto& a = v->as_array().shape();
          const auto& b = src->as_array().shape();
          for (std::size_t k = 0; k < a.size(); ++k) {
            bool own_channels =
                spec.size_template && k < spec.size_template->dims.size() &&
                std::holds_alternative<ChannelSetDim>(spec.size_template->dims[k]);
            if (!own_channels && a[k] != b[k]) ok = false;
          }
        }
      } else {
        ok = v->is_array() && src->is_array() && v->as_array().rank() >= 1 &&
             v->as_array().shape().back() == 2 &&
             std::max(e.axes[0], e.axes[1]) < src->as_array().rank();
        if (ok) {
          const NdArray& pts = v->as_array();
          double bound[2] = {static_cast<double>(src->as_array().shape()[e.axes[0]]),
                             static_cast<double>(src->as_array().shape()[e.axes[1]])};
          for (std::size_t i = 0; ok && i < pts.size(); ++i) {
            double x = pts.Get(i);
            ok = x >= 0.0 && x < bound[i % 2];
          }
        }
      }
      if (!ok) add(spec.name, rule);
    }
  }
  return out;
}

// ---- JSON -------------------------------------------------------------------

inline Json ToJson(const ResolvedSpec& s) {
  Json j = Json::object();
  j["name"] = s.name;
  j["modifiable"] = s.modifiable;
  if (s.fixed_choices) {
    Json c = Json::array();
    for (const auto& v : *s.fixed_choices) c.push_back(ToJson(v));
    j["fixed_choices"] = std::move(c);
  } else {
    j["fixed_choices"] = nullptr;
  }
  Json types = Json::array();
  for (ScalarType t : s.type_domain) types.push_back(ToString(t));
  j["type_domain"] = std::move(types);
  j["size_template"] = s.size_template ? ToJson(*s.size_template) : Json(nullptr);
  j["value_range"] = s.value_range ? ToJson(*s.value_range) : Json(nullptr);
  Json deps = Json::array();
  for (const auto& e : s.deps) deps.push_back(ToJson(e));
  j["deps"] = std::move(deps);
  j["constraint_count"] = s.constraint_count;
  return j;
}

inline Json ToJson(const ApiConstraintSet& cs) {
  Json j = Json::object();
  j["api_name"] = cs.api_name;
  j["output_count"] = cs.output_count;
  Json specs = Json::array();
  for (const auto& s : cs.specs) specs.push_back(ToJson(s));
  j["specs"] = std::move(specs);
  j["order"] = cs.order;
  j["constraint_count"] = cs.constraint_count;
  return j;
}

inline ResolvedSpec ResolvedSpecFromJson(const Json& j, const std::string& pointer) {
  detail::ObjectReader r(j, pointer);
  ResolvedSpec s;
  s.name = r.String("name");
  s.modifiable = r.Bool("modifiable");
  if (const Json* c = r.Optional("fixed_choices")) {
    detail::RequireArray(*c, r.Path("fixed_choices"));
    std::vector<EncodedValue> choices;
    for (std::size_t i = 0; i < c->size(); ++i) {
      choices.push_back(
          ValueFromJson((*c)[i], detail::ChildPointer(r.Path("fixed_choices"), i)));
    }
    s.fixed_choices = std::move(choices);
  }
  s.type_domain =
      detail::TypeDomainFromJson(r.Required("type_domain"), r.Path("type_domain"));
  if (s.type_domain.empty()) throw SchemaError(r.Path("type_domain"), "must not be empty");
  if (const Json* t = r.Optional("size_template")) {
    s.size_template = detail::SizeFromJson(*t, r.Path("size_template"));
  }
  if (const Json* vr = r.Optional("value_range")) {
    s.value_range = detail::IntervalFromJson(*vr, r.Path("value_range"));
  }
  const Json& deps = detail::RequireArray(r.Required("deps"), r.Path("deps"));
  for (std::size_t i = 0; i < deps.size(); ++i) {
    s.deps.push_back(detail::EdgeFromJson(deps[i], detail::ChildPointer(r.Path("deps"), i)));
  }
  s.constraint_count = r.UInt("constraint_count");
  r.RejectUnknown();
  if (!s.modifiable && (!s.fixed_choices || s.fixed_choices->empty())) {
    throw SchemaError(r.Path("fixed_choices"), "unmodifiable parameter needs choices");
  }
  return s;
}

inline ApiConstraintSet ConstraintSetFromJson(const Json& j, const std::string& pointer) {
  detail::ObjectReader r(j, pointer);
  ApiConstraintSet cs;
  cs.api_name = r.String("api_name");
  cs.output_count = r.UInt("output_count");
  const Json& specs = detail::RequireArray(r.Required("specs"), r.Path("specs"));
  for (std::size_t i = 0; i < specs.size(); ++i) {
    cs.specs.push_back(
        ResolvedSpecFromJson(specs[i], detail::ChildPointer(r.Path("specs"), i)));
  }
  cs.order = StringListFromJson(r.Required("order"), r.Path("order"));
  cs.constraint_count = r.UInt("constraint_count");
  r.RejectUnknown();
  std::vector<std::string> names;
  for (const auto& s : cs.specs) names.push_back(s.name);
  std::vector<std::string> sorted_order = cs.order;
  std::sort(names.begin(), names.end());
  std::sort(sorted_order.begin(), sorted_order.end());
  if (names != sorted_order) {
    throw SchemaError(r.Path("order"), "order must list every parameter exactly once");
  }
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < cs.order.size(); ++i) pos[cs.order[i]] = i;
  for (const auto& s : cs.specs) {
    for (const auto& e : s.deps) {
      if (!pos.count(e.source) || pos[e.source] >= pos[s.name]) {
        throw SchemaError(r.Path("order"), "order violates dependency of " + s.name);
      }
    }
  }
  return cs;
}

inline std::string ConstraintSetsToJsonText(const std::vector<ApiConstraintSet>& sets) {
  Json arr = Json::array();
  for (const auto& s : sets) arr.push_back(ToJson(s));
  return arr.dump(2) + "\n";
}

inline std::vector<ApiConstraintSet> ConstraintSetsFromJsonText(std::string_view text) {
  Json j = detail::ParseJson(text);
  detail::RequireArray(j, "");
  std::vector<ApiConstraintSet> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(ConstraintSetFromJson(j[i], detail::ChildPointer("", i)));
  }
  return out;
}

}  // namespace docfuzz
