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
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "docfuzz/constraints.hpp"
#include "docfuzz/detail/text.hpp"
#include "docfuzz/error.hpp"
#include "docfuzz/rng.hpp"
#include "docfuzz/value.hpp"

namespace docfuzz {

enum class ValidityMode { kValidOnly, kAdversarial };
enum class ValueStrategy { kNoise, kMask, kDivision };

inline std::string_view ToString(ValidityMode m) {
  return m == ValidityMode::kValidOnly ? "valid_only" : "adversarial";
}

inline std::string_view ToString(ValueStrategy s) {
  switch (s) {
    case ValueStrategy::kNoise: return "noise";
    case ValueStrategy::kMask: return "mask";
    case ValueStrategy::kDivision: return "division";
  }
  return "?";
}

inline std::optional<ValueStrategy> ParseValueStrategy(std::string_view s) {
  for (auto v : {ValueStrategy::kNoise, ValueStrategy::kMask, ValueStrategy::kDivision}) {
    if (ToString(v) == s) return v;
  }
  return std::nullopt;
}

struct StrategyFlags {
  bool type = true;
  bool size = true;
  bool value_noise = true;
  bool value_mask = true;
  bool value_division = true;

  bool operator==(const StrategyFlags&) const = default;

  bool any() const { return type || size || any_value(); }
  bool any_value() const { return value_noise || value_mask || value_division; }

  std::vector<ValueStrategy> enabled_values() const {
    std::vector<ValueStrategy> out;
    if (value_noise) out.push_back(ValueStrategy::kNoise);
    if (value_mask) out.push_back(ValueStrategy::kMask);
    if (value_division) out.push_back(ValueStrategy::kDivision);
    return out;
  }

  // Accepts the ablation names used on the command line.
  bool Disable(std::string_view name) {
    if (name == "type") {
      type = false;
    } else if (name == "size") {
      size = false;
    } else if (name == "value_noise") {
      value_noise = false;
    } else if (name == "value_mask") {
      value_mask = false;
    } else if (name == "value_division") {
      value_division = false;
    } else {
      return false;
    }
    return true;
  }
};

struct GenConfig {
  std::size_t budget_per_api = 600;
  std::uint64_t rng_seed = 0;
  std::size_t dim_min = 1;
  std::size_t dim_max = 64;
  std::vector<std::size_t> extreme_dims{0, 1, 4096};
  double adversarial_ratio = 0.2;
  double noise_sigma_int = 8.0;   // absolute, integer dtypes
  double noise_sigma_rel = 0.05;  // times the value span, float dtypes
  std::int64_t mask_lo = 0;
  std::int64_t mask_hi = 255;  // inclusive
  std::vector<std::int64_t> divisors{2, 3, 4, 5, 8, 16};
  StrategyFlags flags;

  bool operator==(const GenConfig&) const = default;

  void Check() const {
    if (budget_per_api < 1) throw ConfigError("budget_per_api must be >= 1");
    if (!(adversarial_ratio >= 0.0 && adversarial_ratio <= 1.0)) {
      throw ConfigError("adversarial_ratio must be within [0, 1]");
    }
    if (dim_min < 1 || dim_min > dim_max) throw ConfigError("dim_range must satisfy 1 <= lo <= hi");
    if (extreme_dims.empty()) throw ConfigError("extreme_dims must not be empty");
    if (mask_lo > mask_hi) throw ConfigError("mask_value_range must satisfy lo <= hi");
    if (divisors.empty()) throw ConfigError("divisors must not be empty");
    for (auto d : divisors) {
      if (d < 1) throw ConfigError("divisors must be positive");
    }
    if (!(noise_sigma_int >= 0.0) || !(noise_sigma_rel >= 0.0)) {
      throw ConfigError("noise sigma must be non-negative");
    }
  }
};

struct AppliedStrategies {
  std::optional<std::string> type_strategy;  // "valid" | "invalid"
  std::optional<std::string> size_strategy;  // "valid" | "extreme"
  std::optional<ValueStrategy> value_strategy;
  std::optional<std::string> corrupted_param;  // set on adversarial cases

  bool operator==(const AppliedStrategies&) const = default;
};

struct TestCase {
  std::string api_name;
  std::size_t case_index = 0;
  std::uint64_t seed = 0;
  Args args;
  AppliedStrategies applied;
  ValidityMode validity_mode = ValidityMode::kValidOnly;

  bool operator==(const TestCase&) const = default;
};

// ---- Value strategies -------------------------------------------------------

namespace detail {

// Stores `v` as element type T with NdArray::Set semantics.
template <typename T>
inline T Narrow(double v, double lo, double hi) {
  if constexpr (std::is_floating_point_v<T>) {
    return static_cast<T>(v);
  } else {
    return static_cast<T>(std::isnan(v) ? 0.0 : std::clamp(std::round(v), lo, hi));
  }
}

}  // namespace detail

inline void AddNoise(NdArray& a, double sigma, Rng& rng) {
  auto [lo, hi] = IntegralLimits(a.dtype());
  a.VisitElements([&](auto* p, std::size_t n) {
    using T = std::remove_pointer_t<decltype(p)>;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = detail::Narrow<T>(static_cast<double>(p[i]) + sigma * rng.Normal(), lo, hi);
    }
  });
}

// Half-open box over the leading axes; trailing axes are covered fully.
struct MaskRect {
  std::vector<std::size_t> begin;
  std::vector<std::size_t> end;
};

// `rect` may bound at most the two leading axes.
inline void MaskRegion(NdArray& a, const MaskRect& rect, double value) {
  const auto& shape = a.shape();
  if (a.size() == 0) return;
  const std::size_t axes = std::min(rect.begin.size(), shape.size());
  // Rows are the leading axis; a row holds every trailing element.
  std::size_t row_len = 1;
  for (std::size_t k = 1; k < shape.size(); ++k) row_len *= shape[k];
  std::size_t inner = row_len;  // elements per step of axis 1
  if (shape.size() > 1) inner /= shape[1] == 0 ? 1 : shape[1];
  std::size_t r0 = 0, r1 = shape.empty() ? 1 : shape[0];
  std::size_t c0 = 0, c1 = shape.size() > 1 ? shape[1] : 1;
  if (axes > 0) r0 = rect.begin[0], r1 = std::min(rect.end[0], r1);
  if (axes > 1) c0 = rect.begin[1], c1 = std::min(rect.end[1], c1);
  if (shape.size() <= 1) inner = 1, c0 = 0, c1 = 1;
  auto [lo, hi] = IntegralLimits(a.dtype());
  a.VisitElements([&](auto* p, std::size_t) {
    using T = std::remove_pointer_t<decltype(p)>;
    const T v = detail::Narrow<T>(value, lo, hi);
    for (std::size_t r = r0; r < r1; ++r) {
      std::fill(p + r * row_len + c0 * inner, p + r * row_len + c1 * inner, v);
    }
  });
}

inline void DivideBy(NdArray& a, std::int64_t d) {
  const double div = static_cast<double>(d);
  const bool integral = IsIntegral(a.dtype());
  auto [lo, hi] = IntegralLimits(a.dtype());
  a.VisitElements([&](auto* p, std::size_t n) {
    using T = std::remove_pointer_t<decltype(p)>;
    for (std::size_t i = 0; i < n; ++i) {
      double q = static_cast<double>(p[i]) / div;
      p[i] = detail::Narrow<T>(integral ? std::floor(q) : q, lo, hi);
    }
  });
}

// `float_span` scales the relative float noise (width of the value range).
inline NdArray ApplyValueStrategy(const NdArray& v, ValueStrategy s, const GenConfig& cfg,
                                  Rng& rng, double float_span = 1.0) {
  NdArray out = v;
  switch (s) {
    case ValueStrategy::kNoise: {
      double sigma = IsIntegral(v.dtype()) ? cfg.noise_sigma_int
                                           : cfg.noise_sigma_rel * float_span;
      AddNoise(out, sigma, rng);
      break;
    }
    case ValueStrategy::kMask: {
      MaskRect rect;
      std::size_t axes = std::min<std::size_t>(out.rank(), 2);
      for (std::size_t k = 0; k < axes; ++k) {
        std::size_t n = out.shape()[k];
        if (n == 0) return out;
        auto b = static_cast<std::size_t>(rng.Below(n));
        auto e = static_cast<std::size_t>(rng.Range(static_cast<std::int64_t>(b) + 1,
                                                    static_cast<std::int64_t>(n)));
        rect.begin.push_back(b);
        rect.end.push_back(e);
      }
      MaskRegion(out, rect, static_cast<double>(rng.Range(cfg.mask_lo, cfg.mask_hi)));
      break;
    }
    case ValueStrategy::kDivision:
      DivideBy(out, rng.Pick(cfg.divisors));
      break;
  }
  return out;
}

// ---- Generator ----------------------------------------------------------------

namespace detail {

// Largest value of `dtype` strictly below `hi`.
inline double Below(double hi, ScalarType dtype) {
  if (dtype == ScalarType::kFloat32) {
    float f = static_cast<float>(hi);
    while (static_cast<double>(f) >= hi) {
      f = std::nextafter(f, -std::numeric_limits<float>::infinity());
    }
    return f;
  }
  return std::nextafter(hi, -std::numeric_limits<double>::infinity());
}

inline Interval NaturalRange(ScalarType t) {
  if (t == ScalarType::kBool) return {0, 2};
  if (IsIntegral(t)) return {0, 256};
  return {0, 1};
}

// Generation range of one element: the declared range (clipped to what the
// dtype can hold) or the dtype's natural range.
inline Interval ElementRange(const ResolvedSpec& spec, ScalarType t) {
  Interval r = spec.value_range.value_or(NaturalRange(t));
  if (IsIntegral(t)) {
    auto [lo, hi] = IntegralLimits(t);
    r.lo = std::max(r.lo, lo);
    r.hi = std::min(r.hi, hi + 1);
  }
  return r;
}

// Draws elements of one dtype from one interval; bounds are resolved once.
class Sampler {
 public:
  Sampler(ScalarType t, const Interval& r) : t_(t), lo_(r.lo), hi_(r.hi) {
    integral_ = IsIntegral(t);
    if (integral_) {
      ilo_ = static_cast<std::int64_t>(std::ceil(r.lo));
      ihi_ = static_cast<std::int64_t>(std::ceil(r.hi)) - 1;
    }
  }

  double operator()(Rng& rng) const {
    if (integral_) return static_cast<double>(Int(rng));
    if (!(lo_ < hi_)) return lo_;
    double x = rng.Uniform(lo_, hi_);
    if (t_ == ScalarType::kFloat32) {
      x = static_cast<float>(x);
      if (x >= hi_) x = Below(hi_, t_);
      if (x < lo_) x = lo_;
    }
    return x;
  }

  std::int64_t Int(Rng& rng) const { return ihi_ < ilo_ ? ilo_ : rng.Range(ilo_, ihi_); }

 private:
  ScalarType t_;
  double lo_, hi_;
  bool integral_ = false;
  std::int64_t ilo_ = 0, ihi_ = 0;
};

inline double SampleIn(Rng& rng, ScalarType t, const Interval& r) {
  return Sampler(t, r)(rng);
}

// Fills `a` element by element; odd flat indices use `odd`.
inline void FillArray(NdArray& a, const Sampler& even, const Sampler& odd, Rng& rng) {
  auto [lo, hi] = IntegralLimits(a.dtype());
  const auto ilo = static_cast<std::int64_t>(lo), ihi = static_cast<std::int64_t>(hi);
  a.VisitElements([&](auto* p, std::size_t n) {
    using T = std::remove_pointer_t<decltype(p)>;
    for (std::size_t i = 0; i < n; ++i) {
      const Sampler& s = (i & 1) ? odd : even;
      if constexpr (std::is_floating_point_v<T>) {
        p[i] = static_cast<T>(s(rng));
      } else {
        p[i] = static_cast<T>(std::clamp(s.Int(rng), ilo, ihi));
      }
    }
  });
}

inline double ClampIn(double x, ScalarType t, const Interval& r) {
  if (std::isnan(x)) return r.lo;
  if (IsIntegral(t)) {
    double lo = std::ceil(r.lo);
    double hi = std::ceil(r.hi) - 1;
    return hi < lo ? lo : std::clamp(std::round(x), lo, hi);
  }
  if (!(r.lo < r.hi)) return r.lo;
  double hi = Below(r.hi, t);
  double lo = r.lo;
  if (t == ScalarType::kFloat32 && static_cast<double>(static_cast<float>(lo)) < lo) {
    lo = std::nextafter(static_cast<float>(lo), std::numeric_limits<float>::infinity());
  }
  return std::clamp(x, lo, hi);
}

struct ParamState {
  ScalarType type = ScalarType::kFloat32;        // intended (valid) type
  std::optional<std::vector<std::size_t>> shape;  // intended shape (arrays)
  EncodedValue value;
};

class CaseBuilder {
 public:
  CaseBuilder(const ApiConstraintSet& cs, const GenConfig& cfg, std::size_t index)
      : cs_(cs), cfg_(cfg), index_(index) {}

  Rng ParamRng(const std::string& name) const {
    return Rng(DeriveStreamSeed(cfg_.rng_seed, cs_.api_name, index_, name));
  }

  Rng CaseRng() const {
    return Rng(DeriveStreamSeed(cfg_.rng_seed, cs_.api_name, index_, kCaseStream));
  }

  // Per-coordinate bounds imposed by a BoundedByShape edge.
  std::optional<std::array<double, 2>> PointBounds(const ResolvedSpec& spec) const {
    for (const auto& e : spec.deps) {
      if (e.kind != DependencyKind::kBoundedByShape) continue;
      auto it = states_.find(e.source);
      if (it == states_.end() || !it->second.shape) continue;
      const auto& shape = *it->second.shape;
      if (std::max(e.axes[0], e.axes[1]) >= shape.size()) continue;
      return std::array<double, 2>{static_cast<double>(shape[e.axes[0]]),
                                   static_cast<double>(shape[e.axes[1]])};
    }
    return std::nullopt;
  }

  Interval ElementBounds(const ResolvedSpec& spec, ScalarType t, std::size_t flat,
                         const std::optional<std::array<double, 2>>& pts) const {
    Interval r = ElementRange(spec, t);
    if (pts) {
      double bound = (*pts)[flat % 2];
      r.lo = std::max(r.lo, 0.0);
      r.hi = spec.value_range ? std::min(spec.value_range->hi, bound) : bound;
      if (IsIntegral(t)) r.hi = std::min(r.hi, IntegralLimits(t).second + 1);
    }
    return r;
  }

  const ParamState* State(const std::string& name) const {
    auto it = states_.find(name);
    return it == states_.end() ? nullptr : &it->second;
  }

  std::optional<ScalarType> SameTypeSource(const ResolvedSpec& spec) const {
    for (const auto& e : spec.deps) {
      if (e.kind != DependencyKind::kSameType) continue;
      if (const ParamState* s = State(e.source)) return s->type;
    }
    return std::nullopt;
  }

  const std::vector<std::size_t>* SameShapeSource(const ResolvedSpec& spec) const {
    for (const auto& e : spec.deps) {
      if (e.kind != DependencyKind::kSameShape) continue;
      if (const ParamState* s = State(e.source); s && s->shape) return &*s->shape;
    }
    return nullptr;
  }

  // Dims of `spec` for this case. `keep` carries the previous case's shape
  // when sizes are not being resampled.
  std::vector<std::size_t> BuildShape(const ResolvedSpec& spec, Rng& rng,
                                      const std::vector<std::size_t>* keep) const {
    const auto& dims = spec.size_template->dims;
    const std::vector<std::size_t>* same = SameShapeSource(spec);
    std::vector<std::size_t> shape(dims.size(), 1);
    for (std::size_t a = 0; a < dims.size(); ++a) {
      const DimSpec& d = dims[a];
      bool kept = keep && keep->size() == dims.size();
      if (const auto* f = std::get_if<FixedDim>(&d)) {
        shape[a] = f->n;
      } else if (const auto* c = std::get_if<ChannelSetDim>(&d)) {
        int prev = kept ? static_cast<int>((*keep)[a]) : 0;
        bool ok = std::find(c->allowed.begin(), c->allowed.end(), prev) != c->allowed.end();
        shape[a] = ok ? static_cast<std::size_t>(prev)
                      : static_cast<std::size_t>(rng.Pick(c->allowed));
        continue;  // own channel count even under SameShape
      } else if (const auto* r = std::get_if<RefDim>(&d)) {
        const ParamState* src = State(r->param);
        shape[a] = src && src->shape && r->axis < src->shape->size()
                       ? (*src->shape)[r->axis]
                       : static_cast<std::size_t>(rng.Range(
                             static_cast<std::int64_t>(cfg_.dim_min),
                             static_cast<std::int64_t>(cfg_.dim_max)));
      } else {
        std::size_t prev = kept ? (*keep)[a] : 0;
        shape[a] = prev >= cfg_.dim_min && prev <= cfg_.dim_max
                       ? prev
                       : static_cast<std::size_t>(rng.Range(
                             static_cast<std::int64_t>(cfg_.dim_min),
                             static_cast<std::int64_t>(cfg_.dim_max)));
      }
      if (same && same->size() == dims.size()) shape[a] = (*same)[a];
    }
    return shape;
  }

  EncodedValue Fresh(const ResolvedSpec& spec, ScalarType t,
                     const std::optional<std::vector<std::size_t>>& shape, Rng& rng) const {
    auto pts = PointBounds(spec);
    if (spec.is_array()) {
      NdArray a(t, *shape);
      FillArray(a, Sampler(t, ElementBounds(spec, t, 0, pts)),
                Sampler(t, ElementBounds(spec, t, 1, pts)), rng);
      return EncodedValue::Array(std::move(a));
    }
    auto scalar = [&](std::size_t i) -> EncodedValue {
      switch (t) {
        case ScalarType::kBool: return EncodedValue::Bool(rng.Chance(0.5));
        case ScalarType::kString: {
          std::string s;
          auto len = rng.Range(1, 8);
          for (std::int64_t k = 0; k < len; ++k) {
            s += static_cast<char>('a' + rng.Below(26));
          }
          return EncodedValue::Str(s);
        }
        case ScalarType::kEnum: {
          auto n = rng.Range(0, 7);
          return EncodedValue::Enum("VALUE_" + std::to_string(n), n);
        }
        default: {
          double x = SampleIn(rng, t, ElementBounds(spec, t, i, pts));
          if (IsIntegral(t)) return EncodedValue::Int(static_cast<std::int64_t>(x));
          return EncodedValue::Float(x);
        }
      }
    };
    if (spec.is_tuple()) {
      std::size_t n = std::get<FixedDim>(spec.size_template->dims[0]).n;
      std::vector<EncodedValue> items;
      for (std::size_t i = 0; i < n; ++i) items.push_back(scalar(i));
      return EncodedValue::Seq(std::move(items));
    }
    return scalar(0);
  }

  // Numeric view used by the value strategies; nullopt for non-numeric.
  static std::optional<NdArray> AsArray(const EncodedValue& v) {
    if (v.is_array()) return v.as_array();
    auto wrap = [](const std::vector<const EncodedValue*>& items) -> std::optional<NdArray> {
      if (items.empty()) return std::nullopt;
      bool ints = std::all_of(items.begin(), items.end(),
                              [](const EncodedValue* e) { return e->is_int(); });
      bool floats = std::all_of(items.begin(), items.end(),
                                [](const EncodedValue* e) { return e->is_float(); });
      if (!ints && !floats) return std::nullopt;
      NdArray a(ints ? ScalarType::kInt32 : ScalarType::kFloat64, {items.size()});
      for (std::size_t i = 0; i < items.size(); ++i) a.Set(i, *items[i]->as_number());
      return a;
    };
    if (v.is_seq()) {
      std::vector<const EncodedValue*> items;
      for (const auto& e : v.as_seq().items) items.push_back(&e);
      return wrap(items);
    }
    return wrap({&v});
  }

  static EncodedValue FromArray(const EncodedValue& like, const NdArray& a) {
    if (like.is_array()) return EncodedValue::Array(a);
    auto item = [&](std::size_t i) {
      return a.dtype() == ScalarType::kInt32
                 ? EncodedValue::Int(static_cast<std::int64_t>(a.Get(i)))
                 : EncodedValue::Float(a.Get(i));
    };
    if (like.is_seq()) {
      std::vector<EncodedValue> items;
      for (std::size_t i = 0; i < a.size(); ++i) items.push_back(item(i));
      return EncodedValue::Seq(std::move(items));
    }
    return item(0);
  }

  // Forces every element into the generation bounds of `spec`.
  EncodedValue Clamp(const ResolvedSpec& spec, ScalarType t, const EncodedValue& v) const {
    auto pts = PointBounds(spec);
    if (!spec.value_range && !pts && !(IsIntegral(t) && !v.is_array())) return v;
    auto arr = AsArray(v);
    if (!arr) return v;
    auto bounds = [&](std::size_t i) {
      return spec.value_range || pts ? ElementBounds(spec, t, i, pts)
                                     : Interval{IntegralLimits(t).first,
                                                IntegralLimits(t).second + 1};
    };
    const Interval even = bounds(0), odd = bounds(1);
    auto [lo, hi] = IntegralLimits(arr->dtype());
    arr->VisitElements([&](auto* p, std::size_t n) {
      using T = std::remove_pointer_t<decltype(p)>;
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = Narrow<T>(ClampIn(static_cast<double>(p[i]), t, (i & 1) ? odd : even),
                         lo, hi);
      }
    });
    return FromArray(v, *arr);
  }

  double FloatSpan(const ResolvedSpec& spec, ScalarType t) const {
    Interval r = ElementRange(spec, t);
    double span = r.hi - r.lo;
    return std::isfinite(span) && span > 0 ? span : 1.0;
  }

  void Record(const std::string& name, ParamState state) {
    states_[name] = std::move(state);
  }

  const ApiConstraintSet& cs() const { return cs_; }
  const GenConfig& cfg() const { return cfg_; }
  std::size_t index() const { return index_; }

 private:
  const ApiConstraintSet& cs_;
  const GenConfig& cfg_;
  std::size_t index_;
  std::map<std::string, ParamState> states_;
};

inline TestCase NewCase(const ApiConstraintSet& cs, const GenConfig& cfg, std::size_t index) {
  TestCase tc;
  tc.api_name = cs.api_name;
  tc.case_index = index;
  tc.seed = cfg.rng_seed;
  return tc;
}

// Orders args by declaration while generation ran in dependency order.
inline Args DeclarationOrder(const ApiConstraintSet& cs, std::map<std::string, EncodedValue> v) {
  Args out;
  for (const auto& s : cs.specs) out.emplace_back(s.name, std::move(v.at(s.name)));
  return out;
}

// Fresh valid case for `index`: first domain type, sampled sizes and values.
inline TestCase FreshCase(const ApiConstraintSet& cs, const GenConfig& cfg, std::size_t index) {
  TestCase tc = NewCase(cs, cfg, index);
  CaseBuilder b(cs, cfg, index);
  std::map<std::string, EncodedValue> values;
  for (const auto& name : cs.order) {
    const ResolvedSpec& spec = cs.spec(name);
    Rng rng = b.ParamRng(name);
    ParamState st;
    if (spec.fixed_choices) {
      st.value = rng.Pick(*spec.fixed_choices);
      st.type = spec.type_domain.front();
    } else {
      st.type = b.SameTypeSource(spec).value_or(spec.type_domain.front());
      if (spec.is_array()) st.shape = b.BuildShape(spec, rng, nullptr);
      st.value = b.Fresh(spec, st.type, st.shape, rng);
    }
    values[name] = st.value;
    b.Record(name, std::move(st));
  }
  tc.args = DeclarationOrder(cs, std::move(values));
  return tc;
}

// Whether `v` has the container shape `spec` asks for (scalar or tuple).
inline bool SameKind(const ResolvedSpec& spec, const EncodedValue& v) {
  if (spec.is_tuple()) {
    return v.is_seq() &&
           v.as_seq().items.size() == std::get<FixedDim>(spec.size_template->dims[0]).n;
  }
  return !v.is_array() && !v.is_seq();
}

inline bool HasDep(const ResolvedSpec& spec, DependencyKind kind) {
  return std::any_of(spec.deps.begin(), spec.deps.end(),
                     [&](const DependencyEdge& e) { return e.kind == kind; });
}

inline bool HasVarAxis(const ResolvedSpec& spec) {
  if (!spec.is_array()) return false;
  return std::any_of(spec.size_template->dims.begin(), spec.size_template->dims.end(),
                     [](const DimSpec& d) { return std::holds_alternative<VarDim>(d); });
}

// Replacement value of a type outside the domain: another numeric dtype
// or a string.
inline EncodedValue InvalidTypeValue(const ResolvedSpec& spec, const ParamState& st, Rng& rng) {
  auto in_domain = [&](ScalarType t) {
    return std::find(spec.type_domain.begin(), spec.type_domain.end(), t) !=
           spec.type_domain.end();
  };
  bool as_string = rng.Chance(0.5);
  if (!as_string) {
    if (spec.is_array() && st.shape) {
      std::vector<ScalarType> alt;
      for (ScalarType t : kNumericArrayTypes) {
        if (!in_domain(t)) alt.push_back(t);
      }
      if (!alt.empty()) {
        ScalarType t = rng.Pick(alt);
        NdArray a(t, *st.shape);
        Sampler sampler(t, NaturalRange(t));
        FillArray(a, sampler, sampler, rng);
        return EncodedValue::Array(std::move(a));
      }
    } else if (!spec.is_array()) {
      bool has_int = std::any_of(spec.type_domain.begin(), spec.type_domain.end(), IsIntegral);
      bool has_float =
          std::any_of(spec.type_domain.begin(), spec.type_domain.end(), IsFloating);
      std::size_t n = spec.is_tuple() ? std::get<FixedDim>(spec.size_template->dims[0]).n : 1;
      std::vector<EncodedValue> items;
      for (std::size_t i = 0; i < n; ++i) {
        if (!has_float) {
          items.push_back(EncodedValue::Float(rng.Uniform(0.0, 1.0) + 0.5));
        } else if (!has_int) {
          items.push_back(EncodedValue::Int(rng.Range(0, 255)));
        }
      }
      if (!items.empty()) {
        return spec.is_tuple() ? EncodedValue::Seq(std::move(items)) : items.front();
      }
    }
  }
  return EncodedValue::Str("fuzz");
}

}  // namespace detail

inline TestCase InitCase(const ApiConstraintSet& cs, const GenConfig& cfg) {
  return detail::FreshCase(cs, cfg, 0);
}

// One step of the generation loop: every parameter is regenerated from its
// previous value under the chosen type, size and value strategies.
inline TestCase NextCase(const ApiConstraintSet& cs, const TestCase& prev, const GenConfig& cfg,
                         std::size_t index) {
  const StrategyFlags& flags = cfg.flags;
  if (!flags.any()) return detail::FreshCase(cs, cfg, index);

  TestCase tc = detail::NewCase(cs, cfg, index);
  detail::CaseBuilder b(cs, cfg, index);
  Rng case_rng = b.CaseRng();

  // Per-case decisions, drawn in a fixed order.
  bool adversarial_roll = case_rng.Chance(cfg.adversarial_ratio);
  std::vector<std::string> kinds;
  if (flags.type) kinds.push_back("type");
  if (flags.size) kinds.push_back("size");
  std::string kind = kinds.empty() ? "" : case_rng.Pick(kinds);
  std::vector<std::string> targets;
  for (const auto& name : cs.order) {
    const ResolvedSpec& s = cs.spec(name);
    if (!s.modifiable) continue;
    if (kind == "type" && !detail::HasDep(s, DependencyKind::kSameType)) {
      targets.push_back(name);
    }
    if (kind == "size" && detail::HasVarAxis(s) &&
        !detail::HasDep(s, DependencyKind::kSameShape)) {
      targets.push_back(name);
    }
  }
  std::string target = targets.empty() ? "" : case_rng.Pick(targets);
  auto enabled = flags.enabled_values();
  std::optional<ValueStrategy> strategy;
  if (!enabled.empty()) strategy = case_rng.Pick(enabled);
  bool corrupt = adversarial_roll && !target.empty();

  bool any_modifiable = std::any_of(cs.specs.begin(), cs.specs.end(),
                                    [](const ResolvedSpec& s) { return s.modifiable; });
  if (any_modifiable) {
    if (flags.type) tc.applied.type_strategy = "valid";
    if (flags.size) tc.applied.size_strategy = "valid";
    tc.applied.value_strategy = strategy;
  }

  std::map<std::string, EncodedValue> values;
  for (const auto& name : cs.order) {
    const ResolvedSpec& spec = cs.spec(name);
    Rng rng = b.ParamRng(name);
    const EncodedValue* before = FindArg(prev.args, name);
    bool before_clean = before && prev.applied.corrupted_param != name;
    detail::ParamState st;

    if (!spec.modifiable) {
      st.type = spec.type_domain.front();
      st.value = rng.Pick(*spec.fixed_choices);
      values[name] = st.value;
      b.Record(name, std::move(st));
      continue;
    }

    // N_Type.
    std::optional<ScalarType> prev_type;
    if (before_clean) {
      auto t = ValueType(spec, *before);
      if (t && std::find(spec.type_domain.begin(), spec.type_domain.end(), *t) !=
                   spec.type_domain.end()) {
        prev_type = t;
      }
    }
    if (spec.type_domain.size() == 1) {
      st.type = spec.type_domain.front();
    } else if (auto src = b.SameTypeSource(spec)) {
      st.type = *src;
    } else if (flags.type) {
      st.type = rng.Pick(spec.type_domain);
    } else {
      st.type = prev_type.value_or(spec.type_domain.front());
    }

    // N_Size.
    if (spec.is_array()) {
      std::optional<std::vector<std::size_t>> keep;
      if (!flags.size && before_clean && before->is_array()) keep = before->as_array().shape();
      st.shape = b.BuildShape(spec, rng, keep ? &*keep : nullptr);
      if (corrupt && kind == "size" && name == target) {
        std::vector<std::size_t> var_axes;
        for (std::size_t a = 0; a < spec.size_template->dims.size(); ++a) {
          if (std::holds_alternative<VarDim>(spec.size_template->dims[a])) var_axes.push_back(a);
        }
        std::size_t axis = rng.Pick(var_axes);
        (*st.shape)[axis] = rng.Pick(cfg.extreme_dims);
        tc.applied.size_strategy = "extreme";
        tc.applied.corrupted_param = name;
        tc.validity_mode = ValidityMode::kAdversarial;
      }
    }

    // Value: continue from the previous value when type and shape carry
    // over, otherwise start from a fresh one; then apply the strategy.
    EncodedValue base;
    bool chain = false;
    if (before_clean) {
      if (spec.is_array()) {
        chain = before->is_array() && before->as_array().dtype() == st.type &&
                before->as_array().shape() == *st.shape;
      } else {
        chain = ValueType(spec, *before) == st.type && detail::SameKind(spec, *before);
      }
    }
    base = chain ? *before : b.Fresh(spec, st.type, st.shape, rng);
    if (strategy) {
      if (auto arr = detail::CaseBuilder::AsArray(base)) {
        NdArray mutated =
            ApplyValueStrategy(*arr, *strategy, cfg, rng, b.FloatSpan(spec, st.type));
        base = detail::CaseBuilder::FromArray(base, mutated);
      }
    }
    st.value = b.Clamp(spec, st.type, base);

    if (corrupt && kind == "type" && name == target) {
      st.value = detail::InvalidTypeValue(spec, st, rng);
      tc.applied.type_strategy = "invalid";
      tc.applied.corrupted_param = name;
      tc.validity_mode = ValidityMode::kAdversarial;
    }
    values[name] = st.value;
    b.Record(name, std::move(st));
  }
  tc.args = detail::DeclarationOrder(cs, std::move(values));
  return tc;
}

// Lazily yields init_case followed by budget - 1 next_case steps.
class CaseStream {
 public:
  CaseStream(const ApiConstraintSet& cs, const GenConfig& cfg) : cs_(cs), cfg_(cfg) {
    cfg_.Check();
  }

  std::optional<TestCase> Next() {
    if (index_ >= cfg_.budget_per_api) return std::nullopt;
    TestCase tc = index_ == 0 ? InitCase(cs_, cfg_) : NextCase(cs_, *prev_, cfg_, index_);
    ++index_;
    prev_ = tc;
    return tc;
  }

  std::size_t index() const { return index_; }

 private:
  const ApiConstraintSet& cs_;
  GenConfig cfg_;
  std::size_t index_ = 0;
  std::optional<TestCase> prev_;
};

inline std::vector<TestCase> GenerateStream(const ApiConstraintSet& cs, const GenConfig& cfg) {
  CaseStream stream(cs, cfg);
  std::vector<TestCase> out;
  while (auto tc = stream.Next()) out.push_back(std::move(*tc));
  return out;
}

// ---- JSON -------------------------------------------------------------------

inline Json ToJson(const TestCase& tc) {
  Json j = Json::object();
  j["api_name"] = tc.api_name;
  j["case_index"] = tc.case_index;
  j["seed"] = tc.seed;
  j["validity_mode"] = ToString(tc.validity_mode);
  Json applied = Json::object();
  auto opt = [](const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); };
  applied["type_strategy"] = opt(tc.applied.type_strategy);
  applied["size_strategy"] = opt(tc.applied.size_strategy);
  applied["value_strategy"] =
      tc.applied.value_strategy ? Json(ToString(*tc.applied.value_strategy)) : Json(nullptr);
  applied["corrupted_param"] = opt(tc.applied.corrupted_param);
  j["applied"] = std::move(applied);
  Json args = Json::object();
  for (const auto& [name, value] : tc.args) args[name] = ToJson(value);
  j["args"] = std::move(args);
  return j;
}

inline TestCase TestCaseFromJson(const Json& j, const std::string& pointer) {
  detail::ObjectReader r(j, pointer);
  TestCase tc;
  tc.api_name = r.String("api_name");
  tc.case_index = r.UInt("case_index");
  tc.seed = r.UInt("seed");
  std::string mode = r.String("validity_mode");
  if (mode == "valid_only") {
    tc.validity_mode = ValidityMode::kValidOnly;
  } else if (mode == "adversarial") {
    tc.validity_mode = ValidityMode::kAdversarial;
  } else {
    throw SchemaError(r.Path("validity_mode"), "expected valid_only or adversarial");
  }
  detail::ObjectReader a(r.Required("applied"), r.Path("applied"));
  auto opt = [&](std::string_view key) -> std::optional<std::string> {
    const Json* v = a.Optional(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw SchemaError(a.Path(key), "expected a string");
    return v->get<std::string>();
  };
  tc.applied.type_strategy = opt("type_strategy");
  tc.applied.size_strategy = opt("size_strategy");
  if (auto vs = opt("value_strategy")) {
    tc.applied.value_strategy = ParseValueStrategy(*vs);
    if (!tc.applied.value_strategy) {
      throw SchemaError(a.Path("value_strategy"), "unknown value strategy");
    }
  }
  tc.applied.corrupted_param = opt("corrupted_param");
  a.RejectUnknown();
  const Json& args = r.Required("args");
  if (!args.is_object()) throw SchemaError(r.Path("args"), "expected an object");
  for (auto it = args.begin(); it != args.end(); ++it) {
    tc.args.emplace_back(it.key(),
                         ValueFromJson(it.value(), detail::ChildPointer(r.Path("args"), it.key())));
  }
  r.RejectUnknown();
  return tc;
}

inline std::string Serialize(const TestCase& tc) { return ToJson(tc).dump(); }

// Hex FNV-1a digest of the serialized arguments.
inline std::string CaseDigest(const TestCase& tc) {
  Json args = Json::object();
  for (const auto& [name, value] : tc.args) args[name] = ToJson(value);
  detail::Fnv1a h;
  h.Update(tc.api_name);
  h.Update(args.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
  return buf;
}

}  // namespace docfuzz
