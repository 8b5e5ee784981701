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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "docfuzz/detail/base64.hpp"
#include "docfuzz/detail/json_reader.hpp"
#include "docfuzz/error.hpp"

namespace docfuzz {

static_assert(std::endian::native == std::endian::little,
              "array payloads are stored in host order; big-endian hosts need "
              "a byte swap on encode/decode");

enum class ScalarType { kUInt8, kInt32, kFloat32, kFloat64, kBool, kString, kEnum };

inline constexpr ScalarType kAllScalarTypes[] = {
    ScalarType::kUInt8, ScalarType::kInt32,  ScalarType::kFloat32,
    ScalarType::kFloat64, ScalarType::kBool, ScalarType::kString,
    ScalarType::kEnum};

inline constexpr ScalarType kNumericArrayTypes[] = {
    ScalarType::kUInt8, ScalarType::kInt32, ScalarType::kFloat32,
    ScalarType::kFloat64};

inline std::string_view ToString(ScalarType t) {
  switch (t) {
    case ScalarType::kUInt8: return "uint8";
    case ScalarType::kInt32: return "int32";
    case ScalarType::kFloat32: return "float32";
    case ScalarType::kFloat64: return "float64";
    case ScalarType::kBool: return "bool";
    case ScalarType::kString: return "string";
    case ScalarType::kEnum: return "enum";
  }
  return "?";
}

inline std::optional<ScalarType> ParseScalarType(std::string_view name) {
  for (ScalarType t : kAllScalarTypes) {
    if (ToString(t) == name) return t;
  }
  return std::nullopt;
}

inline bool IsArrayDtype(ScalarType t) {
  return t == ScalarType::kUInt8 || t == ScalarType::kInt32 ||
         t == ScalarType::kFloat32 || t == ScalarType::kFloat64 ||
         t == ScalarType::kBool;
}

inline bool IsIntegral(ScalarType t) {
  return t == ScalarType::kUInt8 || t == ScalarType::kInt32 ||
         t == ScalarType::kBool;
}

inline bool IsFloating(ScalarType t) {
  return t == ScalarType::kFloat32 || t == ScalarType::kFloat64;
}

inline std::size_t ElementSize(ScalarType t) {
  switch (t) {
    case ScalarType::kUInt8:
    case ScalarType::kBool: return 1;
    case ScalarType::kInt32:
    case ScalarType::kFloat32: return 4;
    case ScalarType::kFloat64: return 8;
    default: return 0;
  }
}

// Inclusive representable range of an integral dtype.
inline std::pair<double, double> IntegralLimits(ScalarType t) {
  switch (t) {
    case ScalarType::kUInt8: return {0.0, 255.0};
    case ScalarType::kBool: return {0.0, 1.0};
    default:
      return {static_cast<double>(std::numeric_limits<std::int32_t>::min()),
              static_cast<double>(std::numeric_limits<std::int32_t>::max())};
  }
}

// Dense n-dimensional array in C order; `data` holds little-endian bytes.
class NdArray {
 public:
  NdArray() = default;

  NdArray(ScalarType dtype, std::vector<std::size_t> shape)
      : dtype_(dtype), shape_(std::move(shape)) {
    if (!IsArrayDtype(dtype_)) {
      throw InvalidApiInfo("not an array dtype: " + std::string(ToString(dtype_)));
    }
    data_.assign(ElementSize(dtype_) * ElementCount(shape_), 0);
  }

  // Takes ownership of raw bytes; the length must match dtype and shape.
  static NdArray FromBytes(ScalarType dtype, std::vector<std::size_t> shape,
                           std::vector<std::uint8_t> bytes) {
    NdArray a;
    if (!IsArrayDtype(dtype)) {
      throw InvalidApiInfo("not an array dtype: " + std::string(ToString(dtype)));
    }
    if (bytes.size() != ElementSize(dtype) * ElementCount(shape)) {
      throw InvalidApiInfo("array payload length does not match shape");
    }
    a.dtype_ = dtype;
    a.shape_ = std::move(shape);
    a.data_ = std::move(bytes);
    return a;
  }

  static std::size_t ElementCount(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
  }

  ScalarType dtype() const { return dtype_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return ElementCount(shape_); }
  const std::vector<std::uint8_t>& bytes() const { return data_; }

  double Get(std::size_t i) const {
    const std::uint8_t* p = data_.data() + i * ElementSize(dtype_);
    switch (dtype_) {
      case ScalarType::kUInt8:
      case ScalarType::kBool: return *p;
      case ScalarType::kInt32: return Load<std::int32_t>(p);
      case ScalarType::kFloat32: return Load<float>(p);
      case ScalarType::kFloat64: return Load<double>(p);
      default: return 0.0;
    }
  }

  // Integral dtypes round half away from zero and saturate at the dtype
  // limits; NaN stores as 0.
  void Set(std::size_t i, double v) {
    std::uint8_t* p = data_.data() + i * ElementSize(dtype_);
    if (IsIntegral(dtype_)) {
      auto [lo, hi] = IntegralLimits(dtype_);
      double r = std::isnan(v) ? 0.0 : std::clamp(std::round(v), lo, hi);
      if (dtype_ == ScalarType::kInt32) {
        Store(p, static_cast<std::int32_t>(r));
      } else {
        *p = static_cast<std::uint8_t>(r);
      }
    } else if (dtype_ == ScalarType::kFloat32) {
      Store(p, static_cast<float>(v));
    } else {
      Store(p, v);
    }
  }

  bool operator==(const NdArray& o) const {
    return dtype_ == o.dtype_ && shape_ == o.shape_ && data_ == o.data_;
  }

  // Calls `f(T* first, std::size_t n)` with the element type of the dtype.
  template <typename F>
  void VisitElements(F&& f) {
    std::uint8_t* p = data_.data();
    const std::size_t n = size();
    switch (dtype_) {
      case ScalarType::kInt32: f(reinterpret_cast<std::int32_t*>(p), n); break;
      case ScalarType::kFloat32: f(reinterpret_cast<float*>(p), n); break;
      case ScalarType::kFloat64: f(reinterpret_cast<double*>(p), n); break;
      default: f(p, n); break;
    }
  }

 private:
  template <typename T>
  static T Load(const std::uint8_t* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
  }
  template <typename T>
  static void Store(std::uint8_t* p, T v) {
    std::memcpy(p, &v, sizeof(T));
  }

  ScalarType dtype_ = ScalarType::kUInt8;
  std::vector<std::size_t> shape_;
  std::vector<std::uint8_t> data_;
};

struct EncodedValue;

struct NullValue {
  bool operator==(const NullValue&) const = default;
};

struct EnumValue {
  std::string name;
  std::int64_t value = 0;
  bool operator==(const EnumValue&) const = default;
};

struct SeqValue {
  std::vector<EncodedValue> items;
  bool operator==(const SeqValue& o) const;
};

// Floats compare bitwise so NaN payloads survive round-trip checks.
struct FloatValue {
  double value = 0.0;
  bool operator==(const FloatValue& o) const {
    return std::bit_cast<std::uint64_t>(value) ==
           std::bit_cast<std::uint64_t>(o.value);
  }
};

// Concrete argument value exchanged with the worker.
struct EncodedValue {
  using Variant = std::variant<std::int64_t, FloatValue, bool, std::string,
                               NullValue, EnumValue, SeqValue, NdArray>;
  Variant v;

  static EncodedValue Int(std::int64_t i) { return {Variant(std::in_place_type<std::int64_t>, i)}; }
  static EncodedValue Float(double d) { return {Variant(FloatValue{d})}; }
  static EncodedValue Bool(bool b) { return {Variant(std::in_place_type<bool>, b)}; }
  static EncodedValue Str(std::string s) { return {Variant(std::in_place_type<std::string>, std::move(s))}; }
  static EncodedValue Null() { return {Variant(NullValue{})}; }
  static EncodedValue Enum(std::string name, std::int64_t value) {
    return {Variant(EnumValue{std::move(name), value})};
  }
  static EncodedValue Seq(std::vector<EncodedValue> items) {
    return {Variant(SeqValue{std::move(items)})};
  }
  static EncodedValue Array(NdArray a) { return {Variant(std::move(a))}; }

  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_float() const { return std::holds_alternative<FloatValue>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_str() const { return std::holds_alternative<std::string>(v); }
  bool is_null() const { return std::holds_alternative<NullValue>(v); }
  bool is_enum() const { return std::holds_alternative<EnumValue>(v); }
  bool is_seq() const { return std::holds_alternative<SeqValue>(v); }
  bool is_array() const { return std::holds_alternative<NdArray>(v); }

  std::int64_t as_int() const { return std::get<std::int64_t>(v); }
  double as_float() const { return std::get<FloatValue>(v).value; }
  bool as_bool() const { return std::get<bool>(v); }
  const std::string& as_str() const { return std::get<std::string>(v); }
  const EnumValue& as_enum() const { return std::get<EnumValue>(v); }
  const SeqValue& as_seq() const { return std::get<SeqValue>(v); }
  const NdArray& as_array() const { return std::get<NdArray>(v); }
  NdArray& as_array() { return std::get<NdArray>(v); }

  // Numeric view of Int/Float/Bool scalars.
  std::optional<double> as_number() const {
    if (is_int()) return static_cast<double>(as_int());
    if (is_float()) return as_float();
    if (is_bool()) return as_bool() ? 1.0 : 0.0;
    return std::nullopt;
  }

  bool operator==(const EncodedValue& o) const { return v == o.v; }
};

inline bool SeqValue::operator==(const SeqValue& o) const {
  return items == o.items;
}

// Short tag used when comparing the "type" of two values (SameType).
inline std::string TypeTag(const EncodedValue& v) {
  if (v.is_array()) return std::string(ToString(v.as_array().dtype()));
  if (v.is_int()) return "int";
  if (v.is_float()) return "float";
  if (v.is_bool()) return "bool";
  if (v.is_str()) return "str";
  if (v.is_enum()) return "enum";
  if (v.is_seq()) return "seq";
  return "null";
}

// True when any numeric leaf is NaN or +/-Inf.
inline bool ContainsNonFinite(const EncodedValue& v) {
  if (v.is_float()) return !std::isfinite(v.as_float());
  if (v.is_seq()) {
    for (const auto& item : v.as_seq().items) {
      if (ContainsNonFinite(item)) return true;
    }
    return false;
  }
  if (v.is_array()) {
    const NdArray& a = v.as_array();
    if (!IsFloating(a.dtype())) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!std::isfinite(a.Get(i))) return true;
    }
  }
  return false;
}

// Wire encoding. Non-finite floats travel as the strings "nan", "inf",
// "-inf" because JSON numbers cannot carry them.
inline Json ToJson(const EncodedValue& value) {
  Json j = Json::object();
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          j["kind"] = "int";
          j["value"] = x;
        } else if constexpr (std::is_same_v<T, FloatValue>) {
          j["kind"] = "float";
          if (std::isnan(x.value)) {
            j["value"] = "nan";
          } else if (std::isinf(x.value)) {
            j["value"] = x.value > 0 ? "inf" : "-inf";
          } else {
            j["value"] = x.value;
          }
        } else if constexpr (std::is_same_v<T, bool>) {
          j["kind"] = "bool";
          j["value"] = x;
        } else if constexpr (std::is_same_v<T, std::string>) {
          j["kind"] = "str";
          j["value"] = x;
        } else if constexpr (std::is_same_v<T, NullValue>) {
          j["kind"] = "null";
        } else if constexpr (std::is_same_v<T, EnumValue>) {
          j["kind"] = "enum";
          j["name"] = x.name;
          j["value"] = x.value;
        } else if constexpr (std::is_same_v<T, SeqValue>) {
          j["kind"] = "seq";
          Json items = Json::array();
          for (const auto& item : x.items) items.push_back(ToJson(item));
          j["items"] = std::move(items);
        } else {
          j["kind"] = "ndarray";
          j["dtype"] = ToString(x.dtype());
          j["shape"] = x.shape();
          j["data"] = detail::Base64Encode(x.bytes());
        }
      },
      value.v);
  return j;
}

// Appends the compact serialization of ToJson(value) to `out`. Array
// payloads are copied verbatim since base64 needs no escaping.
inline void AppendWire(std::string& out, const EncodedValue& value) {
  if (const auto* a = std::get_if<NdArray>(&value.v)) {
    out += "{\"kind\":\"ndarray\",\"dtype\":\"";
    out += ToString(a->dtype());
    out += "\",\"shape\":[";
    for (std::size_t i = 0; i < a->shape().size(); ++i) {
      if (i) out += ',';
      out += std::to_string(a->shape()[i]);
    }
    out += "],\"data\":\"";
    out += detail::Base64Encode(a->bytes());
    out += "\"}";
    return;
  }
  if (const auto* s = std::get_if<SeqValue>(&value.v)) {
    out += "{\"kind\":\"seq\",\"items\":[";
    for (std::size_t i = 0; i < s->items.size(); ++i) {
      if (i) out += ',';
      AppendWire(out, s->items[i]);
    }
    out += "]}";
    return;
  }
  out += ToJson(value).dump();
}

inline EncodedValue ValueFromJson(const Json& j, const std::string& pointer) {
  detail::ObjectReader r(j, pointer);
  std::string kind = r.String("kind");
  EncodedValue out;
  if (kind == "int") {
    out = EncodedValue::Int(r.Int("value"));
  } else if (kind == "float") {
    const Json& v = r.Required("value");
    if (v.is_string()) {
      std::string s = v.get<std::string>();
      if (s == "nan") {
        out = EncodedValue::Float(std::numeric_limits<double>::quiet_NaN());
      } else if (s == "inf") {
        out = EncodedValue::Float(std::numeric_limits<double>::infinity());
      } else if (s == "-inf") {
        out = EncodedValue::Float(-std::numeric_limits<double>::infinity());
      } else {
        throw SchemaError(r.Path("value"), "unknown float literal '" + s + "'");
      }
    } else {
      out = EncodedValue::Float(detail::RequireNumber(v, r.Path("value")));
    }
  } else if (kind == "bool") {
    out = EncodedValue::Bool(r.Bool("value"));
  } else if (kind == "str") {
    out = EncodedValue::Str(r.String("value"));
  } else if (kind == "null") {
    out = EncodedValue::Null();
  } else if (kind == "enum") {
    std::string name = r.String("name");
    out = EncodedValue::Enum(std::move(name), r.Int("value"));
  } else if (kind == "seq") {
    const Json& items = detail::RequireArray(r.Required("items"), r.Path("items"));
    std::vector<EncodedValue> values;
    for (std::size_t i = 0; i < items.size(); ++i) {
      values.push_back(
          ValueFromJson(items[i], detail::ChildPointer(r.Path("items"), i)));
    }
    out = EncodedValue::Seq(std::move(values));
  } else if (kind == "ndarray") {
    auto dtype = ParseScalarType(r.String("dtype"));
    if (!dtype || !IsArrayDtype(*dtype)) {
      throw SchemaError(r.Path("dtype"), "unsupported array dtype");
    }
    const Json& shape_j = detail::RequireArray(r.Required("shape"), r.Path("shape"));
    std::vector<std::size_t> shape;
    for (std::size_t i = 0; i < shape_j.size(); ++i) {
      if (!shape_j[i].is_number_unsigned()) {
        throw SchemaError(detail::ChildPointer(r.Path("shape"), i),
                          "expected a non-negative integer");
      }
      shape.push_back(shape_j[i].get<std::size_t>());
    }
    auto bytes = detail::Base64Decode(r.String("data"));
    if (!bytes) throw SchemaError(r.Path("data"), "invalid base64 payload");
    if (bytes->size() != ElementSize(*dtype) * NdArray::ElementCount(shape)) {
      throw SchemaError(r.Path("data"), "payload length does not match shape");
    }
    out = EncodedValue::Array(
        NdArray::FromBytes(*dtype, std::move(shape), std::move(*bytes)));
  } else {
    throw SchemaError(r.Path("kind"), "unknown value kind '" + kind + "'");
  }
  r.RejectUnknown();
  return out;
}

inline std::string ToString(const EncodedValue& v) { return ToJson(v).dump(); }

}  // namespace docfuzz
