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

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "docfuzz/error.hpp"

namespace docfuzz {

using Json = nlohmann::ordered_json;

namespace detail {

// Parses a wire message. Long "data" string members (base64 payloads) are
// cut out before parsing and moved back afterwards, so the JSON lexer never
// walks them byte by byte. Unescaped base64 cannot contain a quote, and the
// marker `"data":"` cannot occur inside an escaped JSON string.
inline Json ParseWireJson(std::string_view text) {
  static constexpr std::string_view kKey = "\"data\":\"";
  static constexpr std::size_t kMinLifted = 64;
  std::vector<std::string> lifted;
  std::string skeleton;
  std::size_t pos = 0;
  while (true) {
    std::size_t k = text.find(kKey, pos);
    if (k == std::string_view::npos) break;
    std::size_t start = k + kKey.size();
    std::size_t end = text.find('"', start);
    if (end == std::string_view::npos) break;
    std::string_view body = text.substr(start, end - start);
    if (body.size() < kMinLifted || body.find('\\') != std::string_view::npos) {
      skeleton.append(text.substr(pos, end + 1 - pos));
    } else {
      skeleton.append(text.substr(pos, start - pos));
      skeleton += "\\u0000" + std::to_string(lifted.size());
      skeleton += '"';
      lifted.emplace_back(body);
    }
    pos = end + 1;
  }
  if (lifted.empty()) return Json::parse(text);
  skeleton.append(text.substr(pos));
  Json j = Json::parse(skeleton);
  auto restore = [&](auto&& self, Json& node) -> void {
    if (node.is_array()) {
      for (auto& child : node) self(self, child);
      return;
    }
    if (!node.is_object()) return;
    for (auto& [key, child] : node.items()) {
      if (key == "data" && child.is_string()) {
        const auto& s = child.template get_ref<const std::string&>();
        if (!s.empty() && s[0] == '\0') {
          std::size_t idx = std::stoul(s.substr(1));
          if (idx < lifted.size()) child = std::move(lifted[idx]);
          continue;
        }
      }
      self(self, child);
    }
  };
  restore(restore, j);
  return j;
}

inline std::string EscapePointerToken(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

inline std::string ChildPointer(const std::string& base, std::string_view key) {
  return base + "/" + EscapePointerToken(key);
}

inline std::string ChildPointer(const std::string& base, std::size_t index) {
  return base + "/" + std::to_string(index);
}

inline Json ParseJson(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
}

// Reads the members of one JSON object, rejecting unknown keys once the
// caller is done with it.
class ObjectReader {
 public:
  ObjectReader(const Json& node, std::string pointer)
      : node_(node), pointer_(std::move(pointer)) {
    if (!node_.is_object()) throw SchemaError(pointer_, "expected an object");
  }

  bool Has(std::string_view key) const {
    auto it = node_.find(std::string(key));
    return it != node_.end() && !it->is_null();
  }

  const Json& Required(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = node_.find(std::string(key));
    if (it == node_.end()) {
      throw SchemaError(ChildPointer(pointer_, key), "missing required field");
    }
    return *it;
  }

  // Returns nullptr when absent or null.
  const Json* Optional(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = node_.find(std::string(key));
    if (it == node_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string String(std::string_view key) {
    const Json& v = Required(key);
    if (!v.is_string()) throw SchemaError(Path(key), "expected a string");
    return v.get<std::string>();
  }

  bool Bool(std::string_view key) {
    const Json& v = Required(key);
    if (!v.is_boolean()) throw SchemaError(Path(key), "expected a boolean");
    return v.get<bool>();
  }

  std::int64_t Int(std::string_view key) {
    return AsInt(Required(key), Path(key));
  }

  std::uint64_t UInt(std::string_view key) {
    const Json& v = Required(key);
    if (!v.is_number_unsigned()) {
      throw SchemaError(Path(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string Path(std::string_view key) const {
    return ChildPointer(pointer_, key);
  }

  const std::string& pointer() const { return pointer_; }

  void RejectUnknown() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw SchemaError(ChildPointer(pointer_, it.key()), "unknown field");
      }
    }
  }

  static std::int64_t AsInt(const Json& v, const std::string& pointer) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    throw SchemaError(pointer, "expected an integer");
  }

 private:
  const Json& node_;
  std::string pointer_;
  std::set<std::string> seen_;
};

inline const Json& RequireArray(const Json& v, const std::string& pointer) {
  if (!v.is_array()) throw SchemaError(pointer, "expected an array");
  return v;
}

inline double RequireNumber(const Json& v, const std::string& pointer) {
  if (!v.is_number()) throw SchemaError(pointer, "expected a number");
  return v.get<double>();
}

}  // namespace detail
}  // namespace docfuzz
