// Copyright 2026 The AdaGraft Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADAGRAFT_DETAIL_JSON_UTIL_HPP
#define ADAGRAFT_DETAIL_JSON_UTIL_HPP

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <initializer_list>
#include <string>
#include <string_view>

#include "adagraft/error.hpp"
#include "json.hpp"

namespace adagraft {

using Json = nlohmann::ordered_json;

namespace detail {

/// Rejects any key of `obj` outside `allowed`. `where` prefixes messages.
inline void check_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                       std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
  }
}

inline const Json& require(const Json& obj, std::string_view key, std::string_view where) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) {
    throw ConfigError(std::string(where) + ": missing key '" + std::string(key) + "'");
  }
  return *it;
}

inline double get_number(const Json& obj, std::string_view key, std::string_view where) {
  const Json& v = require(obj, key, where);
  if (!v.is_number()) {
    throw ConfigError(std::string(where) + "." + std::string(key) + ": expected a number");
  }
  return v.get<double>();
}

inline double get_number(const Json& obj, std::string_view key, std::string_view where,
                         double fallback) {
  return obj.contains(std::string(key)) ? get_number(obj, key, where) : fallback;
}

inline std::int64_t get_integer(const Json& obj, std::string_view key, std::string_view where) {
  const Json& v = require(obj, key, where);
  if (!v.is_number_integer()) {
    throw ConfigError(std::string(where) + "." + std::string(key) + ": expected an integer");
  }
  return v.get<std::int64_t>();
}

inline std::int64_t get_integer(const Json& obj, std::string_view key, std::string_view where,
                                std::int64_t fallback) {
  return obj.contains(std::string(key)) ? get_integer(obj, key, where) : fallback;
}

inline std::uint64_t get_seed(const Json& obj, std::string_view key, std::string_view where,
                              std::uint64_t fallback) {
  if (!obj.contains(std::string(key))) return fallback;
  const Json& v = obj.at(std::string(key));
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(std::string(where) + "." + std::string(key) +
                      ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline bool get_bool(const Json& obj, std::string_view key, std::string_view where, bool fallback) {
  if (!obj.contains(std::string(key))) return fallback;
  const Json& v = obj.at(std::string(key));
  if (!v.is_boolean()) {
    throw ConfigError(std::string(where) + "." + std::string(key) + ": expected a boolean");
  }
  return v.get<bool>();
}

inline std::string get_string(const Json& obj, std::string_view key, std::string_view where) {
  const Json& v = require(obj, key, where);
  if (!v.is_string()) {
    throw ConfigError(std::string(where) + "." + std::string(key) + ": expected a string");
  }
  return v.get<std::string>();
}

inline std::string get_string(const Json& obj, std::string_view key, std::string_view where,
                              std::string fallback) {
  return obj.contains(std::string(key)) ? get_string(obj, key, where) : fallback;
}

/// %.17g formatting: enough digits to round-trip any double exactly.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 40> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view s) {
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw IoError("cannot parse number '" + tmp + "'");
  }
  return v;
}

}  // namespace detail
}  // namespace adagraft

#endif  // ADAGRAFT_DETAIL_JSON_UTIL_HPP
