#pragma once

// Shared nlohmann::json helpers for the file-format modules.

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fruitbench/error.hpp"

namespace fruitbench::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("malformed " + std::string(what) + " JSON at byte " +
                         std::to_string(e.byte) + ": " + e.what(),
                     e.byte);
  }
}

inline const json& require_field(const json& obj, const char* key,
                                 std::string_view context) {
  if (!obj.is_object()) {
    throw ValidationError(std::string(context) + " must be a JSON object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(std::string(context) + " is missing field '" + key +
                          "'");
  }
  return *it;
}

inline std::int64_t require_int(const json& obj, const char* key,
                                std::string_view context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_number_integer()) {
    throw ValidationError(std::string(context) + " field '" + key +
                          "' must be an integer");
  }
  return v.get<std::int64_t>();
}

inline double require_number(const json& v, std::string_view context) {
  if (!v.is_number()) {
    throw ValidationError(std::string(context) + " must be a number");
  }
  return v.get<double>();
}

inline const json& require_array(const json& obj, const char* key,
                                 std::string_view context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_array()) {
    throw ValidationError(std::string(context) + " field '" + key +
                          "' must be an array");
  }
  return v;
}

}  // namespace fruitbench::detail
