#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "dfm/error.hpp"
#include "dfm/geometry.hpp"

namespace dfm::detail {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

inline json parse_json(std::string_view document, std::string_view what) {
  try {
    return json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Syntax, std::string(what) + ": " + e.what());
  }
}

inline const json& require(const json& obj, const char* key, std::string_view where) {
  if (!obj.is_object()) throw Error(ErrorKind::Syntax, std::string(where) + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::Syntax, std::string(where) + ": missing field '" + key + "'");
  }
  return *it;
}

inline std::string require_string(const json& obj, const char* key, std::string_view where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw Error(ErrorKind::Syntax, std::string(where) + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline double require_number(const json& obj, const char* key, std::string_view where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw Error(ErrorKind::Syntax, std::string(where) + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline std::int64_t require_int(const json& obj, const char* key, std::string_view where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) {
    throw Error(ErrorKind::Syntax, std::string(where) + ": field '" + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

/// Micrometer value with exactly the decimals the nanometer value needs.
inline ordered_json um_value(Coord nm) {
  if (nm % 1000 == 0) return nm / 1000;
  return static_cast<double>(nm) / 1000.0;
}

inline ordered_json rect_nm(const Rect& r) { return {r.lo.x, r.lo.y, r.hi.x, r.hi.y}; }

inline Rect parse_rect_nm(const json& v, std::string_view where) {
  if (!v.is_array() || v.size() != 4) throw Error(ErrorKind::Syntax, std::string(where) + ": rect needs 4 integers");
  for (const auto& c : v) {
    if (!c.is_number_integer()) throw Error(ErrorKind::Syntax, std::string(where) + ": rect needs 4 integers");
  }
  return {{v[0].get<Coord>(), v[1].get<Coord>()}, {v[2].get<Coord>(), v[3].get<Coord>()}};
}

}  // namespace dfm::detail
