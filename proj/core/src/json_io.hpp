#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include "dynres/errors.hpp"
#include "dynres/params.hpp"
#include "json.hpp"

namespace dynres::detail {

using json = nlohmann::json;

inline void require_object(const json& j, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
}

inline void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                                std::string_view where) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
  }
}

inline double get_number(const json& j, const char* key, std::string_view where) {
  if (!j.contains(key)) throw ConfigError(std::string(where) + ": missing key '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string(where) + ": '" + key + "' must be a number");
  return v.get<double>();
}

inline double get_number_or(const json& j, const char* key, double fallback, std::string_view where) {
  return j.contains(key) ? get_number(j, key, where) : fallback;
}

ParamsConfig params_from_json_value(const json& j);
json params_to_json(const SystemParams& p);
json thresholds_to_json(const Thresholds& t);

}  // namespace dynres::detail
