#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "gfra/types.hpp"

namespace gfra {

// Minimal TOML subset: [section] headers, key = value pairs, # comments.
// Values: strings, integers, floats, booleans, flat arrays of those.
struct TomlValue {
  std::variant<bool, std::int64_t, double, std::string, std::vector<TomlValue>> v;

  bool is_array() const { return std::holds_alternative<std::vector<TomlValue>>(v); }
  bool as_bool() const;
  std::int64_t as_int() const;
  double as_double() const;  // accepts integers
  const std::string& as_string() const;
  const std::vector<TomlValue>& as_array() const;
};

using TomlSection = std::map<std::string, TomlValue>;
using TomlDoc = std::map<std::string, TomlSection>;  // "" holds root-level keys

TomlDoc parse_toml(const std::string& text);
TomlDoc parse_toml_file(const std::string& path);

}  // namespace gfra
