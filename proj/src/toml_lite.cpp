#include "gfra/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace gfra {

bool TomlValue::as_bool() const {
  if (auto* b = std::get_if<bool>(&v)) return *b;
  throw InvalidConfig("TOML value is not a boolean");
}

std::int64_t TomlValue::as_int() const {
  if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw InvalidConfig("TOML value is not an integer");
}

double TomlValue::as_double() const {
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw InvalidConfig("TOML value is not a number");
}

const std::string& TomlValue::as_string() const {
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  throw InvalidConfig("TOML value is not a string");
}

const std::vector<TomlValue>& TomlValue::as_array() const {
  if (auto* a = std::get_if<std::vector<TomlValue>>(&v)) return *a;
  throw InvalidConfig("TOML value is not an array");
}

namespace {

void skip_ws(const std::string& s, size_t& i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

TomlValue parse_scalar(const std::string& tok, int line_no) {
  if (tok.empty()) throw InvalidConfig("empty TOML value at line " + std::to_string(line_no));
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"')
      throw InvalidConfig("unterminated string at line " + std::to_string(line_no));
    return {tok.substr(1, tok.size() - 2)};
  }
  if (tok == "true") return {true};
  if (tok == "false") return {false};
  const bool looks_float = tok.find_first_of(".eE") != std::string::npos &&
                           tok.find_first_not_of("+-0123456789.eE") == std::string::npos;
  try {
    size_t pos = 0;
    if (!looks_float) {
      const std::int64_t i = std::stoll(tok, &pos);
      if (pos == tok.size()) return {i};
    }
    const double d = std::stod(tok, &pos);
    if (pos == tok.size()) return {d};
  } catch (...) {
  }
  throw InvalidConfig("cannot parse TOML value '" + tok + "' at line " + std::to_string(line_no));
}

TomlValue parse_value(const std::string& raw, int line_no) {
  std::string s = raw;
  // strip trailing comment (outside strings)
  bool in_str = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) {
      s = s.substr(0, i);
      break;
    }
  }
  // trim
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  s = s.substr(b, e - b);

  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']')
      throw InvalidConfig("unterminated array at line " + std::to_string(line_no));
    std::vector<TomlValue> arr;
    std::string body = s.substr(1, s.size() - 2);
    std::string tok;
    bool str = false;
    for (char c : body) {
      if (c == '"') str = !str;
      if (c == ',' && !str) {
        arr.push_back(parse_value(tok, line_no));
        tok.clear();
      } else {
        tok += c;
      }
    }
    if (tok.find_first_not_of(" \t") != std::string::npos)
      arr.push_back(parse_value(tok, line_no));
    return {arr};
  }
  return parse_scalar(s, line_no);
}

}  // namespace

TomlDoc parse_toml(const std::string& text) {
  TomlDoc doc;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t i = 0;
    skip_ws(line, i);
    if (i >= line.size() || line[i] == '#') continue;
    if (line[i] == '[') {
      const size_t close = line.find(']', i);
      if (close == std::string::npos)
        throw InvalidConfig("bad section header at line " + std::to_string(line_no));
      section = line.substr(i + 1, close - i - 1);
      doc[section];
      continue;
    }
    const size_t eq = line.find('=', i);
    if (eq == std::string::npos)
      throw InvalidConfig("expected key = value at line " + std::to_string(line_no));
    std::string key = line.substr(i, eq - i);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    if (key.empty()) throw InvalidConfig("empty key at line " + std::to_string(line_no));
    doc[section][key] = parse_value(line.substr(eq + 1), line_no);
  }
  return doc;
}

TomlDoc parse_toml_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidConfig("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_toml(ss.str());
}

}  // namespace gfra
