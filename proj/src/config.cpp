#include "wasn/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wasn/errors.hpp"

namespace wasn {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  return true;
}

[[noreturn]] void fail(const std::string& name, int line,
                       const std::string& what) {
  throw ConfigError(name + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& name) {
  ConfigFile cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(name, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section)) fail(name, lineno, "invalid section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail(name, lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_name(key)) fail(name, lineno, "invalid key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.v_.count(full)) fail(name, lineno, "duplicate key '" + full + "'");
    cfg.v_[full] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::parse_string(const std::string& text,
                                    const std::string& name) {
  std::istringstream in(text);
  return parse(in, name);
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

std::string ConfigFile::serialize() const {
  // std::map keeps "section.key" sorted, so sections come out grouped.
  std::string out;
  std::string section;
  bool first = true;
  for (const auto& [full, value] : v_) {
    const size_t dot = full.find('.');
    const std::string sec = dot == std::string::npos ? "" : full.substr(0, dot);
    const std::string key = dot == std::string::npos ? full : full.substr(dot + 1);
    if (sec != section || first) {
      if (!first) out += "\n";
      if (!sec.empty()) out += "[" + sec + "]\n";
      section = sec;
      first = false;
    }
    out += key + " = " + value + "\n";
  }
  return out;
}

bool ConfigFile::has(const std::string& key) const { return v_.count(key) > 0; }

void ConfigFile::set(const std::string& key, const std::string& value) {
  v_[key] = value;
}

std::string ConfigFile::get_string(const std::string& key) const {
  const auto it = v_.find(key);
  if (it == v_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::string ConfigFile::get_string(const std::string& key,
                                   const std::string& def) const {
  const auto it = v_.find(key);
  return it == v_.end() ? def : it->second;
}

long long ConfigFile::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
  return v;
}

long long ConfigFile::get_int(const std::string& key, long long def) const {
  return has(key) ? get_int(key) : def;
}

double ConfigFile::get_real(const std::string& key) const {
  const std::string s = get_string(key);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "': '" + s + "' is not a number");
  return v;
}

double ConfigFile::get_real(const std::string& key, double def) const {
  return has(key) ? get_real(key) : def;
}

bool ConfigFile::get_bool(const std::string& key) const {
  std::string s = get_string(key);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("key '" + key + "': '" + s + "' is not a boolean");
}

bool ConfigFile::get_bool(const std::string& key, bool def) const {
  return has(key) ? get_bool(key) : def;
}

std::vector<long long> ConfigFile::get_int_list(const std::string& key) const {
  std::istringstream in(get_string(key));
  std::vector<long long> out;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
      throw ConfigError("key '" + key + "': '" + tok + "' is not an integer");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

std::vector<std::string> ConfigFile::get_name_list(
    const std::string& key) const {
  std::istringstream in(get_string(key));
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

}  // namespace wasn
