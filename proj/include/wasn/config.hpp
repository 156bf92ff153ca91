#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace wasn {

// Flat `key = value` text grouped under [section] headers, with # comments.
// Keys are addressed as "section.key". Parse errors carry file:line context;
// typed getters carry the offending key. parse(serialize(parse(x))) equals
// parse(x).
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& name = "<config>");
  static ConfigFile parse_string(const std::string& text,
                                 const std::string& name = "<config>");
  static ConfigFile load(const std::string& path);

  std::string serialize() const;

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  // Required-key getters throw ConfigError when the key is absent; the
  // defaulted forms fall back instead.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long def) const;
  double get_real(const std::string& key) const;
  double get_real(const std::string& key, double def) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<long long> get_int_list(const std::string& key) const;
  std::vector<std::string> get_name_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return v_; }

  bool operator==(const ConfigFile& other) const { return v_ == other.v_; }

 private:
  std::map<std::string, std::string> v_;
};

}  // namespace wasn
