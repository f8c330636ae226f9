// SPDX-License-Identifier: Apache-2.0
#pragma once

// Flat key=value configuration with dotted section prefixes, e.g.
// train.beta=0.75. Grammar: one pair per line; '#' starts a comment; blank
// lines ignored; keys are [A-Za-z0-9_.]; duplicate keys rejected. Unknown
// keys are rejected against a per-command schema.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lit::io {

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<config>");

  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return kv_; }

  std::string get(const std::string& key) const;  // throws Config if absent
  std::string get_or(const std::string& key, const std::string& def) const;
  int get_int(const std::string& key) const;
  int get_int_or(const std::string& key, int def) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double def) const;
  uint64_t get_u64_or(const std::string& key, uint64_t def) const;
  bool get_bool_or(const std::string& key, bool def) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::string> get_str_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  // Rejects any key outside `allowed` with its line number.
  void require_known(const std::vector<std::string>& allowed) const;

  // Sorted key=value lines (the config echo artifact).
  std::string echo() const;

  int line_of(const std::string& key) const;

 private:
  std::map<std::string, std::string> kv_;
  std::map<std::string, int> lines_;
  std::string origin_;
};

}  // namespace lit::io
