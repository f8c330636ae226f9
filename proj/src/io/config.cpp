// SPDX-License-Identifier: Apache-2.0
#include "lit/io/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "lit/error.hpp"

namespace lit::io {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
  return true;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Config, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::Config,
           origin + ":" + std::to_string(lineno) + ": expected key=value, got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (!valid_key(key))
      fail(ErrorKind::Config, origin + ":" + std::to_string(lineno) + ": bad key '" + key + "'");
    if (c.kv_.count(key))
      fail(ErrorKind::Config, origin + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                                  "' (first at line " + std::to_string(c.lines_[key]) + ")");
    c.kv_[key] = value;
    c.lines_[key] = lineno;
  }
  return c;
}

std::string Config::get(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) fail(ErrorKind::Config, origin_ + ": missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& def) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

namespace {
template <typename T, typename Fn>
T parse_or_die(const std::string& key, const std::string& value, Fn fn, const char* what) {
  try {
    std::size_t pos = 0;
    const T v = fn(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::Config, "key '" + key + "': expected " + what + ", got '" + value + "'");
  }
}
}  // namespace

int Config::get_int(const std::string& key) const {
  return parse_or_die<int>(key, get(key), [](const std::string& s, std::size_t* p) { return std::stoi(s, p); },
                           "an integer");
}

int Config::get_int_or(const std::string& key, int def) const {
  return has(key) ? get_int(key) : def;
}

double Config::get_double(const std::string& key) const {
  return parse_or_die<double>(key, get(key),
                              [](const std::string& s, std::size_t* p) { return std::stod(s, p); },
                              "a number");
}

double Config::get_double_or(const std::string& key, double def) const {
  return has(key) ? get_double(key) : def;
}

uint64_t Config::get_u64_or(const std::string& key, uint64_t def) const {
  if (!has(key)) return def;
  return parse_or_die<uint64_t>(key, get(key),
                                [](const std::string& s, std::size_t* p) { return std::stoull(s, p); },
                                "an unsigned integer");
}

bool Config::get_bool_or(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorKind::Config, "key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<std::string> Config::get_str_list(const std::string& key) const {
  std::vector<std::string> out;
  std::string cur;
  for (char c : get(key)) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  out.push_back(cur);
  for (const auto& s : out)
    if (s.empty()) fail(ErrorKind::Config, "key '" + key + "': empty list element");
  return out;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& s : get_str_list(key))
    out.push_back(parse_or_die<int>(key, s, [](const std::string& v, std::size_t* p) { return std::stoi(v, p); },
                                    "an integer list"));
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : get_str_list(key))
    out.push_back(parse_or_die<double>(key, s,
                                       [](const std::string& v, std::size_t* p) { return std::stod(v, p); },
                                       "a number list"));
  return out;
}

void Config::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : kv_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(ErrorKind::Config, origin_ + ":" + std::to_string(lines_.at(key)) + ": unknown key '" +
                                  key + "'");
  }
}

std::string Config::echo() const {
  std::ostringstream os;
  for (const auto& [key, value] : kv_) os << key << '=' << value << '\n';
  return os.str();
}

int Config::line_of(const std::string& key) const {
  const auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

}  // namespace lit::io
