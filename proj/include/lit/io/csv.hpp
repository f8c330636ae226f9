// SPDX-License-Identifier: Apache-2.0
#pragma once

// CSV conventions: header row, UTF-8, '\n' terminators, '.' decimal
// separator, %.9g floats. Bit-exact across platforms for identical values.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "lit/error.hpp"

namespace lit::io {

inline std::string fmt_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string join_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  return row;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Format, "cannot write '" + path + "'");
  f << content;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Format, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace lit::io
