// relayplan: trajectory and user-association planning for an aerial relay.
//
// Copyright (c) 2026 The relayplan authors.
// SPDX-License-Identifier: MIT

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace relayplan::csv {

// All CSV output uses 12 significant digits, '.' as the decimal separator
// (snprintf with the "C" locale), and ',' as the field separator.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << fields[i];
  }
  os << '\n';
}

inline std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  return out;
}

// Reads a whole CSV file including the header row.
inline std::vector<std::vector<std::string>> read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_row(line));
  }
  return rows;
}

}  // namespace relayplan::csv
