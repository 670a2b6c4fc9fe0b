#pragma once

// Series files: one number per line, '#' starts a comment line, blank lines
// are ignored. Values are written with 17 significant digits so a round trip
// reproduces every double exactly.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "lpblocks/errors.hpp"
#include "lpblocks/seqcore.hpp"

namespace lpblocks::harness {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Series read_series(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r,");
    const std::string field = line.substr(first, last - first + 1);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
      throw ParseError("not a finite number: '" + field + "'", lineno);
    }
    values.push_back(v);
  }
  if (values.empty()) throw ParseError("series file contains no values", 0);
  return Series(std::move(values));
}

inline Series read_series_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return read_series(in);
}

inline void write_series(std::ostream& out, const Series& s, const std::string& comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  for (double v : s.values()) out << format_double(v) << '\n';
}

inline void write_series_file(const std::string& path, const Series& s, const std::string& comment = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_series(out, s, comment);
}

}  // namespace lpblocks::harness
