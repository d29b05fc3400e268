#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace kinetic::io {

/// Round-trip exact decimal form: 17 significant digits, '.' separator.
inline std::string fmt(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& cells)
{
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) {
      out << ',';
    }
    out << cells[i];
  }
  out << '\n';
}

inline void write_csv_row(std::ostream& out, const std::vector<double>& values)
{
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) {
      out << ',';
    }
    out << fmt(values[i]);
  }
  out << '\n';
}

}  // namespace kinetic::io
