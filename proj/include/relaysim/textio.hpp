#ifndef RELAYSIM_TEXTIO_HPP
#define RELAYSIM_TEXTIO_HPP

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "relaysim/errors.hpp"

namespace relaysim {

/// Shortest decimal that round-trips the double exactly.
inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Fixed two-decimal form for pixel coordinates.
inline std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Compact form for axis tick labels.
inline std::string fmt_tick(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double_field(const std::string& s,
                                 const std::string& what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw CsvFormatError("cannot parse " + what + " from \"" + s + "\"");
  }
  return v;
}

inline int parse_int_field(const std::string& s, const std::string& what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw CsvFormatError("cannot parse " + what + " from \"" + s + "\"");
  }
  return static_cast<int>(v);
}

}  // namespace relaysim

#endif  // RELAYSIM_TEXTIO_HPP
