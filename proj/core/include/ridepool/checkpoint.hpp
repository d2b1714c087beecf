#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <stdexcept>
#include <string>

namespace ridepool {

/// Hexadecimal float text; parses back to the identical double.
inline std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_exact(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    throw std::invalid_argument("checkpoint: bad number `" + text + "`");
  }
  return v;
}

/// Reads `expected` as the next token, failing with a checkpoint error.
inline void expect_token(std::istream& in, const std::string& expected) {
  std::string token;
  if (!(in >> token) || token != expected) {
    throw std::invalid_argument("checkpoint: expected `" + expected + "`, got `" + token + "`");
  }
}

template <typename T>
T read_token(std::istream& in, const char* what) {
  T value{};
  if (!(in >> value)) throw std::invalid_argument(std::string("checkpoint: missing ") + what);
  return value;
}

inline double read_exact(std::istream& in, const char* what) {
  return parse_exact(read_token<std::string>(in, what));
}

}  // namespace ridepool
