#pragma once

#include <charconv>
#include <string>

namespace gmgan {

// Shortest round-trip decimal form; identical input bits always produce
// identical text, which keeps emitted CSVs byte-stable.
inline std::string format_double(double x) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

}  // namespace gmgan
