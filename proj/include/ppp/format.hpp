#ifndef PPP_FORMAT_HPP
#define PPP_FORMAT_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace ppp {

// 17 significant digits: round-trips every double exactly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no NaN/inf; absent values are written as null.
inline std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ppp

#endif  // PPP_FORMAT_HPP
