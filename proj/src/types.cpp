#include "hslab/types.hpp"

#include <cstdio>
#include <limits>

namespace hslab {

NotAccretive::NotAccretive(double value, int location)
    : Error("NotAccretive: min eigenvalue of Re A(x) is " + std::to_string(value) +
            " at grid point " + std::to_string(location)),
      value_(value),
      location_(location) {}

double relative_error(const Mat& a, const Mat& b) {
  const double denom = std::max(b.norm(), std::numeric_limits<double>::min());
  return (a - b).norm() / denom;
}

double relative_error(const Vec& a, const Vec& b) {
  const double denom = std::max(b.norm(), std::numeric_limits<double>::min());
  return (a - b).norm() / denom;
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace hslab
