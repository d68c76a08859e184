#include "rellandau/types.hpp"

#include <ostream>
#include <stdexcept>

namespace rellandau {

Momentum::Momentum(const Vec3& v) : v_(v) {
  if (!is_finite(v)) throw std::invalid_argument("Momentum: non-finite component");
}

std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
}

std::ostream& operator<<(std::ostream& os, const Mat3& m) {
  os << '[';
  for (std::size_t i = 0; i < 3; ++i) {
    os << (i ? "; " : "") << m(i, 0) << ' ' << m(i, 1) << ' ' << m(i, 2);
  }
  return os << ']';
}

}  // namespace rellandau
