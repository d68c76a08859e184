#include "rellandau/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rellandau::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(prod);
  hi = static_cast<std::uint32_t>(prod >> 32);
}

inline Block round(const Block& c, const Key& k) {
  std::uint32_t lo0, hi0, lo1, hi1;
  mulhilo(kMul0, c[0], lo0, hi0);
  mulhilo(kMul1, c[2], lo1, hi1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Block philox4x32_10(Block counter, Key key) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    counter = round(counter, key);
  }
  return counter;
}

Stream::Stream(std::uint64_t seed, Domain domain, std::uint64_t sub)
    : counter_{0u, static_cast<std::uint32_t>(sub), static_cast<std::uint32_t>(sub >> 32),
               static_cast<std::uint32_t>(domain)},
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

void Stream::refill() {
  buffer_ = philox4x32_10(counter_, key_);
  if (++counter_[0] == 0) throw std::overflow_error("rng::Stream: counter exhausted");
  pos_ = 0;
}

std::uint32_t Stream::next_u32() {
  if (pos_ == 4) refill();
  return buffer_[pos_++];
}

std::uint64_t Stream::next_u64() {
  const std::uint64_t hi = next_u32();
  const std::uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double Stream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Stream::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % n);
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r < limit) return r % n;
  }
}

double Stream::normal() {
  if (cached_normal_) {
    const double v = *cached_normal_;
    cached_normal_.reset();
    return v;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

Vec3 Stream::unit_vector() {
  const double cos_theta = 2.0 * uniform() - 1.0;
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  const double phi = 2.0 * std::numbers::pi * uniform();
  return {sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta};
}

}  // namespace rellandau::rng
