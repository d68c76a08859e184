#pragma once

// Core value types: 3-vectors, momenta and dense 3x3 matrices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <iosfwd>

namespace rellandau {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
constexpr double norm_sq(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm_sq(a)); }
inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

std::ostream& operator<<(std::ostream& os, const Vec3& v);

/// Momentum in units with m = c = 1. Components are always finite.
class Momentum {
 public:
  constexpr Momentum() = default;
  /// Throws std::invalid_argument on non-finite components.
  explicit Momentum(const Vec3& v);
  Momentum(double px, double py, double pz) : Momentum(Vec3{px, py, pz}) {}

  constexpr const Vec3& vec() const { return v_; }
  constexpr double operator[](std::size_t i) const { return v_[i]; }

  /// p0 = sqrt(1 + |p|^2) >= 1.
  double energy() const { return std::sqrt(1.0 + norm_sq(v_)); }

  friend constexpr bool operator==(const Momentum&, const Momentum&) = default;

 private:
  Vec3 v_{};
};

inline double energy(const Momentum& p) { return p.energy(); }
inline double energy(const Vec3& p) { return std::sqrt(1.0 + norm_sq(p)); }

/// Dense 3x3 real matrix, row-major.
struct Mat3 {
  std::array<double, 9> a{};

  static constexpr Mat3 zero() { return {}; }
  static constexpr Mat3 identity() {
    Mat3 m;
    m.a[0] = m.a[4] = m.a[8] = 1.0;
    return m;
  }
  static constexpr Mat3 diag(double d0, double d1, double d2) {
    Mat3 m;
    m.a[0] = d0;
    m.a[4] = d1;
    m.a[8] = d2;
    return m;
  }
  /// u ⊗ v, i.e. (u v^T)_{ij} = u_i v_j.
  static constexpr Mat3 outer(const Vec3& u, const Vec3& v) {
    Mat3 m;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) m.a[3 * i + j] = u[i] * v[j];
    return m;
  }

  constexpr double operator()(std::size_t i, std::size_t j) const { return a[3 * i + j]; }
  constexpr double& operator()(std::size_t i, std::size_t j) { return a[3 * i + j]; }

  constexpr Mat3& operator+=(const Mat3& o) {
    for (std::size_t k = 0; k < 9; ++k) a[k] += o.a[k];
    return *this;
  }
  constexpr Mat3& operator-=(const Mat3& o) {
    for (std::size_t k = 0; k < 9; ++k) a[k] -= o.a[k];
    return *this;
  }
  constexpr Mat3& operator*=(double s) {
    for (auto& x : a) x *= s;
    return *this;
  }

  friend constexpr Mat3 operator+(Mat3 x, const Mat3& y) { return x += y; }
  friend constexpr Mat3 operator-(Mat3 x, const Mat3& y) { return x -= y; }
  friend constexpr Mat3 operator*(double s, Mat3 x) { return x *= s; }
  friend constexpr Mat3 operator*(Mat3 x, double s) { return x *= s; }
  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;

  friend constexpr Mat3 operator*(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 3; ++k) s += x(i, k) * y(k, j);
        r(i, j) = s;
      }
    return r;
  }
  friend constexpr Vec3 operator*(const Mat3& m, const Vec3& v) {
    return {m.a[0] * v.x + m.a[1] * v.y + m.a[2] * v.z,
            m.a[3] * v.x + m.a[4] * v.y + m.a[5] * v.z,
            m.a[6] * v.x + m.a[7] * v.y + m.a[8] * v.z};
  }

  constexpr Mat3 transposed() const {
    Mat3 t;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) t(i, j) = (*this)(j, i);
    return t;
  }
  constexpr double trace() const { return a[0] + a[4] + a[8]; }
  /// Frobenius norm.
  double norm() const {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
  }
  double max_abs() const {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
  }
  bool is_finite() const {
    for (double x : a)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

/// M M^T
constexpr Mat3 gram(const Mat3& m) { return m * m.transposed(); }

/// Frobenius inner product tr(A^T B).
constexpr double frobenius_dot(const Mat3& x, const Mat3& y) {
  double s = 0.0;
  for (std::size_t k = 0; k < 9; ++k) s += x.a[k] * y.a[k];
  return s;
}

std::ostream& operator<<(std::ostream& os, const Mat3& m);

}  // namespace rellandau
