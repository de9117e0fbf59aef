#pragma once

#include <array>
#include <cmath>

namespace fedmap {

// Forward-mode scalar carrying three tangent directions (dummy location x0,
// x1 and dummy label y). Lets one backprop pass produce both a gradient
// vector and its Jacobian against the dummy variables.
struct Dual3 {
  double v = 0.0;
  std::array<double, 3> d{0.0, 0.0, 0.0};

  Dual3() = default;
  Dual3(double value) : v(value) {}  // NOLINT: implicit for mixed arithmetic
  Dual3(double value, const std::array<double, 3>& tangent) : v(value), d(tangent) {}

  Dual3& operator+=(const Dual3& o) {
    v += o.v;
    d[0] += o.d[0];
    d[1] += o.d[1];
    d[2] += o.d[2];
    return *this;
  }
  Dual3& operator-=(const Dual3& o) {
    v -= o.v;
    d[0] -= o.d[0];
    d[1] -= o.d[1];
    d[2] -= o.d[2];
    return *this;
  }
  Dual3& operator*=(double s) {
    v *= s;
    d[0] *= s;
    d[1] *= s;
    d[2] *= s;
    return *this;
  }
};

inline Dual3 operator+(Dual3 a, const Dual3& b) { return a += b; }
inline Dual3 operator-(Dual3 a, const Dual3& b) { return a -= b; }
inline Dual3 operator-(const Dual3& a) { return {-a.v, {-a.d[0], -a.d[1], -a.d[2]}}; }

inline Dual3 operator*(const Dual3& a, const Dual3& b) {
  return {a.v * b.v,
          {a.v * b.d[0] + a.d[0] * b.v, a.v * b.d[1] + a.d[1] * b.v,
           a.v * b.d[2] + a.d[2] * b.v}};
}
inline Dual3 operator*(Dual3 a, double s) { return a *= s; }
inline Dual3 operator*(double s, Dual3 a) { return a *= s; }

inline Dual3 operator/(const Dual3& a, const Dual3& b) {
  double inv = 1.0 / b.v;
  double q = a.v * inv;
  return {q,
          {(a.d[0] - q * b.d[0]) * inv, (a.d[1] - q * b.d[1]) * inv,
           (a.d[2] - q * b.d[2]) * inv}};
}
inline Dual3 operator/(const Dual3& a, double s) { return a * (1.0 / s); }

inline Dual3 exp(const Dual3& a) {
  double e = std::exp(a.v);
  return {e, {e * a.d[0], e * a.d[1], e * a.d[2]}};
}

inline Dual3 sqrt(const Dual3& a) {
  double r = std::sqrt(a.v);
  double g = 0.5 / r;
  return {r, {g * a.d[0], g * a.d[1], g * a.d[2]}};
}

inline Dual3 log1p_exp(const Dual3& a) {
  // softplus, overflow-safe
  double z = a.v;
  double value = (z > 0.0 ? z : 0.0) + std::log1p(std::exp(-std::fabs(z)));
  double g = 1.0 / (1.0 + std::exp(-z));  // sigmoid(z)
  return {value, {g * a.d[0], g * a.d[1], g * a.d[2]}};
}

// plain-double counterparts so the kernels compile for T = double
inline double log1p_exp(double z) {
  return (z > 0.0 ? z : 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual3& x) { return x.v; }

}  // namespace fedmap
