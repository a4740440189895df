#pragma once

#include <array>

namespace mhdl {

// Truncated Taylor series in t: c[k] = (d/dt)^k f / k! at t = 0.
// Running the semi-discrete right-hand side on these yields exact time derivatives of the ODE system.
struct Jet {
  static constexpr int N = 6;
  std::array<double, N> c{};

  Jet() = default;
  Jet(double v) { c[0] = v; }  // NOLINT: implicit on purpose, constants mix freely

  double derivative(int k) const {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return c[k] * f;
  }
};

inline Jet operator+(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k < Jet::N; ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}
inline Jet operator-(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k < Jet::N; ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}
inline Jet operator-(const Jet& a) {
  Jet r;
  for (int k = 0; k < Jet::N; ++k) r.c[k] = -a.c[k];
  return r;
}
inline Jet operator*(const Jet& a, double s) {
  Jet r;
  for (int k = 0; k < Jet::N; ++k) r.c[k] = a.c[k] * s;
  return r;
}
inline Jet operator*(double s, const Jet& a) { return a * s; }
inline Jet operator*(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k < Jet::N; ++k) {
    double s = 0;
    for (int j = 0; j <= k; ++j) s += a.c[j] * b.c[k - j];
    r.c[k] = s;
  }
  return r;
}
inline Jet operator/(const Jet& a, const Jet& b) {
  Jet r;
  for (int k = 0; k < Jet::N; ++k) {
    double s = a.c[k];
    for (int j = 1; j <= k; ++j) s -= b.c[j] * r.c[k - j];
    r.c[k] = s / b.c[0];
  }
  return r;
}
inline Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }
inline Jet operator/(double s, const Jet& b) { return Jet(s) / b; }
inline Jet& operator+=(Jet& a, const Jet& b) { return a = a + b; }
inline Jet& operator-=(Jet& a, const Jet& b) { return a = a - b; }
inline Jet& operator*=(Jet& a, const Jet& b) { return a = a * b; }

inline double value_of(double v) { return v; }
inline double value_of(const Jet& v) { return v.c[0]; }

}  // namespace mhdl
