#pragma once

// Unit-disk arithmetic shared by the metric catalog, the map catalog and the
// hyperbolic backend. Complex numbers travel as std::complex<double>; points
// of a Space store them as (re, im) coordinate pairs.

#include <cmath>
#include <complex>

namespace orbitlab::disk {

using Complex = std::complex<double>;

// Points with |z| >= 1 - kBoundaryGuard are treated as lying on the boundary.
inline constexpr double kBoundaryGuard = 1e-14;

// 1 - x^2 - y^2 evaluated with error-free transformations, so the result
// keeps full relative precision even when |z| is within a few ulps of 1.
inline double one_minus_abs2(double x, double y) noexcept {
  const double px = x * x;
  const double ex = std::fma(x, x, -px);
  const double py = y * y;
  const double ey = std::fma(y, y, -py);

  const double s = 1.0 - px;
  const double bs = s - 1.0;
  const double es = (1.0 - (s - bs)) + (-px - bs);

  const double t = s - py;
  const double bt = t - s;
  const double et = (s - (t - bt)) + (-py - bt);

  return t + ((es + et) - ex - ey);
}

inline double one_minus_abs2(Complex z) noexcept {
  return one_minus_abs2(z.real(), z.imag());
}

inline bool inside(double x, double y) noexcept {
  return std::isfinite(x) && std::isfinite(y) &&
         std::hypot(x, y) < 1.0 - kBoundaryGuard;
}

inline bool inside(Complex z) noexcept { return inside(z.real(), z.imag()); }

// Poincare distance omega(z, w) = artanh |z - w| / |1 - conj(z) w|.
//
// Uses |1 - conj(z) w|^2 = |z - w|^2 + (1 - |z|^2)(1 - |w|^2), which has no
// cancellation, and omega = log1p(t) + 0.5 log((s + P) / P) with
// s = |z - w|^2, P = (1 - |z|^2)(1 - |w|^2), t^2 = s / (s + P).
inline double omega(double zx, double zy, double wx, double wy) noexcept {
  const double dx = zx - wx;
  const double dy = zy - wy;
  const double s = dx * dx + dy * dy;
  if (s == 0.0) return 0.0;
  const double a = one_minus_abs2(zx, zy);
  const double b = one_minus_abs2(wx, wy);
  const double p = a * b;
  const double t = std::sqrt(s / (s + p));
  return std::log1p(t) + 0.5 * (std::log(s + p) - std::log(p));
}

inline double omega(Complex z, Complex w) noexcept {
  return omega(z.real(), z.imag(), w.real(), w.imag());
}

// z -> (z - a) / (1 - conj(a) z); sends a to 0.
inline Complex to_origin(Complex a, Complex z) noexcept {
  return (z - a) / (1.0 - std::conj(a) * z);
}

// z -> (z + a) / (1 + conj(a) z); sends 0 to a. Inverse of to_origin.
inline Complex from_origin(Complex a, Complex z) noexcept {
  return (z + a) / (1.0 + std::conj(a) * z);
}

}  // namespace orbitlab::disk
