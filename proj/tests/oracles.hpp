#pragma once

// Reference computations written independently of the library: plain
// composite Simpson sums and closed forms, no shared code paths.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

// |a - b| <= abs + rel * |b|
inline bool close(double a, double b, double rel, double abs = 0.0) { return std::abs(a - b) <= abs + rel * std::abs(b); }

inline constexpr double pi = std::numbers::pi;

// Composite Simpson on [a, b] with an even number of intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  double h = (b - a) / intervals, s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// ∫_a^b f(t) dt through t = e^u.
inline double simpson_log(const std::function<double(double)>& f, double a, double b, int intervals) {
  return simpson([&](double u) { double t = std::exp(u); return f(t) * t; }, std::log(a), std::log(b), intervals);
}

// Volume of the unit ball by the two-step recurrence.
inline double ball_volume(int n) {
  if (n == 0) return 1.0;
  if (n == 1) return 2.0;
  return 2.0 * pi / n * ball_volume(n - 2);
}

// Volume of the intersection of two balls in R^3, radii R and r at distance d.
inline double lens_volume_3d(double R, double r, double d) {
  if (d >= R + r) return 0.0;
  if (d <= std::abs(R - r)) {
    double m = std::min(R, r);
    return 4.0 / 3.0 * pi * m * m * m;
  }
  return pi * (R + r - d) * (R + r - d) * (d * d + 2 * d * r - 3 * r * r + 2 * d * R + 6 * r * R - 3 * R * R) /
         (12.0 * d);
}

// Archimedes: fraction of the 2-sphere of radius rho (about 0) inside B(x, t), |x| = d.
inline double shell_fraction_3d(double rho, double d, double t) {
  if (d == 0.0) return rho < t ? 1.0 : 0.0;
  double c = (rho * rho + d * d - t * t) / (2.0 * rho * d);
  if (c <= -1.0) return 1.0;
  if (c >= 1.0) return 0.0;
  return (1.0 - c) / 2.0;
}

}  // namespace oracle
