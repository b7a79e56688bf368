#include "wolffkit/special.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>

namespace wk {

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double sphere_area(int n) { return n * unit_ball_volume(n); }

double incomplete_beta_regularized(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

namespace {

// Cap fractions from 1 - c and 1 + c, which callers can often form without cancellation.
double sphere_cap_pm(int n, double omc, double opc) {
  if (omc <= 0.0) return 0.0;
  if (opc <= 0.0) return 1.0;
  if (n == 1) return 0.5;
  if (n == 3) return 0.5 * omc;
  if (omc == opc) return 0.5;
  bool upper = omc <= opc;
  if (n == 2) {
    double a = 2.0 * std::asin(std::sqrt(0.5 * (upper ? omc : opc))) / std::numbers::pi;
    return upper ? a : 1.0 - a;
  }
  double half = 0.5 * incomplete_beta_regularized(0.5 * (n - 1), 0.5, omc * opc);
  return upper ? half : 1.0 - half;
}

double ball_cap_pm(int n, double omu, double opu) {
  if (omu <= 0.0) return 0.0;
  if (opu <= 0.0) return 1.0;
  if (n == 1) return 0.5 * omu;
  if (n == 3) return 0.25 * omu * omu * (1.0 + opu);
  bool upper = omu <= opu;
  double half = 0.5 * incomplete_beta_regularized(0.5 * (n + 1), 0.5, omu * opu);
  return upper ? half : 1.0 - half;
}

}  // namespace

double sphere_cap_fraction(int n, double c) { return sphere_cap_pm(n, 1.0 - c, 1.0 + c); }

double ball_cap_fraction(int n, double u) { return ball_cap_pm(n, 1.0 - u, 1.0 + u); }

double shell_fraction_in_ball(int n, double rho, double d, double t) {
  if (t <= 0.0) return 0.0;
  if (d == 0.0 || rho == 0.0) return rho < t && d < t ? 1.0 : 0.0;
  if (rho + d < t) return 1.0;
  if (std::abs(rho - d) >= t) return 0.0;
  double den = 2.0 * rho * d;
  double omc = (t - rho + d) * (t + rho - d) / den;
  double opc = (rho + d - t) * (rho + d + t) / den;
  return sphere_cap_pm(n, omc, opc);
}

double lens_fraction(int n, double h, double dist, double t) {
  if (t <= 0.0) return 0.0;
  if (h <= 0.0) return dist < t ? 1.0 : 0.0;
  if (dist >= h + t) return 0.0;
  if (dist + h <= t) return 1.0;
  if (dist + t <= h) return std::pow(t / h, n);
  // Radical plane at signed offsets a1 from the atom center and a2 from x.
  double den = 2.0 * dist;
  double f = ball_cap_pm(n, (t - dist + h) * (t + dist - h) / (den * h), (dist + h - t) * (dist + h + t) / (den * h)) +
             std::pow(t / h, n) * ball_cap_pm(n, (h - dist + t) * (h + dist - t) / (den * t),
                                              (dist + t - h) * (dist + t + h) / (den * t));
  return std::min(1.0, std::max(0.0, f));
}

}  // namespace wk
