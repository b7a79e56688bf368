#pragma once

#include <functional>
#include <span>
#include <vector>

namespace wk {

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_panels = 2000;
};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
};

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = true;
  std::vector<Panel> panels;  // sorted by a
};

// Globally adaptive 21-point Gauss-Kronrod over [bp.front(), bp.back()];
// interior breakpoints start as panel boundaries. Bounds must be finite.
QuadResult integrate_adaptive(const std::function<double(double)>& f, std::span<const double> breakpoints,
                              const QuadOptions& opts = {});

inline QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                     const QuadOptions& opts = {}) {
  double bp[2] = {a, b};
  return integrate_adaptive(f, std::span<const double>(bp, 2), opts);
}

struct FixedRule {
  std::vector<double> x;  // on [-1, 1], ascending
  std::vector<double> w;
};

// Kronrod nodes and weights of every panel, as one flat rule in the integration variable.
FixedRule kronrod_rule(std::span<const Panel> panels);

// n in {2, 3, 4, 5, 6, 8, 10, 12, 16, 20}.
const FixedRule& gauss_legendre(int n);

}  // namespace wk
