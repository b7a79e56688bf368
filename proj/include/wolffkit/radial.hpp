#pragma once

#include <vector>

#include "wolffkit/conditions.hpp"
#include "wolffkit/measures.hpp"
#include "wolffkit/potentials.hpp"
#include "wolffkit/solver.hpp"

namespace wk {

struct RadialGrid {
  std::vector<double> radii;
  double lo = 0.0;
  double hi = 0.0;
  double per_decade = 48.0;
};

// Log-spaced radii over [span_below R, span_above R] with the measure's jump radii inserted.
RadialGrid make_radial_grid(const Measure& mu, double per_decade = 48.0, double span_below = 1e-6,
                            double span_above = 1e3);

// max(rho, tau)^{-(n - two_alpha)}
double model_kernel(double rho, double tau, int n, double two_alpha);

struct RadialEnvelopeValue {
  double k_term = 0.0;
  double tail_term = 0.0;
  double total() const { return k_term + tail_term; }
};

// Throws InputError naming the failed existence predicate.
RadialEnvelopeValue radial_envelope(const Measure& mu, const PotentialParams& params, double rho);

// ∫ model_kernel(rho, tau) u(tau)^q dsigma(tau) + r, with u given by a radial
// interpolant (nullptr: u^q = 1 and r dropped).
double radial_model_value(const Measure& mu, const PotentialParams& params, const RadialWeight* u, double rho);

SolutionField radial_solve(const Measure& mu, const PotentialParams& params, const SolverOptions& opts = {});

struct RadialCertificate {
  double c_lower = 0.0;  // c_lower (k + tail) <= u
  double c_upper = 0.0;  // u <= c_upper (k + tail)
  ConditionReport trend;  // u / (k + tail) by radius
};

RadialCertificate certify_radial(const SolutionField& u, const Measure& mu, const PotentialParams& params,
                                 const std::vector<double>& rhos);

Measure make_counterexample(int n, double two_alpha, double q, double beta);
Measure make_powerlaw_example(int n, double two_alpha, double q, double s);

struct RadialStudyRow {
  double rho = 0.0;
  double u = 0.0;
  double k_term = 0.0;
  double tail_term = 0.0;
  double envelope = 0.0;
  double ratio_5_2 = 0.0;
  double riesz_potential = 0.0;
};

std::vector<RadialStudyRow> radial_study(const Measure& mu, const PotentialParams& params,
                                         const std::vector<double>& rhos, const SolverOptions& opts = {});

}  // namespace wk
