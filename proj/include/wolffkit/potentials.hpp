#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wolffkit/measures.hpp"
#include "wolffkit/quadrature.hpp"

namespace wk {

struct PotentialParams {
  int n = 3;
  double alpha = 1.0;
  double p = 2.0;
  double q = 0.5;
  double r = 0.0;

  static PotentialParams riesz(int n, double two_alpha, double q = 0.5, double r = 0.0);

  // Throws InputError naming the violated constraint.
  void validate() const;
  // n - alpha p
  double decay() const { return n - alpha * p; }
  double gamma() const { return (p - 1.0) / (p - 1.0 - q); }
  double beta_w() const { return (p - 1.0) * q / (p - 1.0 - q); }
};

struct PotentialOptions {
  double rel_tol = 1e-9;
  int max_panels = 4000;
  // Integrate only over t in (t_lo, t_hi): the truncated potential.
  double t_lo = 0.0;
  double t_hi = std::numeric_limits<double>::infinity();
};

struct PotentialValue {
  double value = 0.0;
  double abs_error_bound = 0.0;
  double t_min = 0.0;  // numerically integrated window
  double t_max = 0.0;
  double head = 0.0;  // closed-form contributions below and above it
  double tail = 0.0;
  std::string divergence;  // empty when finite

  bool finite() const { return divergence.empty(); }
};

struct FinitenessResult {
  bool finite = true;
  std::string reason;
};

FinitenessResult finiteness_check(const MeasureView& mu, const PotentialParams& params);
FinitenessResult finiteness_check(const Measure& mu, const PotentialParams& params);

PotentialValue wolff(const MassProfile& profile, const PotentialParams& params, const PotentialOptions& opts = {});
PotentialValue wolff(const MeasureView& mu, const PotentialParams& params, const Point& x,
                     const PotentialOptions& opts = {});
PotentialValue wolff(const Measure& mu, const PotentialParams& params, const Point& x,
                     const PotentialOptions& opts = {});
PotentialValue riesz(const Measure& mu, double two_alpha, const Point& x, const PotentialOptions& opts = {});

// The quadrature of one adaptive Wolff evaluation, frozen so that it can be
// re-applied to other profiles of the same support. Positive weights only, so
// the frozen map is monotone in the profile.
class FrozenWolffRule {
 public:
  FrozenWolffRule(const MassProfile& profile, const PotentialParams& params, const PotentialOptions& opts = {});

  double apply(const MassProfile& profile) const;
  // apply() from the profile's masses at nodes() and its total mass.
  double apply_masses(std::span<const double> masses, double total) const;
  std::size_t size() const { return t_.size(); }
  std::span<const double> nodes() const { return t_; }
  // For p = 2 the rule is linear: apply = sum of mass_weights()[i] * mass_i + tail_per_mass() * total.
  bool linear() const { return expo_ == 1.0; }
  std::vector<double> mass_weights() const;
  double tail_per_mass() const;

 private:
  double integrand(const MassProfile& profile, double t) const;

  double decay_, expo_;
  std::vector<double> t_, w_;
  double tail_from_ = 0.0, tail_to_ = 0.0;  // closed-form tail with the profile total
  bool infinite_ = false;
};

// Base potential W sigma tabulated once: on log-spaced radii for radial
// measures, at atom centers for atomic ones. Immutable after construction.
class BasePotentialTable {
 public:
  BasePotentialTable(const Measure& mu, const PotentialParams& params, double knots_per_decade = 64.0,
                     const PotentialOptions& opts = {});

  const Measure& measure() const { return mu_; }
  const PotentialParams& params() const { return params_; }
  bool radial() const { return radial_; }
  std::span<const double> radii() const { return radii_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> atom_values() const { return atom_values_; }
  double slope_below() const { return slope_below_; }
  double slope_above() const { return slope_above_; }
  // Below the table W ~ rho^{slope_below} log(e R/rho)^{-log_exponent_below}.
  double log_exponent_below() const { return log_exp_below_; }
  // Largest relative gap between the interpolant and direct evaluation at check points.
  double fit_error() const { return fit_error_; }

  // W sigma through the table (radial only).
  double interpolate(double rho) const;
  // (W sigma)^exponent as a radial weight.
  std::shared_ptr<const RadialWeight> weight(double exponent) const;
  // The measure (W sigma)^exponent dsigma.
  MeasureView reweighted(double exponent) const;

 private:
  Measure mu_;
  PotentialParams params_;
  bool radial_ = false;
  std::vector<double> radii_, values_, atom_values_;
  double slope_below_ = 0.0, slope_above_ = 0.0, log_exp_below_ = 0.0, log_scale_below_ = 1.0, fit_error_ = 0.0;
  std::shared_ptr<const RadialWeight> base_;
};

// W((W sigma)^exponent dsigma)(x).
PotentialValue weighted_wolff(const BasePotentialTable& table, double exponent, const Point& x,
                              const PotentialOptions& opts = {});

}  // namespace wk
