#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace wk {

// c * rho^{-s} * log(e*R/rho)^{-beta} on (r_lo, r_hi), R = log_scale.
struct RadialSegment {
  double c = 1.0;
  double s = 0.0;
  double beta = 0.0;
  double r_lo = 0.0;
  double r_hi = 1.0;
  double log_scale = 1.0;

  double density(double rho) const;
};

// ∫_a^b rho^k log(e*R/rho)^{-beta} drho, with 0 <= a < b <= inf.
// +inf exactly when the integral diverges at 0 or at infinity.
double power_log_integral(double k, double beta, double R, double a, double b);

// Position of a radius relative to the knots of a RadialWeight:
// log w = (1 - th) log w[m] + th log w[m+1] + log_extra + bump(m, th).
struct KnotStencil {
  std::size_t m = 0;
  double th = 0.0;
  double log_extra = 0.0;  // power extrapolation outside the knots
};

// Positive weight on (0, inf): piecewise power between knots, fixed power slopes outside.
// Below the first knot an extra factor log(e*R/rho)^{-log_exponent_below} may be attached.
// An optional fixed bump th (1 - th) (a[m] + b[m] th) is added to log w on knot interval m.
class RadialWeight {
 public:
  RadialWeight(std::vector<double> radii, std::vector<double> values, double slope_below, double slope_above,
               double log_exponent_below = 0.0, double log_scale_below = 1.0);

  double operator()(double rho) const;
  // log w at log radius lr.
  double log_at(double lr) const;
  KnotStencil locate_log(double lr) const;
  KnotStencil locate(double rho) const { return locate_log(std::log(rho)); }
  double bump(std::size_t m, double th) const {
    return bump_a_.empty() ? 0.0 : th * (1.0 - th) * (bump_a_[m] + bump_b_[m] * th);
  }
  // Copy carrying the given bumps, one pair per knot interval.
  RadialWeight curved(std::vector<double> a, std::vector<double> b) const;
  std::span<const double> bump_a() const { return bump_a_; }
  std::span<const double> bump_b() const { return bump_b_; }
  double slope_below() const { return slope_below_; }
  double slope_above() const { return slope_above_; }
  double log_exponent_below() const { return log_exp_below_; }
  double log_scale_below() const { return log_scale_below_; }
  std::span<const double> radii() const { return radii_; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> radii_, values_, log_r_, log_w_, bump_a_, bump_b_;
  double slope_below_, slope_above_, log_exp_below_, log_scale_below_;
};

struct OriginTerm {
  double s_eff;  // density ~ rho^{-s_eff} log^{-beta}, weight included
  double beta;
  double log_scale;
};

// Sum of radial segments, optionally multiplied by a RadialWeight, with the
// ball-mass oracle for balls centered anywhere.
class RadialDensity {
 public:
  RadialDensity(int n, std::vector<RadialSegment> segments, std::shared_ptr<const RadialWeight> weight = nullptr,
                double pieces_per_decade = 16.0);

  int dim() const { return n_; }
  double inner_radius() const { return inner_; }
  double outer_radius() const { return outer_; }
  double total_mass() const { return total_; }
  std::span<const RadialSegment> segments() const { return segs_; }
  const RadialWeight* weight() const { return weight_.get(); }

  // Weighted density value f(rho) w(rho).
  double density(double rho) const;
  // Mass of the open ball B(0, rho).
  double mass_below(double rho) const;
  // Mass outside the closed ball of radius rho; finite even when the mass near 0 is not.
  double mass_above(double rho) const;
  // Mass of B(x, t) with |x| = d.
  double ball_mass(double d, double t) const;
  // ball_mass(d, t) as a linear form in the weight: sum of c * w(rho) over
  // weight_terms plus c * prefix_mass(j) over prefix_terms.
  struct LinearForm {
    std::vector<std::pair<double, double>> weight_terms;
    std::vector<std::pair<std::size_t, double>> prefix_terms;
  };
  void ball_mass_form(double d, double t, LinearForm& out) const;
  // Mass of B(0, breaks[j]) on the internal break grid.
  double prefix_mass(std::size_t j) const { return prefix_[j]; }
  // Radii across which the density jumps.
  std::vector<double> jump_radii() const;

  std::vector<OriginTerm> origin_terms() const;
  // Density exponents of segments reaching infinity, weight included.
  std::vector<double> tail_exponents() const;

 private:
  struct ValueSink;
  struct FormSink;
  double log_weight_at(double lr) const { return weight_ ? weight_->log_at(lr) : 0.0; }
  // log of the unweighted density of segment i at log radius lr
  double log_segment(std::size_t i, double lr) const;
  double head_mass(double rho) const;
  double tail_mass(double rho) const;
  std::size_t piece_of(double rho) const;
  // Sink-based forms: each adds c * (its quantity) through sink.weight(rho, lr, c, g),
  // meaning c e^g w(rho) with lr = log rho, and sink.prefix(j, c).
  template <class Sink>
  void shell_into(double rho, double lr, std::size_t piece, double c, Sink& sink) const;  // omega rho^n f w
  template <class Sink>
  void generic_shell_into(double rho, double lr, double c, Sink& sink) const;
  template <class Sink>
  void head_into(double a, double b, double c, Sink& sink) const;
  template <class Sink>
  void tail_into(double a, double b, double c, Sink& sink) const;
  template <class Sink>
  void mass_below_into(double rho, double c, Sink& sink) const;
  template <class Sink>
  void band_into(double lo, double hi, double d, double t, Sink& sink) const;
  template <class Sink>
  void ball_mass_into(double d, double t, Sink& sink) const;

  int n_;
  double omega_;
  std::vector<RadialSegment> segs_;
  std::vector<double> seg_log_c_, seg_log_R_;
  std::shared_ptr<const RadialWeight> weight_;
  double inner_ = 0.0, outer_ = 0.0, total_ = 0.0;
  std::vector<double> breaks_;  // finite, positive, ascending; pieces between consecutive breaks
  std::vector<std::vector<int>> active_;
  std::vector<double> prefix_;  // mass below breaks_[j]
  std::vector<double> suffix_;  // mass above breaks_[j]
  bool has_head_ = false, has_tail_ = false;
};

}  // namespace wk
