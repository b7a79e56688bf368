#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wolffkit/radial_density.hpp"
#include "wolffkit/solver.hpp"

namespace wk::detail {

// Maps node values u to T(u) + r at the same nodes.
using NodeMap = std::function<std::vector<double>(const std::vector<double>&)>;

struct ShapeSamples {
  std::vector<double> lower, upper;  // shapes at the nodes
  std::vector<double> a, b;          // T applied to lower and upper, without r
  std::vector<double> scale;
  std::vector<std::string> labels;
  double theta = 0.5;  // T(c f) = c^theta T(f)
  double r = 0.0;
};

// Dyadic c_sub and c_super for the shapes; fills env.c_sub, c_super, super_found, super_trend.
void search_constants(const ShapeSamples& s, Envelope& env);

struct IterationResult {
  std::vector<double> u;
  int iterations = 0;
  bool converged = false;
  bool start_rejected = false;
  std::vector<double> min_step, change;
};

// Monotone iteration from start. Throws std::logic_error when a later sweep
// breaks monotonicity or leaves the upper envelope; a first-sweep violation is
// reported through start_rejected.
IterationResult iterate(const NodeMap& T, const std::vector<double>& start, bool upward,
                        const std::vector<double>* upper, double tol, int max_iter);

// Slope and log exponent of f near 0 from samples at rho, rho/10, rho/100;
// log_scale names the log factor, or is <= 0 for a pure power fit.
struct LocalPower {
  double slope = 0.0;
  double log_exponent = 0.0;
};
LocalPower fit_local_power(const std::function<double(double)>& f, double rho, double log_scale);
// Replaces each fitted exponent by the nearest candidate within 0.05.
LocalPower snap(LocalPower lp, const std::vector<double>& slopes, const std::vector<double>& log_exponents);

// Largest origin density exponent s and its log exponent beta; s = -inf without origin segments.
struct OriginExponent {
  double s = -1e300;
  double beta = 0.0;
};
OriginExponent dominant_origin(const std::vector<RadialSegment>& segs);

// u^q as a radial weight: values u^q at the radii, slopes scaled by q.
std::shared_ptr<const RadialWeight> power_weight(const std::vector<double>& radii, const std::vector<double>& u,
                                                 double q, double slope_below, double slope_above,
                                                 double log_exp_below, double log_scale);
std::shared_ptr<const RadialWeight> qth_power(const RadialWeight& u, double q);

// Log scale of an origin segment carrying a log factor, or 0.
double origin_log_scale(const std::vector<RadialSegment>& segs);

// Constant solution u = r on a default grid; flagged trivial when r = 0.
SolutionField trivial_solution(int n, const PotentialParams& pp, const SolverOptions& opts, EnvelopeKind kind,
                               const std::string& method);
void check_options(const SolverOptions& opts);

// Per-interval bumps (see RadialWeight::curved) that turn the piecewise power
// interpolant of values into local cubic interpolation of log value against
// log radius. Stencils do not cross the given break radii.
struct LogBumps {
  std::vector<double> a, b;
  LogBumps scaled(double c) const;
  // These bumps with inner's copied in from interval offset on.
  LogBumps spliced(const LogBumps& inner, std::size_t offset) const;
};
LogBumps log_cubic_bumps(const std::vector<double>& radii, const std::vector<double>& values,
                         const std::vector<double>& breaks);

// Geometric grid over [lo, hi] with the given extra radii merged in.
std::vector<double> log_grid(double lo, double hi, double per_decade, std::vector<double> extra);

}  // namespace wk::detail
