#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wolffkit/conditions.hpp"
#include "wolffkit/measures.hpp"
#include "wolffkit/potentials.hpp"

namespace wk {

enum class EnvelopeKind { inhomogeneous, homogeneous };
const char* to_string(EnvelopeKind k);

// lower = c_sub * (r + W^gamma); upper = c_super * (r + W^gamma) or c_super * (W + W^gamma).
struct Envelope {
  EnvelopeKind kind = EnvelopeKind::inhomogeneous;
  PotentialParams params;
  double c_sub = 1.0;
  double c_super = 1.0;
  bool super_found = true;
  // Per-probe smallest supersolution constant, by probe scale.
  ConditionReport super_trend;
  std::vector<std::string> notes;

  double lower_shape(double w) const;
  double upper_shape(double w) const;
  double lower(double w) const { return c_sub * lower_shape(w); }
  // +inf when no supersolution constant was found.
  double upper(double w) const;
};

EnvelopeKind default_envelope_kind(const PotentialParams& params);

Envelope build_envelope(const Measure& mu, const PotentialParams& params, const std::vector<Point>& probes,
                        std::optional<EnvelopeKind> kind = {});

struct SolverOptions {
  double grid_per_decade = 48.0;
  double span_below = 1e-6;  // grid covers [span_below R, span_above R]
  double span_above = 1e3;
  double tol = 1e-8;
  int max_iter = 500;
  bool from_upper = false;
  std::optional<EnvelopeKind> kind;
  bool certify = true;
};

struct SolutionField {
  std::string method;  // "wolff" or "radial-model"
  bool radial = true;
  std::vector<Point> nodes;
  std::vector<double> radii;  // |node|, or node index for atomic solves
  std::vector<double> values;
  std::vector<double> envelope_lower;
  std::vector<double> envelope_upper;
  std::vector<double> residual;
  std::vector<bool> on_support;

  std::vector<Point> probes;  // off-node check points
  std::vector<double> probe_values;
  std::vector<double> probe_residual;

  double max_residual = 0.0;
  double max_probe_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool trivial = false;
  Envelope envelope;
  // Per sweep: smallest relative step (>= 0 upward) and largest relative change.
  std::vector<double> trace_min_step;
  std::vector<double> trace_change;

  // Sandwich on the default 6-decade probe set, when certified.
  bool certified = false;
  double c_lower = 0.0;
  double c_upper = 0.0;
  double c_universal = 0.0;

  // Piecewise power interpolant of u with a cubic log-log correction (radial solves).
  std::shared_ptr<const RadialWeight> interpolant;
  // Weight u^q per atom (atomic solves).
  std::vector<double> atom_weights;

  double value_at(double rho) const;
};

struct Certificate {
  double c_lower = 0.0;      // c_lower * lower_shape <= u
  double c_upper = 0.0;      // u <= c_upper * upper_shape
  double c_universal = 0.0;  // u >= c_universal * W^gamma
  std::vector<double> u, w;
  // u / upper_shape by probe scale; fails when it diverges toward the finest probe.
  ConditionReport upper_trend;
};

// u at arbitrary points: one potential evaluation of the solved measure u^q dsigma.
std::vector<double> solution_at(const SolutionField& u, const Measure& mu, const PotentialParams& params,
                                const std::vector<Point>& points);

Certificate certify(const SolutionField& u, const Envelope& envelope, const Measure& mu,
                    const std::vector<Point>& probes);

// Log-spaced probes on the first axis covering [lo, hi].
std::vector<Point> log_axis_probes(int n, double lo, double hi, int per_decade);

SolutionField solve(const Measure& mu, const PotentialParams& params, const SolverOptions& opts = {});

}  // namespace wk
