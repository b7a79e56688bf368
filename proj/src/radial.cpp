#include "wolffkit/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fixed_point.hpp"
#include "wolffkit/errors.hpp"
#include "wolffkit/parallel.hpp"

namespace wk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-300;

double support_scale(const Measure& mu) {
  double R = mu.support_radius();
  if (mu.empty()) return 1.0;
  return std::isfinite(R) ? R : std::max(1.0, mu.inner_radius());
}

// The model operator on one weight: inner mass over rho^a plus the tail moment.
struct ModelOperator {
  int n;
  double a;
  RadialDensity inner, outer;

  ModelOperator(const Measure& mu, double a_, std::shared_ptr<const RadialWeight> w)
      : n(mu.dim()), a(a_), inner(mu.dim(), mu.radial_segments(), w), outer(mu.dim(), shifted(mu, a_), w) {}

  static std::vector<RadialSegment> shifted(const Measure& mu, double a) {
    auto segs = mu.radial_segments();
    for (auto& g : segs) g.s += a;
    return segs;
  }

  double operator()(double rho) const { return std::pow(rho, -a) * inner.mass_below(rho) + outer.mass_above(rho); }
};

void check_model_params(const Measure& mu, const PotentialParams& pp) {
  pp.validate();
  if (pp.n != mu.dim()) throw InputError("radial: params.n differs from the measure dimension");
  if (pp.p != 2.0) throw InputError("radial: the model kernel needs p = 2");
  if (!mu.is_radial()) throw UnsupportedError("radial: measure has off-center atoms");
}

std::string existence_failure(const ConditionReport& rep) {
  std::string why;
  for (const auto& note : rep.notes) why += (why.empty() ? "" : "; ") + note;
  return why.empty() ? "existence predicate failed" : why;
}

}  // namespace

RadialGrid make_radial_grid(const Measure& mu, double per_decade, double span_below, double span_above) {
  if (!(per_decade >= 1.0)) throw InputError("radial grid: per_decade must be at least 1");
  RadialGrid g;
  g.per_decade = per_decade;
  double R = support_scale(mu);
  g.lo = span_below * R;
  g.hi = span_above * R;
  std::vector<double> extra, jumps;
  if (!mu.empty()) {
    if (mu.inner_radius() > 0.0) jumps.push_back(mu.inner_radius());
    if (std::isfinite(mu.support_radius())) jumps.push_back(mu.support_radius());
    for (double r : RadialDensity(mu.dim(), mu.radial_segments()).jump_radii()) jumps.push_back(r);
  }
  // geometric grading toward each jump, where the solution may have a log-type kink
  const double h = std::log(10.0) / per_decade;
  for (double J : jumps) {
    extra.push_back(J);
    for (double delta = 6.0 * h; delta > 1e-6; delta /= 1.35) {
      if (delta < 0.5) extra.push_back(J * (1.0 - delta));
      extra.push_back(J * (1.0 + delta));
    }
  }
  g.radii = detail::log_grid(g.lo, g.hi, per_decade, extra);
  return g;
}

double model_kernel(double rho, double tau, int n, double two_alpha) {
  if (!(two_alpha > 0.0) || !(two_alpha < n)) throw InputError("model kernel: need 0 < 2 alpha < n");
  if (!(rho > 0.0) || !(tau > 0.0)) throw InputError("model kernel: radii must be positive");
  return std::pow(std::max(rho, tau), -(n - two_alpha));
}

RadialEnvelopeValue radial_envelope(const Measure& mu, const PotentialParams& pp, double rho) {
  if (!mu.is_radial()) throw UnsupportedError("radial envelope: measure has off-center atoms");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InputError("radial envelope: rho must be positive");
  auto ex = radial_existence(mu, pp);
  if (ex.verdict != Verdict::holds) throw InputError("radial envelope: " + existence_failure(ex));
  const double a = mu.dim() - 2.0 * pp.alpha, e = 1.0 / (1.0 - pp.q);
  RadialEnvelopeValue v;
  double mq = mu.radial_moment_below(rho, a * pp.q);
  double t = mu.radial_moment_above(rho, a);
  v.k_term = mq > 0.0 ? std::pow(rho, -a) * std::pow(mq, e) : 0.0;
  v.tail_term = t > 0.0 ? std::pow(t, e) : 0.0;
  return v;
}

double radial_model_value(const Measure& mu, const PotentialParams& pp, const RadialWeight* u, double rho) {
  if (!(rho > 0.0)) throw InputError("radial model: rho must be positive");
  if (mu.empty()) return u ? pp.r : 0.0;
  const double a = mu.dim() - 2.0 * pp.alpha;
  std::shared_ptr<const RadialWeight> w = u ? detail::qth_power(*u, pp.q) : nullptr;
  ModelOperator op(mu, a, w);
  return op(rho) + (u ? pp.r : 0.0);
}

SolutionField radial_solve(const Measure& mu, const PotentialParams& pp, const SolverOptions& opts) {
  check_model_params(mu, pp);
  detail::check_options(opts);
  EnvelopeKind kind = opts.kind.value_or(default_envelope_kind(pp));
  if (mu.empty()) return detail::trivial_solution(mu.dim(), pp, opts, kind, "radial-model");
  auto ex = radial_existence(mu, pp);
  if (ex.verdict != Verdict::holds) throw InputError("radial solve: " + existence_failure(ex));

  const int n = mu.dim();
  const double r = pp.r, q = pp.q, a = n - 2.0 * pp.alpha;
  const auto segs = mu.radial_segments();
  const double inner = mu.inner_radius(), outer = mu.support_radius();
  const double log_scale = detail::origin_log_scale(segs);
  RadialGrid grid = make_radial_grid(mu, opts.grid_per_decade, opts.span_below, opts.span_above);
  const auto& radii = grid.radii;
  const std::size_t N = radii.size();
  std::vector<std::size_t> support;
  std::vector<bool> on_support(N, false);
  for (std::size_t i = 0; i < N; ++i)
    if (radii[i] >= inner && radii[i] <= outer) {
      on_support[i] = true;
      support.push_back(i);
    }
  const std::size_t S = support.size();
  if (S < 2) throw InputError("radial solve: grid does not resolve the support of the measure");
  std::vector<double> sradii;
  for (std::size_t i : support) sradii.push_back(radii[i]);

  auto shape_at = [&](double rho) { return r + radial_envelope(mu, pp, rho).total(); };
  std::vector<double> shape(N);
  for (std::size_t i = 0; i < N; ++i) shape[i] = shape_at(radii[i]);

  detail::LocalPower lp;
  if (inner == 0.0) {
    lp = detail::fit_local_power(shape_at, sradii.front(), log_scale);
    auto o = detail::dominant_origin(segs);
    lp = detail::snap(lp, {0.0, (n - o.s - a) / (1.0 - q), -a}, {0.0, o.beta / (1.0 - q), (o.beta - 1.0) / (1.0 - q)});
  }
  double sa = 0.0, slope_out = r > 0.0 ? 0.0 : -a;
  if (std::isinf(outer)) {
    sa = r > 0.0 ? 0.0 : detail::fit_local_power(shape_at, 100.0 * sradii.back(), 0.0).slope;
    slope_out = sa;
  }
  detail::LogBumps bumps;  // on u over the support knots, from the previous pass
  auto make_w = [&](const std::vector<double>& u) -> std::shared_ptr<const RadialWeight> {
    auto w = detail::power_weight(sradii, u, q, lp.slope, sa, lp.log_exponent, log_scale);
    if (bumps.a.empty()) return w;
    auto qb = bumps.scaled(q);
    return std::make_shared<RadialWeight>(w->curved(std::move(qb.a), std::move(qb.b)));
  };
  auto apply = [&](const std::vector<double>& u) {
    ModelOperator op(mu, a, make_w(u));
    std::vector<double> v(S);
    parallel_for(S, [&](std::size_t j) { v[j] = op(sradii[j]) + r; });
    return v;
  };

  std::vector<double> sshape(S);
  std::vector<std::string> labels(S);
  for (std::size_t j = 0; j < S; ++j) {
    sshape[j] = shape[support[j]];
    std::ostringstream os;
    os.precision(6);
    os << "rho=" << sradii[j];
    labels[j] = os.str();
  }
  const std::vector<double> jumps = RadialDensity(n, segs).jump_radii();
  Envelope env;
  detail::IterationResult it;
  // The second pass adds the curvature of the first solution to the interpolant.
  for (int pass = 0; pass < 2; ++pass) {
    env = Envelope{};
    env.kind = kind;
    env.params = pp;
    env.notes.push_back("shapes: r + k_term + tail_term");
    std::vector<double> ta = apply(sshape);
    for (double& v : ta) v -= r;
    detail::search_constants({sshape, sshape, ta, ta, sradii, labels, q, r}, env);

    bool have_upper = std::isfinite(env.c_super);
    bool upward = !(opts.from_upper && have_upper);
    for (int attempt = 0; attempt < 16; ++attempt) {
      std::vector<double> start(S), cap;
      for (std::size_t j = 0; j < S; ++j) start[j] = (upward ? env.c_sub : env.c_super) * sshape[j];
      if (have_upper) {
        for (std::size_t j = 0; j < S; ++j) cap.push_back(env.c_super * sshape[j]);
        for (std::size_t j = 0; j < S; ++j)
          if (start[j] > cap[j]) cap.clear();
      }
      double tol = pass == 0 ? std::max(opts.tol, 1e-5) : opts.tol;
      it = detail::iterate(apply, start, upward, cap.empty() ? nullptr : &cap, tol, opts.max_iter);
      if (!it.start_rejected) break;
      if (upward)
        env.c_sub *= 0.5;
      else
        env.c_super *= 2.0;
    }
    if (it.start_rejected)
      throw std::logic_error("radial solve: the starting envelope is not a discrete sub/supersolution");
    if (pass == 0) bumps = detail::log_cubic_bumps(sradii, it.u, jumps);
  }

  SolutionField f;
  f.method = "radial-model";
  f.radial = true;
  f.envelope = env;
  f.iterations = it.iterations;
  f.converged = it.converged;
  f.trace_min_step = it.min_step;
  f.trace_change = it.change;
  f.radii = radii;
  f.on_support = on_support;
  f.values.assign(N, 0.0);
  for (std::size_t j = 0; j < S; ++j) f.values[support[j]] = it.u[j];
  ModelOperator op(mu, a, make_w(it.u));
  f.residual.assign(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    double tu = op(radii[i]) + r;
    if (on_support[i])
      f.residual[i] = std::abs(f.values[i] - tu) / std::max(f.values[i], r + kTiny);
    else
      f.values[i] = tu;
    f.nodes.push_back(Point::on_axis(n, radii[i]));
    f.envelope_lower.push_back(env.c_sub * shape[i]);
    f.envelope_upper.push_back(env.super_found ? env.c_super * shape[i] : kInf);
    f.max_residual = std::max(f.max_residual, f.residual[i]);
  }
  {
    std::vector<double> breaks = jumps;
    if (inner > 0.0) breaks.push_back(inner);
    if (std::isfinite(outer)) breaks.push_back(outer);
    auto ub = detail::log_cubic_bumps(radii, f.values, breaks).spliced(bumps, support.front());
    RadialWeight base(radii, f.values, lp.slope, slope_out, lp.log_exponent, log_scale > 0.0 ? log_scale : 1.0);
    f.interpolant = std::make_shared<RadialWeight>(base.curved(std::move(ub.a), std::move(ub.b)));
  }
  ModelOperator fop(mu, a, detail::qth_power(*f.interpolant, q));
  for (std::size_t j = 0; j + 1 < S; ++j) {
    double rho = std::sqrt(sradii[j] * sradii[j + 1]);
    double u = (*f.interpolant)(rho), tu = fop(rho) + r;
    f.probes.push_back(Point::on_axis(n, rho));
    f.probe_values.push_back(u);
    f.probe_residual.push_back(std::abs(u - tu) / std::max(u, r + kTiny));
    f.max_probe_residual = std::max(f.max_probe_residual, f.probe_residual.back());
  }
  if (opts.certify && f.converged) {
    double R = support_scale(mu);
    std::vector<double> rhos;
    for (const auto& x : log_axis_probes(n, 1e-4 * R, 1e2 * R, 4)) rhos.push_back(x.norm());
    auto cert = certify_radial(f, mu, pp, rhos);
    f.certified = true;
    f.c_lower = cert.c_lower;
    f.c_upper = cert.c_upper;
    double uni = kInf;
    for (double rho : rhos) {
      double w = wolff(mu, pp, Point::on_axis(n, rho)).value;
      double g = std::pow(w, pp.gamma());
      if (g > 0.0) uni = std::min(uni, radial_model_value(mu, pp, f.interpolant.get(), rho) / g);
    }
    f.c_universal = uni;
  }
  return f;
}

RadialCertificate certify_radial(const SolutionField& u, const Measure& mu, const PotentialParams& pp,
                                 const std::vector<double>& rhos) {
  RadialCertificate c;
  c.trend.condition_id = "solution_over_radial_envelope";
  double lo = kInf, hi = 0.0;
  for (double rho : rhos) {
    double e = pp.r + radial_envelope(mu, pp, rho).total();
    double v = u.method == "radial-model" ? radial_model_value(mu, pp, u.interpolant.get(), rho)
                                          : solution_at(u, mu, pp, {Point::on_axis(mu.dim(), rho)})[0];
    if (!(e > 0.0)) continue;
    lo = std::min(lo, v / e);
    hi = std::max(hi, v / e);
    std::ostringstream os;
    os.precision(6);
    os << "rho=" << rho;
    c.trend.samples.push_back({os.str(), rho, v / e});
  }
  c.c_lower = std::isfinite(lo) ? lo : 0.0;
  c.c_upper = hi;
  finalize_report(c.trend);
  return c;
}

Measure make_counterexample(int n, double two_alpha, double q, double beta) {
  if (n < 1) throw InputError("counterexample: need n >= 1");
  if (!(q > 0.0) || !(q < 1.0)) throw InputError("counterexample: need 0 < q < 1");
  if (!(two_alpha > 0.0) || !(two_alpha < n)) throw InputError("counterexample: need 0 < 2 alpha < n");
  if (!(beta > 1.0)) throw InputError("counterexample: need beta > 1 (mass near 0 is infinite otherwise)");
  double s = (1.0 - q) * n + two_alpha * q;
  if (!(two_alpha < s) || !(s < n)) throw InputError("counterexample: need 2 alpha < s < n");
  RadialSegment g;
  g.c = 1.0;
  g.s = s;
  g.beta = beta;
  g.r_lo = 0.0;
  g.r_hi = 0.5;
  g.log_scale = std::exp(-1.0);  // log(e R / rho) = log(1 / rho)
  return Measure(n, {g});
}

Measure make_powerlaw_example(int n, double two_alpha, double q, double s) {
  if (n < 1) throw InputError("power-law example: need n >= 1");
  if (!(two_alpha > 0.0) || !(two_alpha < n)) throw InputError("power-law example: need 0 < 2 alpha < n");
  double top = n - (n - two_alpha) * q;
  if (!(s > two_alpha) || !(s < top)) throw InputError("power-law example: need 2 alpha < s < n - (n - 2 alpha) q");
  RadialSegment g;
  g.c = 1.0;
  g.s = s;
  g.r_lo = 0.0;
  g.r_hi = 1.0;
  return Measure(n, {g});
}

std::vector<RadialStudyRow> radial_study(const Measure& mu, const PotentialParams& pp,
                                         const std::vector<double>& rhos, const SolverOptions& opts) {
  SolutionField u = radial_solve(mu, pp, opts);
  std::vector<RadialStudyRow> rows(rhos.size());
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    double rho = rhos[i];
    auto& row = rows[i];
    row.rho = rho;
    row.u = radial_model_value(mu, pp, u.interpolant ? u.interpolant.get() : nullptr, rho);
    if (!u.interpolant) row.u = pp.r;
    auto e = radial_envelope(mu, pp, rho);
    row.k_term = e.k_term;
    row.tail_term = e.tail_term;
    row.envelope = e.total();
    row.ratio_5_2 = radial_ratio(mu, pp, rho);
  }
  parallel_for(rows.size(), [&](std::size_t i) {
    rows[i].riesz_potential = wolff(mu, pp, Point::on_axis(mu.dim(), rhos[i])).value;
  });
  return rows;
}

}  // namespace wk
