#include "wolffkit/solver.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fixed_point.hpp"
#include "wolffkit/errors.hpp"
#include "wolffkit/parallel.hpp"
#include "wolffkit/radial.hpp"

namespace wk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-300;

std::string label_rho(double rho) {
  std::ostringstream os;
  os.precision(6);
  os << "rho=" << rho;
  return os.str();
}

double relative_residual(double u, double tu, double r) { return std::abs(u - tu) / std::max(u, r + kTiny); }

}  // namespace

const char* to_string(EnvelopeKind k) {
  return k == EnvelopeKind::homogeneous ? "homogeneous" : "inhomogeneous";
}

double Envelope::lower_shape(double w) const { return params.r + std::pow(w, params.gamma()); }

double Envelope::upper_shape(double w) const {
  double g = std::pow(w, params.gamma());
  return kind == EnvelopeKind::homogeneous ? w + g : params.r + g;
}

double Envelope::upper(double w) const { return super_found ? c_super * upper_shape(w) : kInf; }

EnvelopeKind default_envelope_kind(const PotentialParams& params) {
  return params.r > 0.0 ? EnvelopeKind::inhomogeneous : EnvelopeKind::homogeneous;
}

namespace detail {

void search_constants(const ShapeSamples& s, Envelope& env) {
  const std::size_t m = s.lower.size();
  auto sub_ok = [&](double c) {
    double ct = std::pow(c, s.theta);
    for (std::size_t i = 0; i < m; ++i)
      if (ct * s.a[i] + s.r < c * s.lower[i]) return false;
    return true;
  };
  auto super_ok = [&](double c) {
    double ct = std::pow(c, s.theta);
    for (std::size_t i = 0; i < m; ++i)
      if (ct * s.b[i] + s.r > c * s.upper[i]) return false;
    return true;
  };
  // largest k with sub_ok(2^k), k in [-512, 512]
  int lo = -512, hi = 512;
  if (!sub_ok(std::ldexp(1.0, lo))) {
    env.notes.push_back("no dyadic subsolution constant >= 2^-512");
    env.c_sub = std::ldexp(1.0, lo);
  } else {
    for (int step = 0; step < 60 && hi - lo > 1; ++step) {
      int mid = lo + (hi - lo) / 2;
      (sub_ok(std::ldexp(1.0, mid)) ? lo : hi) = mid;
    }
    env.c_sub = std::ldexp(1.0, sub_ok(std::ldexp(1.0, hi)) ? hi : lo);
  }
  // smallest k with super_ok(2^k), k in [-512, 40]
  lo = -512;
  hi = 40;
  if (!super_ok(std::ldexp(1.0, hi))) {
    env.super_found = false;
    env.c_super = kInf;
    env.notes.push_back("no dyadic supersolution constant <= 2^40");
  } else {
    if (super_ok(std::ldexp(1.0, lo))) {
      hi = lo;
    } else {
      for (int step = 0; step < 60 && hi - lo > 1; ++step) {
        int mid = lo + (hi - lo) / 2;
        (super_ok(std::ldexp(1.0, mid)) ? hi : lo) = mid;
      }
    }
    env.c_super = std::ldexp(1.0, hi);
  }
  ConditionReport& rep = env.super_trend;
  rep = ConditionReport{};
  rep.condition_id = "supersolution_constant";
  for (std::size_t i = 0; i < m; ++i) {
    if (!(s.upper[i] > 0.0)) continue;
    auto g = [&](double lc) {
      double c = std::exp(lc);
      return c * s.upper[i] - std::pow(c, s.theta) * s.b[i] - s.r;
    };
    double a = -700.0, b = 700.0;
    if (g(a) >= 0.0) {
      b = a;
    } else {
      for (int step = 0; step < 200 && b - a > 1e-12 * std::max(1.0, std::abs(b)); ++step) {
        double mid = 0.5 * (a + b);
        (g(mid) >= 0.0 ? b : a) = mid;
      }
    }
    rep.samples.push_back({s.labels[i], s.scale[i], std::exp(b)});
  }
  finalize_report(rep);
  if (env.super_found && rep.verdict == Verdict::fails) {
    env.super_found = false;
    env.notes.push_back("required supersolution constant grows without bound toward the finest probes");
  }
}

IterationResult iterate(const NodeMap& T, const std::vector<double>& start, bool upward,
                        const std::vector<double>* upper, double tol, int max_iter) {
  IterationResult res;
  res.u = start;
  for (int it = 1; it <= max_iter; ++it) {
    std::vector<double> v = T(res.u);
    double min_step = kInf, change = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) throw InputError("solver: iterate became infinite (u^q dsigma not locally finite)");
      double step = upward ? v[i] - res.u[i] : res.u[i] - v[i];
      if (step < 0.0) {
        if (it == 1) {
          res.start_rejected = true;
          return res;
        }
        std::ostringstream os;
        os << "solver: monotone trace violated at node " << i << " in sweep " << it;
        throw std::logic_error(os.str());
      }
      if (upper && v[i] > (*upper)[i] * (1.0 + 1e-6)) {
        std::ostringstream os;
        os << "solver: iterate exceeds the upper envelope at node " << i << " in sweep " << it;
        throw std::logic_error(os.str());
      }
      double scale = std::max(std::abs(v[i]), kTiny);
      min_step = std::min(min_step, step / scale);
      change = std::max(change, std::abs(v[i] - res.u[i]) / scale);
    }
    const bool empty = v.empty();
    res.u = std::move(v);
    res.iterations = it;
    res.min_step.push_back(empty ? 0.0 : min_step);
    res.change.push_back(change);
    if (change < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

LocalPower fit_local_power(const std::function<double(double)>& f, double rho, double log_scale) {
  LocalPower lp;
  double r1 = rho, r2 = rho / 10.0, r3 = rho / 100.0;
  double y1 = f(r1), y2 = f(r2), y3 = f(r3);
  if (!(y1 > 0.0) || !(y2 > 0.0) || !(y3 > 0.0) || !std::isfinite(y1) || !std::isfinite(y2) || !std::isfinite(y3))
    return lp;
  y1 = std::log(y1);
  y2 = std::log(y2);
  y3 = std::log(y3);
  if (!(log_scale > 0.0)) {
    lp.slope = (y1 - y3) / (std::log(r1) - std::log(r3));
    return lp;
  }
  // y = c + slope ln r - log_exponent ln L(r)
  auto L = [&](double r) { return std::log(1.0 + std::log(log_scale / r)); };
  double x1 = std::log(r1), x2 = std::log(r2), x3 = std::log(r3);
  double z1 = -L(r1), z2 = -L(r2), z3 = -L(r3);
  double a11 = x1 - x2, a12 = z1 - z2, b1 = y1 - y2;
  double a21 = x2 - x3, a22 = z2 - z3, b2 = y2 - y3;
  double det = a11 * a22 - a12 * a21;
  if (det == 0.0) {
    lp.slope = (y1 - y3) / (x1 - x3);
    return lp;
  }
  lp.slope = (b1 * a22 - a12 * b2) / det;
  lp.log_exponent = (a11 * b2 - a21 * b1) / det;
  return lp;
}

LocalPower snap(LocalPower lp, const std::vector<double>& slopes, const std::vector<double>& log_exponents) {
  auto pick = [](double v, const std::vector<double>& cand) {
    double best = v, gap = 0.05;
    for (double c : cand)
      if (std::isfinite(c) && std::abs(c - v) < gap) {
        gap = std::abs(c - v);
        best = c;
      }
    return best;
  };
  lp.slope = pick(lp.slope, slopes);
  lp.log_exponent = pick(lp.log_exponent, log_exponents);
  return lp;
}

OriginExponent dominant_origin(const std::vector<RadialSegment>& segs) {
  OriginExponent o;
  for (const auto& g : segs) {
    if (g.r_lo != 0.0) continue;
    if (g.s > o.s || (g.s == o.s && g.beta < o.beta)) {
      o.s = g.s;
      o.beta = g.beta;
    }
  }
  return o;
}

std::shared_ptr<const RadialWeight> power_weight(const std::vector<double>& radii, const std::vector<double>& u,
                                                 double q, double slope_below, double slope_above,
                                                 double log_exp_below, double log_scale) {
  std::vector<double> w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = std::pow(u[i], q);
  return std::make_shared<RadialWeight>(radii, std::move(w), q * slope_below, q * slope_above, q * log_exp_below,
                                        log_scale > 0.0 ? log_scale : 1.0);
}

std::shared_ptr<const RadialWeight> qth_power(const RadialWeight& u, double q) {
  std::vector<double> radii(u.radii().begin(), u.radii().end());
  std::vector<double> vals(u.values().begin(), u.values().end());
  auto w = power_weight(radii, vals, q, u.slope_below(), u.slope_above(), u.log_exponent_below(),
                        u.log_scale_below());
  if (u.bump_a().empty()) return w;
  std::vector<double> a(u.bump_a().begin(), u.bump_a().end()), b(u.bump_b().begin(), u.bump_b().end());
  for (double& v : a) v *= q;
  for (double& v : b) v *= q;
  return std::make_shared<RadialWeight>(w->curved(std::move(a), std::move(b)));
}

// Log scale of an origin segment carrying a log factor, or 0.
double origin_log_scale(const std::vector<RadialSegment>& segs) {
  for (const auto& g : segs)
    if (g.r_lo == 0.0 && g.beta != 0.0) return g.log_scale;
  return 0.0;
}

LogBumps LogBumps::spliced(const LogBumps& inner, std::size_t offset) const {
  LogBumps out = *this;
  for (std::size_t j = 0; j < inner.a.size() && offset + j < out.a.size(); ++j) {
    out.a[offset + j] = inner.a[j];
    out.b[offset + j] = inner.b[j];
  }
  return out;
}

LogBumps LogBumps::scaled(double c) const {
  LogBumps out = *this;
  for (double& v : out.a) v *= c;
  for (double& v : out.b) v *= c;
  return out;
}

LogBumps log_cubic_bumps(const std::vector<double>& radii, const std::vector<double>& values,
                         const std::vector<double>& breaks) {
  const std::size_t N = radii.size();
  LogBumps out;
  out.a.assign(N > 0 ? N - 1 : 0, 0.0);
  out.b = out.a;
  std::vector<double> x(N), y(N);
  for (std::size_t i = 0; i < N; ++i) {
    x[i] = std::log(radii[i]);
    y[i] = std::log(values[i]);
  }
  auto is_break = [&](double r) {
    for (double b : breaks)
      if (std::abs(b - r) <= 1e-12 * r) return true;
    return false;
  };
  std::size_t i0 = 0;
  while (i0 + 1 < N) {
    std::size_t i1 = i0 + 1;
    while (i1 + 1 < N && !is_break(radii[i1])) ++i1;
    const std::size_t len = i1 - i0 + 1;
    for (std::size_t m = i0; m < i1 && len >= 3; ++m) {
      std::size_t k = std::min<std::size_t>(len, 4);
      std::size_t lo = m > i0 ? m - 1 : i0;
      lo = std::min(lo, i1 + 1 - k);
      auto poly = [&](double xv) {
        double acc = 0.0;
        for (std::size_t i = lo; i < lo + k; ++i) {
          double l = y[i];
          for (std::size_t j = lo; j < lo + k; ++j)
            if (j != i) l *= (xv - x[j]) / (x[i] - x[j]);
          acc += l;
        }
        return acc;
      };
      double h = x[m + 1] - x[m];
      double c1 = poly(x[m] + h / 3.0) - (y[m] + (y[m + 1] - y[m]) / 3.0);
      double c2 = poly(x[m] + 2.0 * h / 3.0) - (y[m] + 2.0 * (y[m + 1] - y[m]) / 3.0);
      out.b[m] = 13.5 * (c2 - c1);
      out.a[m] = 4.5 * c1 - out.b[m] / 3.0;
    }
    i0 = i1;
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, double per_decade, std::vector<double> extra) {
  int m = std::max(1, static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade - 1e-9)));
  std::vector<double> grid;
  for (int i = 0; i <= m; ++i) grid.push_back(i == m ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / m));
  std::vector<double> keep;
  for (double e : extra)
    if (e >= lo && e <= hi && std::isfinite(e)) keep.push_back(e);
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  std::vector<double> out;
  for (double g : grid) {
    auto it = std::lower_bound(keep.begin(), keep.end(), g);
    bool near = (it != keep.end() && std::abs(*it - g) <= 1e-3 * g) ||
                (it != keep.begin() && std::abs(*(it - 1) - g) <= 1e-3 * g);
    if (!near) out.push_back(g);
  }
  out.insert(out.end(), keep.begin(), keep.end());
  std::sort(out.begin(), out.end());
  return out;
}

SolutionField trivial_solution(int n, const PotentialParams& pp, const SolverOptions& opts, EnvelopeKind kind,
                               const std::string& method) {
  SolutionField f;
  f.method = method;
  f.radial = true;
  f.trivial = pp.r == 0.0;
  f.converged = true;
  f.iterations = pp.r > 0.0 ? 1 : 0;
  f.envelope.kind = kind;
  f.envelope.params = pp;
  f.envelope.c_sub = f.envelope.c_super = 1.0;
  f.radii = detail::log_grid(opts.span_below, opts.span_above, opts.grid_per_decade, {});
  for (double rho : f.radii) {
    f.nodes.push_back(Point::on_axis(n, rho));
    f.values.push_back(pp.r);
    f.envelope_lower.push_back(pp.r);
    f.envelope_upper.push_back(pp.r);
    f.residual.push_back(0.0);
    f.on_support.push_back(false);
  }
  if (pp.r > 0.0) {
    f.trace_min_step.push_back(0.0);
    f.trace_change.push_back(0.0);
    f.certified = true;
    f.c_lower = f.c_upper = 1.0;
    f.c_universal = kInf;
  }
  return f;
}

void check_options(const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw InputError("solver: tol must be positive");
  if (opts.max_iter < 1) throw InputError("solver: max_iter must be at least 1");
  if (!(opts.grid_per_decade >= 1.0)) throw InputError("solver: grid_per_decade must be at least 1");
  if (!(opts.span_below > 0.0) || !(opts.span_below < 1.0) || !(opts.span_above > 1.0) ||
      !std::isfinite(opts.span_above))
    throw InputError("solver: grid span must satisfy 0 < below < 1 < above < inf");
}

}  // namespace detail

using detail::origin_log_scale;
using detail::power_weight;
using detail::qth_power;
using detail::trivial_solution;
using detail::check_options;

namespace {



void fill_certificate(SolutionField& f, const Measure& mu, const PotentialParams& pp) {
  double lo, hi;
  if (f.radial) {
    double R = std::isfinite(mu.support_radius()) ? mu.support_radius() : std::max(1.0, mu.inner_radius());
    lo = 1e-4 * R;
    hi = 1e2 * R;
  } else {
    double h = kInf;
    for (const auto& a : mu.atoms()) h = std::min(h, a.radius);
    lo = 1e-2 * h;
    hi = 1e4 * h;
  }
  auto probes = log_axis_probes(mu.dim(), lo, hi, 4);
  if (!f.radial) {
    const Point& c = mu.atoms()[0].center;
    for (auto& p : probes)
      for (std::size_t k = 0; k < p.coords.size(); ++k) p.coords[k] += c.coords[k];
  }
  Certificate cert = certify(f, f.envelope, mu, probes);
  f.certified = true;
  f.c_lower = cert.c_lower;
  f.c_upper = cert.c_upper;
  f.c_universal = cert.c_universal;
  (void)pp;
}

struct RadialSetup {
  int n = 3;
  std::vector<RadialSegment> segs;
  std::vector<double> radii;
  std::vector<std::size_t> support;  // indices into radii
  std::vector<bool> on_support;
  double inner = 0.0, outer = 0.0, log_scale = 0.0;
};

RadialSetup radial_setup(const Measure& mu, const SolverOptions& opts) {
  RadialSetup s;
  s.n = mu.dim();
  s.segs = mu.radial_segments();
  s.inner = mu.inner_radius();
  s.outer = mu.support_radius();
  s.log_scale = origin_log_scale(s.segs);
  RadialGrid grid = make_radial_grid(mu, opts.grid_per_decade, opts.span_below, opts.span_above);
  s.radii = grid.radii;
  for (std::size_t i = 0; i < s.radii.size(); ++i) {
    bool in = s.radii[i] >= s.inner && s.radii[i] <= s.outer;
    s.on_support.push_back(in);
    if (in) s.support.push_back(i);
  }
  if (s.support.size() < 2) throw InputError("solver: grid does not resolve the support of the measure");
  return s;
}

// The frozen node map. For p = 2 each node's ball masses are recorded as
// linear forms in the weight and collapsed, per knot interval, into moments of
// a power series of the interpolant about the interval midpoint; a sweep then
// costs O(nodes * intervals). Otherwise the rules are applied directly.
class RadialSweep {
 public:
  static constexpr int kDegree = 12;

  RadialSweep(int n, std::vector<RadialSegment> segs, const std::vector<double>& nodes,
              std::vector<std::unique_ptr<FrozenWolffRule>> rules, const RadialWeight& like)
      : n_(n), segs_(std::move(segs)), nodes_(nodes), rules_(std::move(rules)) {
    for (const auto& r : rules_)
      if (!r->linear() || !std::isfinite(r->tail_per_mass())) return;
    linear_ = true;
    RadialDensity dens(n, segs_, std::make_shared<RadialWeight>(like));
    const std::size_t S = nodes.size();
    intervals_ = std::max<std::size_t>(1, like.radii().size() - 1);
    moments_.assign(S * intervals_ * (kDegree + 1), 0.0);
    prefix_.resize(S);
    tail_.resize(S);
    RadialDensity::LinearForm form;
    for (std::size_t j = 0; j < S; ++j) {
      auto tn = rules_[j]->nodes();
      auto wk = rules_[j]->mass_weights();
      double* mj = &moments_[j * intervals_ * (kDegree + 1)];
      for (std::size_t k = 0; k < tn.size(); ++k) {
        dens.ball_mass_form(nodes[j], tn[k], form);
        for (auto [rho, c] : form.weight_terms) {
          KnotStencil st = like.locate(rho);
          double x = st.th - 0.5, pw = wk[k] * c * std::exp(st.log_extra);
          double* mm = mj + std::min(st.m, intervals_ - 1) * (kDegree + 1);
          for (int d = 0; d <= kDegree; ++d, pw *= x) mm[d] += pw;
        }
        for (auto [b, c] : form.prefix_terms) {
          if (prefix_[j].size() <= b) prefix_[j].resize(b + 1, 0.0);
          prefix_[j][b] += wk[k] * c;
        }
      }
      tail_[j] = rules_[j]->tail_per_mass();
    }
  }

  // T applied to the weight, without r; the weight must share the knots and slopes of the recording weight.
  std::vector<double> apply(const std::shared_ptr<const RadialWeight>& w) const {
    auto dens = std::make_shared<const RadialDensity>(n_, segs_, w);
    const std::size_t S = rules_.size();
    std::vector<double> out(S);
    if (!linear_) {
      parallel_for(S, [&](std::size_t j) {
        out[j] = rules_[j]->apply(MassProfile(n_, dens, {}, Point::on_axis(n_, nodes_[j])));
      });
      return out;
    }
    // series coefficients of exp(log w) on each interval, in x = th - 1/2
    auto vals = w->values();
    auto ba = w->bump_a(), bb = w->bump_b();
    std::vector<double> series(intervals_ * (kDegree + 1));
    for (std::size_t m = 0; m < intervals_; ++m) {
      double l0 = std::log(vals[m]);
      double dl = vals.size() > m + 1 ? std::log(vals[m + 1]) - l0 : 0.0;
      double A = ba.empty() ? 0.0 : ba[m], B = bb.empty() ? 0.0 : bb[m];
      // P(th) = p1 th + p2 th^2 + p3 th^3, re-expanded about th = 1/2
      double p1 = dl + A, p2 = B - A, p3 = -B;
      double q0 = 0.5 * p1 + 0.25 * p2 + 0.125 * p3;
      double q[4] = {0.0, p1 + p2 + 0.75 * p3, p2 + 1.5 * p3, p3};
      double* e = &series[m * (kDegree + 1)];
      e[0] = 1.0;
      for (int d = 0; d < kDegree; ++d) {
        double acc = 0.0;
        for (int i = 1; i <= 3 && i <= d + 1; ++i) acc += i * q[i] * e[d + 1 - i];
        e[d + 1] = acc / (d + 1);
      }
      double scale = std::exp(l0 + q0);
      for (int d = 0; d <= kDegree; ++d) e[d] *= scale;
    }
    const double total = dens->total_mass();
    parallel_for(S, [&](std::size_t j) {
      const double* mj = &moments_[j * intervals_ * (kDegree + 1)];
      double acc = 0.0;
      for (std::size_t i = 0; i < intervals_ * (kDegree + 1); ++i) acc += mj[i] * series[i];
      for (std::size_t b = 0; b < prefix_[j].size(); ++b) acc += prefix_[j][b] * dens->prefix_mass(b);
      out[j] = acc + tail_[j] * total;
    });
    return out;
  }

 private:
  int n_;
  std::vector<RadialSegment> segs_;
  std::vector<double> nodes_;
  std::vector<std::unique_ptr<FrozenWolffRule>> rules_;
  bool linear_ = false;
  std::size_t intervals_ = 1;
  std::vector<double> moments_;
  std::vector<std::vector<double>> prefix_;
  std::vector<double> tail_;
};

template <class F>
std::vector<double> at_support(const RadialSetup& s, const std::vector<double>& all, F&& f) {
  std::vector<double> out;
  for (std::size_t i : s.support) out.push_back(f(all[i]));
  return out;
}

SolutionField solve_radial(const Measure& mu, const PotentialParams& pp, const SolverOptions& opts,
                           EnvelopeKind kind) {
  RadialSetup s = radial_setup(mu, opts);
  const int n = s.n;
  const double r = pp.r, q = pp.q, theta = q / (pp.p - 1.0);
  const std::size_t N = s.radii.size(), S = s.support.size();
  std::vector<double> sradii;
  for (std::size_t i : s.support) sradii.push_back(s.radii[i]);

  std::vector<double> w(N);
  parallel_for(N, [&](std::size_t i) { w[i] = wolff(mu, pp, Point::on_axis(n, s.radii[i])).value; });
  if (r == 0.0 && std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) {
    SolutionField f = trivial_solution(n, pp, opts, kind, "wolff");
    f.radii = s.radii;
    return f;
  }

  Envelope env;
  env.kind = kind;
  env.params = pp;
  std::vector<double> lower(S), upper(S), labels_scale(S);
  std::vector<std::string> labels(S);
  for (std::size_t j = 0; j < S; ++j) {
    lower[j] = env.lower_shape(w[s.support[j]]);
    upper[j] = env.upper_shape(w[s.support[j]]);
    labels[j] = label_rho(sradii[j]);
  }

  // fixed extrapolation of u below the grid and beyond it
  detail::LocalPower lp;
  if (s.inner == 0.0) {
    bool model = pp.p == 2.0 && radial_existence(mu, pp).verdict == Verdict::holds;
    std::function<double(double)> shape;
    if (model)
      shape = [&](double rho) { return r + radial_envelope(mu, pp, rho).total(); };
    else
      shape = [&](double rho) { return env.lower_shape(wolff(mu, pp, Point::on_axis(n, rho)).value); };
    lp = detail::fit_local_power(shape, sradii.front(), s.log_scale);
    auto o = detail::dominant_origin(s.segs);
    const double g = pp.gamma(), qq = pp.q, am = n - 2.0 * pp.alpha;
    if (model)
      lp = detail::snap(lp, {0.0, (n - o.s - am) / (1.0 - qq), -am}, {0.0, o.beta / (1.0 - qq), (o.beta - 1.0) / (1.0 - qq)});
    else
      lp = detail::snap(lp, {0.0, g * (pp.alpha * pp.p - o.s) / (pp.p - 1.0)}, {0.0, g * o.beta / (pp.p - 1.0)});
  }
  double slope_out = r > 0.0 ? 0.0 : -pp.decay() / (pp.p - 1.0);
  double sa = 0.0;
  if (std::isinf(s.outer)) {
    auto shape = [&](double rho) { return env.lower_shape(wolff(mu, pp, Point::on_axis(n, rho)).value); };
    sa = r > 0.0 ? 0.0 : detail::fit_local_power(shape, 100.0 * sradii.back(), 0.0).slope;
    slope_out = sa;
  }
  detail::LogBumps bumps;  // on u over the support knots, from the previous pass
  auto make_w = [&](const std::vector<double>& u) -> std::shared_ptr<const RadialWeight> {
    auto w = power_weight(sradii, u, q, lp.slope, sa, lp.log_exponent, s.log_scale);
    if (bumps.a.empty()) return w;
    auto qb = bumps.scaled(q);
    return std::make_shared<RadialWeight>(w->curved(std::move(qb.a), std::move(qb.b)));
  };

  PotentialOptions popt;
  popt.rel_tol = 1e-8;
  auto dens_l = std::make_shared<const RadialDensity>(n, s.segs, make_w(lower));
  std::vector<std::unique_ptr<FrozenWolffRule>> rules(S);
  parallel_for(S, [&](std::size_t j) {
    rules[j] = std::make_unique<FrozenWolffRule>(MassProfile(n, dens_l, {}, Point::on_axis(n, sradii[j])), pp, popt);
  });
  const RadialSweep sweep(n, s.segs, sradii, std::move(rules), *make_w(lower));
  std::vector<double> support_breaks = RadialDensity(n, s.segs).jump_radii();

  detail::IterationResult it;
  bool have_upper = false;
  // The second pass adds the curvature of the first solution to the interpolant.
  for (int pass = 0; pass < 2; ++pass) {
    env = Envelope{};
    env.kind = kind;
    env.params = pp;
    std::vector<double> a = sweep.apply(make_w(lower)), b = sweep.apply(make_w(upper));
    detail::search_constants({lower, upper, a, b, sradii, labels, theta, r}, env);

    detail::NodeMap T = [&](const std::vector<double>& u) {
      std::vector<double> v = sweep.apply(make_w(u));
      for (double& x : v) x += r;
      return v;
    };
    have_upper = std::isfinite(env.c_super);
    bool upward = !(opts.from_upper && have_upper);
    for (int attempt = 0; attempt < 16; ++attempt) {
      std::vector<double> start(S), cap;
      for (std::size_t j = 0; j < S; ++j) start[j] = upward ? env.c_sub * lower[j] : env.c_super * upper[j];
      if (have_upper) {
        for (std::size_t j = 0; j < S; ++j) cap.push_back(env.c_super * upper[j]);
        for (std::size_t j = 0; j < S; ++j)
          if (start[j] > cap[j]) cap.clear();
      }
      // the first pass only feeds the curvature correction
      double tol = pass == 0 ? std::max(opts.tol, 1e-5) : opts.tol;
      it = detail::iterate(T, start, upward, cap.empty() ? nullptr : &cap, tol, opts.max_iter);
      if (!it.start_rejected) break;
      if (upward)
        env.c_sub *= 0.5;
      else
        env.c_super *= 2.0;
    }
    if (it.start_rejected) throw std::logic_error("solver: the starting envelope is not a discrete sub/supersolution");
    if (pass == 0) bumps = detail::log_cubic_bumps(sradii, it.u, support_breaks);
  }
  if (opts.from_upper && !have_upper) env.notes.push_back("no supersolution: iterated upward from the subsolution");
  SolutionField f;
  f.method = "wolff";
  f.radial = true;
  f.envelope = env;
  f.iterations = it.iterations;
  f.converged = it.converged;
  f.trace_min_step = it.min_step;
  f.trace_change = it.change;
  f.radii = s.radii;
  f.on_support = s.on_support;
  f.values.assign(N, 0.0);
  for (std::size_t j = 0; j < S; ++j) f.values[s.support[j]] = it.u[j];
  f.atom_weights.clear();

  auto dens_f = std::make_shared<const RadialDensity>(n, s.segs, make_w(it.u));
  MeasureView vf{n, dens_f, {}};
  f.residual.assign(N, 0.0);
  parallel_for(N, [&](std::size_t i) {
    double tu = wolff(vf, pp, Point::on_axis(n, s.radii[i])).value + r;
    if (s.on_support[i])
      f.residual[i] = relative_residual(f.values[i], tu, r);
    else
      f.values[i] = tu;
  });
  {
    std::vector<double> breaks = support_breaks;
    if (s.inner > 0.0) breaks.push_back(s.inner);
    if (std::isfinite(s.outer)) breaks.push_back(s.outer);
    auto ub = detail::log_cubic_bumps(s.radii, f.values, breaks).spliced(bumps, s.support.front());
    RadialWeight base(s.radii, f.values, lp.slope, slope_out, lp.log_exponent, s.log_scale > 0.0 ? s.log_scale : 1.0);
    f.interpolant = std::make_shared<RadialWeight>(base.curved(std::move(ub.a), std::move(ub.b)));
  }
  for (std::size_t j = 0; j + 1 < S; ++j) {
    double rho = std::sqrt(sradii[j] * sradii[j + 1]);
    f.probes.push_back(Point::on_axis(n, rho));
    f.probe_values.push_back((*f.interpolant)(rho));
  }
  f.probe_residual.assign(f.probes.size(), 0.0);
  parallel_for(f.probes.size(), [&](std::size_t k) {
    double tu = wolff(vf, pp, f.probes[k]).value + r;
    f.probe_residual[k] = relative_residual(f.probe_values[k], tu, r);
  });
  for (std::size_t i = 0; i < N; ++i) {
    f.nodes.push_back(Point::on_axis(n, s.radii[i]));
    f.envelope_lower.push_back(env.lower(w[i]));
    f.envelope_upper.push_back(env.upper(w[i]));
    f.max_residual = std::max(f.max_residual, f.residual[i]);
  }
  for (double v : f.probe_residual) f.max_probe_residual = std::max(f.max_probe_residual, v);
  if (opts.certify && f.converged) fill_certificate(f, mu, pp);
  return f;
}

SolutionField solve_atomic(const Measure& mu, const PotentialParams& pp, const SolverOptions& opts,
                           EnvelopeKind kind) {
  const int n = mu.dim();
  const double r = pp.r, q = pp.q, theta = q / (pp.p - 1.0);
  std::vector<MollifiedAtom> atoms(mu.atoms().begin(), mu.atoms().end());
  const std::size_t A = atoms.size();
  std::vector<Point> nodes;
  for (const auto& at : atoms) nodes.push_back(at.center);
  for (const auto& at : atoms)
    for (double fct : {0.5, 2.0, 8.0}) {
      Point x = at.center;
      x.coords[0] += fct * at.radius;
      nodes.push_back(x);
    }
  const std::size_t N = nodes.size();
  std::vector<double> w(N);
  parallel_for(N, [&](std::size_t i) { w[i] = wolff(mu, pp, nodes[i]).value; });

  Envelope env;
  env.kind = kind;
  env.params = pp;
  std::vector<double> lower(A), upper(A), scale(A);
  std::vector<std::string> labels(A);
  for (std::size_t j = 0; j < A; ++j) {
    lower[j] = env.lower_shape(w[j]);
    upper[j] = env.upper_shape(w[j]);
    scale[j] = atoms[j].center.norm();
    labels[j] = "atom " + std::to_string(j);
  }
  auto weighted = [&](const std::vector<double>& u) {
    std::vector<MollifiedAtom> out = atoms;
    for (std::size_t j = 0; j < A; ++j) out[j].mass *= std::pow(u[j], q);
    return out;
  };
  PotentialOptions popt;
  popt.rel_tol = 1e-10;
  std::vector<std::unique_ptr<FrozenWolffRule>> rules(A);
  std::vector<double> a(A), b(A);
  auto al = weighted(lower), au = weighted(upper);
  parallel_for(A, [&](std::size_t j) {
    MassProfile pl(n, nullptr, al, atoms[j].center);
    rules[j] = std::make_unique<FrozenWolffRule>(pl, pp, popt);
    a[j] = rules[j]->apply(pl);
    b[j] = rules[j]->apply(MassProfile(n, nullptr, au, atoms[j].center));
  });
  detail::search_constants({lower, upper, a, b, scale, labels, theta, r}, env);

  detail::NodeMap T = [&](const std::vector<double>& u) {
    auto at = weighted(u);
    std::vector<double> v(A);
    parallel_for(A, [&](std::size_t j) { v[j] = rules[j]->apply(MassProfile(n, nullptr, at, atoms[j].center)) + r; });
    return v;
  };
  bool have_upper = std::isfinite(env.c_super);
  bool upward = !(opts.from_upper && have_upper);
  detail::IterationResult it;
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<double> start(A), cap;
    for (std::size_t j = 0; j < A; ++j) start[j] = upward ? env.c_sub * lower[j] : env.c_super * upper[j];
    if (have_upper) {
      for (std::size_t j = 0; j < A; ++j) cap.push_back(env.c_super * upper[j]);
      for (std::size_t j = 0; j < A; ++j)
        if (start[j] > cap[j]) cap.clear();
    }
    it = detail::iterate(T, start, upward, cap.empty() ? nullptr : &cap, opts.tol, opts.max_iter);
    if (!it.start_rejected) break;
    if (upward)
      env.c_sub *= 0.5;
    else
      env.c_super *= 2.0;
  }
  if (it.start_rejected) throw std::logic_error("solver: the starting envelope is not a discrete sub/supersolution");

  SolutionField f;
  f.method = "wolff";
  f.radial = false;
  f.envelope = env;
  f.iterations = it.iterations;
  f.converged = it.converged;
  f.trace_min_step = it.min_step;
  f.trace_change = it.change;
  f.nodes = nodes;
  f.values.assign(N, 0.0);
  f.residual.assign(N, 0.0);
  f.on_support.assign(N, false);
  for (std::size_t j = 0; j < A; ++j) {
    f.values[j] = it.u[j];
    f.on_support[j] = true;
    f.atom_weights.push_back(std::pow(it.u[j], q));
  }
  MeasureView vf{n, nullptr, weighted(it.u)};
  parallel_for(N, [&](std::size_t i) {
    double tu = wolff(vf, pp, nodes[i]).value + r;
    if (i < A)
      f.residual[i] = relative_residual(f.values[i], tu, r);
    else
      f.values[i] = tu;
  });
  for (std::size_t i = 0; i < N; ++i) {
    f.radii.push_back(static_cast<double>(i));
    f.envelope_lower.push_back(env.lower(w[i]));
    f.envelope_upper.push_back(env.upper(w[i]));
    f.max_residual = std::max(f.max_residual, f.residual[i]);
  }
  if (opts.certify && f.converged) fill_certificate(f, mu, pp);
  return f;
}


}  // namespace

double SolutionField::value_at(double rho) const {
  if (interpolant) return (*interpolant)(rho);
  throw UnsupportedError("value_at needs a radial solution");
}

std::vector<Point> log_axis_probes(int n, double lo, double hi, int per_decade) {
  std::vector<Point> out;
  int m = std::max(1, static_cast<int>(std::lround(std::log10(hi / lo) * per_decade)));
  for (int i = 0; i <= m; ++i) out.push_back(Point::on_axis(n, lo * std::pow(hi / lo, static_cast<double>(i) / m)));
  return out;
}

std::vector<double> solution_at(const SolutionField& u, const Measure& mu, const PotentialParams& pp,
                                const std::vector<Point>& points) {
  std::vector<double> out(points.size(), pp.r);
  if (u.trivial || mu.empty()) return out;
  if (u.method == "radial-model") {
    for (std::size_t i = 0; i < points.size(); ++i)
      out[i] = radial_model_value(mu, pp, u.interpolant.get(), points[i].norm());
    return out;
  }
  MeasureView view;
  view.n = mu.dim();
  if (u.radial) {
    view.radial = std::make_shared<const RadialDensity>(mu.dim(), mu.radial_segments(), qth_power(*u.interpolant, pp.q));
  } else {
    view.atoms.assign(mu.atoms().begin(), mu.atoms().end());
    for (std::size_t j = 0; j < view.atoms.size(); ++j) view.atoms[j].mass *= u.atom_weights[j];
  }
  parallel_for(points.size(), [&](std::size_t i) { out[i] = wolff(view, pp, points[i]).value + pp.r; });
  return out;
}

Certificate certify(const SolutionField& u, const Envelope& envelope, const Measure& mu,
                    const std::vector<Point>& probes) {
  const PotentialParams& pp = envelope.params;
  Certificate c;
  c.upper_trend.condition_id = "solution_over_upper_shape";
  c.u = solution_at(u, mu, pp, probes);
  c.w.assign(probes.size(), 0.0);
  if (!mu.empty()) parallel_for(probes.size(), [&](std::size_t i) { c.w[i] = wolff(mu, pp, probes[i]).value; });
  double lo = kInf, hi = 0.0, uni = kInf;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    double ls = envelope.lower_shape(c.w[i]), us = envelope.upper_shape(c.w[i]);
    if (ls > 0.0) lo = std::min(lo, c.u[i] / ls);
    if (us > 0.0) {
      hi = std::max(hi, c.u[i] / us);
      std::ostringstream os;
      os.precision(6);
      os << "|x|=" << probes[i].norm();
      c.upper_trend.samples.push_back({os.str(), probes[i].norm(), c.u[i] / us});
    }
    double g = std::pow(c.w[i], pp.gamma());
    if (g > 0.0) uni = std::min(uni, c.u[i] / g);
  }
  c.c_lower = std::isfinite(lo) ? lo : 0.0;
  c.c_upper = hi;
  c.c_universal = uni;
  finalize_report(c.upper_trend);
  return c;
}

Envelope build_envelope(const Measure& mu, const PotentialParams& pp, const std::vector<Point>& probes,
                        std::optional<EnvelopeKind> kind) {
  pp.validate();
  auto fin = finiteness_check(mu, pp);
  if (!fin.finite) throw InputError("envelope: Wolff potential is infinite (" + fin.reason + ")");
  Envelope env;
  env.kind = kind.value_or(default_envelope_kind(pp));
  env.params = pp;
  if (mu.empty()) {
    env.c_sub = env.c_super = 1.0;
    return env;
  }
  const int n = mu.dim();
  const std::size_t m = probes.size();
  BasePotentialTable table(mu, pp);
  MeasureView vl, vu;
  vl.n = vu.n = n;
  if (table.radial()) {
    std::vector<double> radii(table.radii().begin(), table.radii().end()), ls, us;
    for (double v : table.values()) {
      ls.push_back(env.lower_shape(v));
      us.push_back(env.upper_shape(v));
    }
    const double g = pp.gamma(), sb = table.slope_below(), lb = table.log_exponent_below();
    const bool blows_up = sb < 0.0 || lb < 0.0;
    double lsb = blows_up || pp.r == 0.0 ? g * sb : 0.0, llb = blows_up || pp.r == 0.0 ? g * lb : 0.0;
    double usb = env.kind == EnvelopeKind::homogeneous && !blows_up ? sb : lsb;
    double ulb = env.kind == EnvelopeKind::homogeneous && !blows_up ? lb : llb;
    double lsa = pp.r > 0.0 ? 0.0 : g * table.slope_above();
    double usa = env.kind == EnvelopeKind::homogeneous ? table.slope_above() : lsa;
    auto segs = mu.radial_segments();
    double R = origin_log_scale(segs);
    vl.radial = std::make_shared<const RadialDensity>(n, segs, power_weight(radii, ls, pp.q, lsb, lsa, llb, R));
    vu.radial = std::make_shared<const RadialDensity>(n, segs, power_weight(radii, us, pp.q, usb, usa, ulb, R));
  } else {
    if (!mu.segments().empty()) throw UnsupportedError("envelope: mixed radial and off-center atomic measures");
    vl.atoms.assign(mu.atoms().begin(), mu.atoms().end());
    vu.atoms = vl.atoms;
    auto av = table.atom_values();
    for (std::size_t j = 0; j < vl.atoms.size(); ++j) {
      vl.atoms[j].mass *= std::pow(env.lower_shape(av[j]), pp.q);
      vu.atoms[j].mass *= std::pow(env.upper_shape(av[j]), pp.q);
    }
  }
  detail::ShapeSamples s;
  s.theta = pp.q / (pp.p - 1.0);
  s.r = pp.r;
  s.lower.resize(m);
  s.upper.resize(m);
  s.a.resize(m);
  s.b.resize(m);
  parallel_for(m, [&](std::size_t i) {
    double wv = wolff(mu, pp, probes[i]).value;
    s.lower[i] = env.lower_shape(wv);
    s.upper[i] = env.upper_shape(wv);
    s.a[i] = wolff(vl, pp, probes[i]).value;
    s.b[i] = wolff(vu, pp, probes[i]).value;
  });
  for (const auto& x : probes) {
    s.scale.push_back(x.norm());
    std::ostringstream os;
    os.precision(6);
    os << "|x|=" << x.norm();
    s.labels.push_back(os.str());
  }
  detail::search_constants(s, env);
  return env;
}

SolutionField solve(const Measure& mu, const PotentialParams& pp, const SolverOptions& opts) {
  pp.validate();
  check_options(opts);
  if (pp.n != mu.dim()) throw InputError("solver: params.n differs from the measure dimension");
  auto fin = finiteness_check(mu, pp);
  if (!fin.finite) throw InputError("solver: Wolff potential is infinite (" + fin.reason + ")");
  EnvelopeKind kind = opts.kind.value_or(default_envelope_kind(pp));
  if (mu.empty()) return trivial_solution(mu.dim(), pp, opts, kind, "wolff");
  if (mu.is_radial()) return solve_radial(mu, pp, opts, kind);
  if (!mu.segments().empty()) throw UnsupportedError("solver: mixed radial and off-center atomic measures");
  return solve_atomic(mu, pp, opts, kind);
}

}  // namespace wk
