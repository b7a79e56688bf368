#include "wolffkit/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wolffkit/errors.hpp"
#include "wolffkit/parallel.hpp"
#include "wolffkit/special.hpp"

namespace wk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string describe(const Point& x) {
  std::ostringstream os;
  os.precision(6);
  os << "x=(";
  for (std::size_t i = 0; i < x.coords.size(); ++i) os << (i ? "," : "") << x.coords[i];
  os << ")";
  return os.str();
}

std::string describe(const BallProbe& b) {
  std::ostringstream os;
  os.precision(6);
  os << "B(" << describe(b.center).substr(2) << ", r=" << b.radius << ")";
  return os.str();
}

void put_params(ConditionReport& rep, const PotentialParams& pp) {
  rep.parameters["n"] = pp.n;
  rep.parameters["alpha"] = pp.alpha;
  rep.parameters["p"] = pp.p;
  rep.parameters["q"] = pp.q;
  rep.parameters["r"] = pp.r;
}

double riesz_order(const PotentialParams& pp) { return 2.0 * pp.alpha; }

void check_radial_params(const Measure& mu, const PotentialParams& pp) {
  double two_alpha = riesz_order(pp);
  if (!(two_alpha > 0.0) || !(two_alpha < mu.dim())) throw InputError("radial condition: need 0 < 2 alpha < n");
  if (!(pp.q > 0.0) || !(pp.q < 1.0)) throw InputError("radial condition: need 0 < q < 1");
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    default: return "inconclusive";
  }
}

void finalize_report(ConditionReport& rep) {
  auto& s = rep.samples;
  std::stable_sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.scale > b.scale; });
  rep.supremum = 0.0;
  for (const auto& x : s) rep.supremum = std::max(rep.supremum, x.ratio);
  if (s.empty()) {
    rep.verdict = Verdict::holds;
    return;
  }
  if (std::isinf(rep.supremum)) {
    rep.verdict = Verdict::fails;
    return;
  }
  std::size_t start = s.size() - 1;
  while (start > 0 && s[start - 1].ratio < s[start].ratio) --start;
  if (s.size() - start >= 3 && s.back().ratio >= 2.0 * s[start].ratio) {
    rep.verdict = Verdict::fails;
    return;
  }
  std::size_t from = s.size() >= 3 ? s.size() - 3 : 0;
  double lo = kInf, hi = 0.0;
  bool decaying = true;
  for (std::size_t i = from; i < s.size(); ++i) {
    lo = std::min(lo, s[i].ratio);
    hi = std::max(hi, s[i].ratio);
    if (i > from && s[i].ratio > s[i - 1].ratio) decaying = false;
  }
  rep.verdict = (hi == 0.0 || hi <= 4.0 * lo || decaying) ? Verdict::holds : Verdict::inconclusive;
}

std::vector<BallProbe> dyadic_origin_balls(int n, int k_min, int k_max, double scale) {
  std::vector<BallProbe> out;
  for (int k = k_min; k <= k_max; ++k)
    out.push_back({Point(std::vector<double>(static_cast<std::size_t>(n), 0.0)), scale * std::ldexp(1.0, -k)});
  return out;
}

std::vector<Point> decade_axis_points(int n, int k_min, int k_max, double scale) {
  std::vector<Point> out;
  for (int k = k_min; k <= k_max; ++k) out.push_back(Point::on_axis(n, scale * std::pow(10.0, -k)));
  return out;
}

double energy_integral(const Measure& sigma_b, const PotentialParams& pp, double s) {
  if (sigma_b.empty()) return 0.0;
  Measure mu = sigma_b;
  if (!mu.is_radial()) {
    if (!mu.segments().empty() || mu.atoms().size() != 1)
      throw UnsupportedError("energy integral needs a radial restriction or a single atom");
    MollifiedAtom a = mu.atoms()[0];
    a.center = Point(std::vector<double>(static_cast<std::size_t>(mu.dim()), 0.0));
    mu = Measure(mu.dim(), {}, {a});
  }
  const int n = mu.dim();
  auto segs = mu.radial_segments();
  RadialDensity dens(n, segs);
  const double omega = sphere_area(n);
  double outer = mu.support_radius(), inner = mu.inner_radius();
  PotentialOptions popt;
  popt.rel_tol = 1e-8;
  auto integrand = [&](double u) {
    double tau = std::exp(u);
    double f = dens.density(tau);
    if (!(f > 0.0)) return 0.0;
    double w = wolff(mu, pp, Point::on_axis(n, tau), popt).value;
    return omega * std::pow(tau, n) * f * std::pow(w, s);
  };
  double kappa = kInf;
  if (inner == 0.0) {
    double s_max = -kInf;
    for (const auto& g : segs)
      if (g.r_lo == 0.0) s_max = std::max(s_max, g.s);
    double slope = s_max > pp.alpha * pp.p ? (pp.alpha * pp.p - s_max) / (pp.p - 1.0) : 0.0;
    kappa = n - s_max + s * slope;
    if (!(kappa > 0.0)) return kInf;
  }
  double lo = inner > 0.0 ? inner : outer * (kappa >= 0.5 ? 1e-6 : 1e-12);
  std::vector<double> bp{std::log(lo)};
  for (double r : dens.jump_radii())
    if (r > lo && r < outer) bp.push_back(std::log(r));
  bp.push_back(std::log(outer));
  std::sort(bp.begin(), bp.end());
  std::vector<double> fine;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    int m = std::max(1, static_cast<int>(std::ceil((bp[i + 1] - bp[i]) / std::log(10.0))));
    for (int j = 0; j < m; ++j) fine.push_back(bp[i] + (bp[i + 1] - bp[i]) * j / m);
  }
  fine.push_back(bp.back());
  QuadOptions q;
  q.rel_tol = 1e-6;
  q.max_panels = 400;
  double acc = integrate_adaptive(integrand, fine, q).value;
  if (inner == 0.0) acc += integrand(std::log(lo)) / kappa;
  return acc;
}

ConditionReport energy_ball_ratio(const Measure& mu, const PotentialParams& pp, double s,
                                  const std::vector<BallProbe>& probes) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InputError("energy condition: exponent s must be positive");
  ConditionReport rep;
  rep.condition_id = "energy_ball";
  put_params(rep, pp);
  rep.parameters["s"] = s;
  std::vector<double> ratio(probes.size(), -1.0);
  parallel_for(probes.size(), [&](std::size_t i) {
    Measure sb = mu.restricted_to_ball(probes[i].center, probes[i].radius);
    double m = sb.total_mass();
    if (!(m > 0.0)) return;
    ratio[i] = energy_integral(sb, pp, s) / m;
  });
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (ratio[i] < 0.0) {
      rep.notes.push_back("skipped zero-mass probe " + describe(probes[i]));
      continue;
    }
    rep.samples.push_back({describe(probes[i]), probes[i].radius, ratio[i]});
  }
  finalize_report(rep);
  return rep;
}

ConditionReport pointwise_kappa(const BasePotentialTable& table, const std::vector<Point>& probes) {
  const auto& pp = table.params();
  ConditionReport rep;
  rep.condition_id = "pointwise_kappa";
  put_params(rep, pp);
  rep.parameters["beta_w"] = pp.beta_w();
  rep.parameters["gamma"] = pp.gamma();
  if (table.measure().empty()) {
    rep.notes.push_back("zero measure: condition holds vacuously");
    finalize_report(rep);
    return rep;
  }
  MeasureView weighted = table.reweighted(pp.beta_w());
  std::vector<double> ratio(probes.size(), -1.0);
  parallel_for(probes.size(), [&](std::size_t i) {
    double w = wolff(table.measure(), pp, probes[i]).value;
    if (!(w > 0.0)) return;
    double num = wolff(weighted, pp, probes[i]).value;
    ratio[i] = std::isinf(w) ? (std::isinf(num) ? kInf : 0.0) : num / (w + std::pow(w, pp.gamma()));
  });
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (ratio[i] < 0.0) {
      rep.notes.push_back("skipped probe with zero potential " + describe(probes[i]));
      continue;
    }
    rep.samples.push_back({describe(probes[i]), probes[i].norm(), ratio[i]});
  }
  finalize_report(rep);
  return rep;
}

ConditionReport pointwise_kappa(const Measure& mu, const PotentialParams& pp, const std::vector<Point>& probes) {
  pp.validate();
  auto fin = finiteness_check(mu, pp);
  if (!fin.finite) throw InputError("pointwise condition: Wolff potential is infinite (" + fin.reason + ")");
  return pointwise_kappa(BasePotentialTable(mu, pp), probes);
}

ConditionReport weaker_ball_condition(const Measure& mu, const PotentialParams& pp,
                                      const std::vector<BallProbe>& probes) {
  check_radial_params(mu, pp);
  PotentialParams rp = PotentialParams::riesz(mu.dim(), riesz_order(pp), pp.q, pp.r);
  const double e = pp.q / (1.0 - pp.q);
  ConditionReport rep;
  rep.condition_id = "weaker_ball";
  put_params(rep, pp);
  rep.parameters["two_alpha"] = riesz_order(pp);
  if (mu.empty()) {
    finalize_report(rep);
    return rep;
  }
  BasePotentialTable table(mu, rp);
  MeasureView weighted = table.reweighted(e);
  std::vector<double> ratio(probes.size(), -1.0);
  parallel_for(probes.size(), [&](std::size_t i) {
    const auto& b = probes[i];
    double mass = mu.ball_mass(b.center, b.radius);
    if (!(mass > 0.0)) return;
    double num = weighted.profile(b.center)(0.5 * b.radius);
    PotentialOptions o;
    o.t_lo = b.radius;
    double tail = wolff(mu, rp, b.center, o).value;
    ratio[i] = num / (mass * std::pow(1.0 + tail, e));
  });
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (ratio[i] < 0.0) {
      rep.notes.push_back("skipped zero-mass probe " + describe(probes[i]));
      continue;
    }
    rep.samples.push_back({describe(probes[i]), probes[i].radius, ratio[i]});
  }
  finalize_report(rep);
  return rep;
}

ConditionReport radial_existence(const Measure& mu, const PotentialParams& pp) {
  check_radial_params(mu, pp);
  const double k = mu.dim() - riesz_order(pp);
  ConditionReport rep;
  rep.condition_id = "radial_existence";
  put_params(rep, pp);
  rep.parameters["two_alpha"] = riesz_order(pp);
  double below = mu.radial_moment_below(1.0, k * pp.q);
  double above = mu.radial_moment_above(1.0, k);
  rep.samples.push_back({"moment |y|<1 of |y|^{-(n-2alpha)q}", 1.0, below});
  rep.samples.push_back({"moment |y|>=1 of |y|^{-(n-2alpha)}", 1.0, above});
  rep.supremum = std::max(below, above);
  rep.verdict = std::isfinite(below) && std::isfinite(above) ? Verdict::holds : Verdict::fails;
  if (std::isinf(below)) rep.notes.push_back("inner moment diverges");
  if (std::isinf(above)) rep.notes.push_back("outer moment diverges");
  return rep;
}

double radial_ratio(const Measure& mu, const PotentialParams& pp, double rho) {
  check_radial_params(mu, pp);
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InputError("radial ratio: rho must be positive");
  const double k = mu.dim() - riesz_order(pp);
  double below = mu.radial_moment_below(rho, k * pp.q);
  double above = mu.radial_moment_above(rho, k);
  if (below == 0.0) return 0.0;
  if (!(above > 0.0) || std::isinf(below)) return kInf;
  return std::pow(rho, -k * (1.0 - pp.q)) * below / above;
}

ConditionReport radial_ratio_report(const Measure& mu, const PotentialParams& pp, const std::vector<double>& rhos) {
  ConditionReport rep;
  rep.condition_id = "radial_ratio";
  put_params(rep, pp);
  rep.parameters["two_alpha"] = riesz_order(pp);
  for (double rho : rhos) {
    std::ostringstream os;
    os.precision(6);
    os << "rho=" << rho;
    rep.samples.push_back({os.str(), rho, radial_ratio(mu, pp, rho)});
  }
  finalize_report(rep);
  return rep;
}

}  // namespace wk
