#include "wolffkit/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wolffkit/errors.hpp"

namespace wk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// How one Wolff integral is split: head below t_cut, adaptive middle, tail.
struct Plan {
  bool zero = false;
  std::string divergence;
  double lo = 0.0, hi = 0.0;
  double t_cut = 0.0, head_weight = 0.0;
  std::vector<double> log_breaks;
  double closed_from = 0.0, closed_to = 0.0;  // closed-form tail with the total mass
  double power_node = 0.0, power_weight = 0.0;  // tail estimated from the last value
};

Plan make_plan(const MassProfile& prof, const PotentialParams& pp, const PotentialOptions& opts) {
  Plan pl;
  const double a = pp.decay(), e = 1.0 / (pp.p - 1.0);
  double contact = prof.contact(), sat = prof.saturation();
  if (!(prof.total() > 0.0) || std::isinf(contact) || contact >= opts.t_hi) {
    pl.zero = true;
    return pl;
  }
  std::vector<double> kinks = prof.kinks();
  double d = prof.origin_distance();
  double ref = kInf, big = std::max(1.0, d);
  for (double k : kinks) {
    ref = std::min(ref, k);
    big = std::max(big, k);
  }
  if (d > 0.0) ref = std::min(ref, d);
  if (std::isfinite(sat)) {
    ref = std::min(ref, sat);
    big = std::max(big, sat);
  }
  if (std::isinf(ref)) ref = 1.0;

  double lo = std::max(contact, opts.t_lo);
  double hi = std::min(sat, opts.t_hi);
  if (std::isfinite(sat) && opts.t_hi > sat) {
    pl.closed_from = std::max(sat, opts.t_lo);
    pl.closed_to = opts.t_hi;
  }
  if (std::isinf(hi)) {
    double g = 0.0;
    if (prof.radial())
      for (double s : prof.radial()->tail_exponents()) g = std::max(g, pp.n - s);
    double kappa = (a - g) * e;
    if (!(kappa > 0.0)) {
      pl.divergence = "tail exponent";
      return pl;
    }
    hi = 1e8 * big;
    pl.power_node = hi;
    pl.power_weight = 1.0 / kappa;
  }
  if (lo == 0.0) {
    double s_dom = -kInf, b_dom = 0.0, R = 1.0;
    if (d > 0.0) {
      s_dom = 0.0;
    } else {
      if (prof.radial())
        for (const auto& ot : prof.radial()->origin_terms())
          if (ot.s_eff > s_dom || (ot.s_eff == s_dom && ot.beta < b_dom)) {
            s_dom = ot.s_eff;
            b_dom = ot.beta;
            R = ot.log_scale;
          }
      if (s_dom < 0.0 && prof.total() > (prof.radial() ? prof.radial()->total_mass() : 0.0)) {
        s_dom = 0.0;
        b_dom = 0.0;
      }
    }
    double gl = (pp.alpha * pp.p - s_dom) * e, bl = b_dom * e;
    if (gl < 0.0 || (gl == 0.0 && bl <= 1.0)) {
      pl.divergence = "local divergence";
      return pl;
    }
    pl.t_cut = 1e-10 * std::min(ref, hi);
    pl.head_weight = gl > 0.0 ? 1.0 / gl : (1.0 + std::log(R / pl.t_cut)) / (bl - 1.0);
    lo = pl.t_cut;
  }
  pl.lo = lo;
  pl.hi = hi;
  if (hi > lo) {
    pl.log_breaks.push_back(std::log(lo));
    for (double k : kinks)
      if (k > lo && k < hi) pl.log_breaks.push_back(std::log(k));
    pl.log_breaks.push_back(std::log(hi));
  }
  return pl;
}

double profile_integrand(const MassProfile& prof, double t, double a, double e) {
  double m = prof(t);
  if (!(m > 0.0)) return 0.0;
  double base = m * std::pow(t, -a);
  return e == 1.0 ? base : std::pow(base, e);
}

double closed_tail(double total, double from, double to, double a, double e) {
  if (!(to > from)) return 0.0;
  double ae = a * e;
  double upper = std::isinf(to) ? 0.0 : std::pow(to, -ae);
  return std::pow(total, e) * (std::pow(from, -ae) - upper) / ae;
}

void validate_kernel(const PotentialParams& pp) {
  if (pp.n < 1) throw InputError("params: dimension n must be >= 1");
  if (!(pp.p > 1.0) || !std::isfinite(pp.p)) throw InputError("params: p must exceed 1");
  if (!(pp.alpha > 0.0) || !std::isfinite(pp.alpha)) throw InputError("params: alpha must be positive");
  if (!(pp.decay() > 0.0)) throw InputError("params: need n - alpha*p > 0");
}

}  // namespace

PotentialParams PotentialParams::riesz(int n, double two_alpha, double q, double r) {
  PotentialParams pp;
  pp.n = n;
  pp.alpha = 0.5 * two_alpha;
  pp.p = 2.0;
  pp.q = q;
  pp.r = r;
  return pp;
}

void PotentialParams::validate() const {
  validate_kernel(*this);
  if (!(q > 0.0) || !(q < p - 1.0)) throw InputError("params: q must lie in (0, p-1)");
  if (!(r >= 0.0) || !std::isfinite(r)) throw InputError("params: r must be nonnegative and finite");
}

FinitenessResult finiteness_check(const MeasureView& mu, const PotentialParams& pp) {
  validate_kernel(pp);
  if (mu.radial)
    for (double s : mu.radial->tail_exponents())
      if (!(s > pp.alpha * pp.p)) return {false, "tail exponent"};
  return {true, ""};
}

FinitenessResult finiteness_check(const Measure& mu, const PotentialParams& pp) {
  return finiteness_check(mu.view(), pp);
}

PotentialValue wolff(const MassProfile& prof, const PotentialParams& pp, const PotentialOptions& opts) {
  validate_kernel(pp);
  const double a = pp.decay(), e = 1.0 / (pp.p - 1.0);
  PotentialValue out;
  Plan pl = make_plan(prof, pp, opts);
  if (pl.zero) return out;
  if (!pl.divergence.empty()) {
    out.value = kInf;
    out.abs_error_bound = kInf;
    out.divergence = pl.divergence;
    return out;
  }
  out.t_min = pl.lo;
  out.t_max = pl.hi;
  if (pl.log_breaks.size() >= 2) {
    QuadOptions q;
    q.rel_tol = opts.rel_tol;
    q.max_panels = opts.max_panels;
    auto res = integrate_adaptive([&](double u) { return profile_integrand(prof, std::exp(u), a, e); },
                                  pl.log_breaks, q);
    out.value = res.value;
    out.abs_error_bound = res.abs_error;
  }
  if (pl.t_cut > 0.0) out.head = pl.head_weight * profile_integrand(prof, pl.t_cut, a, e);
  if (pl.power_node > 0.0) out.tail = pl.power_weight * profile_integrand(prof, pl.power_node, a, e);
  out.tail += closed_tail(prof.total(), pl.closed_from, pl.closed_to, a, e);
  out.value += out.head + out.tail;
  out.abs_error_bound += 1e-2 * out.head + (pl.power_node > 0.0 ? 1e-2 * out.tail : 0.0);
  return out;
}

PotentialValue wolff(const MeasureView& mu, const PotentialParams& pp, const Point& x, const PotentialOptions& opts) {
  auto fin = finiteness_check(mu, pp);
  if (!fin.finite) {
    PotentialValue out;
    out.value = kInf;
    out.abs_error_bound = kInf;
    out.divergence = fin.reason;
    return out;
  }
  if (x.dim() != static_cast<std::size_t>(mu.n)) throw InputError("point dimension differs from measure dimension");
  return wolff(mu.profile(x), pp, opts);
}

PotentialValue wolff(const Measure& mu, const PotentialParams& pp, const Point& x, const PotentialOptions& opts) {
  return wolff(mu.view(), pp, x, opts);
}

PotentialValue riesz(const Measure& mu, double two_alpha, const Point& x, const PotentialOptions& opts) {
  if (!(two_alpha > 0.0) || !(two_alpha < mu.dim())) throw InputError("riesz: need 0 < two_alpha < n");
  return wolff(mu, PotentialParams::riesz(mu.dim(), two_alpha), x, opts);
}

FrozenWolffRule::FrozenWolffRule(const MassProfile& prof, const PotentialParams& pp, const PotentialOptions& opts)
    : decay_(pp.decay()), expo_(1.0 / (pp.p - 1.0)) {
  validate_kernel(pp);
  Plan pl = make_plan(prof, pp, opts);
  if (pl.zero) return;
  if (!pl.divergence.empty()) {
    infinite_ = true;
    return;
  }
  if (pl.log_breaks.size() >= 2) {
    QuadOptions q;
    q.rel_tol = opts.rel_tol;
    q.max_panels = opts.max_panels;
    auto res = integrate_adaptive([&](double u) { return profile_integrand(prof, std::exp(u), decay_, expo_); },
                                  pl.log_breaks, q);
    FixedRule r = kronrod_rule(res.panels);
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      t_.push_back(std::exp(r.x[i]));
      w_.push_back(r.w[i]);
    }
  }
  if (pl.t_cut > 0.0) {
    t_.push_back(pl.t_cut);
    w_.push_back(pl.head_weight);
  }
  if (pl.power_node > 0.0) {
    t_.push_back(pl.power_node);
    w_.push_back(pl.power_weight);
  }
  if (pl.closed_to > pl.closed_from) {
    tail_from_ = pl.closed_from;
    tail_to_ = pl.closed_to;
  }
}

double FrozenWolffRule::integrand(const MassProfile& prof, double t) const {
  return profile_integrand(prof, t, decay_, expo_);
}

double FrozenWolffRule::apply(const MassProfile& prof) const {
  if (infinite_) return kInf;
  double acc = 0.0;
  for (std::size_t i = 0; i < t_.size(); ++i) acc += w_[i] * integrand(prof, t_[i]);
  return acc + closed_tail(prof.total(), tail_from_, tail_to_, decay_, expo_);
}

std::vector<double> FrozenWolffRule::mass_weights() const {
  std::vector<double> out(t_.size());
  for (std::size_t i = 0; i < t_.size(); ++i) out[i] = w_[i] * std::pow(t_[i], -decay_);
  return out;
}

double FrozenWolffRule::tail_per_mass() const { return closed_tail(1.0, tail_from_, tail_to_, decay_, expo_); }

double FrozenWolffRule::apply_masses(std::span<const double> masses, double total) const {
  if (infinite_) return kInf;
  double acc = 0.0;
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (!(masses[i] > 0.0)) continue;
    double base = masses[i] * std::pow(t_[i], -decay_);
    acc += w_[i] * (expo_ == 1.0 ? base : std::pow(base, expo_));
  }
  return acc + closed_tail(total, tail_from_, tail_to_, decay_, expo_);
}

BasePotentialTable::BasePotentialTable(const Measure& mu, const PotentialParams& pp, double knots_per_decade,
                                       const PotentialOptions& opts)
    : mu_(mu), params_(pp) {
  validate_kernel(pp);
  if (mu.empty()) return;
  radial_ = mu.is_radial();
  if (!radial_) {
    if (!mu.segments().empty())
      throw UnsupportedError("base potential table: radial segments mixed with off-center atoms");
    for (const auto& a : mu.atoms()) {
      auto v = wolff(mu, pp, a.center, opts);
      if (!v.finite()) throw UnsupportedError("base potential infinite at an atom center");
      atom_values_.push_back(v.value);
    }
    return;
  }
  const double e = 1.0 / (pp.p - 1.0);
  double outer = mu.support_radius(), inner = mu.inner_radius();
  double hi = std::isfinite(outer) ? outer : 1e3 * std::max(1.0, inner);
  double lo = inner > 0.0 ? inner : hi * 1e-8;
  int m = std::max(2, static_cast<int>(std::ceil(std::log10(hi / lo) * knots_per_decade)));
  auto segs = mu.radial_segments();
  double s_max = -kInf, b_dom = 0.0, R_dom = 1.0, g = 0.0;
  for (const auto& s : segs) {
    if (s.r_lo == 0.0 && (s.s > s_max || (s.s == s_max && s.beta < b_dom))) {
      s_max = s.s;
      b_dom = s.beta;
      R_dom = s.log_scale;
    }
    if (std::isinf(s.r_hi)) g = std::max(g, pp.n - s.s);
  }
  if (inner == 0.0 && s_max > pp.alpha * pp.p) {
    slope_below_ = (pp.alpha * pp.p - s_max) * e;
    log_exp_below_ = b_dom * e;
    log_scale_below_ = R_dom;
  }
  slope_above_ = -(pp.decay() - g) * e;
  for (int i = 0; i <= m; ++i) {
    double rho = i == m ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / m);
    auto v = wolff(mu, pp, Point::on_axis(pp.n, rho), opts);
    if (!v.finite() || !(v.value > 0.0)) throw UnsupportedError("base potential not positive and finite on the table");
    radii_.push_back(rho);
    values_.push_back(v.value);
  }
  base_ = std::make_shared<const RadialWeight>(radii_, values_, slope_below_, slope_above_, log_exp_below_,
                                               log_scale_below_);
  for (int i = 0; i < m; i += 4) {
    double rho = std::sqrt(radii_[i] * radii_[i + 1]);
    double direct = wolff(mu, pp, Point::on_axis(pp.n, rho), opts).value;
    fit_error_ = std::max(fit_error_, std::abs((*base_)(rho) / direct - 1.0));
  }
}

double BasePotentialTable::interpolate(double rho) const {
  if (!base_) throw UnsupportedError("base potential table has no radial part");
  return (*base_)(rho);
}

std::shared_ptr<const RadialWeight> BasePotentialTable::weight(double exponent) const {
  if (!base_) throw UnsupportedError("base potential table has no radial part");
  std::vector<double> w(values_.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(values_[i], exponent);
  return std::make_shared<const RadialWeight>(radii_, std::move(w), exponent * slope_below_,
                                              exponent * slope_above_, exponent * log_exp_below_, log_scale_below_);
}

MeasureView BasePotentialTable::reweighted(double exponent) const {
  if (exponent == 0.0 || mu_.empty()) return mu_.view();
  MeasureView v;
  v.n = mu_.dim();
  if (radial_) {
    v.radial = std::make_shared<const RadialDensity>(v.n, mu_.radial_segments(), weight(exponent));
    return v;
  }
  v.atoms.assign(mu_.atoms().begin(), mu_.atoms().end());
  for (std::size_t i = 0; i < v.atoms.size(); ++i) v.atoms[i].mass *= std::pow(atom_values_[i], exponent);
  return v;
}

PotentialValue weighted_wolff(const BasePotentialTable& table, double exponent, const Point& x,
                              const PotentialOptions& opts) {
  auto out = wolff(table.reweighted(exponent), table.params(), x, opts);
  if (out.finite() && exponent != 0.0)
    out.abs_error_bound += out.value * std::abs(exponent) * table.fit_error() / (table.params().p - 1.0);
  return out;
}

}  // namespace wk
