#include "wolffkit/radial_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "wolffkit/quadrature.hpp"
#include "wolffkit/special.hpp"

namespace wk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kChunk = 0.5;  // max log-width of one fixed-rule chunk

double segment_value(const RadialSegment& g, double rho) {
  double v = g.c * std::pow(rho, -g.s);
  if (g.beta != 0.0) v *= std::pow(1.0 + std::log(g.log_scale / rho), -g.beta);
  return v;
}

// Gauss-Legendre nodes pushed toward both ends by x = sin(pi y / 2).
const FixedRule& clustered_rule() {
  static const FixedRule rule = [] {
    const FixedRule& g = gauss_legendre(10);
    FixedRule r;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      double a = 0.5 * std::numbers::pi * g.x[i];
      r.x.push_back(std::sin(a));
      r.w.push_back(g.w[i] * 0.5 * std::numbers::pi * std::cos(a));
    }
    return r;
  }();
  return rule;
}

}  // namespace

double RadialSegment::density(double rho) const {
  if (!(rho > r_lo && rho < r_hi)) return 0.0;
  return segment_value(*this, rho);
}

double power_log_integral(double k, double beta, double R, double a, double b) {
  if (!(b > a)) return 0.0;
  if (std::abs(k + 1.0) < 1e-12) k = -1.0;
  if (a == 0.0 && (k < -1.0 || (k == -1.0 && beta <= 1.0))) return kInf;
  if (std::isinf(b)) {
    if (beta != 0.0) throw std::domain_error("power_log_integral: log factor undefined at infinity");
    if (k >= -1.0) return kInf;
  }
  if (beta != 0.0 && !(b < std::numbers::e * R))
    throw std::domain_error("power_log_integral: upper limit beyond e*R");
  double k1 = k + 1.0;
  if (beta == 0.0) {
    if (a == 0.0) return std::pow(b, k1) / k1;
    if (std::isinf(b)) return -std::pow(a, k1) / k1;
    double la = std::log(a), lr = std::log(b) - la;
    if (k1 == 0.0) return lr;
    return std::exp(k1 * la) * std::expm1(k1 * lr) / k1;
  }
  auto L = [R](double r) { return 1.0 + std::log(R / r); };
  if (k == -1.0) {
    double lb = L(b);
    if (a == 0.0) return std::pow(lb, 1.0 - beta) / (beta - 1.0);
    double la = L(a);
    if (beta == 1.0) return std::log(la / lb);
    return (std::pow(la, 1.0 - beta) - std::pow(lb, 1.0 - beta)) / (1.0 - beta);
  }
  QuadOptions opts;
  opts.rel_tol = 1e-12;
  if (a == 0.0) {
    double lb = L(b);
    auto f = [&](double v) { return std::pow(lb - std::log(v) / k1, -beta); };
    const double bp[] = {0.0, 1e-12, 1e-6, 1e-3, 0.1, 1.0};
    return std::pow(b, k1) / k1 * integrate_adaptive(f, bp, opts).value;
  }
  double lR = std::log(R);
  auto f = [&](double u) { return std::exp(k1 * u) * std::pow(1.0 + lR - u, -beta); };
  double ua = std::log(a), ub = std::log(b);
  std::vector<double> bp;
  int m = std::max(1, static_cast<int>(std::ceil((ub - ua) / 2.0)));
  for (int i = 0; i <= m; ++i) bp.push_back(i == m ? ub : ua + (ub - ua) * i / m);
  return integrate_adaptive(f, bp, opts).value;
}

RadialWeight::RadialWeight(std::vector<double> radii, std::vector<double> values, double slope_below,
                           double slope_above, double log_exponent_below, double log_scale_below)
    : radii_(std::move(radii)),
      values_(std::move(values)),
      slope_below_(slope_below),
      slope_above_(slope_above),
      log_exp_below_(log_exponent_below),
      log_scale_below_(log_scale_below) {
  if (log_exp_below_ != 0.0 && !(radii_.front() < std::numbers::e * log_scale_below_))
    throw std::invalid_argument("RadialWeight: log factor needs the first knot below e*R");
  if (radii_.empty() || radii_.size() != values_.size())
    throw std::invalid_argument("RadialWeight: knot and value counts differ");
  for (std::size_t i = 0; i < radii_.size(); ++i) {
    if (!(radii_[i] > 0.0) || !std::isfinite(radii_[i]) || (i > 0 && !(radii_[i] > radii_[i - 1])))
      throw std::invalid_argument("RadialWeight: knots must be positive and increasing");
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i]))
      throw std::invalid_argument("RadialWeight: values must be positive and finite");
    log_r_.push_back(std::log(radii_[i]));
    log_w_.push_back(std::log(values_[i]));
  }
}

KnotStencil RadialWeight::locate_log(double lr) const {
  KnotStencil k;
  if (lr <= log_r_.front()) {
    k.log_extra = slope_below_ * (lr - log_r_.front());
    if (log_exp_below_ != 0.0) {
      double lR = std::log(log_scale_below_);
      k.log_extra -= log_exp_below_ * std::log((1.0 + lR - lr) / (1.0 + lR - log_r_.front()));
    }
    return k;
  }
  if (lr >= log_r_.back()) {
    k.m = log_r_.size() == 1 ? 0 : log_r_.size() - 2;
    k.th = log_r_.size() == 1 ? 0.0 : 1.0;
    k.log_extra = slope_above_ * (lr - log_r_.back());
    return k;
  }
  k.m = std::upper_bound(log_r_.begin(), log_r_.end(), lr) - log_r_.begin() - 1;
  k.th = (lr - log_r_[k.m]) / (log_r_[k.m + 1] - log_r_[k.m]);
  return k;
}

double RadialWeight::log_at(double lr) const {
  KnotStencil k = locate_log(lr);
  double lw = log_w_[k.m];
  if (k.th > 0.0) lw += k.th * (log_w_[k.m + 1] - log_w_[k.m]) + bump(k.m, k.th);
  return lw + k.log_extra;
}

double RadialWeight::operator()(double rho) const { return std::exp(log_at(std::log(rho))); }

RadialWeight RadialWeight::curved(std::vector<double> a, std::vector<double> b) const {
  if (a.size() != b.size() || (!a.empty() && a.size() + 1 != radii_.size()))
    throw std::invalid_argument("RadialWeight: one bump pair per knot interval");
  RadialWeight w = *this;
  w.bump_a_ = std::move(a);
  w.bump_b_ = std::move(b);
  return w;
}

struct RadialDensity::ValueSink {
  const RadialDensity& d;
  double acc = 0.0;
  void weight(double, double lr, double c, double g) { acc += c * std::exp(g + d.log_weight_at(lr)); }
  void prefix(std::size_t j, double c) { acc += c * d.prefix_[j]; }
};

struct RadialDensity::FormSink {
  LinearForm& out;
  void weight(double rho, double, double c, double g) {
    if (c != 0.0) out.weight_terms.emplace_back(rho, c * std::exp(g));
  }
  void prefix(std::size_t j, double c) {
    if (c != 0.0) out.prefix_terms.emplace_back(j, c);
  }
};

double RadialDensity::log_segment(std::size_t i, double lr) const {
  const RadialSegment& g = segs_[i];
  double v = seg_log_c_[i] - g.s * lr;
  if (g.beta != 0.0) v -= g.beta * std::log(1.0 + seg_log_R_[i] - lr);
  return v;
}

template <class Sink>
void RadialDensity::shell_into(double rho, double lr, std::size_t piece, double c, Sink& sink) const {
  const auto& act = active_[piece];
  if (act.size() == 1) {
    sink.weight(rho, lr, c * omega_, n_ * lr + log_segment(act[0], lr));
    return;
  }
  double f = 0.0;
  for (int i : act) f += std::exp(log_segment(i, lr));
  if (f > 0.0) sink.weight(rho, lr, c * omega_ * f, n_ * lr);
}

template <class Sink>
void RadialDensity::generic_shell_into(double rho, double lr, double c, Sink& sink) const {
  double f = 0.0;
  for (std::size_t i = 0; i < segs_.size(); ++i)
    if (rho > segs_[i].r_lo && rho < segs_[i].r_hi) f += std::exp(log_segment(i, lr));
  if (f > 0.0) sink.weight(rho, lr, c * omega_ * f, n_ * lr);
}

template <class Sink>
void RadialDensity::head_into(double a, double b, double c, Sink& sink) const {
  double b0 = breaks_.front(), acc = 0.0;
  double sb = weight_ ? weight_->slope_below() : 0.0;
  double lb = weight_ ? weight_->log_exponent_below() : 0.0;
  double coef = std::pow(b0, -sb);
  if (lb != 0.0) coef *= std::pow(1.0 + std::log(weight_->log_scale_below() / b0), lb);
  for (const auto& g : segs_) {
    if (g.r_lo != 0.0) continue;
    double R = g.log_scale;
    if (lb != 0.0) {
      if (g.beta != 0.0 && R != weight_->log_scale_below())
        throw std::invalid_argument("RadialDensity: weight and segment use different log scales");
      R = weight_->log_scale_below();
    }
    acc += g.c * power_log_integral(n_ - 1 - g.s + sb, g.beta + lb, R, a, b);
  }
  sink.weight(b0, std::log(b0), c * omega_ * coef * acc, 0.0);
}

template <class Sink>
void RadialDensity::tail_into(double a, double b, double c, Sink& sink) const {
  double bl = breaks_.back(), acc = 0.0;
  double sa = weight_ ? weight_->slope_above() : 0.0;
  for (const auto& g : segs_)
    if (std::isinf(g.r_hi)) acc += g.c * power_log_integral(n_ - 1 - g.s + sa, 0.0, g.log_scale, a, b);
  sink.weight(bl, std::log(bl), c * omega_ * std::pow(bl, -sa) * acc, 0.0);
}

template <class Sink>
void RadialDensity::mass_below_into(double rho, double c, Sink& sink) const {
  if (segs_.empty() || !(rho > inner_)) return;
  const double bl = breaks_.back();
  if (rho >= outer_) {
    sink.prefix(breaks_.size() - 1, c);
    if (has_tail_) tail_into(bl, kInf, c, sink);
    return;
  }
  if (rho <= breaks_.front()) {
    head_into(0.0, rho, c, sink);
    return;
  }
  if (rho >= bl) {
    sink.prefix(breaks_.size() - 1, c);
    tail_into(bl, rho, c, sink);
    return;
  }
  std::size_t j = piece_of(rho);
  sink.prefix(j, c);
  if (active_[j].empty() || rho == breaks_[j]) return;
  const FixedRule& gl = gauss_legendre(8);
  double ua = std::log(breaks_[j]), ub = std::log(rho), mid = 0.5 * (ua + ub), h = 0.5 * (ub - ua);
  for (std::size_t i = 0; i < gl.x.size(); ++i) {
    double lr = mid + h * gl.x[i];
    shell_into(std::exp(lr), lr, j, c * h * gl.w[i], sink);
  }
}

template <class Sink>
void RadialDensity::band_into(double lo, double hi, double d, double t, Sink& sink) const {
  lo = std::max(lo, inner_);
  hi = std::min(hi, outer_);
  if (!(hi > lo)) return;
  if (lo == 0.0) {
    lo = hi * 1e-14;
    mass_below_into(lo, 0.5, sink);
  }
  const double band_lo = lo, band_hi = hi;
  const FixedRule& edge = clustered_rule();
  const FixedRule& bulk = gauss_legendre(6);
  const FixedRule& bulk_narrow = gauss_legendre(4);
  auto integrate_piece = [&](double a, double b, std::size_t piece, bool generic) {
    auto emit = [&](double rho, double lr, double c) {
      if (generic)
        generic_shell_into(rho, lr, c, sink);
      else
        shell_into(rho, lr, piece, c, sink);
    };
    double ua = std::log(a), ub = std::log(b);
    int m = std::max(1, static_cast<int>(std::ceil((ub - ua) / kChunk)));
    for (int i = 0; i < m; ++i) {
      double ca = i == 0 ? a : a * std::exp((ub - ua) * i / m);
      double cb = i + 1 == m ? b : a * std::exp((ub - ua) * (i + 1) / m);
      bool at_edge = (i == 0 && a == band_lo) || (i + 1 == m && b == band_hi);
      const FixedRule& rule = at_edge ? edge : (std::log(cb / ca) <= 0.15 ? bulk_narrow : bulk);
      // narrow chunks take nodes in rho itself to keep full relative resolution
      const bool narrow = cb < 1.5 * ca;
      double xa = narrow ? ca : std::log(ca), xb = narrow ? cb : std::log(cb);
      double mid = 0.5 * (xa + xb), h = 0.5 * (xb - xa);
      for (std::size_t k = 0; k < rule.x.size(); ++k) {
        double x = mid + h * rule.x[k];
        double rho = narrow ? x : std::exp(x);
        double f = shell_fraction_in_ball(n_, rho, d, t);
        if (f != 0.0) emit(rho, narrow ? std::log(rho) : x, h * rule.w[k] * f * (narrow ? 1.0 / rho : 1.0));
      }
    }
  };
  double a = lo;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), lo);
  while (a < hi) {
    double b = (it != breaks_.end() && *it < hi) ? *it : hi;
    if (b <= breaks_.front() || a >= breaks_.back()) {
      integrate_piece(a, b, 0, true);
    } else {
      std::size_t j = piece_of(0.5 * (a + b));
      if (!active_[j].empty()) integrate_piece(a, b, j, false);
    }
    a = b;
    if (it != breaks_.end()) ++it;
  }
}

template <class Sink>
void RadialDensity::ball_mass_into(double d, double t, Sink& sink) const {
  if (segs_.empty() || !(t > 0.0)) return;
  if (d == 0.0) {
    mass_below_into(t, 1.0, sink);
    return;
  }
  if (std::isfinite(outer_) && t >= d + outer_) {
    mass_below_into(outer_, 1.0, sink);
    return;
  }
  if (t > d) mass_below_into(t - d, 1.0, sink);
  band_into(std::abs(t - d), t + d, d, t, sink);
}

RadialDensity::RadialDensity(int n, std::vector<RadialSegment> segments, std::shared_ptr<const RadialWeight> weight,
                             double pieces_per_decade)
    : n_(n), omega_(sphere_area(n)), segs_(std::move(segments)), weight_(std::move(weight)) {
  for (const auto& g : segs_) {
    seg_log_c_.push_back(std::log(g.c));
    seg_log_R_.push_back(std::log(g.log_scale));
  }
  if (segs_.empty()) return;
  inner_ = kInf;
  outer_ = 0.0;
  std::vector<double> exact, grid;
  for (const auto& g : segs_) {
    inner_ = std::min(inner_, g.r_lo);
    outer_ = std::max(outer_, g.r_hi);
    if (g.r_lo > 0.0) exact.push_back(g.r_lo);
    if (std::isfinite(g.r_hi)) exact.push_back(g.r_hi);
    double lo = g.r_lo > 0.0 ? g.r_lo : (std::isfinite(g.r_hi) ? g.r_hi : 1.0) * 1e-12;
    double hi = std::isfinite(g.r_hi) ? g.r_hi : std::max(g.r_lo, 1.0) * 1e8;
    int m = std::max(1, static_cast<int>(std::ceil(std::log10(hi / lo) * pieces_per_decade)));
    for (int i = 0; i <= m; ++i) grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / m));
  }
  if (weight_)
    for (double r : weight_->radii())
      if (r > inner_ && r < outer_) grid.push_back(r);
  std::sort(exact.begin(), exact.end());
  for (double r : grid) {
    auto it = std::lower_bound(exact.begin(), exact.end(), r);
    bool near = (it != exact.end() && std::abs(*it - r) <= 1e-9 * r) ||
                (it != exact.begin() && std::abs(*(it - 1) - r) <= 1e-9 * r);
    if (!near) breaks_.push_back(r);
  }
  breaks_.insert(breaks_.end(), exact.begin(), exact.end());
  std::sort(breaks_.begin(), breaks_.end());
  breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
  has_head_ = inner_ == 0.0;
  has_tail_ = std::isinf(outer_);

  active_.resize(breaks_.size() - 1);
  for (std::size_t j = 0; j + 1 < breaks_.size(); ++j)
    for (std::size_t i = 0; i < segs_.size(); ++i)
      if (segs_[i].r_lo <= breaks_[j] && segs_[i].r_hi >= breaks_[j + 1]) active_[j].push_back(static_cast<int>(i));

  const FixedRule& gl = gauss_legendre(8);
  std::vector<double> pieces(breaks_.size() - 1, 0.0);
  for (std::size_t j = 0; j + 1 < breaks_.size(); ++j) {
    if (active_[j].empty()) continue;
    ValueSink sink{*this};
    double ua = std::log(breaks_[j]), ub = std::log(breaks_[j + 1]), mid = 0.5 * (ua + ub), h = 0.5 * (ub - ua);
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      double lr = mid + h * gl.x[i];
      shell_into(std::exp(lr), lr, j, h * gl.w[i], sink);
    }
    pieces[j] = sink.acc;
  }
  prefix_.assign(breaks_.size(), 0.0);
  prefix_[0] = has_head_ ? head_mass(breaks_[0]) : 0.0;
  for (std::size_t j = 0; j + 1 < breaks_.size(); ++j) prefix_[j + 1] = prefix_[j] + pieces[j];
  suffix_.assign(breaks_.size(), 0.0);
  suffix_.back() = has_tail_ ? tail_mass(breaks_.back()) : 0.0;
  for (std::size_t j = breaks_.size() - 1; j-- > 0;) suffix_[j] = suffix_[j + 1] + pieces[j];
  total_ = prefix_.back() + suffix_.back();
}

double RadialDensity::density(double rho) const {
  double f = 0.0;
  for (const auto& g : segs_) f += g.density(rho);
  if (weight_ && f > 0.0) f *= (*weight_)(rho);
  return f;
}

double RadialDensity::head_mass(double rho) const {
  ValueSink sink{*this};
  head_into(0.0, rho, 1.0, sink);
  return sink.acc;
}

double RadialDensity::tail_mass(double rho) const {
  ValueSink sink{*this};
  tail_into(rho, kInf, 1.0, sink);
  return sink.acc;
}

std::size_t RadialDensity::piece_of(double rho) const {
  std::size_t j = std::upper_bound(breaks_.begin(), breaks_.end(), rho) - breaks_.begin();
  j = j == 0 ? 0 : j - 1;
  return std::min(j, breaks_.size() - 2);
}

double RadialDensity::mass_below(double rho) const {
  ValueSink sink{*this};
  mass_below_into(rho, 1.0, sink);
  return sink.acc;
}

double RadialDensity::mass_above(double rho) const {
  if (segs_.empty() || rho >= outer_) return 0.0;
  if (!(rho > inner_)) return suffix_.front();
  if (rho >= breaks_.back()) return has_tail_ ? tail_mass(rho) : 0.0;
  ValueSink sink{*this};
  if (rho <= breaks_.front()) {
    head_into(rho, breaks_.front(), 1.0, sink);
    return suffix_.front() + sink.acc;
  }
  std::size_t j = piece_of(rho);
  if (active_[j].empty() || rho == breaks_[j + 1]) return suffix_[j + 1];
  const FixedRule& gl = gauss_legendre(8);
  double ua = std::log(rho), ub = std::log(breaks_[j + 1]), mid = 0.5 * (ua + ub), h = 0.5 * (ub - ua);
  for (std::size_t i = 0; i < gl.x.size(); ++i) {
    double lr = mid + h * gl.x[i];
    shell_into(std::exp(lr), lr, j, h * gl.w[i], sink);
  }
  return suffix_[j + 1] + sink.acc;
}

double RadialDensity::ball_mass(double d, double t) const {
  ValueSink sink{*this};
  ball_mass_into(d, t, sink);
  return sink.acc;
}

void RadialDensity::ball_mass_form(double d, double t, LinearForm& out) const {
  out.weight_terms.clear();
  out.prefix_terms.clear();
  FormSink sink{out};
  ball_mass_into(d, t, sink);
}

std::vector<double> RadialDensity::jump_radii() const {
  std::vector<double> r;
  for (const auto& g : segs_) {
    if (g.r_lo > 0.0) r.push_back(g.r_lo);
    if (std::isfinite(g.r_hi)) r.push_back(g.r_hi);
  }
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

std::vector<OriginTerm> RadialDensity::origin_terms() const {
  std::vector<OriginTerm> out;
  double sb = weight_ ? weight_->slope_below() : 0.0;
  double lb = weight_ ? weight_->log_exponent_below() : 0.0;
  for (const auto& g : segs_)
    if (g.r_lo == 0.0) out.push_back({g.s - sb, g.beta + lb, lb != 0.0 ? weight_->log_scale_below() : g.log_scale});
  return out;
}

std::vector<double> RadialDensity::tail_exponents() const {
  std::vector<double> out;
  double sa = weight_ ? weight_->slope_above() : 0.0;
  for (const auto& g : segs_)
    if (std::isinf(g.r_hi)) out.push_back(g.s - sa);
  return out;
}

}  // namespace wk
