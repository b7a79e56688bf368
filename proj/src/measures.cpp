#include "wolffkit/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wolffkit/errors.hpp"
#include "wolffkit/special.hpp"

namespace wk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool at_origin(const Point& p) {
  return std::all_of(p.coords.begin(), p.coords.end(), [](double v) { return v == 0.0; });
}

RadialSegment uniform_segment(int n, const MollifiedAtom& a) {
  RadialSegment g;
  g.c = a.mass / (unit_ball_volume(n) * std::pow(a.radius, n));
  g.s = 0.0;
  g.beta = 0.0;
  g.r_lo = 0.0;
  g.r_hi = a.radius;
  g.log_scale = 1.0;
  return g;
}

void validate_segment(int n, const RadialSegment& g) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(g.c > 0.0) || !finite(g.c)) throw InputError("radial segment: c must be positive and finite");
  if (!finite(g.s) || !finite(g.beta)) throw InputError("radial segment: s and beta must be finite");
  if (!(g.r_lo >= 0.0) || !finite(g.r_lo) || !(g.r_hi > g.r_lo))
    throw InputError("radial segment: need 0 <= r_lo < r_hi");
  if (!(g.log_scale > 0.0) || !finite(g.log_scale)) throw InputError("radial segment: log_scale must be positive");
  if (g.beta != 0.0 && !(g.r_hi < std::numbers::e * g.log_scale))
    throw InputError("radial segment: beta != 0 needs r_hi < e*log_scale so the logarithm stays positive");
  if (g.r_lo == 0.0 && (g.s > n || (g.s == n && g.beta <= 1.0)))
    throw InputError("radial segment: mass near the origin is infinite");
}

}  // namespace

Point Point::on_axis(int n, double r) {
  std::vector<double> c(static_cast<std::size_t>(n), 0.0);
  c[0] = r;
  return Point(std::move(c));
}

double Point::norm() const {
  double s = 0.0;
  for (double v : coords) s += v * v;
  return std::sqrt(s);
}

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    double v = a.coords[i] - b.coords[i];
    s += v * v;
  }
  return std::sqrt(s);
}

MassProfile::MassProfile(int n, std::shared_ptr<const RadialDensity> radial, std::span<const MollifiedAtom> atoms,
                         const Point& x)
    : n_(n), radial_(std::move(radial)), d_(x.norm()) {
  contact_ = kInf;
  saturation_ = 0.0;
  if (radial_ && !radial_->segments().empty()) {
    double in = radial_->inner_radius(), out = radial_->outer_radius();
    contact_ = d_ > out ? d_ - out : (d_ < in ? in - d_ : 0.0);
    saturation_ = d_ + out;
    total_ += radial_->total_mass();
  } else {
    radial_.reset();
  }
  for (const auto& a : atoms) {
    double dist = distance(a.center, x);
    atoms_.push_back({dist, a.radius, a.mass});
    contact_ = std::min(contact_, std::max(0.0, dist - a.radius));
    saturation_ = std::max(saturation_, dist + a.radius);
    total_ += a.mass;
  }
}

double MassProfile::operator()(double t) const {
  if (!(t > 0.0)) return 0.0;
  double m = radial_ ? radial_->ball_mass(d_, t) : 0.0;
  for (const auto& a : atoms_) m += a.mass * lens_fraction(n_, a.radius, a.dist, t);
  return m;
}

std::vector<double> MassProfile::kinks() const {
  std::vector<double> k;
  auto add = [&](double v) {
    if (v > 0.0 && std::isfinite(v)) k.push_back(v);
  };
  if (radial_) {
    for (double r : radial_->jump_radii()) {
      add(std::abs(d_ - r));
      add(d_ + r);
    }
    if (radial_->inner_radius() == 0.0) add(d_);
  }
  for (const auto& a : atoms_) {
    add(std::abs(a.dist - a.radius));
    add(a.dist + a.radius);
  }
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

bool MeasureView::empty() const { return (!radial || radial->segments().empty()) && atoms.empty(); }

Measure::Measure(int n, std::vector<RadialSegment> segments, std::vector<MollifiedAtom> atoms)
    : n_(n), segments_(std::move(segments)), atoms_(std::move(atoms)) {
  if (n < 1) throw InputError("measure: dimension n must be >= 1");
  for (const auto& g : segments_) validate_segment(n, g);
  for (const auto& a : atoms_) {
    if (a.center.dim() != static_cast<std::size_t>(n)) throw InputError("atom: center dimension differs from n");
    for (double v : a.center.coords)
      if (!std::isfinite(v)) throw InputError("atom: center coordinates must be finite");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass)) throw InputError("atom: mass must be positive and finite");
    if (!(a.radius > 0.0) || !std::isfinite(a.radius)) throw InputError("atom: radius must be positive and finite");
  }
  view_.n = n;
  if (!segments_.empty()) view_.radial = std::make_shared<const RadialDensity>(n, segments_);
  view_.atoms = atoms_;
}

bool Measure::is_radial() const {
  return std::all_of(atoms_.begin(), atoms_.end(), [](const MollifiedAtom& a) { return at_origin(a.center); });
}

double Measure::total_mass() const {
  double m = view_.radial ? view_.radial->total_mass() : 0.0;
  for (const auto& a : atoms_) m += a.mass;
  return m;
}

double Measure::support_radius() const {
  double r = 0.0;
  for (const auto& g : segments_) r = std::max(r, g.r_hi);
  for (const auto& a : atoms_) r = std::max(r, a.center.norm() + a.radius);
  return r;
}

double Measure::inner_radius() const {
  double r = kInf;
  for (const auto& g : segments_) r = std::min(r, g.r_lo);
  for (const auto& a : atoms_) r = std::min(r, std::max(0.0, a.center.norm() - a.radius));
  return empty() ? 0.0 : r;
}

void Measure::check_point(const Point& x) const {
  if (x.dim() != static_cast<std::size_t>(n_)) throw InputError("point dimension differs from measure dimension");
  for (double v : x.coords)
    if (!std::isfinite(v)) throw InputError("point coordinates must be finite");
}

double Measure::ball_mass(const Point& x, double t) const {
  check_point(x);
  if (!std::isfinite(t) || !(t > 0.0)) throw InputError("ball_mass: radius t must be positive and finite");
  return view_.profile(x)(t);
}

std::vector<RadialSegment> Measure::radial_segments() const {
  if (!is_radial()) throw UnsupportedError("operation needs a radial measure (all atoms centered at the origin)");
  std::vector<RadialSegment> out = segments_;
  for (const auto& a : atoms_) out.push_back(uniform_segment(n_, a));
  return out;
}

double Measure::radial_moment_below(double rho, double e) const {
  if (!(rho > 0.0) || !std::isfinite(e)) throw InputError("radial moment: need rho > 0 and finite exponent");
  double acc = 0.0;
  for (const auto& g : radial_segments()) {
    if (!(rho > g.r_lo)) continue;
    acc += g.c * power_log_integral(n_ - 1 - g.s - e, g.beta, g.log_scale, g.r_lo, std::min(rho, g.r_hi));
  }
  return sphere_area(n_) * acc;
}

double Measure::radial_moment_above(double rho, double e) const {
  if (!(rho > 0.0) || !std::isfinite(e)) throw InputError("radial moment: need rho > 0 and finite exponent");
  double acc = 0.0;
  for (const auto& g : radial_segments()) {
    if (!(g.r_hi > rho)) continue;
    acc += g.c * power_log_integral(n_ - 1 - g.s - e, g.beta, g.log_scale, std::max(rho, g.r_lo), g.r_hi);
  }
  return sphere_area(n_) * acc;
}

Measure Measure::scaled(double lambda) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("scale factor must be positive and finite");
  auto segs = segments_;
  for (auto& g : segs) g.c *= lambda;
  auto atoms = atoms_;
  for (auto& a : atoms) a.mass *= lambda;
  return Measure(n_, std::move(segs), std::move(atoms));
}

Measure Measure::translated(const Point& shift) const {
  check_point(shift);
  if (!segments_.empty()) throw UnsupportedError("translation is defined for purely atomic measures");
  auto atoms = atoms_;
  for (auto& a : atoms)
    for (std::size_t i = 0; i < a.center.coords.size(); ++i) a.center.coords[i] += shift.coords[i];
  return Measure(n_, {}, std::move(atoms));
}

Measure Measure::restricted_to_ball(const Point& center, double radius) const {
  check_point(center);
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InputError("restriction radius must be positive and finite");
  bool centered = at_origin(center);
  std::vector<RadialSegment> segs;
  for (auto g : segments_) {
    if (centered) {
      if (!(radius > g.r_lo)) continue;
      g.r_hi = std::min(g.r_hi, radius);
      segs.push_back(g);
      continue;
    }
    double c = center.norm();
    double gap = c > g.r_hi ? c - g.r_hi : (c < g.r_lo ? g.r_lo - c : 0.0);
    if (gap >= radius) continue;
    if (c + g.r_hi <= radius) {
      segs.push_back(g);
      continue;
    }
    throw UnsupportedError("restriction of a radial segment to an off-center ball that cuts it");
  }
  std::vector<MollifiedAtom> atoms;
  for (auto a : atoms_) {
    double dist = distance(a.center, center);
    if (dist + a.radius <= radius) {
      atoms.push_back(a);
    } else if (dist < radius + a.radius) {
      if (dist != 0.0) throw UnsupportedError("restriction of a mollified atom to a ball that cuts it off-center");
      a.mass *= std::pow(radius / a.radius, n_);
      a.radius = radius;
      atoms.push_back(a);
    }
  }
  return Measure(n_, std::move(segs), std::move(atoms));
}

Measure make_mollified_atom(int n, double mass, double radius, const Point& center) {
  Point c = center.dim() == 0 ? Point(std::vector<double>(static_cast<std::size_t>(std::max(n, 1)), 0.0)) : center;
  return Measure(n, {}, {MollifiedAtom{c, mass, radius}});
}

Measure make_lebesgue_ball(int n, double radius) {
  RadialSegment g;
  g.c = 1.0;
  g.s = 0.0;
  g.beta = 0.0;
  g.r_lo = 0.0;
  g.r_hi = radius;
  return Measure(n, {g}, {});
}

}  // namespace wk
