#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wolffkit/radial_density.hpp"

namespace wk {

struct Point {
  std::vector<double> coords;

  Point() = default;
  explicit Point(std::vector<double> c) : coords(std::move(c)) {}
  // The point (r, 0, ..., 0) in R^n.
  static Point on_axis(int n, double r);

  std::size_t dim() const { return coords.size(); }
  double norm() const;
};

double distance(const Point& a, const Point& b);

// Mass spread uniformly over the closed ball B(center, radius).
struct MollifiedAtom {
  Point center;
  double mass = 1.0;
  double radius = 1.0;
};

// t -> sigma(B(x, t)) for one fixed x.
class MassProfile {
 public:
  MassProfile(int n, std::shared_ptr<const RadialDensity> radial, std::span<const MollifiedAtom> atoms,
              const Point& x);

  double operator()(double t) const;
  double total() const { return total_; }
  // Largest t with zero mass, and smallest t capturing the total (inf for unbounded support).
  double contact() const { return contact_; }
  double saturation() const { return saturation_; }
  // Radii where t -> mass loses smoothness.
  std::vector<double> kinks() const;
  double origin_distance() const { return d_; }
  const RadialDensity* radial() const { return radial_.get(); }

 private:
  struct AtomAt {
    double dist, radius, mass;
  };
  int n_;
  std::shared_ptr<const RadialDensity> radial_;
  std::vector<AtomAt> atoms_;
  double d_ = 0.0, total_ = 0.0, contact_ = 0.0, saturation_ = 0.0;
};

// Radial part and atoms as seen by the potential code; the radial part may carry a weight.
struct MeasureView {
  int n = 1;
  std::shared_ptr<const RadialDensity> radial;
  std::vector<MollifiedAtom> atoms;

  MassProfile profile(const Point& x) const { return MassProfile(n, radial, atoms, x); }
  bool empty() const;
};

class Measure {
 public:
  explicit Measure(int n, std::vector<RadialSegment> segments = {}, std::vector<MollifiedAtom> atoms = {});

  int dim() const { return n_; }
  std::span<const RadialSegment> segments() const { return segments_; }
  std::span<const MollifiedAtom> atoms() const { return atoms_; }
  bool empty() const { return segments_.empty() && atoms_.empty(); }
  // True when every atom is centered at the origin.
  bool is_radial() const;
  double total_mass() const;
  // sup |y| over the support (inf if unbounded) and inf |y| over it.
  double support_radius() const;
  double inner_radius() const;

  double ball_mass(const Point& x, double t) const;
  // ∫_{|y|<rho} |y|^{-e} dsigma and ∫_{|y|>=rho} |y|^{-e} dsigma; +inf when divergent.
  double radial_moment_below(double rho, double e) const;
  double radial_moment_above(double rho, double e) const;

  Measure scaled(double lambda) const;
  Measure translated(const Point& shift) const;
  Measure restricted_to_ball(const Point& center, double radius) const;
  // Segments plus centered atoms rewritten as uniform segments.
  std::vector<RadialSegment> radial_segments() const;

  MassProfile profile(const Point& x) const { return view_.profile(x); }
  const MeasureView& view() const { return view_; }

 private:
  void check_point(const Point& x) const;

  int n_;
  std::vector<RadialSegment> segments_;
  std::vector<MollifiedAtom> atoms_;
  MeasureView view_;
};

Measure make_mollified_atom(int n, double mass, double radius, const Point& center = {});
// Lebesgue measure restricted to B(0, radius).
Measure make_lebesgue_ball(int n, double radius = 1.0);

Measure measure_from_json(const std::string& text);
std::string measure_to_json(const Measure& mu);

}  // namespace wk
