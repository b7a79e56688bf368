#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "wolffkit/errors.hpp"
#include "wolffkit/measures.hpp"
#include "wolffkit/radial.hpp"

using namespace wk;
using oracle::pi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RadialSegment seg(double c, double s, double lo, double hi, double beta = 0.0, double log_scale = 1.0) {
  RadialSegment g;
  g.c = c;
  g.s = s;
  g.r_lo = lo;
  g.r_hi = hi;
  g.beta = beta;
  g.log_scale = log_scale;
  return g;
}

}  // namespace

TEST_CASE("ball mass of a concentric mollified atom") {
  Measure mu = make_mollified_atom(3, 1.0, 1.0);
  Point o = Point::on_axis(3, 0.0);
  CHECK(mu.ball_mass(o, 0.5) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(mu.ball_mass(o, 2.0) == 1.0);
}

TEST_CASE("ball mass of an off-center atom matches the lens volume") {
  Measure mu = make_mollified_atom(3, 2.0, 0.3, Point({0.5, 0.2, -0.1}));
  Point x({0.1, 0.0, 0.3});
  double d = distance(x, Point({0.5, 0.2, -0.1}));
  for (double t : {0.1, 0.4, 0.6, 1.0}) {
    double want = 2.0 * oracle::lens_volume_3d(t, 0.3, d) / (4 * pi / 3 * 0.027);
    CHECK(oracle::close(mu.ball_mass(x, t), want, 1e-11, 1e-14));
  }
}

TEST_CASE("ball mass of a power-law segment against Monte Carlo") {
  // |y|^{-1.5} on (0, 1) in R^3, x at distance 0.3, t = 0.2: the ball misses the origin.
  Measure mu(3, {seg(1.0, 1.5, 0.0, 1.0)});
  const double d = 0.3, t = 0.2;
  std::mt19937_64 gen(12345);
  std::uniform_real_distribution<double> u(-1, 1);
  const int N = 2000000;
  double sum = 0, sum2 = 0;
  int drawn = 0;
  while (drawn < N) {
    double a = u(gen), b = u(gen), c = u(gen);
    if (a * a + b * b + c * c >= 1) continue;
    ++drawn;
    double y0 = d + t * a, y1 = t * b, y2 = t * c;
    double r = std::sqrt(y0 * y0 + y1 * y1 + y2 * y2);
    double f = r < 1 ? std::pow(r, -1.5) : 0.0;
    sum += f;
    sum2 += f * f;
  }
  double vol = 4 * pi / 3 * t * t * t;
  double mean = sum / N, var = sum2 / N - mean * mean;
  double est = vol * mean, se = vol * std::sqrt(var / N);
  CHECK(std::abs(mu.ball_mass(Point::on_axis(3, d), t) - est) < 3 * se);
}

TEST_CASE("ball mass of a radial segment against shell integration") {
  // Independent: integrate 4 pi rho^2 f(rho) times the Archimedes fraction.
  Measure mu(3, {seg(2.0, 0.7, 0.1, 1.2)});
  for (double d : {0.0, 0.05, 0.5, 2.0})
    for (double t : {0.08, 0.3, 0.9, 2.5}) {
      auto f = [&](double rho) {
        return 4 * pi * rho * rho * 2.0 * std::pow(rho, -0.7) * oracle::shell_fraction_3d(rho, d, t);
      };
      double want = 0;
      if (d == 0.0) {
        double b = std::min(t, 1.2);
        want = b > 0.1 ? 8 * pi / 2.3 * (std::pow(b, 2.3) - std::pow(0.1, 2.3)) : 0.0;
        CHECK(mu.ball_mass(Point::on_axis(3, d), t) == doctest::Approx(want).epsilon(1e-12));
        continue;
      }
      // split at the kinks of the fraction
      double cuts[] = {0.1, std::clamp(std::abs(d - t), 0.1, 1.2), std::clamp(d + t, 0.1, 1.2), 1.2};
      std::sort(std::begin(cuts), std::end(cuts));
      for (int i = 0; i < 3; ++i)
        if (cuts[i + 1] > cuts[i]) want += oracle::simpson(f, cuts[i], cuts[i + 1], 4000);
      CHECK(oracle::close(mu.ball_mass(Point::on_axis(3, d), t), want, 1e-8, 1e-12));
    }
}

TEST_CASE("ball mass is nondecreasing in t and converges to the total") {
  Measure mu(3, {seg(1.0, 1.5, 0.0, 1.0), seg(0.5, 0.0, 2.0, 3.0)},
             {MollifiedAtom{Point({1.0, 1.0, 0.0}), 0.7, 0.2}});
  for (double d : {0.0, 0.4, 1.7}) {
    Point x({d, 0.3 * d, 0.0});
    double prev = 0.0;
    for (double t = 1e-4; t < 20; t *= 1.1) {
      double m = mu.ball_mass(x, t);
      CHECK(m >= 0.0);
      CHECK(m >= prev - 1e-12 * mu.total_mass());
      prev = m;
    }
    CHECK(mu.ball_mass(x, 1e3) == doctest::Approx(mu.total_mass()).epsilon(1e-12));
  }
  double total = 4 * pi * (1.0 / 1.5) + 0.5 * 4 * pi / 3 * (27 - 8) + 0.7;
  CHECK(mu.total_mass() == doctest::Approx(total).epsilon(1e-13));
}

TEST_CASE("ball mass of atoms is translation consistent") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    Point c({u(gen), u(gen), u(gen)}), x({u(gen), u(gen), u(gen)}), s({u(gen), u(gen), u(gen)});
    Measure a = make_mollified_atom(3, 1.3, 0.4, c);
    Measure b = a.translated(s);
    Point xs({x.coords[0] + s.coords[0], x.coords[1] + s.coords[1], x.coords[2] + s.coords[2]});
    for (double t : {0.1, 0.5, 1.0, 3.0})
      CHECK(oracle::close(b.ball_mass(xs, t), a.ball_mass(x, t), 1e-12, 1e-15));
  }
}

TEST_CASE("open versus closed balls: t perturbed by 1e-12 moves the mass by O(1e-12)") {
  Measure mu(3, {seg(1.0, 1.5, 0.0, 1.0)}, {MollifiedAtom{Point({0.5, 0.0, 0.0}), 1.0, 0.1}});
  for (double t : {0.3, 0.4, 0.6, 1.0}) {
    Point x = Point::on_axis(3, 0.2);
    CHECK(std::abs(mu.ball_mass(x, t + 1e-12) - mu.ball_mass(x, t - 1e-12)) < 1e-9);
  }
}

TEST_CASE("ball mass rejects bad input") {
  Measure mu = make_mollified_atom(3, 1.0, 1.0);
  CHECK_THROWS_AS(mu.ball_mass(Point::on_axis(3, 0.0), kInf), InputError);
  CHECK_THROWS_AS(mu.ball_mass(Point::on_axis(3, 0.0), std::nan("")), InputError);
  CHECK_THROWS_AS(mu.ball_mass(Point::on_axis(2, 0.0), 1.0), InputError);
}

TEST_CASE("measure construction rejects invalid components") {
  CHECK_THROWS_AS(Measure(0), InputError);
  CHECK_THROWS_AS(Measure(3, {seg(1.0, 3.0, 0.0, 1.0)}), InputError);  // mass at 0 infinite
  CHECK_THROWS_AS(Measure(3, {seg(1.0, 1.0, 1.0, 0.5)}), InputError);
  CHECK_THROWS_AS(Measure(3, {}, {MollifiedAtom{Point({0.0, 0.0}), 1.0, 0.1}}), InputError);
  CHECK_THROWS_AS(make_mollified_atom(3, 1.0, 0.0), InputError);
  CHECK_NOTHROW(Measure(3, {seg(1.0, 3.0, 0.0, 0.5, 2.0, std::exp(-1.0))}));
}

TEST_CASE("radial moments: closed forms") {
  SUBCASE("log-corrected counterexample density below e^-10") {
    Measure ce = make_counterexample(3, 1.0, 0.5, 2.0);
    // 4 pi ∫_0^rho r^{-1} log^{-2}(1/r) dr = 4 pi / log(1/rho)
    CHECK(ce.radial_moment_below(std::exp(-10.0), 1.0) == doctest::Approx(4 * pi / 10).epsilon(1e-10));
  }
  SUBCASE("power law, e = 1, below 1/4") {
    Measure pl = make_powerlaw_example(3, 1.0, 0.5, 1.5);
    CHECK(pl.radial_moment_below(0.25, 1.0) == doctest::Approx(4 * pi).epsilon(1e-12));
  }
  SUBCASE("power law, e = 2, above 0.01") {
    Measure pl = make_powerlaw_example(3, 1.0, 0.5, 1.5);
    CHECK(pl.radial_moment_above(0.01, 2.0) == doctest::Approx(4 * pi * 18).epsilon(1e-12));
  }
  SUBCASE("no support above the radius") {
    Measure ce = make_counterexample(3, 1.0, 0.5, 2.0);
    CHECK(ce.radial_moment_above(0.5, 2.0) == 0.0);
    CHECK(ce.radial_moment_above(0.7, 1.0) == 0.0);
  }
  SUBCASE("divergence is exact") {
    Measure lebesgue_all(3, {seg(1.0, 0.0, 0.0, kInf)});
    CHECK(lebesgue_all.radial_moment_above(1.0, 1.0) == kInf);
    Measure pl = make_powerlaw_example(3, 1.0, 0.5, 1.5);
    CHECK(pl.radial_moment_below(0.5, 1.5) == kInf);  // r^{-1} at the origin
    CHECK(std::isfinite(pl.radial_moment_below(0.5, 1.49)));
  }
}

TEST_CASE("radial moments with a generic log factor against quadrature") {
  // density r^{-1.2} log(e * 2 / r)^{-0.7} on (0, 1.5); generic exponent goes through quadrature
  Measure mu(3, {seg(1.0, 1.2, 0.0, 1.5, 0.7, 2.0)});
  auto f = [](double e) {
    return [e](double r) { return 4 * pi * r * r * std::pow(r, -1.2 - e) * std::pow(std::log(2 * std::exp(1.0) / r), -0.7); };
  };
  for (double e : {0.0, 0.5, 1.1}) {
    double below = oracle::simpson_log(f(e), 1e-14, 0.3, 200000);
    double above = oracle::simpson_log(f(e), 0.3, 1.5, 20000);
    CHECK(mu.radial_moment_below(0.3, e) == doctest::Approx(below).epsilon(1e-6));
    CHECK(mu.radial_moment_above(0.3, e) == doctest::Approx(above).epsilon(1e-7));
  }
}

TEST_CASE("moments below and above with e = 0 add up to the total mass") {
  std::vector<Measure> ms = {make_powerlaw_example(3, 1.0, 0.5, 1.5), make_counterexample(3, 1.0, 0.5, 2.0),
                             make_lebesgue_ball(4, 2.0), Measure(3, {seg(1.0, 1.2, 0.0, 1.5, 0.7, 2.0)}),
                             make_mollified_atom(3, 2.0, 0.5)};
  for (const auto& mu : ms)
    for (double rho : {1e-3, 0.2, 0.45, 1.0}) {
      double s = mu.radial_moment_below(rho, 0.0) + mu.radial_moment_above(rho, 0.0);
      CHECK(s == doctest::Approx(mu.total_mass()).epsilon(1e-6));
    }
  Measure pl = make_powerlaw_example(3, 1.0, 0.5, 1.5);
  CHECK(pl.radial_moment_below(0.3, 0.0) + pl.radial_moment_above(0.3, 0.0) ==
        doctest::Approx(pl.total_mass()).epsilon(1e-10));
}

TEST_CASE("scaled and restricted measures") {
  Measure pl = make_powerlaw_example(3, 1.0, 0.5, 1.5);
  Point x = Point::on_axis(3, 0.3);
  CHECK(pl.scaled(4.0).ball_mass(x, 0.5) == doctest::Approx(4.0 * pl.ball_mass(x, 0.5)).epsilon(1e-14));
  Measure r = pl.restricted_to_ball(Point::on_axis(3, 0.0), 0.25);
  CHECK(r.total_mass() == doctest::Approx(pl.ball_mass(Point::on_axis(3, 0.0), 0.25)).epsilon(1e-12));
  CHECK(r.support_radius() == doctest::Approx(0.25));
}
