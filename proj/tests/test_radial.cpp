#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "wolffkit/errors.hpp"
#include "wolffkit/radial.hpp"

using namespace wk;
using oracle::pi;

namespace {

constexpr double omega = 4 * pi;

Measure powerlaw() { return make_powerlaw_example(3, 1.0, 0.5, 1.5); }
Measure counterexample() { return make_counterexample(3, 1.0, 0.5, 2.0); }
Measure annulus() { return Measure(3, {RadialSegment{1.0, 0.0, 0.0, 0.5, 1.0, 1.0}}); }

// |y|^{-2} log^{-2}(1/|y|) on |y| < 1/2, as a function of the radius
double ce_density(double t) { return 1.0 / (t * t * std::pow(std::log(1 / t), 2)); }

// Largest relative gap between the published u and one more application of the model operator.
double offnode_gap(const SolutionField& u, const Measure& mu, const PotentialParams& pp, double lo, double hi) {
  double worst = 0;
  for (double rho = lo; rho < hi; rho *= 1.13) {
    double v = u.value_at(rho);
    worst = std::max(worst, std::abs(radial_model_value(mu, pp, u.interpolant.get(), rho) - v) / v);
  }
  return worst;
}

}  // namespace

TEST_CASE("model kernel") {
  CHECK(model_kernel(1.0, 1.0, 3, 1.0) == 1.0);
  // max(2, 0.5)^{-(3 - 1)} and max(2, 0.5)^{-(3 - 2)}
  CHECK(model_kernel(2.0, 0.5, 3, 1.0) == 0.25);
  CHECK(model_kernel(2.0, 0.5, 3, 2.0) == 0.5);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-6, 2);
  for (int i = 0; i < 200; ++i) {
    double a = std::pow(10.0, u(gen)), b = std::pow(10.0, u(gen));
    CHECK(model_kernel(a, b, 5, 1.3) == model_kernel(b, a, 5, 1.3));
  }
}

TEST_CASE("kernel consistency: the model operator on u = 1 splits at rho") {
  auto pp = PotentialParams::riesz(3, 1.0);
  for (double rho : {1e-4, 0.03, 0.5, 0.99, 3.0}) {
    // power law: mass 4 pi rho^{3/2} / 1.5, tail 8 pi (rho^{-1/2} - 1)
    double m = 4 * pi * std::pow(std::min(rho, 1.0), 1.5) / 1.5;
    double t = rho < 1 ? 8 * pi * (std::pow(rho, -0.5) - 1) : 0.0;
    CHECK(radial_model_value(powerlaw(), pp, nullptr, rho) == doctest::Approx(m / (rho * rho) + t).epsilon(1e-9));
  }
  for (double rho : {1e-3, 0.1, 0.45}) {
    double m = oracle::simpson_log([](double t) { return 4 * pi * t * t * ce_density(t); }, 1e-40, rho, 200000);
    double t = oracle::simpson_log([](double t) { return 4 * pi * ce_density(t); }, rho, 0.5, 200000);
    CHECK(radial_model_value(counterexample(), pp, nullptr, rho) ==
          doctest::Approx(m / (rho * rho) + t).epsilon(1e-6));
  }
}

TEST_CASE("radial envelope") {
  auto pp = PotentialParams::riesz(3, 1.0);
  SUBCASE("power law closed forms") {
    for (double rho : {1e-6, 1e-3, 0.2, 0.9}) {
      auto e = radial_envelope(powerlaw(), pp, rho);
      CHECK(e.k_term == doctest::Approx(4 * omega * omega / rho).epsilon(1e-10));
      CHECK(e.tail_term == doctest::Approx(std::pow(2 * omega * (std::pow(rho, -0.5) - 1), 2)).epsilon(1e-10));
    }
    auto e = radial_envelope(powerlaw(), pp, 1e-10);
    CHECK(e.total() * 1e-10 == doctest::Approx(8 * omega * omega).epsilon(1e-4));
  }
  SUBCASE("counterexample against quadrature") {
    for (double rho : {1e-5, 1e-3, 0.1}) {
      double L = std::log(1 / rho);
      auto e = radial_envelope(counterexample(), pp, rho);
      CHECK(e.k_term == doctest::Approx(omega * omega / (rho * rho * L * L)).epsilon(1e-10));
      double T = oracle::simpson_log([](double t) { return 4 * pi * ce_density(t); }, rho, 0.5, 200000);
      CHECK(e.tail_term == doctest::Approx(T * T).epsilon(1e-8));
    }
    // k / tail ~ L^2 / (1 + 2/L + ...)^2 grows without bound
    double prev = 0;
    for (double rho : {1e-2, 1e-4, 1e-8, 1e-16}) {
      auto e = radial_envelope(counterexample(), pp, rho);
      CHECK(e.k_term / e.tail_term > prev);
      prev = e.k_term / e.tail_term;
    }
    CHECK(prev > 100);
  }
  SUBCASE("below an annulus") {
    for (double rho : {1e-3, 0.1, 0.49}) {
      auto e = radial_envelope(annulus(), pp, rho);
      CHECK(e.k_term == 0.0);
      CHECK(e.tail_term == doctest::Approx(4 * pi * pi).epsilon(1e-12));
    }
  }
  SUBCASE("terms are nonnegative") {
    for (double rho = 1e-7; rho < 1e3; rho *= 3.7) {
      auto e = radial_envelope(counterexample(), pp, rho);
      CHECK(e.k_term >= 0.0);
      CHECK(e.tail_term >= 0.0);
    }
  }
  SUBCASE("failed existence names the predicate") {
    RadialSegment all{1.0, 0.0, 0.0, 0.0, std::numeric_limits<double>::infinity(), 1.0};
    try {
      radial_envelope(Measure(3, {all}), pp, 0.5);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("radial envelope: ") == 0);
      CHECK(std::string(e.what()).size() > std::string("radial envelope: ").size());
    }
  }
}

TEST_CASE("example builders") {
  auto ce = make_counterexample(3, 1.0, 0.5, 2.0);
  REQUIRE(ce.segments().size() == 1);
  CHECK(ce.segments()[0].s == doctest::Approx(2.0));
  CHECK(ce.support_radius() == 0.5);
  CHECK(make_counterexample(4, 2.0, 0.5, 2.0).segments()[0].s == doctest::Approx(3.0));
  CHECK_THROWS_AS(make_counterexample(3, 1.0, 0.5, 1.0), InputError);
  CHECK_NOTHROW(make_powerlaw_example(3, 1.0, 0.5, 1.5));
  CHECK_THROWS_AS(make_powerlaw_example(3, 1.0, 0.5, 1.0), InputError);
  CHECK_THROWS_AS(make_powerlaw_example(3, 1.0, 0.5, 2.0), InputError);
  auto pl = powerlaw();
  CHECK(pl.segments()[0].s == 1.5);
  CHECK(pl.support_radius() == 1.0);
}

TEST_CASE("radial grid") {
  auto g = make_radial_grid(counterexample());
  CHECK(std::is_sorted(g.radii.begin(), g.radii.end()));
  CHECK(std::adjacent_find(g.radii.begin(), g.radii.end()) == g.radii.end());
  CHECK(g.radii.front() <= 0.5e-6 * (1 + 1e-12));
  CHECK(g.radii.back() >= 0.5e3 * (1 - 1e-12));
  CHECK(std::find(g.radii.begin(), g.radii.end(), 0.5) != g.radii.end());
  CHECK_THROWS_AS(make_radial_grid(counterexample(), 0.5), InputError);
}

TEST_CASE("radial solve: zero measure") {
  auto u = radial_solve(Measure(3), PotentialParams::riesz(3, 1.0, 0.5, 1.0));
  CHECK(u.converged);
  for (double v : u.values) CHECK(v == 1.0);
}

TEST_CASE("radial solve: power law") {
  auto pp = PotentialParams::riesz(3, 1.0);
  auto u = radial_solve(powerlaw(), pp);
  REQUIRE(u.converged);
  CHECK(u.method == "radial-model");
  CHECK(u.max_residual < 1e-6);
  CHECK(u.max_probe_residual < 1e-5);
  for (double s : u.trace_min_step) CHECK(s >= 0.0);
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t i = 0; i < u.radii.size(); ++i) {
    double r = u.radii[i];
    if (r < 1e-5 || r > 1e-2) continue;
    lo = std::min(lo, u.values[i] * r);
    hi = std::max(hi, u.values[i] * r);
  }
  CHECK(lo > 0.0);
  CHECK(hi / lo < 2.0);
  CHECK(offnode_gap(u, powerlaw(), pp, 1e-6, 1e3) < 1e-5);
}

TEST_CASE("radial solve: counterexample") {
  auto pp = PotentialParams::riesz(3, 1.0);
  auto ce = counterexample();
  auto u = radial_solve(ce, pp);
  REQUIRE(u.converged);
  CHECK(u.max_residual < 1e-6);
  CHECK(offnode_gap(u, ce, pp, 1e-6, 1e2) < 1e-5);
  std::vector<double> rhos;
  for (int e = 1; e <= 5; ++e) rhos.push_back(std::pow(10.0, -e));
  auto rc = certify_radial(u, ce, pp, rhos);
  CHECK(rc.c_lower > 0.0);
  CHECK(rc.c_upper / rc.c_lower < 100.0);

  // the homogeneous upper envelope W + W^gamma does not hold uniformly
  Envelope bk = u.envelope;
  bk.kind = EnvelopeKind::homogeneous;
  bk.c_sub = bk.c_super = 1.0;
  auto cert = certify(u, bk, ce, decade_axis_points(3, 1, 5));
  CHECK(cert.upper_trend.verdict == Verdict::fails);
  const auto& s = cert.upper_trend.samples;
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].ratio > s[i - 1].ratio);
}

TEST_CASE("radial model and general solver") {
  auto mu = make_mollified_atom(3, 1.0, 0.1);
  auto band = [&](const PotentialParams& pp) {
    auto a = radial_solve(mu, pp);
    auto b = solve(mu, pp);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (double rho = 1e-5; rho < 100; rho *= 1.7) {
      double q = a.value_at(rho) / b.value_at(rho);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    return std::pair{lo, hi};
  };
  SUBCASE("Newtonian kernel: the max-kernel is exact, so the solutions coincide") {
    auto [lo, hi] = band(PotentialParams::riesz(3, 2.0, 0.5, 1.0));
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(hi == doctest::Approx(1.0).epsilon(1e-5));
  }
  SUBCASE("fractional kernel: agreement up to a constant band") {
    auto [lo, hi] = band(PotentialParams::riesz(3, 1.0, 0.5, 1.0));
    MESSAGE("radial/general band [" << lo << ", " << hi << "]");
    CHECK(lo > 0.1);
    CHECK(hi < 10.0);
  }
}

TEST_CASE("study rows") {
  auto pp = PotentialParams::riesz(3, 1.0);
  auto ce = counterexample();
  std::vector<double> rhos = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  auto rows = radial_study(ce, pp, rhos);
  auto u = radial_solve(ce, pp);
  REQUIRE(rows.size() == rhos.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    CHECK(r.rho == rhos[i]);
    CHECK(r.envelope == r.k_term + r.tail_term);
    CHECK(r.ratio_5_2 == radial_ratio(ce, pp, r.rho));
    CHECK(r.riesz_potential == riesz(ce, 1.0, Point::on_axis(3, r.rho)).value);
    CHECK(r.u == doctest::Approx(u.value_at(r.rho)).epsilon(1e-5));
    CHECK(r.u / r.envelope > 0.0);
  }
}
