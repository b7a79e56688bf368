#include "wolffkit/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace wk {
namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
using G10 = boost::math::quadrature::gauss<double, 10>;

Panel gk21(const std::function<double(double)>& f, double a, double b) {
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G10::weights();
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double kron = wk[0] * fc, gauss = 0.0;
  double fv[21];
  fv[0] = fc;
  for (std::size_t i = 1; i < xk.size(); ++i) {
    double f1 = f(c - h * xk[i]), f2 = f(c + h * xk[i]);
    fv[2 * i - 1] = f1;
    fv[2 * i] = f2;
    kron += wk[i] * (f1 + f2);
    if (i % 2 == 1) gauss += wg[i / 2] * (f1 + f2);
  }
  double mean = 0.5 * kron;
  double asc = std::abs(wk[0] * (fc - mean));
  for (std::size_t i = 1; i < xk.size(); ++i)
    asc += wk[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));
  asc *= std::abs(h);
  double err = std::abs((kron - gauss) * h);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  return {a, b, kron * h, err};
}

template <int N>
FixedRule expand_gauss() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  FixedRule r;
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    r.x.push_back(-x[i]);
    r.w.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.x.push_back(x[i]);
    r.w.push_back(w[i]);
  }
  return r;
}

}  // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, std::span<const double> breakpoints,
                              const QuadOptions& opts) {
  if (breakpoints.size() < 2) throw std::invalid_argument("integrate_adaptive: need two endpoints");
  auto worse = [](const Panel& p, const Panel& q) { return p.error < q.error; };
  std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> heap(worse);
  QuadResult res;
  std::vector<Panel> frozen;
  double total = 0.0, err = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    double a = breakpoints[i], b = breakpoints[i + 1];
    if (!(b > a)) continue;
    Panel p = gk21(f, a, b);
    res.evaluations += 21;
    total += p.value;
    err += p.error;
    heap.push(p);
  }
  int panels = static_cast<int>(heap.size());
  auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };
  while (!heap.empty() && err > target() && panels < opts.max_panels && std::isfinite(total)) {
    Panel p = heap.top();
    heap.pop();
    double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b) || (p.b - p.a) <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(m)) {
      frozen.push_back(p);
      continue;
    }
    Panel l = gk21(f, p.a, m), r = gk21(f, m, p.b);
    res.evaluations += 42;
    total += l.value + r.value - p.value;
    err += l.error + r.error - p.error;
    heap.push(l);
    heap.push(r);
    ++panels;
  }
  while (!heap.empty()) {
    frozen.push_back(heap.top());
    heap.pop();
  }
  std::sort(frozen.begin(), frozen.end(), [](const Panel& p, const Panel& q) { return p.a < q.a; });
  total = 0.0;
  err = 0.0;
  for (const auto& p : frozen) {
    total += p.value;
    err += p.error;
  }
  res.value = total;
  res.abs_error = err;
  res.converged = std::isfinite(total) && err <= target();
  res.panels = std::move(frozen);
  return res;
}

FixedRule kronrod_rule(std::span<const Panel> panels) {
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  FixedRule r;
  r.x.reserve(panels.size() * 21);
  r.w.reserve(panels.size() * 21);
  for (const auto& p : panels) {
    double c = 0.5 * (p.a + p.b), h = 0.5 * (p.b - p.a);
    for (std::size_t i = xk.size(); i-- > 1;) {
      r.x.push_back(c - h * xk[i]);
      r.w.push_back(h * wk[i]);
    }
    for (std::size_t i = 0; i < xk.size(); ++i) {
      r.x.push_back(c + h * xk[i]);
      r.w.push_back(h * wk[i]);
    }
  }
  return r;
}

const FixedRule& gauss_legendre(int n) {
  static const FixedRule r2 = expand_gauss<2>(), r3 = expand_gauss<3>(), r4 = expand_gauss<4>(),
                         r5 = expand_gauss<5>(), r6 = expand_gauss<6>(), r8 = expand_gauss<8>(),
                         r10 = expand_gauss<10>(), r12 = expand_gauss<12>(), r16 = expand_gauss<16>(),
                         r20 = expand_gauss<20>();
  switch (n) {
    case 2: return r2;
    case 3: return r3;
    case 4: return r4;
    case 5: return r5;
    case 6: return r6;
    case 8: return r8;
    case 10: return r10;
    case 12: return r12;
    case 16: return r16;
    case 20: return r20;
    default: throw std::invalid_argument("gauss_legendre: unsupported order");
  }
}

}  // namespace wk
