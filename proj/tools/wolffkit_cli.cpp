// wolffkit: batch front end for potentials, fixed-point solves and condition studies.
//
//   wolffkit eval --measure mu.json --alpha 1 --p 2 --probes 20 --seed 0
//   wolffkit solve --measure powerlaw --two-alpha 1 --q 0.5 --format json --out sol.json
//   wolffkit radial-study --measure powerlaw --rho-min 1e-5 --rho-max 1
//   wolffkit check-conditions --measure powerlaw --energy-exponent 1
//   wolffkit counterexample --n 3 --two-alpha 1 --q 0.5 --beta 2 --out ce.csv
//
// Exit status: 0 success, 1 input error, 2 a condition failed or a solve did not
// converge (the report is still written).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wolffkit/conditions.hpp"
#include "wolffkit/errors.hpp"
#include "wolffkit/io.hpp"
#include "wolffkit/measures.hpp"
#include "wolffkit/parallel.hpp"
#include "wolffkit/potentials.hpp"
#include "wolffkit/radial.hpp"
#include "wolffkit/solver.hpp"

namespace {

using namespace wk;

struct Spec {
  std::string command;
  std::string measure = "powerlaw";
  int n = 3;
  double alpha = 0.5;
  double two_alpha = 1.0;
  double p = 2.0;
  double q = 0.5;
  double r = 0.0;
  double s = 1.5;
  double beta = 2.0;
  double grid_per_decade = 48.0;
  double tol = 1e-8;
  int max_iter = 500;
  int probes = 20;
  std::uint64_t seed = 0;
  std::string out = "-";
  std::string format;
  // solve
  std::string method = "wolff";
  std::string kind;
  bool from_upper = false;
  // studies
  double rho_min = 1e-5;
  double rho_max = 1e-1;
  int rho_per_decade = 1;
  double energy_exponent = 1.0;
  double atom_radius = 0.1;
};

PotentialParams params_of(const Spec& s) {
  PotentialParams pp;
  pp.n = s.n;
  pp.alpha = s.alpha;
  pp.p = s.p;
  pp.q = s.q;
  pp.r = s.r;
  pp.validate();
  return pp;
}

Measure load_measure(const Spec& s) {
  if (s.measure == "powerlaw") return make_powerlaw_example(s.n, 2.0 * s.alpha, s.q, s.s);
  if (s.measure == "counterexample") return make_counterexample(s.n, 2.0 * s.alpha, s.q, s.beta);
  if (s.measure == "atom") return make_mollified_atom(s.n, 1.0, s.atom_radius);
  std::ifstream in(s.measure);
  if (!in) throw InputError("measure: cannot open \"" + s.measure + "\"");
  std::stringstream buf;
  buf << in.rdbuf();
  Measure mu = measure_from_json(buf.str());
  if (mu.dim() != s.n) throw InputError("measure: dimension n in the file differs from --n");
  return mu;
}

double scale_of(const Measure& mu) {
  double R = mu.support_radius();
  return (R > 0.0 && std::isfinite(R)) ? R : 1.0;
}

std::vector<double> decade_radii(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi >= lo)) throw InputError("radii: need 0 < rho-min <= rho-max");
  if (per_decade < 1) throw InputError("radii: rho-per-decade must be >= 1");
  std::vector<double> out;
  int k0 = static_cast<int>(std::ceil(std::log10(lo) * per_decade - 1e-9));
  int k1 = static_cast<int>(std::floor(std::log10(hi) * per_decade + 1e-9));
  for (int k = k0; k <= k1; ++k) out.push_back(std::pow(10.0, static_cast<double>(k) / per_decade));
  return out;
}

// Radii log-uniform over [1e-3 R, 10 R], directions uniform on the sphere.
std::vector<Point> random_probes(int n, double R, int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> lr(std::log(1e-3 * R), std::log(10.0 * R));
  std::normal_distribution<double> g;
  std::vector<Point> pts;
  for (int i = 0; i < count; ++i) {
    double rho = std::exp(lr(gen));
    std::vector<double> x(n);
    double nn = 0.0;
    do {
      nn = 0.0;
      for (double& v : x) {
        v = g(gen);
        nn += v * v;
      }
    } while (nn == 0.0);
    nn = std::sqrt(nn);
    for (double& v : x) v *= rho / nn;
    pts.emplace_back(std::move(x));
  }
  return pts;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json params_json(const PotentialParams& pp) {
  return {{"n", pp.n}, {"alpha", pp.alpha}, {"p", pp.p}, {"q", pp.q}, {"r", pp.r}};
}

void emit(const Spec& s, const std::string& text) {
  if (s.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(s.out, std::ios::binary);
  if (!f) throw InputError("output: cannot write \"" + s.out + "\"");
  f << text;
}

bool want_json(const Spec& s) { return s.format == "json"; }

int run_eval(const Spec& s) {
  PotentialParams pp = params_of(s);
  Measure mu = load_measure(s);
  if (s.probes < 1) throw InputError("eval: --probes must be >= 1");
  auto pts = random_probes(s.n, scale_of(mu), s.probes, s.seed);
  std::vector<PotentialValue> vals(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { vals[i] = wolff(mu, pp, pts[i]); });
  if (want_json(s)) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Json x = Json::array();
      for (double c : pts[i].coords) x.push_back(c);
      rows.push_back({{"probe", i},
                      {"radius", number_json(pts[i].norm())},
                      {"point", x},
                      {"wolff", number_json(vals[i].value)},
                      {"abs_error_bound", number_json(vals[i].abs_error_bound)},
                      {"divergence", vals[i].divergence}});
    }
    emit(s, dump({{"command", "eval"}, {"params", params_json(pp)}, {"seed", s.seed}, {"values", rows}}));
  } else {
    std::vector<std::string> header = {"probe", "radius"};
    for (int k = 1; k <= s.n; ++k) header.push_back("x" + std::to_string(k));
    header.push_back("wolff");
    header.push_back("abs_error_bound");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::vector<double> row = {static_cast<double>(i), pts[i].norm()};
      row.insert(row.end(), pts[i].coords.begin(), pts[i].coords.end());
      row.push_back(vals[i].value);
      row.push_back(vals[i].abs_error_bound);
      rows.push_back(std::move(row));
    }
    emit(s, csv_table(header, rows));
  }
  return 0;
}

SolverOptions solver_options(const Spec& s) {
  SolverOptions o;
  o.grid_per_decade = s.grid_per_decade;
  o.tol = s.tol;
  o.max_iter = s.max_iter;
  o.from_upper = s.from_upper;
  if (s.kind == "homogeneous") o.kind = EnvelopeKind::homogeneous;
  if (s.kind == "inhomogeneous") o.kind = EnvelopeKind::inhomogeneous;
  return o;
}

int run_solve(const Spec& s) {
  PotentialParams pp = params_of(s);
  Measure mu = load_measure(s);
  SolverOptions o = solver_options(s);
  SolutionField u = s.method == "radial" ? radial_solve(mu, pp, o) : solve(mu, pp, o);
  bool failed = !u.converged || u.envelope.super_trend.verdict == Verdict::fails;
  if (want_json(s)) {
    Json j = {{"command", "solve"}, {"params", params_json(pp)}};
    j["solution"] = to_json(u);
    emit(s, dump(j));
  } else {
    emit(s, solution_csv(u));
  }
  if (!u.converged) std::cerr << "solve: not converged after " << u.iterations << " sweeps\n";
  if (u.envelope.super_trend.verdict == Verdict::fails)
    std::cerr << "solve: the supersolution constant diverges toward the finest probes\n";
  return failed ? 2 : 0;
}

int write_study(const Spec& s, const PotentialParams& pp, const std::vector<RadialStudyRow>& rows,
                const char* command) {
  if (want_json(s))
    emit(s, dump({{"command", command}, {"params", params_json(pp)}, {"rows", to_json(rows)}}));
  else
    emit(s, study_csv(rows));
  return 0;
}

int run_radial_study(const Spec& s) {
  PotentialParams pp = params_of(s);
  Measure mu = load_measure(s);
  auto rows = radial_study(mu, pp, decade_radii(s.rho_min, s.rho_max, s.rho_per_decade), solver_options(s));
  return write_study(s, pp, rows, "radial-study");
}

int run_counterexample(const Spec& s) {
  PotentialParams pp = params_of(s);
  Measure mu = make_counterexample(s.n, 2.0 * s.alpha, s.q, s.beta);
  auto rows = radial_study(mu, pp, decade_radii(s.rho_min, s.rho_max, s.rho_per_decade), solver_options(s));
  return write_study(s, pp, rows, "counterexample");
}

int run_check_conditions(const Spec& s) {
  PotentialParams pp = params_of(s);
  Measure mu = load_measure(s);
  double R = scale_of(mu);
  std::vector<ConditionReport> reports;

  auto fin = finiteness_check(mu, pp);
  ConditionReport fr;
  fr.condition_id = "finiteness";
  fr.verdict = fin.finite ? Verdict::holds : Verdict::fails;
  fr.supremum = fin.finite ? 0.0 : std::numeric_limits<double>::infinity();
  if (!fin.finite) fr.notes.push_back(fin.reason);
  reports.push_back(fr);

  if (fin.finite) {
    auto balls = dyadic_origin_balls(s.n, 1, 10, R);
    reports.push_back(energy_ball_ratio(mu, pp, s.energy_exponent, balls));
    reports.push_back(pointwise_kappa(mu, pp, decade_axis_points(s.n, 1, 8, R)));
    if (2.0 * pp.alpha < pp.n && pp.q < 1.0) reports.push_back(weaker_ball_condition(mu, pp, balls));
  }
  if (mu.is_radial() && 2.0 * pp.alpha < pp.n && pp.q < 1.0) {
    auto ex = radial_existence(mu, pp);
    reports.push_back(ex);
    if (ex.verdict == Verdict::holds) reports.push_back(radial_ratio_report(mu, pp, decade_radii(1e-6 * R, 0.1 * R, 1)));
  }

  bool failed = false;
  for (const auto& rep : reports) failed = failed || rep.verdict == Verdict::fails;
  if (want_json(s)) {
    Json a = Json::array();
    for (const auto& rep : reports) a.push_back(to_json(rep));
    emit(s, dump({{"command", "check-conditions"}, {"params", params_json(pp)}, {"reports", a}}));
  } else {
    std::string out = "condition_id,probe,scale,ratio,supremum,verdict\n";
    for (const auto& rep : reports) {
      std::string tail = "," + format_number(rep.supremum) + "," + to_string(rep.verdict) + "\n";
      if (rep.samples.empty()) out += rep.condition_id + ",,,," + tail.substr(1);
      for (const auto& smp : rep.samples)
        out += rep.condition_id + "," + csv_field(smp.probe) + "," + format_number(smp.scale) + "," +
               format_number(smp.ratio) + tail;
    }
    emit(s, out);
  }
  for (const auto& rep : reports)
    if (rep.verdict == Verdict::fails) std::cerr << "condition " << rep.condition_id << ": fails\n";
  return failed ? 2 : 0;
}

void add_common(CLI::App* sub, Spec& s, bool with_measure) {
  if (with_measure)
    sub->add_option("--measure", s.measure, "measure JSON path or built-in: powerlaw, counterexample, atom");
  sub->add_option("--n", s.n, "dimension");
  auto* a = sub->add_option("--alpha", s.alpha, "alpha");
  auto* ta = sub->add_option("--two-alpha", s.two_alpha, "Riesz order 2 alpha (default 1)");
  a->excludes(ta);
  sub->add_option("--p", s.p, "p");
  sub->add_option("--q", s.q, "q");
  sub->add_option("--r", s.r, "additive constant r");
  sub->add_option("--s", s.s, "power-law built-in exponent");
  sub->add_option("--beta", s.beta, "counterexample log exponent");
  sub->add_option("--grid-per-decade", s.grid_per_decade, "solver nodes per decade");
  sub->add_option("--tol", s.tol, "solver tolerance");
  sub->add_option("--max-iter", s.max_iter, "solver sweep limit");
  sub->add_option("--probes", s.probes, "number of random probes (eval)");
  sub->add_option("--seed", s.seed, "probe seed");
  sub->add_option("--out", s.out, "output path, - for stdout");
  sub->add_option("--format", s.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
  Spec s;
  CLI::App app{"Wolff potentials and sublinear fixed-point solves"};
  app.require_subcommand(1);

  auto* eval = app.add_subcommand("eval", "Wolff potential at seeded random probes");
  add_common(eval, s, true);

  auto* solve_cmd = app.add_subcommand("solve", "solve u = W(u^q dsigma) + r");
  add_common(solve_cmd, s, true);
  solve_cmd->add_option("--method", s.method, "wolff or radial")->check(CLI::IsMember({"wolff", "radial"}));
  solve_cmd->add_option("--kind", s.kind, "envelope kind")->check(CLI::IsMember({"inhomogeneous", "homogeneous"}));
  solve_cmd->add_flag("--from-upper", s.from_upper, "iterate down from the supersolution");

  auto* study = app.add_subcommand("radial-study", "radial solve with envelope and ratio columns");
  auto* ce = app.add_subcommand("counterexample", "radial study of the log-corrected counterexample measure");
  for (auto* sub : {study, ce}) {
    add_common(sub, s, sub == study);
    sub->add_option("--rho-min", s.rho_min, "smallest radius");
    sub->add_option("--rho-max", s.rho_max, "largest radius");
    sub->add_option("--rho-per-decade", s.rho_per_decade, "radii per decade");
  }

  auto* check = app.add_subcommand("check-conditions", "condition reports with verdicts");
  add_common(check, s, true);
  check->add_option("--energy-exponent", s.energy_exponent, "exponent of the ball energy condition");

  for (auto* sub : {eval, solve_cmd, study, ce, check})
    sub->add_option("--atom-radius", s.atom_radius, "radius of the atom built-in");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  for (auto* sub : app.get_subcommands()) s.command = sub->get_name();
  bool alpha_given = false;
  for (auto* sub : app.get_subcommands()) alpha_given = sub->count("--alpha") > 0;
  if (!alpha_given) s.alpha = s.two_alpha / 2.0;
  if (s.format.empty()) {
    bool json_ext = s.out.size() >= 5 && s.out.compare(s.out.size() - 5, 5, ".json") == 0;
    s.format = json_ext ? "json" : "csv";
  }

  try {
    if (s.command == "eval") return run_eval(s);
    if (s.command == "solve") return run_solve(s);
    if (s.command == "radial-study") return run_radial_study(s);
    if (s.command == "counterexample") return run_counterexample(s);
    if (s.command == "check-conditions") return run_check_conditions(s);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const UnsupportedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
