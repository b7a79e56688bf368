#include "wolffkit/io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "wolffkit/errors.hpp"

namespace wk {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json number_json(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

namespace {

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_json(x));
  return a;
}

Json point_json(const Point& p) { return numbers(p.coords); }

void reject_unknown(const Json& obj, const std::set<std::string>& known, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) throw InputError(where + ": unknown key \"" + it.key() + "\"");
}

double get_number(const Json& obj, const char* key, const std::string& where, bool allow_inf = false) {
  if (!obj.contains(key)) throw InputError(where + ": missing key \"" + key + "\"");
  const Json& v = obj.at(key);
  if (allow_inf && v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw InputError(where + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

double get_number_or(const Json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? get_number(obj, key, where) : fallback;
}

}  // namespace

Measure measure_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("measure JSON: parse error at byte ") + std::to_string(e.byte));
  }
  if (!j.is_object()) throw InputError("measure JSON: top level must be an object");
  reject_unknown(j, {"n", "radial_segments", "atoms"}, "measure JSON");
  if (!j.contains("n") || !j["n"].is_number_integer()) throw InputError("measure JSON: \"n\" must be an integer");
  int n = j["n"].get<int>();

  std::vector<RadialSegment> segs;
  if (j.contains("radial_segments")) {
    if (!j["radial_segments"].is_array()) throw InputError("measure JSON: \"radial_segments\" must be an array");
    for (const auto& s : j["radial_segments"]) {
      const std::string where = "radial segment";
      if (!s.is_object()) throw InputError(where + ": must be an object");
      reject_unknown(s, {"c", "s", "beta", "r_lo", "r_hi", "log_scale"}, where);
      RadialSegment g;
      g.c = get_number(s, "c", where);
      g.s = get_number(s, "s", where);
      g.beta = get_number_or(s, "beta", 0.0, where);
      g.r_lo = get_number(s, "r_lo", where);
      g.r_hi = get_number(s, "r_hi", where, true);
      g.log_scale = get_number_or(s, "log_scale", 1.0, where);
      segs.push_back(g);
    }
  }
  std::vector<MollifiedAtom> atoms;
  if (j.contains("atoms")) {
    if (!j["atoms"].is_array()) throw InputError("measure JSON: \"atoms\" must be an array");
    for (const auto& a : j["atoms"]) {
      const std::string where = "atom";
      if (!a.is_object()) throw InputError(where + ": must be an object");
      reject_unknown(a, {"center", "mass", "radius"}, where);
      if (!a.contains("center") || !a["center"].is_array()) throw InputError(where + ": \"center\" must be an array");
      MollifiedAtom m;
      for (const auto& c : a["center"]) {
        if (!c.is_number()) throw InputError(where + ": center coordinates must be numbers");
        m.center.coords.push_back(c.get<double>());
      }
      m.mass = get_number(a, "mass", where);
      m.radius = get_number(a, "radius", where);
      atoms.push_back(std::move(m));
    }
  }
  return Measure(n, std::move(segs), std::move(atoms));
}

std::string measure_to_json(const Measure& mu) {
  Json j;
  j["n"] = mu.dim();
  j["radial_segments"] = Json::array();
  for (const auto& g : mu.segments())
    j["radial_segments"].push_back({{"c", g.c},
                                    {"s", g.s},
                                    {"beta", g.beta},
                                    {"r_lo", g.r_lo},
                                    {"r_hi", number_json(g.r_hi)},
                                    {"log_scale", g.log_scale}});
  j["atoms"] = Json::array();
  for (const auto& a : mu.atoms())
    j["atoms"].push_back({{"center", point_json(a.center)}, {"mass", a.mass}, {"radius", a.radius}});
  return dump(j);
}

Json to_json(const ConditionReport& report) {
  Json j;
  j["condition_id"] = report.condition_id;
  Json samples = Json::array();
  for (const auto& s : report.samples)
    samples.push_back({{"probe", s.probe}, {"scale", number_json(s.scale)}, {"ratio", number_json(s.ratio)}});
  j["samples"] = std::move(samples);
  j["supremum"] = number_json(report.supremum);
  j["verdict"] = to_string(report.verdict);
  Json params = Json::object();
  for (const auto& [k, v] : report.parameters) params[k] = number_json(v);
  j["parameters"] = std::move(params);
  j["notes"] = report.notes;
  return j;
}

Json to_json(const Envelope& env) {
  Json j;
  j["kind"] = to_string(env.kind);
  j["c_sub"] = number_json(env.c_sub);
  j["c_super"] = number_json(env.c_super);
  j["super_found"] = env.super_found;
  j["super_trend"] = to_json(env.super_trend);
  j["notes"] = env.notes;
  return j;
}

Json to_json(const SolutionField& u) {
  Json j;
  j["method"] = u.method;
  j["radial"] = u.radial;
  j["converged"] = u.converged;
  j["trivial"] = u.trivial;
  j["iterations"] = u.iterations;
  j["max_residual"] = number_json(u.max_residual);
  j["max_probe_residual"] = number_json(u.max_probe_residual);
  j["envelope"] = to_json(u.envelope);
  Json sandwich;
  sandwich["certified"] = u.certified;
  sandwich["c_lower"] = number_json(u.c_lower);
  sandwich["c_upper"] = number_json(u.c_upper);
  sandwich["c_universal"] = number_json(u.c_universal);
  j["sandwich"] = std::move(sandwich);
  Json nodes = Json::array();
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    Json row;
    row["node_radius_or_index"] = number_json(u.radii[i]);
    if (!u.radial && i < u.nodes.size()) row["point"] = point_json(u.nodes[i]);
    row["u"] = number_json(u.values[i]);
    row["envelope_lower"] = number_json(u.envelope_lower[i]);
    row["envelope_upper"] = number_json(u.envelope_upper[i]);
    row["residual"] = number_json(u.residual[i]);
    nodes.push_back(std::move(row));
  }
  j["nodes"] = std::move(nodes);
  Json probes = Json::array();
  for (std::size_t i = 0; i < u.probe_values.size(); ++i)
    probes.push_back({{"point", point_json(u.probes[i])},
                      {"u", number_json(u.probe_values[i])},
                      {"residual", number_json(u.probe_residual[i])}});
  j["probes"] = std::move(probes);
  j["trace_min_step"] = numbers(u.trace_min_step);
  j["trace_change"] = numbers(u.trace_change);
  return j;
}

Json to_json(const std::vector<RadialStudyRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows)
    a.push_back({{"rho", number_json(r.rho)},
                 {"u", number_json(r.u)},
                 {"k_term", number_json(r.k_term)},
                 {"tail_term", number_json(r.tail_term)},
                 {"envelope", number_json(r.envelope)},
                 {"ratio_5_2", number_json(r.ratio_5_2)},
                 {"riesz_potential", number_json(r.riesz_potential)}});
  return a;
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string solution_csv(const SolutionField& u) {
  std::string out = std::string(kSolutionCsvHeader) + "\n";
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    for (double v : {u.radii[i], u.values[i], u.envelope_lower[i], u.envelope_upper[i], u.residual[i]}) {
      out += format_number(v);
      out += ',';
    }
    out.back() = '\n';
  }
  return out;
}

std::string study_csv(const std::vector<RadialStudyRow>& rows) {
  std::string out = std::string(kStudyCsvHeader) + "\n";
  for (const auto& r : rows) {
    for (double v : {r.rho, r.u, r.k_term, r.tail_term, r.envelope, r.ratio_5_2, r.riesz_potential}) {
      out += format_number(v);
      out += ',';
    }
    out.back() = '\n';
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace wk
