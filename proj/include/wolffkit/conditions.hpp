#pragma once

#include <map>
#include <string>
#include <vector>

#include "wolffkit/measures.hpp"
#include "wolffkit/potentials.hpp"

namespace wk {

enum class Verdict { holds, fails, inconclusive };
const char* to_string(Verdict v);

struct ConditionSample {
  std::string probe;
  double scale = 0.0;  // probe radius or |x|; samples are ordered by decreasing scale
  double ratio = 0.0;
};

struct ConditionReport {
  std::string condition_id;
  std::vector<ConditionSample> samples;
  double supremum = 0.0;
  Verdict verdict = Verdict::holds;
  std::map<std::string, double> parameters;
  std::vector<std::string> notes;
};

struct BallProbe {
  Point center;
  double radius = 1.0;
};

// Orders samples coarse to fine, sets supremum and the trend verdict:
// fails on an infinite ratio or a strictly increasing run of >= 3 finest samples
// growing >= 2x; holds when the finest 3 stay within a factor 4 or do not increase.
void finalize_report(ConditionReport& report);

// Probe families used by the built-in studies.
std::vector<BallProbe> dyadic_origin_balls(int n, int k_min, int k_max, double scale = 1.0);
std::vector<Point> decade_axis_points(int n, int k_min, int k_max, double scale = 1.0);

// ∫_B (W sigma_B)^s dsigma for a restriction sigma_B that is radial or a single atom.
double energy_integral(const Measure& sigma_b, const PotentialParams& params, double s);

ConditionReport energy_ball_ratio(const Measure& mu, const PotentialParams& params, double s,
                                  const std::vector<BallProbe>& probes);
ConditionReport pointwise_kappa(const Measure& mu, const PotentialParams& params, const std::vector<Point>& probes);
ConditionReport pointwise_kappa(const BasePotentialTable& table, const std::vector<Point>& probes);
ConditionReport weaker_ball_condition(const Measure& mu, const PotentialParams& params,
                                      const std::vector<BallProbe>& probes);
ConditionReport radial_existence(const Measure& mu, const PotentialParams& params);
// Radial quantities use the Riesz order 2 alpha = 2 * params.alpha and params.q.
double radial_ratio(const Measure& mu, const PotentialParams& params, double rho);
ConditionReport radial_ratio_report(const Measure& mu, const PotentialParams& params, const std::vector<double>& rhos);

}  // namespace wk
