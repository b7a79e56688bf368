#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wolffkit/conditions.hpp"
#include "wolffkit/radial.hpp"
#include "wolffkit/solver.hpp"

namespace wk {

using Json = nlohmann::ordered_json;

// Shortest decimal that round-trips; "inf", "-inf" and "nan" otherwise.
std::string format_number(double x);
// A number, or the strings above for non-finite values.
Json number_json(double x);

Json to_json(const ConditionReport& report);
Json to_json(const Envelope& env);
Json to_json(const SolutionField& u);
Json to_json(const std::vector<RadialStudyRow>& rows);

// Fixed headers, one row per node or radius.
inline constexpr const char* kSolutionCsvHeader = "node_radius_or_index,u,envelope_lower,envelope_upper,residual";
inline constexpr const char* kStudyCsvHeader = "rho,u,k_term,tail_term,envelope,ratio_5_2,riesz_potential";

std::string solution_csv(const SolutionField& u);
std::string study_csv(const std::vector<RadialStudyRow>& rows);
// header line, then one line per row; values through format_number.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace wk
