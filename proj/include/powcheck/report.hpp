#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "powcheck/sim.hpp"

namespace powcheck {

using ordered_json = nlohmann::ordered_json;

// Shortest round-trip decimal form; the same value always prints the same
// bytes, which keeps provenance reruns byte-identical.
std::string format_double(double v);

// The "results" object of a power report.
ordered_json results_json(const PowerReport& report);

// One flat CSV row. Fields without a value (type_m/type_s when not computed)
// stay empty. The column set is fixed across scenarios and verbs.
struct ReportRow {
  std::string scenario;
  std::int64_t n = 0;
  double effect = 0.0;
  double alpha = 0.05;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  double power = 0.0;
  double mc_stderr = 0.0;
  std::optional<double> type_m;
  std::optional<double> type_s;
};

ReportRow report_row(const std::string& scenario, const PowerReport& report);

// header: scenario,n,effect,alpha,reps,seed,power,mc_stderr,type_m,type_s
std::string csv_header();
std::string csv_line(const ReportRow& row);
std::string to_csv(const std::vector<ReportRow>& rows);

// Curve cells as an array of results objects (errors carried in-place).
ordered_json curve_json(const PowerCurve& curve);
std::vector<ReportRow> curve_rows(const std::string& scenario,
                                  const PowerCurve& curve);

}  // namespace powcheck
