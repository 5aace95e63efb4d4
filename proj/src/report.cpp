#include "powcheck/report.hpp"

#include <charconv>
#include <cmath>

namespace powcheck {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ordered_json results_json(const PowerReport& report) {
  ordered_json j;
  j["power"] = report.power;
  j["mc_stderr"] = report.mc_stderr;
  if (report.type_m.has_value()) j["type_m"] = *report.type_m;
  if (report.type_s.has_value()) j["type_s"] = *report.type_s;
  j["n_significant"] = report.n_significant;
  j["n_detected"] = report.n_detected;
  j["n_unconverged"] = report.n_unconverged;
  j["sign_checked"] = report.sign_checked;
  j["estimand"] = report.estimand;
  j["true_effect"] = report.true_effect;
  j["n"] = report.n;
  j["alpha"] = report.alpha;
  j["reps"] = report.reps;
  j["seed"] = report.seed;
  j["diagnostics"] = report.diagnostics;
  return j;
}

ReportRow report_row(const std::string& scenario, const PowerReport& report) {
  ReportRow row;
  row.scenario = scenario;
  row.n = report.n;
  row.effect = report.true_effect;
  row.alpha = report.alpha;
  row.reps = report.reps;
  row.seed = report.seed;
  row.power = report.power;
  row.mc_stderr = report.mc_stderr;
  row.type_m = report.type_m;
  row.type_s = report.type_s;
  return row;
}

std::string csv_header() {
  return "scenario,n,effect,alpha,reps,seed,power,mc_stderr,type_m,type_s";
}

std::string csv_line(const ReportRow& row) {
  std::string line = row.scenario;
  line += ',';
  line += std::to_string(row.n);
  line += ',';
  line += format_double(row.effect);
  line += ',';
  line += format_double(row.alpha);
  line += ',';
  line += std::to_string(row.reps);
  line += ',';
  line += std::to_string(row.seed);
  line += ',';
  line += format_double(row.power);
  line += ',';
  line += format_double(row.mc_stderr);
  line += ',';
  if (row.type_m.has_value()) line += format_double(*row.type_m);
  line += ',';
  if (row.type_s.has_value()) line += format_double(*row.type_s);
  return line;
}

std::string to_csv(const std::vector<ReportRow>& rows) {
  std::string out = csv_header();
  out += '\n';
  for (const auto& row : rows) {
    out += csv_line(row);
    out += '\n';
  }
  return out;
}

ordered_json curve_json(const PowerCurve& curve) {
  ordered_json j;
  j["n_grid"] = curve.n_grid;
  j["effect_grid"] = curve.effect_grid;
  ordered_json cells = ordered_json::array();
  for (const auto& cell : curve.cells) {
    ordered_json c;
    c["n"] = cell.n;
    c["effect"] = cell.effect;
    if (cell.report.has_value()) {
      c["results"] = results_json(*cell.report);
    } else {
      c["error"] = cell.error;
    }
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j;
}

std::vector<ReportRow> curve_rows(const std::string& scenario,
                                  const PowerCurve& curve) {
  std::vector<ReportRow> rows;
  rows.reserve(curve.cells.size());
  for (const auto& cell : curve.cells) {
    if (!cell.report.has_value()) continue;  // CSV has no error channel
    rows.push_back(report_row(scenario, *cell.report));
  }
  return rows;
}

}  // namespace powcheck
