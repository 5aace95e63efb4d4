#include "powcheck/priors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace powcheck {

namespace {

void append_warning(std::vector<std::string>* warnings, std::string msg) {
  if (warnings) warnings->push_back(std::move(msg));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() &&
           (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.pop_back();
    std::size_t start = 0;
    while (start < field.size() &&
           (field[start] == ' ' || field[start] == '\t'))
      ++start;
    fields.push_back(field.substr(start));
  }
  return fields;
}

PriorBundle build_glue() {
  PriorBundle b;
  b.source = PriorSource::glue;
  b.overlap.predictor_names = {"min_acc", "acc_diff"};
  b.overlap.coefficients = {0.5819, -0.4662};
  b.overlap.intercept = 0.4142;
  b.overlap.r_squared = 0.966;
  b.overlap.n_observations = 270;

  b.effect_in_percent = true;
  b.requires_task = true;
  b.tasks = {"MNLI-m", "MNLI-mm", "MRPC", "QNLI",
             "QQP",    "RTE",     "SST-2", "WNLI"};
  b.effect_size.predictor_names = {"baseline_pct",  "task:MNLI-mm",
                                   "task:MRPC",     "task:QNLI",
                                   "task:QQP",      "task:RTE",
                                   "task:SST-2",    "task:WNLI"};
  b.effect_size.coefficients = {-0.264, 0.150, 0.023, 2.139,
                                -0.195, 1.018, 1.536, -0.520};
  b.effect_size.intercept = 24.342;
  b.effect_size.r_squared = 0.690;
  b.effect_size.n_observations = 61;
  return b;
}

PriorBundle build_squad2() {
  PriorBundle b;
  b.source = PriorSource::squad2;
  b.overlap.predictor_names = {"min_acc", "acc_diff"};
  b.overlap.coefficients = {0.5932, -1.2849};
  b.overlap.intercept = 0.4339;
  b.overlap.r_squared = 0.944;
  b.overlap.n_observations = 14;

  b.effect_size.predictor_names = {"baseline"};
  b.effect_size.coefficients = {-0.1408};
  b.effect_size.intercept = 0.1331;
  b.effect_size.r_squared = 0.672;
  b.effect_size.n_observations = 14;
  return b;
}

}  // namespace

double OlsModel::predict(std::span<const double> predictors) const {
  if (predictors.size() != coefficients.size())
    throw std::invalid_argument("OlsModel::predict: expected " +
                                std::to_string(coefficients.size()) +
                                " predictors, got " +
                                std::to_string(predictors.size()));
  double y = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j)
    y += coefficients[j] * predictors[j];
  return y;
}

OlsModel fit_ols(const std::vector<std::vector<double>>& rows,
                 const std::vector<double>& targets,
                 const std::vector<std::string>& predictor_names) {
  const std::size_t n = rows.size();
  const std::size_t p = predictor_names.size();
  if (n != targets.size())
    throw std::invalid_argument("fit_ols: rows and targets differ in length");
  if (n <= p)
    throw std::invalid_argument(
        "fit_ols: need more observations than predictors (got " +
        std::to_string(n) + " rows for " + std::to_string(p) + " predictors)");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n),
                    static_cast<Eigen::Index>(p) + 1);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != p)
      throw std::invalid_argument("fit_ols: row " + std::to_string(i) +
                                  " has " + std::to_string(rows[i].size()) +
                                  " values, expected " + std::to_string(p));
    X(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (!std::isfinite(rows[i][j]))
        throw std::invalid_argument("fit_ols: non-finite predictor in row " +
                                    std::to_string(i));
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j) + 1) =
          rows[i][j];
    }
    if (!std::isfinite(targets[i]))
      throw std::invalid_argument("fit_ols: non-finite target in row " +
                                  std::to_string(i));
    y(static_cast<Eigen::Index>(i)) = targets[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  const Eigen::Index full = static_cast<Eigen::Index>(p) + 1;
  if (qr.rank() < full) {
    const auto perm = qr.colsPermutation().indices();
    std::string cols;
    for (Eigen::Index k = qr.rank(); k < full; ++k) {
      if (!cols.empty()) cols += ", ";
      const Eigen::Index orig = perm(k);
      cols += orig == 0 ? std::string("intercept")
                        : predictor_names[static_cast<std::size_t>(orig) - 1];
    }
    throw std::invalid_argument(
        "fit_ols: design matrix is rank deficient; collinear columns: " + cols);
  }

  const Eigen::VectorXd beta = qr.solve(y);
  const double y_mean = y.mean();
  const double tss = (y.array() - y_mean).square().sum();
  const double rss = (y - X * beta).squaredNorm();
  OlsModel model;
  model.predictor_names = predictor_names;
  model.intercept = beta(0);
  model.coefficients.assign(beta.data() + 1, beta.data() + full);
  model.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 1.0;
  model.n_observations = static_cast<std::int64_t>(n);
  return model;
}

RegressionData read_regression_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty regression file");
  RegressionData data;
  data.column_names = split_fields(line);
  if (data.column_names.size() < 2)
    throw std::runtime_error(path + ": header must name at least 2 columns");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
    if (fields.size() != data.column_names.size()) {
      std::ostringstream os;
      os << path << " line " << line_no << ": expected "
         << data.column_names.size() << " fields, got " << fields.size();
      throw std::runtime_error(os.str());
    }
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      char* end = nullptr;
      row[j] = std::strtod(fields[j].c_str(), &end);
      if (end == fields[j].c_str() || *end != '\0' || !std::isfinite(row[j])) {
        std::ostringstream os;
        os << path << " line " << line_no << ": bad numeric value '"
           << fields[j] << "' in column " << data.column_names[j];
        throw std::runtime_error(os.str());
      }
    }
    data.rows.push_back(std::move(row));
  }
  if (data.rows.empty())
    throw std::runtime_error(path + ": no data rows after the header");
  return data;
}

OlsModel fit_ols(const RegressionData& data, const std::string& target_column) {
  const auto it = std::find(data.column_names.begin(), data.column_names.end(),
                            target_column);
  if (it == data.column_names.end()) {
    std::string known;
    for (const auto& c : data.column_names) {
      if (!known.empty()) known += ", ";
      known += c;
    }
    throw std::invalid_argument("fit_ols: no column named '" + target_column +
                                "'; columns are: " + known);
  }
  const std::size_t target_idx =
      static_cast<std::size_t>(it - data.column_names.begin());
  std::vector<std::string> names;
  for (std::size_t j = 0; j < data.column_names.size(); ++j)
    if (j != target_idx) names.push_back(data.column_names[j]);
  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  rows.reserve(data.rows.size());
  targets.reserve(data.rows.size());
  for (const auto& r : data.rows) {
    std::vector<double> row;
    row.reserve(names.size());
    for (std::size_t j = 0; j < r.size(); ++j)
      if (j != target_idx) row.push_back(r[j]);
    rows.push_back(std::move(row));
    targets.push_back(r[target_idx]);
  }
  return fit_ols(rows, targets, names);
}

const PriorBundle& glue_priors() {
  static const PriorBundle bundle = build_glue();
  return bundle;
}

const PriorBundle& squad2_priors() {
  static const PriorBundle bundle = build_squad2();
  return bundle;
}

double predict_overlap(double min_acc, double acc_diff,
                       const PriorBundle& bundle,
                       std::vector<std::string>* warnings) {
  if (!std::isfinite(min_acc) || !std::isfinite(acc_diff))
    throw std::invalid_argument("predict_overlap: inputs must be finite");
  if (acc_diff < 0.0)
    throw std::invalid_argument("predict_overlap: acc_diff must be >= 0");
  if (acc_diff > 1.0)
    throw std::invalid_argument("predict_overlap: acc_diff must be <= 1");
  if (min_acc < 0.5 || min_acc > 1.0 || acc_diff > 0.2)
    append_warning(warnings,
                   "predict_overlap: inputs outside the fitted range "
                   "(min_acc in [0.5, 1], acc_diff in [0, 0.2])");
  const double predictors[2] = {min_acc, acc_diff};
  double overlap = bundle.overlap.predict(predictors);
  const double hi = 1.0 - acc_diff;
  if (overlap < 0.0 || overlap > hi) {
    append_warning(warnings, "predict_overlap: prediction clamped into [0, " +
                                 std::to_string(hi) + "]");
    overlap = std::clamp(overlap, 0.0, hi);
  }
  return overlap;
}

double predict_effect_size(double baseline_acc,
                           const std::optional<std::string>& task,
                           const PriorBundle& bundle,
                           std::vector<std::string>* warnings) {
  if (!std::isfinite(baseline_acc) || baseline_acc < 0.0 || baseline_acc > 1.0)
    throw std::invalid_argument(
        "predict_effect_size: baseline accuracy must be in [0, 1]");
  std::vector<double> predictors(bundle.effect_size.coefficients.size(), 0.0);
  if (bundle.requires_task) {
    if (!task.has_value()) {
      std::string known;
      for (const auto& t : bundle.tasks) {
        if (!known.empty()) known += ", ";
        known += t;
      }
      throw std::invalid_argument(
          "predict_effect_size: this bundle needs a task label; known tasks: " +
          known);
    }
    const auto it = std::find(bundle.tasks.begin(), bundle.tasks.end(), *task);
    if (it == bundle.tasks.end()) {
      std::string known;
      for (const auto& t : bundle.tasks) {
        if (!known.empty()) known += ", ";
        known += t;
      }
      throw std::invalid_argument("predict_effect_size: unknown task '" +
                                  *task + "'; known tasks: " + known);
    }
    // reference level contributes no dummy; level k maps to predictor k
    // (slot 0 is the baseline term)
    const std::size_t level =
        static_cast<std::size_t>(it - bundle.tasks.begin());
    if (level > 0) predictors[level] = 1.0;
  } else if (task.has_value()) {
    append_warning(warnings,
                   "predict_effect_size: task label ignored by this bundle");
  }
  predictors[0] =
      bundle.effect_in_percent ? baseline_acc * 100.0 : baseline_acc;
  double effect = bundle.effect_size.predict(predictors);
  if (bundle.effect_in_percent) effect /= 100.0;
  if (effect < 0.0) {
    append_warning(warnings,
                   "predict_effect_size: negative prediction floored at 0");
    effect = 0.0;
  }
  return effect;
}

double odds_ratio(double exp_overlap, double acc_diff) {
  if (!std::isfinite(exp_overlap) || !std::isfinite(acc_diff))
    throw std::invalid_argument("odds_ratio: inputs must be finite");
  const double denom = 1.0 - exp_overlap - acc_diff;
  if (denom <= 0.0)
    throw std::invalid_argument(
        "odds_ratio: overlap + acc_diff must be < 1 (no discordant mass "
        "left for the weaker model)");
  return (1.0 - exp_overlap + acc_diff) / denom;
}

ProcessFamily mcnemar_family_with_prior(const PriorBundle& bundle,
                                        double baseline_acc,
                                        McNemarVariant variant) {
  if (!std::isfinite(baseline_acc) || baseline_acc <= 0.0 ||
      baseline_acc >= 1.0)
    throw std::invalid_argument(
        "mcnemar_family_with_prior: baseline accuracy must be in (0, 1)");
  const PriorBundle b = bundle;
  auto agreement = [b, baseline_acc](double delta) {
    return predict_overlap(baseline_acc, delta, b, nullptr);
  };
  return mcnemar_family(agreement, 1.0 - baseline_acc, variant);
}

}  // namespace powcheck
