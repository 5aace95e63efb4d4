#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "powcheck/accuracy.hpp"
#include "powcheck/sim.hpp"

namespace powcheck {

// Affine least-squares model over named predictors.
struct OlsModel {
  std::vector<std::string> predictor_names;
  std::vector<double> coefficients;  // aligned with predictor_names
  double intercept = 0.0;
  double r_squared = 0.0;
  std::int64_t n_observations = 0;

  // intercept + dot(coefficients, predictors); size must match
  double predict(std::span<const double> predictors) const;
};

// Least squares with intercept via a column-pivoted QR of the design matrix.
// rows[i] holds observation i's predictors, aligned with predictor_names.
// Rank deficiency raises std::invalid_argument naming the collinear columns.
OlsModel fit_ols(const std::vector<std::vector<double>>& rows,
                 const std::vector<double>& targets,
                 const std::vector<std::string>& predictor_names);

// Numeric table read from a CSV with a header row naming the columns.
struct RegressionData {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> rows;  // aligned with column_names
};

RegressionData read_regression_csv(const std::string& path);

// Regresses target_column on every other column.
OlsModel fit_ols(const RegressionData& data, const std::string& target_column);

enum class PriorSource { glue, squad2, user };

// Leaderboard-fitted priors: an overlap model over (min_acc, acc_diff) on
// the probability scale, and an expected-effect model over the baseline
// score. The GLUE effect model works in percentage points with per-task
// offsets; predict_effect_size normalizes so callers always see fractions.
struct PriorBundle {
  PriorSource source = PriorSource::user;
  OlsModel overlap;
  OlsModel effect_size;
  bool effect_in_percent = false;
  bool requires_task = false;
  std::vector<std::string> tasks;  // dummy levels; first is the reference
};

const PriorBundle& glue_priors();
const PriorBundle& squad2_priors();

// Expected agreement between two models with accuracies min_acc and
// min_acc + acc_diff. Clamped into [0, 1 - acc_diff] so the downstream
// contingency stays feasible; clamping and out-of-range inputs (outside
// [0.5, 1] x [0, 0.2]) append warnings when a sink is given.
double predict_overlap(double min_acc, double acc_diff,
                       const PriorBundle& bundle,
                       std::vector<std::string>* warnings = nullptr);

// Expected accuracy improvement (as a fraction) over a baseline at
// baseline_acc. The GLUE bundle needs a known task label; negative
// predictions are floored at 0 with a warning.
double predict_effect_size(double baseline_acc,
                           const std::optional<std::string>& task,
                           const PriorBundle& bundle,
                           std::vector<std::string>* warnings = nullptr);

// Implied ratio of the two discordant cells,
// (1 - exp_overlap + acc_diff) / (1 - exp_overlap - acc_diff).
double odds_ratio(double exp_overlap, double acc_diff);

// McNemar family whose agreement at each candidate effect is the bundle's
// overlap prediction at (baseline_acc, effect); candidate effects are capped
// at 1 - baseline_acc.
ProcessFamily mcnemar_family_with_prior(
    const PriorBundle& bundle, double baseline_acc,
    McNemarVariant variant = McNemarVariant::chi_square);

}  // namespace powcheck
