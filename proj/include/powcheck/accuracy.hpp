#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "powcheck/sim.hpp"
#include "powcheck/stat_tests.hpp"

namespace powcheck {

// Joint outcome distribution of two classifiers on one instance.
struct ContingencySpec {
  double p_both_correct = 0.0;
  double p_only_m1 = 0.0;
  double p_only_m2 = 0.0;
  double p_both_incorrect = 0.0;

  double agreement() const { return p_both_correct + p_both_incorrect; }
  double delta_acc() const { return p_only_m2 - p_only_m1; }
  double discordance() const { return p_only_m1 + p_only_m2; }
};

// Build a spec from agreement rate and accuracy difference (model 2 minus
// model 1). Off-diagonals are determined: p_only_m2 = ((1-pa)+delta)/2.
// The diagonal comes from model 1's accuracy when given, else is split
// evenly; the paired test never reads it.
ContingencySpec contingency_from(double pa, double delta_acc,
                                 std::optional<double> baseline_acc = std::nullopt);

// Paired-accuracy process: the discordant count is Binomial(n, p_discordant)
// and the model-2-favorable share of it is Binomial(m, p_only_m2 / p_disc),
// which together reproduce multinomial sampling of the cells the test reads.
class McNemarProcess final : public GenerativeProcess {
 public:
  McNemarProcess(std::int64_t n, const ContingencySpec& spec,
                 McNemarVariant variant);

  double true_effect() const override { return spec_.delta_acc(); }
  RepOutcome run_rep(RngStream& rng) const override;

 private:
  std::int64_t n_;
  ContingencySpec spec_;
  McNemarVariant variant_;
};

PowerReport mcnemar_power(
    double pa, double delta_acc, std::int64_t n, const SimulationConfig& config,
    McNemarVariant variant = McNemarVariant::exact_conditional);

// Family over candidate accuracy differences at a fixed agreement rate;
// feasible effects are capped at 1 - pa.
ProcessFamily mcnemar_family(
    double pa, McNemarVariant variant = McNemarVariant::exact_conditional);

// Family where the agreement rate follows the candidate effect (e.g. a
// fitted overlap prior); cap bounds the search, agreement_fn must keep
// contingency_from feasible over (0, cap].
ProcessFamily mcnemar_family(std::function<double(double delta)> agreement_fn,
                             double cap, McNemarVariant variant);

// Aligned per-instance correctness of the two models.
struct PairedPredictions {
  std::vector<std::uint8_t> m1_correct;
  std::vector<std::uint8_t> m2_correct;
  std::int64_t n() const { return static_cast<std::int64_t>(m1_correct.size()); }
};

// Files with one 0/1 correctness flag per line, aligned across models.
PairedPredictions read_correctness_files(const std::string& m1_path,
                                         const std::string& m2_path);

// Files with one label per line, scored against an aligned gold file.
PairedPredictions read_label_files(const std::string& gold_path,
                                   const std::string& m1_path,
                                   const std::string& m2_path);

struct EstimatedParams {
  double pa = 0.0;
  double delta_acc = 0.0;
  ContingencySpec spec;
  std::int64_t n = 0;
  std::int64_t n_both_correct = 0;
  std::int64_t n_only_m1 = 0;
  std::int64_t n_only_m2 = 0;
  std::int64_t n_both_incorrect = 0;
};

EstimatedParams estimate_params(const PairedPredictions& preds);

// MDE bracket under three assumptions about how much the models disagree:
// most generous (disagreement only where the improvement lives), midpoint
// (average of the two extremes), most conservative (maximum disagreement
// compatible with the accuracies).
struct LachenbruchBounds {
  double mde_lower = 0.0;
  double mde_mid = 0.0;
  double mde_upper = 0.0;
};

LachenbruchBounds lachenbruch_mde(
    double baseline_acc, std::int64_t n, double target_power,
    const SimulationConfig& config,
    McNemarVariant variant = McNemarVariant::exact_conditional);

// Per-class joint distribution of "model predicts the positive class",
// conditional on the true class. Cells of each class sum to 1 (a class with
// probability 0 may instead be all-zero).
struct ClassCells {
  double p_both_pos = 0.0;
  double p_only_m1_pos = 0.0;
  double p_only_m2_pos = 0.0;
  double p_neither_pos = 0.0;
};

struct PerClassContingency {
  std::vector<double> class_probs;
  std::vector<ClassCells> cells;
  std::size_t positive_class = 0;
};

// Population F1 difference (model 2 minus model 1) implied by the cell
// probabilities.
double f1_population_effect(const PerClassContingency& spec);

// Power for a positive-class F1 comparison: each rep samples labels and
// paired predictions, then tests the F1 difference with a randomization test
// that swaps each instance's prediction pair with probability 1/2 (R inner
// resamples, add-one p-value).
PowerReport f1_power_sim(const PerClassContingency& spec, std::int64_t n,
                         const SimulationConfig& config, std::int64_t R = 2000);

}  // namespace powcheck
