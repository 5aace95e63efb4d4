#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "powcheck/sim.hpp"
#include "powcheck/stat_tests.hpp"

namespace powcheck {

// Corpus-level BLEU on a 0-100 scale: clipped modified n-gram precisions up
// to order 4 aggregated over the corpus, exponential brevity penalty, no
// smoothing (any zero precision zeroes the score). Input is pre-tokenized
// text split on whitespace, case-sensitive, one reference per sentence.
struct BleuScore {
  double score = 0.0;
  std::array<double, 4> precisions{0.0, 0.0, 0.0, 0.0};
  double brevity_penalty = 0.0;
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;
};

BleuScore corpus_bleu(const std::vector<std::string>& references,
                      const std::vector<std::string>& hypotheses);

// One file line per sentence; blank lines are kept as empty sentences.
std::vector<std::string> read_sentences(const std::string& path);

// Effect of swapping the two systems' outputs on single sentences. deltas[i]
// is the change in BLEU(A) - BLEU(B) when only pair i is exchanged;
// additivity_r is the correlation between sum-of-deltas and the true
// recomputed change over random probe subsets.
struct SwapEffects {
  double bleu_a = 0.0;
  double bleu_b = 0.0;
  double delta_b = 0.0;  // BLEU(A) - BLEU(B)
  std::vector<double> deltas;
  double additivity_r = 1.0;
};

SwapEffects swap_effects(const std::vector<std::string>& references,
                         const std::vector<std::string>& hyps_a,
                         const std::vector<std::string>& hyps_b,
                         std::int64_t probe_subsets = 1000,
                         std::uint64_t probe_seed = 20180114);

// Point mass at zero (weight p0) mixed with Laplace(mu, b) for the nonzero
// swap effects. b0 = b * n captures the 1/n scaling of per-sentence effects.
struct LaplaceMixtureFit {
  double p0 = 1.0;
  double mu = 0.0;
  double b = 0.0;
  double b0 = 0.0;
  std::int64_t n = 0;
  std::int64_t n_nonzero = 0;
  bool has_laplace = false;
  std::vector<std::string> warnings;
};

LaplaceMixtureFit fit_mixture(std::span<const double> deltas,
                              double zero_tol = 1e-8);

struct MtGenSpec {
  std::int64_t n = 0;
  double delta_b = 0.0;  // true system difference in BLEU points
  double p0 = 0.0;       // probability a sentence swap changes nothing
  double b0 = 0.0;       // Laplace scale times n
};

// Draws n swap effects: zero with probability p0, else Laplace with
// mu = -2*delta_b / (n*(1-p0)) and b = b0/n, so the implied observed
// difference -sum(deltas)/2 has expectation delta_b.
std::vector<double> simulate_mt_dataset(const MtGenSpec& spec, RngStream& rng);

// Randomization test on swap effects: observed statistic is -sum(deltas)/2;
// null draws add the sum of a Bernoulli(1/2) subset of deltas; two-sided
// add-one p-value.
TestResult mt_randomization_test(std::span<const double> deltas,
                                 std::int64_t R, std::uint64_t seed);

class MtProcess final : public GenerativeProcess {
 public:
  MtProcess(const MtGenSpec& spec, std::int64_t R);

  double true_effect() const override { return spec_.delta_b; }
  RepOutcome run_rep(RngStream& rng) const override;

 private:
  MtGenSpec spec_;
  std::int64_t resamples_;
};

PowerReport mt_power(const MtGenSpec& spec, const SimulationConfig& config,
                     std::int64_t R = 2000);

// Family over delta_b at fixed (p0, b0); n comes from the grid.
ProcessFamily mt_family(double p0, double b0, std::int64_t R = 2000);

}  // namespace powcheck
