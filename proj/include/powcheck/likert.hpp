#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "powcheck/sim.hpp"

namespace powcheck {

// Generating parameters of the crossed random-effects rating model
//   Y = beta0 + W0_w + I0_i + (beta1 + W1_w + I1_i) * x + e,
// with condition code x = -1/2 (baseline) or +1/2 (treatment), so beta1 is
// the between-condition mean difference and beta0 the grand mean, both on
// the [0,1] rating scale. No correlation between intercepts and slopes.
struct LikertParams {
  double beta0 = 0.5;
  double beta1 = 0.0;
  double sigma_w0 = 0.0;  // worker intercept sd
  double sigma_w1 = 0.0;  // worker slope sd
  double sigma_i0 = 0.0;  // item intercept sd
  double sigma_i1 = 0.0;  // item slope sd
  double sigma_e = 0.0;   // residual sd
};

LikertParams high_variance_preset(double beta0 = 0.5, double beta1 = 0.0);
LikertParams low_variance_preset(double beta0 = 0.5, double beta1 = 0.0);

struct RatingRow {
  std::int32_t worker = 0;
  std::int32_t item = 0;
  double x = 0.0;
  double rating = 0.0;
};

struct RatingsTable {
  std::vector<RatingRow> rows;
  std::int32_t n_workers = 0;
  std::int32_t n_items = 0;
  // label tables are empty for simulated data (ids are the labels)
  std::vector<std::string> worker_labels;
  std::vector<std::string> item_labels;
  // lexicographic order matches the numeric coding ("-0.5" < "0.5")
  std::array<std::string, 2> condition_labels{"-0.5", "0.5"};
};

// Fully crossed design: every worker rates every item under both conditions.
// Draw order is fixed (worker intercepts, worker slopes, item intercepts,
// item slopes, then one residual per row in row order); draws happen even
// for zero sigmas so streams stay aligned across parameter values.
RatingsTable simulate_ratings(const LikertParams& params,
                              std::int32_t n_workers, std::int32_t n_items,
                              RngStream& rng);

// CSV with header columns worker,item,condition,rating (any order, no quoted
// fields). The two distinct condition labels are sorted and coded -1/2, +1/2.
RatingsTable read_ratings_csv(const std::string& path);

struct LmmFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double se_beta0 = 0.0;
  double se_beta1 = 0.0;
  double t = 0.0;  // beta1 / se_beta1
  double sigma_w0 = 0.0;
  double sigma_w1 = 0.0;
  double sigma_i0 = 0.0;
  double sigma_i1 = 0.0;
  double sigma_e = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// Maximum-likelihood fit of the model above. beta and sigma_e are profiled
// out analytically; the four variance ratios sigma_k^2/sigma_e^2 are
// optimized on log scale by Nelder-Mead from two fixed starts. Complete
// crossed tables use a closed-form likelihood; anything else goes through a
// dense factorization of the same objective.
LmmFit fit_lmm(const RatingsTable& data);

// Profiled -2 log-likelihood and GLS fixed effects at fixed log variance
// ratios (-inf allowed, meaning a ratio of exactly 0). Exposed for tests and
// optimizer sanity checks.
struct LmmProfilePoint {
  double neg2ll = 0.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double se_beta1 = 0.0;
  double sigma_e = 0.0;
};
LmmProfilePoint lmm_profile_at(const RatingsTable& data,
                               const std::array<double, 4>& log_ratios);

// Strictly t > 1.96; a negative effect, however large, is not a detection,
// and unconverged fits never detect.
bool lmm_detect(const LmmFit& fit);

// Detection rate over simulated experiments: simulate_ratings -> fit_lmm ->
// lmm_detect. The threshold is the fixed t > 1.96 rule (config.alpha is
// ignored; the report echoes the implied one-sided tail).
PowerReport likert_power(const LikertParams& params, std::int32_t n_workers,
                         std::int32_t n_items, const SimulationConfig& config);

}  // namespace powcheck
