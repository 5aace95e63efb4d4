#pragma once

#include <cstdint>

#include "powcheck/sim.hpp"

namespace powcheck {

// Single-sample binomial scenario: n trials with success rate p0 + effect,
// analyzed with the exact two-sided binomial test against H0: p = p0.
class BinomialProcess final : public GenerativeProcess {
 public:
  BinomialProcess(std::int64_t n, double p0, double effect);

  double true_effect() const override { return effect_; }
  RepOutcome run_rep(RngStream& rng) const override;

 private:
  std::int64_t n_;
  double p0_;
  double effect_;
};

ProcessFamily binomial_family(double p0 = 0.5);

// Non-simulated power by enumerating the rejection region over k = 0..n,
// keeping only rejections whose effect sign matches (skipped when effect is
// 0, which makes this the exact size of the test).
double exact_binom_power(std::int64_t n, double p0, double effect,
                         double alpha);

}  // namespace powcheck
