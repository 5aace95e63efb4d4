#include "powcheck/binomial.hpp"

#include <cmath>
#include <stdexcept>

#include "powcheck/stat_tests.hpp"

namespace powcheck {

namespace {

void check_params(std::int64_t n, double p0, double effect) {
  if (n < 1) throw std::invalid_argument("binomial: n must be >= 1");
  if (p0 <= 0.0 || p0 >= 1.0)
    throw std::invalid_argument("binomial: p0 must be in (0,1)");
  const double p = p0 + effect;
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("binomial: p0 + effect outside [0,1]");
}

double binom_pmf(std::int64_t k, std::int64_t n, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  return std::exp(std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) -
                  std::lgamma(nd - kd + 1.0) + kd * std::log(p) +
                  (nd - kd) * std::log1p(-p));
}

}  // namespace

BinomialProcess::BinomialProcess(std::int64_t n, double p0, double effect)
    : n_(n), p0_(p0), effect_(effect) {
  check_params(n, p0, effect);
}

RepOutcome BinomialProcess::run_rep(RngStream& rng) const {
  const std::int64_t k = rng.next_binomial(n_, p0_ + effect_);
  const TestResult t = binom_test(k, n_, p0_);
  return RepOutcome{t.p_value, t.observed_effect, true};
}

ProcessFamily binomial_family(double p0) {
  ProcessFamily family;
  family.make = [p0](std::int64_t n, double effect) {
    return std::make_unique<BinomialProcess>(n, p0, effect);
  };
  family.max_effect = [p0](std::int64_t) { return 1.0 - p0; };
  return family;
}

double exact_binom_power(std::int64_t n, double p0, double effect,
                         double alpha) {
  check_params(n, p0, effect);
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("exact_binom_power: alpha must be in (0,1)");
  const double p_true = p0 + effect;
  const int want_sign = (effect > 0.0) - (effect < 0.0);
  double power = 0.0;
  for (std::int64_t k = 0; k <= n; ++k) {
    if (binom_two_sided_p(k, n, p0) > alpha) continue;
    const double obs = static_cast<double>(k) / static_cast<double>(n) - p0;
    const int obs_sign = (obs > 0.0) - (obs < 0.0);
    if (want_sign != 0 && obs_sign != want_sign) continue;
    power += binom_pmf(k, n, p_true);
  }
  return power;
}

}  // namespace powcheck
