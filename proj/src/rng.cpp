#include "powcheck/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace powcheck {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

// splitmix64 step: advances state, returns mixed output
inline std::uint64_t splitmix_next(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  std::uint64_t s = z;
  return splitmix_next(s);
}

RngStream::RngStream(std::uint64_t seed) {
  std::uint64_t s = seed;
  // xoshiro seeding recipe: fill state from a splitmix64 chain
  s_[0] = splitmix_next(s);
  s_[1] = splitmix_next(s);
  s_[2] = splitmix_next(s);
  s_[3] = splitmix_next(s);
  // all-zero state is invalid for xoshiro
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = kGolden;
}

RngStream RngStream::substream(std::uint64_t seed, std::uint64_t index) {
  return RngStream(mix64(seed) ^ mix64(kGolden * (index + 1)));
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_double_open() {
  return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

bool RngStream::next_bernoulli(double p) {
  return next_double() < p;
}

double RngStream::next_normal() {
  const double u1 = next_double_open();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double RngStream::next_laplace(double mu, double b) {
  const double u = next_double_open() - 0.5;  // (-0.5, 0.5)
  const double s = (u < 0.0) ? -1.0 : 1.0;
  return mu - b * s * std::log(1.0 - 2.0 * std::abs(u));
}

std::int64_t RngStream::next_binomial(std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("next_binomial: n < 0");
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  // work with p <= 0.5, reflect at the end
  const bool flipped = p > 0.5;
  const double q = flipped ? 1.0 - p : p;
  const double u = next_double();

  std::int64_t k;
  if (n <= 64) {
    // per-trial counting on the same single uniform is not possible; small n
    // uses the plain inverse CDF from 0 (tail is short)
    double pm = std::pow(1.0 - q, static_cast<double>(n));
    double cum = pm;
    k = 0;
    const double ratio = q / (1.0 - q);
    while (u >= cum && k < n) {
      pm *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
      cum += pm;
      ++k;
    }
  } else {
    // inverse CDF walking outward from the mode; expected O(sqrt(n q))
    const std::int64_t mode = static_cast<std::int64_t>((static_cast<double>(n) + 1.0) * q);
    const double log_pm_mode = std::lgamma(static_cast<double>(n) + 1.0) -
                               std::lgamma(static_cast<double>(mode) + 1.0) -
                               std::lgamma(static_cast<double>(n - mode) + 1.0) +
                               static_cast<double>(mode) * std::log(q) +
                               static_cast<double>(n - mode) * std::log(1.0 - q);
    const double odds = q / (1.0 - q);
    double cum = std::exp(log_pm_mode);
    double pm_up = cum, pm_dn = cum;
    std::int64_t up = mode, dn = mode;
    k = mode;
    while (u >= cum) {
      bool moved = false;
      if (up < n) {
        pm_up *= odds * static_cast<double>(n - up) / static_cast<double>(up + 1);
        ++up;
        cum += pm_up;
        moved = true;
        if (u < cum) { k = up; break; }
      }
      if (dn > 0) {
        pm_dn *= static_cast<double>(dn) / (odds * static_cast<double>(n - dn + 1));
        --dn;
        cum += pm_dn;
        moved = true;
        if (u < cum) { k = dn; break; }
      }
      if (!moved) { k = up; break; }  // u in the fp-rounding residue
    }
  }
  return flipped ? n - k : k;
}

}  // namespace powcheck
