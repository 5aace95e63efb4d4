#pragma once

#include <cstdint>

namespace powcheck {

// Counter-free xoshiro256++ stream with splitmix64 seeding. Simulation reps
// get independent streams via substream(seed, index), so serial and parallel
// execution over reps produce bit-identical draws.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  // Stream for one rep: mixes (seed, index) into a fresh generator state.
  static RngStream substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();

  // [0, 1), 53-bit resolution
  double next_double();

  // (0, 1), safe as a log() argument
  double next_double_open();

  bool next_bernoulli(double p);

  // standard normal, Box-Muller (two uniforms per variate, no cached spare)
  double next_normal();

  double next_laplace(double mu, double b);

  // exact Binomial(n, p) draw; O(sd) expected via inverse-CDF walk from the
  // mode, consuming exactly one uniform
  std::int64_t next_binomial(std::int64_t n, double p);

 private:
  std::uint64_t s_[4];
};

// splitmix64 finalizer; also used to derive auxiliary seeds
std::uint64_t mix64(std::uint64_t z);

}  // namespace powcheck
