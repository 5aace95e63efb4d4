#include "powcheck/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace powcheck {

namespace {

void validate(const SimulationConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0))
    throw std::invalid_argument("simulation: alpha must be in (0,1)");
  if (config.reps < 1)
    throw std::invalid_argument("simulation: reps must be >= 1");
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

struct WorkerError {
  std::int64_t rep = -1;
  std::string message;
};

// All reps into a rep-indexed vector; contiguous blocks per thread. The
// partition does not affect results because rep i always consumes
// substream(seed, i) and reduction happens serially afterwards.
void run_all_reps(const GenerativeProcess& process,
                  const SimulationConfig& config,
                  std::vector<RepOutcome>& outcomes) {
  const std::int64_t reps = config.reps;
  const int threads =
      static_cast<int>(std::min<std::int64_t>(resolve_threads(config.threads), reps));

  auto worker = [&](std::int64_t begin, std::int64_t end, WorkerError& err) {
    for (std::int64_t i = begin; i < end; ++i) {
      try {
        RngStream rng = RngStream::substream(config.seed, static_cast<std::uint64_t>(i));
        outcomes[static_cast<std::size_t>(i)] = process.run_rep(rng);
      } catch (const std::exception& e) {
        err.rep = i;
        err.message = e.what();
        return;
      }
    }
  };

  std::vector<WorkerError> errors(static_cast<std::size_t>(threads));
  if (threads <= 1) {
    worker(0, reps, errors[0]);
  } else {
    const std::int64_t chunk = (reps + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      const std::int64_t begin = static_cast<std::int64_t>(t) * chunk;
      const std::int64_t end = std::min(reps, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(worker, begin, end, std::ref(errors[static_cast<std::size_t>(t)]));
    }
    for (auto& th : pool) th.join();
  }

  const WorkerError* first = nullptr;
  for (const auto& e : errors)
    if (e.rep >= 0 && (!first || e.rep < first->rep)) first = &e;
  if (first) {
    std::ostringstream os;
    os << "simulation rep " << first->rep << ": " << first->message;
    throw std::runtime_error(os.str());
  }
}

PowerReport reduce(const GenerativeProcess& process,
                   const SimulationConfig& config,
                   const std::vector<RepOutcome>& outcomes) {
  const double e_star = process.true_effect();
  const int want_sign = sign_of(e_star);
  const bool sign_checked = want_sign != 0;

  PowerReport rep;
  rep.sign_checked = sign_checked;
  rep.estimand = sign_checked ? "power" : "type_i_rate";
  rep.true_effect = e_star;
  rep.n = config.n;
  rep.alpha = config.alpha;
  rep.reps = config.reps;
  rep.seed = config.seed;

  double type_m_sum = 0.0;
  std::int64_t wrong_sign = 0;
  for (const auto& o : outcomes) {
    if (!o.converged) {
      ++rep.n_unconverged;
      continue;
    }
    if (o.p_value <= config.alpha) {
      ++rep.n_significant;
      const bool sign_ok = !sign_checked || sign_of(o.effect) == want_sign;
      if (sign_ok) ++rep.n_detected;
      if (sign_checked) {
        if (sign_of(o.effect) != want_sign) ++wrong_sign;
        type_m_sum += std::abs(o.effect) / std::abs(e_star);
      }
    }
  }

  const double r = static_cast<double>(config.reps);
  rep.power = static_cast<double>(rep.n_detected) / r;
  rep.mc_stderr = std::sqrt(rep.power * (1.0 - rep.power) / r);

  if (config.compute_type_ms && sign_checked) {
    if (rep.n_significant > 0) {
      rep.type_m = type_m_sum / static_cast<double>(rep.n_significant);
      rep.type_s =
          static_cast<double>(wrong_sign) / static_cast<double>(rep.n_significant);
      if (rep.n_significant < 30)
        rep.diagnostics.push_back(
            "type_m/type_s based on fewer than 30 significant reps; unstable");
    } else {
      rep.diagnostics.push_back(
          "no significant reps; type_m/type_s not estimable");
    }
  } else if (config.compute_type_ms && !sign_checked) {
    rep.diagnostics.push_back(
        "true effect is 0; type_m/type_s undefined, reporting type-I rate");
  }
  if (rep.n_unconverged > 0) {
    std::ostringstream os;
    os << rep.n_unconverged << " of " << config.reps
       << " reps did not converge; counted as non-significant";
    rep.diagnostics.push_back(os.str());
  }
  return rep;
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("POWCHECK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

PowerReport estimate_power(const GenerativeProcess& process,
                           const SimulationConfig& config) {
  validate(config);
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(config.reps));
  run_all_reps(process, config, outcomes);
  return reduce(process, config, outcomes);
}

PowerReport estimate_type_m_s(const GenerativeProcess& process,
                              const SimulationConfig& config) {
  SimulationConfig cfg = config;
  cfg.compute_type_ms = true;
  return estimate_power(process, cfg);
}

double find_mde(const ProcessFamily& family, std::int64_t n,
                double target_power, const SimulationConfig& config,
                double tolerance) {
  validate(config);
  if (n < 1) throw std::invalid_argument("find_mde: n must be >= 1");
  if (!(target_power > config.alpha && target_power < 1.0))
    throw std::invalid_argument("find_mde: target_power must be in (alpha, 1)");
  if (!(tolerance > 0.0))
    throw std::invalid_argument("find_mde: tolerance must be positive");

  auto power_at = [&](double effect, std::uint64_t seed) {
    auto process = family.make(n, effect);
    SimulationConfig cfg = config;
    cfg.n = n;
    cfg.effect = effect;
    cfg.seed = seed;
    cfg.compute_type_ms = false;
    return estimate_power(*process, cfg).power;
  };

  const double cap = family.max_effect(n);
  if (!(cap > 0.0)) throw std::runtime_error("find_mde: infeasible at this n");
  if (power_at(cap, config.seed) < target_power)
    throw std::runtime_error("find_mde: infeasible at this n");

  // Candidate effects share config.seed: every rep re-uses the same uniforms
  // across candidates, so the power curve seen by the bisection is monotone
  // up to sampler granularity rather than Monte Carlo noise.
  double lo = 0.0, hi = cap;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (power_at(mid, config.seed) >= target_power)
      hi = mid;
    else
      lo = mid;
  }

  // Confirm the crossing away from the search seed; nudge up on failure.
  const std::uint64_t check_seed = mix64(config.seed ^ 0x4D44452D434B4BULL);
  while (hi < cap && power_at(hi, check_seed) < target_power) hi += tolerance;
  if (hi > cap) hi = cap;
  if (power_at(hi, check_seed) < target_power)
    throw std::runtime_error("find_mde: infeasible at this n");
  return hi;
}

PowerCurve power_curve(const ProcessFamily& family,
                       const std::vector<std::int64_t>& n_grid,
                       const std::vector<double>& effect_grid,
                       const SimulationConfig& config) {
  if (n_grid.empty() || effect_grid.empty())
    throw std::invalid_argument("power_curve: grids must be non-empty");
  PowerCurve curve;
  curve.n_grid = n_grid;
  curve.effect_grid = effect_grid;
  curve.cells.reserve(n_grid.size() * effect_grid.size());
  for (std::int64_t n : n_grid) {
    for (double effect : effect_grid) {
      PowerCell cell;
      cell.n = n;
      cell.effect = effect;
      try {
        auto process = family.make(n, effect);
        SimulationConfig cfg = config;
        cfg.n = n;
        cfg.effect = effect;
        cell.report = estimate_power(*process, cfg);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      curve.cells.push_back(std::move(cell));
    }
  }
  return curve;
}

}  // namespace powcheck
