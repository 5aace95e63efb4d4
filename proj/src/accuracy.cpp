#include "powcheck/accuracy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace powcheck {

namespace {

constexpr double kSlack = 1e-12;

void trim(std::string& s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.back())) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && is_space(s[start])) ++start;
  s.erase(0, start);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    trim(line);
    lines.push_back(line);
  }
  // a trailing newline produces one empty phantom line; drop it
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::uint8_t> parse_flags(const std::string& path) {
  const auto lines = read_lines(path);
  std::vector<std::uint8_t> flags;
  flags.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i] == "0") {
      flags.push_back(0);
    } else if (lines[i] == "1") {
      flags.push_back(1);
    } else {
      std::ostringstream os;
      os << path << " line " << (i + 1) << ": expected 0 or 1, got '"
         << lines[i] << "'";
      throw std::runtime_error(os.str());
    }
  }
  return flags;
}

std::vector<std::string> parse_labels(const std::string& path) {
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      std::ostringstream os;
      os << path << " line " << (i + 1) << ": empty label";
      throw std::runtime_error(os.str());
    }
  }
  return lines;
}

void check_same_length(const std::string& path_a, std::size_t len_a,
                       const std::string& path_b, std::size_t len_b) {
  if (len_a == len_b) return;
  std::ostringstream os;
  os << "files differ in length: " << path_a << " has " << len_a
     << " lines, " << path_b << " has " << len_b;
  throw std::runtime_error(os.str());
}

double f1_from(double tp, double fp, double fn) {
  const double denom = 2.0 * tp + fp + fn;
  return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

}  // namespace

ContingencySpec contingency_from(double pa, double delta_acc,
                                 std::optional<double> baseline_acc) {
  if (!(pa >= 0.0 && pa <= 1.0))
    throw std::invalid_argument("contingency_from: agreement must be in [0,1]");
  if (std::abs(delta_acc) > 1.0 - pa + kSlack)
    throw std::invalid_argument(
        "contingency_from: effect exceeds 1 - agreement (infeasible)");
  ContingencySpec s;
  s.p_only_m2 = std::max(0.0, 0.5 * ((1.0 - pa) + delta_acc));
  // anchored on p_only_m2 so delta_acc() reproduces delta_acc to within one
  // rounding (a - (a - d) can still differ from d in the last ulp)
  s.p_only_m1 = std::max(0.0, s.p_only_m2 - delta_acc);
  if (baseline_acc) {
    if (!(*baseline_acc >= 0.0 && *baseline_acc <= 1.0))
      throw std::invalid_argument(
          "contingency_from: baseline accuracy must be in [0,1]");
    s.p_both_correct = *baseline_acc - s.p_only_m1;
    s.p_both_incorrect = pa - s.p_both_correct;
    if (s.p_both_correct < -kSlack || s.p_both_incorrect < -kSlack)
      throw std::invalid_argument(
          "contingency_from: baseline accuracy incompatible with agreement "
          "and effect");
    s.p_both_correct = std::max(0.0, s.p_both_correct);
    s.p_both_incorrect = std::max(0.0, s.p_both_incorrect);
  } else {
    s.p_both_correct = 0.5 * pa;
    s.p_both_incorrect = 0.5 * pa;
  }
  return s;
}

McNemarProcess::McNemarProcess(std::int64_t n, const ContingencySpec& spec,
                               McNemarVariant variant)
    : n_(n), spec_(spec), variant_(variant) {
  if (n < 1) throw std::invalid_argument("mcnemar process: n must be >= 1");
  const double total = spec.p_both_correct + spec.p_only_m1 + spec.p_only_m2 +
                       spec.p_both_incorrect;
  if (std::abs(total - 1.0) > 1e-9 || spec.p_both_correct < 0.0 ||
      spec.p_only_m1 < 0.0 || spec.p_only_m2 < 0.0 ||
      spec.p_both_incorrect < 0.0)
    throw std::invalid_argument(
        "mcnemar process: contingency cells must be nonnegative and sum to 1");
}

RepOutcome McNemarProcess::run_rep(RngStream& rng) const {
  const double pd = spec_.discordance();
  const std::int64_t m = rng.next_binomial(n_, pd);
  std::int64_t k = 0;
  if (m > 0 && pd > 0.0) k = rng.next_binomial(m, spec_.p_only_m2 / pd);
  const TestResult t = mcnemar_test(m - k, k, variant_, n_);
  return RepOutcome{t.p_value, t.observed_effect, true};
}

PowerReport mcnemar_power(double pa, double delta_acc, std::int64_t n,
                          const SimulationConfig& config,
                          McNemarVariant variant) {
  McNemarProcess process(n, contingency_from(pa, delta_acc), variant);
  SimulationConfig cfg = config;
  cfg.n = n;
  cfg.effect = delta_acc;
  return estimate_power(process, cfg);
}

ProcessFamily mcnemar_family(double pa, McNemarVariant variant) {
  ProcessFamily family;
  family.make = [pa, variant](std::int64_t n, double delta) {
    return std::make_unique<McNemarProcess>(n, contingency_from(pa, delta),
                                            variant);
  };
  family.max_effect = [pa](std::int64_t) { return 1.0 - pa; };
  return family;
}

ProcessFamily mcnemar_family(std::function<double(double)> agreement_fn,
                             double cap, McNemarVariant variant) {
  ProcessFamily family;
  family.make = [agreement_fn, variant](std::int64_t n, double delta) {
    return std::make_unique<McNemarProcess>(
        n, contingency_from(agreement_fn(delta), delta), variant);
  };
  family.max_effect = [cap](std::int64_t) { return cap; };
  return family;
}

PairedPredictions read_correctness_files(const std::string& m1_path,
                                         const std::string& m2_path) {
  PairedPredictions p;
  p.m1_correct = parse_flags(m1_path);
  p.m2_correct = parse_flags(m2_path);
  check_same_length(m1_path, p.m1_correct.size(), m2_path, p.m2_correct.size());
  return p;
}

PairedPredictions read_label_files(const std::string& gold_path,
                                   const std::string& m1_path,
                                   const std::string& m2_path) {
  const auto gold = parse_labels(gold_path);
  const auto m1 = parse_labels(m1_path);
  const auto m2 = parse_labels(m2_path);
  check_same_length(gold_path, gold.size(), m1_path, m1.size());
  check_same_length(gold_path, gold.size(), m2_path, m2.size());
  PairedPredictions p;
  p.m1_correct.reserve(gold.size());
  p.m2_correct.reserve(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    p.m1_correct.push_back(m1[i] == gold[i] ? 1 : 0);
    p.m2_correct.push_back(m2[i] == gold[i] ? 1 : 0);
  }
  return p;
}

EstimatedParams estimate_params(const PairedPredictions& preds) {
  if (preds.m1_correct.size() != preds.m2_correct.size())
    throw std::invalid_argument("estimate_params: prediction vectors differ in length");
  const std::int64_t n = preds.n();
  if (n < 1) throw std::invalid_argument("estimate_params: no instances");
  EstimatedParams out;
  out.n = n;
  for (std::int64_t i = 0; i < n; ++i) {
    const bool a = preds.m1_correct[static_cast<std::size_t>(i)] != 0;
    const bool b = preds.m2_correct[static_cast<std::size_t>(i)] != 0;
    if (a && b)
      ++out.n_both_correct;
    else if (a)
      ++out.n_only_m1;
    else if (b)
      ++out.n_only_m2;
    else
      ++out.n_both_incorrect;
  }
  const double nd = static_cast<double>(n);
  out.spec.p_both_correct = static_cast<double>(out.n_both_correct) / nd;
  out.spec.p_only_m1 = static_cast<double>(out.n_only_m1) / nd;
  out.spec.p_only_m2 = static_cast<double>(out.n_only_m2) / nd;
  out.spec.p_both_incorrect = static_cast<double>(out.n_both_incorrect) / nd;
  out.pa = out.spec.agreement();
  out.delta_acc = out.spec.delta_acc();
  return out;
}

LachenbruchBounds lachenbruch_mde(double baseline_acc, std::int64_t n,
                                  double target_power,
                                  const SimulationConfig& config,
                                  McNemarVariant variant) {
  if (!(baseline_acc > 0.0 && baseline_acc < 1.0))
    throw std::invalid_argument(
        "lachenbruch_mde: baseline accuracy must be in (0,1)");
  if (n < 10) throw std::invalid_argument("lachenbruch_mde: n must be >= 10");

  const double cap = 1.0 - baseline_acc;
  enum class Assumption { generous, midpoint, conservative };

  // Disagreement rate assumed for a candidate improvement d over baseline.
  const auto discordance_at = [baseline_acc](double d, Assumption a) {
    const double p2 = baseline_acc + d;
    const double hi =
        std::min(baseline_acc + p2, 2.0 - baseline_acc - p2);
    switch (a) {
      case Assumption::generous:
        return d;
      case Assumption::conservative:
        return hi;
      default:
        return 0.5 * (d + hi);
    }
  };

  const auto family_for = [&](Assumption a) {
    ProcessFamily family;
    family.make = [baseline_acc, a, discordance_at,
                   variant](std::int64_t n_inner, double d) {
      const double pd = discordance_at(d, a);
      ContingencySpec spec;
      spec.p_only_m2 = 0.5 * (pd + d);
      spec.p_only_m1 = std::max(0.0, 0.5 * (pd - d));
      spec.p_both_correct = 0.5 * (1.0 - pd);
      spec.p_both_incorrect = 0.5 * (1.0 - pd);
      return std::make_unique<McNemarProcess>(n_inner, spec, variant);
    };
    family.max_effect = [cap](std::int64_t) { return cap; };
    return family;
  };

  const auto solve = [&](Assumption a, const char* name) {
    try {
      return find_mde(family_for(a), n, target_power, config);
    } catch (const std::runtime_error& e) {
      if (std::string(e.what()).find("infeasible") != std::string::npos)
        throw std::runtime_error(std::string("lachenbruch_mde: ") + name +
                                 " bound infeasible at this n");
      throw;
    }
  };

  LachenbruchBounds out;
  out.mde_lower = solve(Assumption::generous, "lower");
  out.mde_mid = solve(Assumption::midpoint, "midpoint");
  out.mde_upper = solve(Assumption::conservative, "upper");
  return out;
}

namespace {

void validate_f1_spec(const PerClassContingency& spec,
                      std::vector<std::string>& warnings) {
  const std::size_t k = spec.class_probs.size();
  if (k == 0 || spec.cells.size() != k)
    throw std::invalid_argument(
        "f1 spec: class_probs and cells must be non-empty and equal length");
  if (spec.positive_class >= k)
    throw std::invalid_argument("f1 spec: positive_class out of range");
  double prob_total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double p = spec.class_probs[c];
    if (p < 0.0)
      throw std::invalid_argument("f1 spec: negative class probability");
    prob_total += p;
    const ClassCells& cc = spec.cells[c];
    if (cc.p_both_pos < 0.0 || cc.p_only_m1_pos < 0.0 ||
        cc.p_only_m2_pos < 0.0 || cc.p_neither_pos < 0.0)
      throw std::invalid_argument("f1 spec: negative cell probability");
    const double cell_total =
        cc.p_both_pos + cc.p_only_m1_pos + cc.p_only_m2_pos + cc.p_neither_pos;
    if (p == 0.0) {
      if (cell_total > 0.0) {
        std::ostringstream os;
        os << "class " << c
           << " has probability 0 but nonzero cells; it will never be sampled";
        warnings.push_back(os.str());
        if (std::abs(cell_total - 1.0) > 1e-9)
          throw std::invalid_argument("f1 spec: cells of a class must sum to 1");
      }
    } else if (std::abs(cell_total - 1.0) > 1e-9) {
      throw std::invalid_argument("f1 spec: cells of a class must sum to 1");
    }
  }
  if (std::abs(prob_total - 1.0) > 1e-9)
    throw std::invalid_argument("f1 spec: class probabilities must sum to 1");
  if (spec.class_probs[spec.positive_class] <= 0.0)
    throw std::invalid_argument(
        "f1 spec: positive class must have positive probability");
}

class F1Process final : public GenerativeProcess {
 public:
  F1Process(const PerClassContingency& spec, std::int64_t n, std::int64_t R)
      : spec_(spec), n_(n), resamples_(R),
        true_effect_(f1_population_effect(spec)) {
    if (n < 1) throw std::invalid_argument("f1_power_sim: n must be >= 1");
    if (R < 100)
      throw std::invalid_argument("f1_power_sim: R must be >= 100");
    class_cum_.reserve(spec.class_probs.size());
    double acc = 0.0;
    for (double p : spec.class_probs) {
      acc += p;
      class_cum_.push_back(acc);
    }
    class_cum_.back() = 1.0;
  }

  double true_effect() const override { return true_effect_; }

  RepOutcome run_rep(RngStream& rng) const override {
    // tallies by (true class is positive?, which models predict positive)
    std::int64_t tp_both = 0, tp_only1 = 0, tp_only2 = 0, fn_both = 0;
    std::int64_t fp_both = 0, fp_only1 = 0, fp_only2 = 0;
    for (std::int64_t i = 0; i < n_; ++i) {
      const double u = rng.next_double();
      std::size_t c = 0;
      while (u >= class_cum_[c] && c + 1 < class_cum_.size()) ++c;
      const ClassCells& cc = spec_.cells[c];
      const double v = rng.next_double();
      const bool is_pos = c == spec_.positive_class;
      if (v < cc.p_both_pos) {
        (is_pos ? tp_both : fp_both)++;
      } else if (v < cc.p_both_pos + cc.p_only_m1_pos) {
        (is_pos ? tp_only1 : fp_only1)++;
      } else if (v < cc.p_both_pos + cc.p_only_m1_pos + cc.p_only_m2_pos) {
        (is_pos ? tp_only2 : fp_only2)++;
      } else if (is_pos) {
        ++fn_both;
      }
    }

    const auto stat_from = [&](std::int64_t a, std::int64_t b, std::int64_t c,
                               std::int64_t d) {
      // a/b: positive-class discordants credited to m1/m2; c/d: same for
      // false positives
      const double tp1 = static_cast<double>(tp_both + a);
      const double tp2 = static_cast<double>(tp_both + b);
      const double fp1 = static_cast<double>(fp_both + c);
      const double fp2 = static_cast<double>(fp_both + d);
      const double fn1 = static_cast<double>(fn_both + b);
      const double fn2 = static_cast<double>(fn_both + a);
      return f1_from(tp2, fp2, fn2) - f1_from(tp1, fp1, fn1);
    };

    const double obs = stat_from(tp_only1, tp_only2, fp_only1, fp_only2);
    const double thresh = std::abs(obs) - 1e-12 * (std::abs(obs) + 1.0);
    std::int64_t count = 0;
    for (std::int64_t t = 0; t < resamples_; ++t) {
      // swapping an instance's prediction pair moves it to the mirrored
      // discordant category; concordant instances are unaffected
      const std::int64_t ka = rng.next_binomial(tp_only1, 0.5);
      const std::int64_t kb = rng.next_binomial(tp_only2, 0.5);
      const std::int64_t kc = rng.next_binomial(fp_only1, 0.5);
      const std::int64_t kd = rng.next_binomial(fp_only2, 0.5);
      const double s = stat_from(tp_only1 - ka + kb, tp_only2 - kb + ka,
                                 fp_only1 - kc + kd, fp_only2 - kd + kc);
      if (std::abs(s) >= thresh) ++count;
    }
    RepOutcome out;
    out.p_value = static_cast<double>(1 + count) /
                  static_cast<double>(resamples_ + 1);
    out.effect = obs;
    return out;
  }

 private:
  PerClassContingency spec_;
  std::int64_t n_;
  std::int64_t resamples_;
  double true_effect_;
  std::vector<double> class_cum_;
};

}  // namespace

double f1_population_effect(const PerClassContingency& spec) {
  double tp1 = 0.0, tp2 = 0.0, fp1 = 0.0, fp2 = 0.0, fn1 = 0.0, fn2 = 0.0;
  for (std::size_t c = 0; c < spec.class_probs.size(); ++c) {
    const double p = spec.class_probs[c];
    const ClassCells& cc = spec.cells[c];
    const double m1_pos = cc.p_both_pos + cc.p_only_m1_pos;
    const double m2_pos = cc.p_both_pos + cc.p_only_m2_pos;
    if (c == spec.positive_class) {
      tp1 += p * m1_pos;
      tp2 += p * m2_pos;
      fn1 += p * (1.0 - m1_pos);
      fn2 += p * (1.0 - m2_pos);
    } else {
      fp1 += p * m1_pos;
      fp2 += p * m2_pos;
    }
  }
  return f1_from(tp2, fp2, fn2) - f1_from(tp1, fp1, fn1);
}

PowerReport f1_power_sim(const PerClassContingency& spec, std::int64_t n,
                         const SimulationConfig& config, std::int64_t R) {
  std::vector<std::string> warnings;
  validate_f1_spec(spec, warnings);
  F1Process process(spec, n, R);
  SimulationConfig cfg = config;
  cfg.n = n;
  cfg.effect = process.true_effect();
  PowerReport report = estimate_power(process, cfg);
  report.diagnostics.insert(report.diagnostics.end(), warnings.begin(),
                            warnings.end());
  return report;
}

}  // namespace powcheck
