#include "powcheck/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace powcheck {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) toks.emplace_back(line, i, j - i);
    i = j;
  }
  return toks;
}

using NgramCounts = std::unordered_map<std::string, std::int64_t>;

NgramCounts count_ngrams(const std::vector<std::string>& toks, int order) {
  NgramCounts counts;
  if (static_cast<int>(toks.size()) < order) return counts;
  for (std::size_t i = 0; i + order <= toks.size(); ++i) {
    std::string key = toks[i];
    for (int k = 1; k < order; ++k) {
      key.push_back('\x1f');
      key += toks[i + k];
    }
    ++counts[key];
  }
  return counts;
}

// Clipped n-gram matches and totals of one hypothesis against its reference,
// plus lengths: the per-sentence sufficient statistics of corpus BLEU.
struct SentenceStats {
  std::array<std::int64_t, 4> match{0, 0, 0, 0};
  std::array<std::int64_t, 4> total{0, 0, 0, 0};
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;
};

SentenceStats sentence_stats(const std::string& ref, const std::string& hyp) {
  const auto ref_toks = tokenize(ref);
  const auto hyp_toks = tokenize(hyp);
  SentenceStats s;
  s.ref_len = static_cast<std::int64_t>(ref_toks.size());
  s.hyp_len = static_cast<std::int64_t>(hyp_toks.size());
  for (int order = 1; order <= 4; ++order) {
    const std::int64_t total =
        static_cast<std::int64_t>(hyp_toks.size()) - order + 1;
    if (total <= 0) continue;
    s.total[order - 1] = total;
    const NgramCounts ref_counts = count_ngrams(ref_toks, order);
    const NgramCounts hyp_counts = count_ngrams(hyp_toks, order);
    std::int64_t matched = 0;
    for (const auto& [key, count] : hyp_counts) {
      const auto it = ref_counts.find(key);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    s.match[order - 1] = matched;
  }
  return s;
}

struct Aggregate {
  std::array<std::int64_t, 4> match{0, 0, 0, 0};
  std::array<std::int64_t, 4> total{0, 0, 0, 0};
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;

  void add(const SentenceStats& s) {
    for (int k = 0; k < 4; ++k) {
      match[k] += s.match[k];
      total[k] += s.total[k];
    }
    hyp_len += s.hyp_len;
    ref_len += s.ref_len;
  }
  void sub(const SentenceStats& s) {
    for (int k = 0; k < 4; ++k) {
      match[k] -= s.match[k];
      total[k] -= s.total[k];
    }
    hyp_len -= s.hyp_len;
    ref_len -= s.ref_len;
  }
};

BleuScore score_from(const Aggregate& a) {
  BleuScore b;
  b.hyp_len = a.hyp_len;
  b.ref_len = a.ref_len;
  double log_prec_sum = 0.0;
  bool all_positive = true;
  for (int k = 0; k < 4; ++k) {
    const double p =
        a.total[k] > 0
            ? static_cast<double>(a.match[k]) / static_cast<double>(a.total[k])
            : 0.0;
    b.precisions[static_cast<std::size_t>(k)] = p;
    if (p > 0.0)
      log_prec_sum += std::log(p);
    else
      all_positive = false;
  }
  if (a.hyp_len == 0) {
    b.brevity_penalty = 0.0;
    b.score = 0.0;
    return b;
  }
  b.brevity_penalty =
      a.hyp_len >= a.ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(a.ref_len) /
                               static_cast<double>(a.hyp_len));
  b.score = all_positive
                ? 100.0 * b.brevity_penalty * std::exp(0.25 * log_prec_sum)
                : 0.0;
  return b;
}

void check_aligned(std::size_t refs, std::size_t hyps, const char* what) {
  if (refs != hyps) {
    std::ostringstream os;
    os << what << ": corpora misaligned (" << refs << " references vs " << hyps
       << " hypotheses)";
    throw std::invalid_argument(os.str());
  }
  if (refs == 0) {
    std::ostringstream os;
    os << what << ": empty corpus";
    throw std::invalid_argument(os.str());
  }
}

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  // degenerate probes (e.g. identical systems) are trivially additive
  if (sxx <= 0.0 || syy <= 0.0) return 1.0;
  return sxy / std::sqrt(sxx * syy);
}

void validate_mt_spec(const MtGenSpec& spec) {
  if (spec.n < 1)
    throw std::invalid_argument("mt spec: n must be >= 1");
  if (spec.p0 < 0.0 || spec.p0 > 1.0)
    throw std::invalid_argument("mt spec: p0 must be in [0,1]");
  if (spec.b0 < 0.0)
    throw std::invalid_argument("mt spec: b0 must be >= 0");
  if (spec.p0 >= 1.0 && spec.delta_b != 0.0)
    throw std::invalid_argument(
        "mt spec: p0 = 1 cannot produce a nonzero delta_b (infeasible)");
}

}  // namespace

std::vector<std::string> read_sentences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

BleuScore corpus_bleu(const std::vector<std::string>& references,
                      const std::vector<std::string>& hypotheses) {
  check_aligned(references.size(), hypotheses.size(), "corpus_bleu");
  Aggregate agg;
  for (std::size_t i = 0; i < references.size(); ++i)
    agg.add(sentence_stats(references[i], hypotheses[i]));
  return score_from(agg);
}

SwapEffects swap_effects(const std::vector<std::string>& references,
                         const std::vector<std::string>& hyps_a,
                         const std::vector<std::string>& hyps_b,
                         std::int64_t probe_subsets, std::uint64_t probe_seed) {
  check_aligned(references.size(), hyps_a.size(), "swap_effects");
  check_aligned(references.size(), hyps_b.size(), "swap_effects");
  if (probe_subsets < 0)
    throw std::invalid_argument("swap_effects: probe_subsets must be >= 0");

  const std::size_t n = references.size();
  std::vector<SentenceStats> stats_a(n), stats_b(n);
  Aggregate agg_a, agg_b;
  for (std::size_t i = 0; i < n; ++i) {
    stats_a[i] = sentence_stats(references[i], hyps_a[i]);
    stats_b[i] = sentence_stats(references[i], hyps_b[i]);
    agg_a.add(stats_a[i]);
    agg_b.add(stats_b[i]);
  }

  SwapEffects out;
  out.bleu_a = score_from(agg_a).score;
  out.bleu_b = score_from(agg_b).score;
  out.delta_b = out.bleu_a - out.bleu_b;
  out.deltas.resize(n);

  // single-pair swap: exchange pair i's sufficient statistics, re-score
  for (std::size_t i = 0; i < n; ++i) {
    Aggregate a = agg_a, b = agg_b;
    a.sub(stats_a[i]);
    a.add(stats_b[i]);
    b.sub(stats_b[i]);
    b.add(stats_a[i]);
    out.deltas[i] = (score_from(a).score - score_from(b).score) - out.delta_b;
  }

  if (probe_subsets > 0) {
    RngStream rng(mix64(probe_seed) ^ 0x61646474ULL);
    std::vector<double> predicted, actual;
    predicted.reserve(static_cast<std::size_t>(probe_subsets));
    actual.reserve(static_cast<std::size_t>(probe_subsets));
    for (std::int64_t t = 0; t < probe_subsets; ++t) {
      Aggregate a = agg_a, b = agg_b;
      double sum = 0.0;
      std::size_t i = 0;
      while (i < n) {
        std::uint64_t bits = rng.next_u64();
        const std::size_t stop = std::min(n, i + 64);
        for (; i < stop; ++i, bits >>= 1) {
          if (bits & 1u) {
            sum += out.deltas[i];
            a.sub(stats_a[i]);
            a.add(stats_b[i]);
            b.sub(stats_b[i]);
            b.add(stats_a[i]);
          }
        }
      }
      predicted.push_back(sum);
      actual.push_back((score_from(a).score - score_from(b).score) -
                       out.delta_b);
    }
    out.additivity_r = pearson_r(predicted, actual);
  }
  return out;
}

LaplaceMixtureFit fit_mixture(std::span<const double> deltas,
                              double zero_tol) {
  if (deltas.empty())
    throw std::invalid_argument("fit_mixture: no effects given");
  if (zero_tol < 0.0)
    throw std::invalid_argument("fit_mixture: zero_tol must be >= 0");

  LaplaceMixtureFit fit;
  fit.n = static_cast<std::int64_t>(deltas.size());
  std::vector<double> nonzero;
  for (double d : deltas)
    if (std::abs(d) > zero_tol) nonzero.push_back(d);
  fit.n_nonzero = static_cast<std::int64_t>(nonzero.size());
  fit.p0 = 1.0 - static_cast<double>(fit.n_nonzero) /
                     static_cast<double>(fit.n);
  if (nonzero.empty()) return fit;  // pure point mass, no Laplace component

  fit.has_laplace = true;
  std::sort(nonzero.begin(), nonzero.end());
  const std::size_t m = nonzero.size();
  fit.mu = m % 2 == 1 ? nonzero[m / 2]
                      : 0.5 * (nonzero[m / 2 - 1] + nonzero[m / 2]);
  double abs_dev = 0.0;
  for (double d : nonzero) abs_dev += std::abs(d - fit.mu);
  fit.b = abs_dev / static_cast<double>(m);
  fit.b0 = fit.b * static_cast<double>(fit.n);
  if (fit.n_nonzero < 20)
    fit.warnings.push_back(
        "fewer than 20 nonzero effects; Laplace fit may be unstable");
  return fit;
}

std::vector<double> simulate_mt_dataset(const MtGenSpec& spec,
                                        RngStream& rng) {
  validate_mt_spec(spec);
  const double nd = static_cast<double>(spec.n);
  const double mu =
      spec.p0 < 1.0 ? -2.0 * spec.delta_b / (nd * (1.0 - spec.p0)) : 0.0;
  const double b = spec.b0 / nd;
  std::vector<double> deltas(static_cast<std::size_t>(spec.n), 0.0);
  for (auto& d : deltas)
    if (!rng.next_bernoulli(spec.p0)) d = rng.next_laplace(mu, b);
  return deltas;
}

TestResult mt_randomization_test(std::span<const double> deltas,
                                 std::int64_t R, std::uint64_t seed) {
  if (deltas.empty())
    throw std::invalid_argument("mt_randomization_test: no effects given");
  if (R < 100)
    throw std::invalid_argument("mt_randomization_test: R must be >= 100");

  double sum = 0.0;
  std::vector<double> nonzero;  // zero effects never move the statistic
  for (double d : deltas) {
    sum += d;
    if (d != 0.0) nonzero.push_back(d);
  }
  const double obs = -0.5 * sum;
  const double obs_abs = std::abs(obs);
  const double thresh = obs_abs - 1e-12 * (obs_abs + 1.0);

  RngStream rng(mix64(seed) ^ 0x6D742D72616E64ULL);
  const std::size_t m = nonzero.size();
  std::int64_t count = 0;
  for (std::int64_t t = 0; t < R; ++t) {
    double s = obs;
    std::size_t i = 0;
    while (i < m) {
      std::uint64_t bits = rng.next_u64();
      const std::size_t stop = std::min(m, i + 64);
      for (; i < stop; ++i, bits >>= 1)
        if (bits & 1u) s += nonzero[i];
    }
    if (std::abs(s) >= thresh) ++count;
  }

  TestResult r;
  r.test_name = "mt_randomization";
  r.statistic = obs;
  r.observed_effect = obs;
  r.effect_sign = (obs > 0.0) - (obs < 0.0);
  r.p_value = static_cast<double>(1 + count) / static_cast<double>(R + 1);
  return r;
}

MtProcess::MtProcess(const MtGenSpec& spec, std::int64_t R)
    : spec_(spec), resamples_(R) {
  validate_mt_spec(spec);
  if (R < 100) throw std::invalid_argument("mt process: R must be >= 100");
}

RepOutcome MtProcess::run_rep(RngStream& rng) const {
  const std::vector<double> deltas = simulate_mt_dataset(spec_, rng);
  const TestResult t =
      mt_randomization_test(deltas, resamples_, rng.next_u64());
  return RepOutcome{t.p_value, t.observed_effect, true};
}

PowerReport mt_power(const MtGenSpec& spec, const SimulationConfig& config,
                     std::int64_t R) {
  MtProcess process(spec, R);
  SimulationConfig cfg = config;
  cfg.n = spec.n;
  cfg.effect = spec.delta_b;
  return estimate_power(process, cfg);
}

ProcessFamily mt_family(double p0, double b0, std::int64_t R) {
  ProcessFamily family;
  family.make = [p0, b0, R](std::int64_t n, double effect) {
    return std::make_unique<MtProcess>(MtGenSpec{n, effect, p0, b0}, R);
  };
  // BLEU differences live on the 100-point score scale
  family.max_effect = [](std::int64_t) { return 100.0; };
  return family;
}

}  // namespace powcheck
