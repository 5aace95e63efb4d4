#include "powcheck/cli.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "powcheck/accuracy.hpp"
#include "powcheck/binomial.hpp"
#include "powcheck/bleu.hpp"
#include "powcheck/likert.hpp"
#include "powcheck/priors.hpp"
#include "powcheck/report.hpp"
#include "powcheck/rng.hpp"
#include "powcheck/sim.hpp"

namespace powcheck {

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

bool is_set(double v) { return !std::isnan(v); }

enum class Leaf {
  none,
  power_accuracy,
  power_bleu,
  power_likert,
  power_binomial,
  mde_accuracy,
  mde_binomial,
  fit_accuracy,
  fit_bleu,
  fit_likert,
  sim_accuracy,
  sim_bleu,
  sim_likert,
  sim_binomial,
  report_verb,
};

// One flat bag of flag targets; exactly one leaf parses per invocation, so
// fields are never contended. Doubles use NaN as the "not given" sentinel.
struct Opts {
  Leaf leaf = Leaf::none;

  // shared simulation controls
  double alpha = 0.05;
  std::int64_t reps = -1;  // resolved per scenario (likert 1000, others 10000)
  std::uint64_t seed = 42;
  int threads = 0;
  bool percent = false;
  bool type_ms = false;
  std::string format = "json";
  std::string out;

  // mde controls
  double target_power = 0.8;
  double tolerance = 0.0005;

  // accuracy
  std::int64_t n = 0;
  double delta = kUnset;
  double agreement = kUnset;
  double baseline = kUnset;
  double sota = kUnset;
  std::string pred_a, pred_b, gold;
  std::string prior_name, task;
  std::string variant;  // "exact" or "chi2"; default depends on the mode
  bool lachenbruch = false;
  std::vector<std::int64_t> n_grid;
  std::vector<double> effect_grid;
  std::string regression_csv, target_column;

  // bleu
  double delta_bleu = kUnset;
  double p0_bleu = kUnset;
  double b0 = kUnset;
  std::string ref_path, hyp_a, hyp_b;
  std::int64_t resamples = 2000;
  std::int64_t probes = 1000;

  // likert
  std::int32_t workers = 0;
  std::int32_t items = 0;
  double effect = kUnset;
  double beta0 = kUnset;
  std::string preset, params_path, ratings_path;

  // binomial
  double prob = kUnset;
  double p0_null = kUnset;
  bool exact = false;

  // simulate outputs / report input
  std::string out_a, out_b, data_out, in_path;
};

std::string quote_arg(const std::string& a) {
  if (!a.empty() && a.find_first_of(" \t\"") == std::string::npos) return a;
  std::string q = "\"";
  for (char c : a) {
    if (c == '"' || c == '\\') q += '\\';
    q += c;
  }
  q += '"';
  return q;
}

// Rebuilds the invocation for the report's provenance block: --threads is
// dropped (results are thread-count invariant) and the resolved seed is
// appended when the user relied on the default.
std::string normalized_command(const std::vector<std::string>& args,
                               std::uint64_t seed, bool add_seed) {
  std::vector<std::string> keep{"powcheck"};
  bool seed_present = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--threads") {
      ++i;
      continue;
    }
    if (a.rfind("--threads=", 0) == 0) continue;
    if (a == "--seed" || a.rfind("--seed=", 0) == 0) seed_present = true;
    keep.push_back(a);
  }
  if (add_seed && !seed_present) {
    keep.push_back("--seed");
    keep.push_back(std::to_string(seed));
  }
  std::string cmd;
  for (const auto& a : keep) {
    if (!cmd.empty()) cmd += ' ';
    cmd += quote_arg(a);
  }
  return cmd;
}

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write file: " + out_path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + out_path);
}

void emit_json(const ordered_json& j, const std::string& out_path) {
  emit_text(j.dump(2) + "\n", out_path);
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write file: " + path);
  for (const auto& line : lines) f << line << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

ordered_json base_report(const std::string& verb, const std::string& scenario,
                         const std::string& command) {
  ordered_json j;
  j["tool"] = "powcheck";
  j["command"] = command;
  j["verb"] = verb;
  if (!scenario.empty()) j["scenario"] = scenario;
  j["params"] = ordered_json::object();
  return j;
}

SimulationConfig make_config(const Opts& o, std::int64_t n, double effect) {
  SimulationConfig cfg;
  cfg.n = n;
  cfg.effect = effect;
  cfg.alpha = o.alpha;
  cfg.reps = o.reps;
  cfg.seed = o.seed;
  cfg.compute_type_ms = o.type_ms;
  cfg.threads = o.threads;
  return cfg;
}

McNemarVariant resolve_variant(const std::string& flag, bool prior_mode) {
  if (flag == "exact") return McNemarVariant::exact_conditional;
  if (flag == "chi2") return McNemarVariant::chi_square;
  // unset: the prior workflow pairs with the chi-square test, direct
  // parameterizations with the exact conditional test
  return prior_mode ? McNemarVariant::chi_square
                    : McNemarVariant::exact_conditional;
}

std::string variant_name(McNemarVariant v) {
  return v == McNemarVariant::chi_square ? "chi2" : "exact";
}

const PriorBundle& bundle_by_name(const std::string& name) {
  if (name == "glue") return glue_priors();
  if (name == "squad2") return squad2_priors();
  throw std::invalid_argument("unknown prior '" + name +
                              "'; choose glue or squad2");
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void scale_if_percent(bool percent, std::initializer_list<double*> values) {
  if (!percent) return;
  for (double* v : values)
    if (is_set(*v)) *v /= 100.0;
}

ordered_json bleu_json(const BleuScore& s) {
  ordered_json j;
  j["score"] = s.score;
  j["precisions"] = s.precisions;
  j["brevity_penalty"] = s.brevity_penalty;
  j["hyp_len"] = s.hyp_len;
  j["ref_len"] = s.ref_len;
  return j;
}

ordered_json mixture_json(const LaplaceMixtureFit& f) {
  ordered_json j;
  j["p0"] = f.p0;
  j["mu"] = f.mu;
  j["b"] = f.b;
  j["b0"] = f.b0;
  j["n"] = f.n;
  j["n_nonzero"] = f.n_nonzero;
  j["has_laplace"] = f.has_laplace;
  j["warnings"] = f.warnings;
  return j;
}

ordered_json likert_params_json(const LikertParams& p) {
  ordered_json j;
  j["beta0"] = p.beta0;
  j["beta1"] = p.beta1;
  j["sigma_w0"] = p.sigma_w0;
  j["sigma_w1"] = p.sigma_w1;
  j["sigma_i0"] = p.sigma_i0;
  j["sigma_i1"] = p.sigma_i1;
  j["sigma_e"] = p.sigma_e;
  return j;
}

ordered_json lmm_fit_json(const LmmFit& fit) {
  ordered_json j;
  j["beta0"] = fit.beta0;
  j["beta1"] = fit.beta1;
  j["se_beta0"] = fit.se_beta0;
  j["se_beta1"] = fit.se_beta1;
  j["t"] = fit.t;
  j["sigma_w0"] = fit.sigma_w0;
  j["sigma_w1"] = fit.sigma_w1;
  j["sigma_i0"] = fit.sigma_i0;
  j["sigma_i1"] = fit.sigma_i1;
  j["sigma_e"] = fit.sigma_e;
  j["log_likelihood"] = fit.log_likelihood;
  j["converged"] = fit.converged;
  j["detected"] = lmm_detect(fit);
  j["warnings"] = fit.warnings;
  return j;
}

LikertParams params_from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open file: " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(f);
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": not valid JSON (" +
                                std::string(e.what()) + ")");
  }
  require(j.is_object(), path + ": params file must hold a JSON object");
  LikertParams p;
  for (const auto& [key, value] : j.items()) {
    require(value.is_number(), path + ": key '" + key + "' must be a number");
    const double v = value.get<double>();
    if (key == "beta0") p.beta0 = v;
    else if (key == "beta1") p.beta1 = v;
    else if (key == "sigma_w0") p.sigma_w0 = v;
    else if (key == "sigma_w1") p.sigma_w1 = v;
    else if (key == "sigma_i0") p.sigma_i0 = v;
    else if (key == "sigma_i1") p.sigma_i1 = v;
    else if (key == "sigma_e") p.sigma_e = v;
    else
      throw std::invalid_argument(
          path + ": unknown key '" + key +
          "'; known keys: beta0, beta1, sigma_w0, sigma_w1, sigma_i0, "
          "sigma_i1, sigma_e");
  }
  return p;
}

void emit_power_output(ordered_json& j, const std::string& scenario,
                       const std::optional<PowerReport>& single,
                       const std::optional<PowerCurve>& curve,
                       const Opts& o) {
  std::vector<ReportRow> rows;
  if (curve.has_value()) {
    j["curve"] = curve_json(*curve);
    rows = curve_rows(scenario, *curve);
  } else {
    j["results"] = results_json(*single);
    rows.push_back(report_row(scenario, *single));
  }
  if (o.format == "csv") {
    emit_text(to_csv(rows), o.out);
  } else {
    emit_json(j, o.out);
  }
}

// ---------------------------------------------------------------------------
// power / mde: accuracy

struct AccuracyInputs {
  std::string mode;  // "analytic", "files", "prior"
  double pa = 0.0;
  double delta = 0.0;
  std::int64_t n = 0;
  McNemarVariant variant = McNemarVariant::exact_conditional;
  ordered_json params;
};

AccuracyInputs resolve_accuracy_inputs(Opts& o) {
  scale_if_percent(o.percent, {&o.delta, &o.agreement, &o.baseline, &o.sota});
  const bool files_mode = !o.pred_a.empty() || !o.pred_b.empty();
  const bool prior_mode = !o.prior_name.empty();
  require(!(files_mode && prior_mode),
          "choose either prediction files or a prior, not both");

  AccuracyInputs in;
  in.variant = resolve_variant(o.variant, prior_mode);
  in.params["variant"] = variant_name(in.variant);

  if (files_mode) {
    require(!o.pred_a.empty() && !o.pred_b.empty(),
            "--pred-a and --pred-b must be given together");
    const PairedPredictions preds =
        o.gold.empty() ? read_correctness_files(o.pred_a, o.pred_b)
                       : read_label_files(o.gold, o.pred_a, o.pred_b);
    const EstimatedParams est = estimate_params(preds);
    in.mode = "files";
    in.n = o.n > 0 ? o.n : est.n;
    in.delta = is_set(o.delta) ? o.delta : est.delta_acc;
    in.pa = is_set(o.agreement) ? o.agreement : est.pa;
    in.params["pred_a"] = o.pred_a;
    in.params["pred_b"] = o.pred_b;
    if (!o.gold.empty()) in.params["gold"] = o.gold;
    ordered_json est_j;
    est_j["n"] = est.n;
    est_j["n_both_correct"] = est.n_both_correct;
    est_j["n_only_a"] = est.n_only_m1;
    est_j["n_only_b"] = est.n_only_m2;
    est_j["n_both_incorrect"] = est.n_both_incorrect;
    est_j["agreement"] = est.pa;
    est_j["delta"] = est.delta_acc;
    in.params["estimated"] = est_j;
  } else if (prior_mode) {
    require(is_set(o.sota), "--prior needs --sota (the baseline accuracy)");
    const PriorBundle& bundle = bundle_by_name(o.prior_name);
    in.mode = "prior";
    in.n = o.n;
    in.params["prior"] = o.prior_name;
    in.params["sota"] = o.sota;
    std::vector<std::string> warnings;
    if (is_set(o.delta)) {
      in.delta = o.delta;
    } else {
      std::optional<std::string> task;
      if (!o.task.empty()) task = o.task;
      in.delta = predict_effect_size(o.sota, task, bundle, &warnings);
      if (!o.task.empty()) in.params["task"] = o.task;
      in.params["predicted_effect"] = in.delta;
    }
    in.pa = predict_overlap(o.sota, in.delta, bundle, &warnings);
    in.params["predicted_overlap"] = in.pa;
    if (!warnings.empty()) in.params["warnings"] = warnings;
  } else {
    require(is_set(o.delta) && is_set(o.agreement),
            "accuracy needs --delta and --agreement, or --pred-a/--pred-b, "
            "or --prior with --sota");
    in.mode = "analytic";
    in.n = o.n;
    in.delta = o.delta;
    in.pa = o.agreement;
  }
  require(in.n > 0, "--n must be a positive evaluation set size");
  in.params["mode"] = in.mode;
  in.params["n"] = in.n;
  return in;
}

void handle_power_accuracy(Opts& o, const std::string& command) {
  AccuracyInputs in = resolve_accuracy_inputs(o);
  in.params["delta"] = in.delta;
  in.params["agreement"] = in.pa;
  if (is_set(o.baseline)) in.params["baseline"] = o.baseline;

  ordered_json j = base_report("power", "accuracy", command);
  j["params"] = in.params;

  const SimulationConfig cfg = make_config(o, in.n, in.delta);
  if (!o.n_grid.empty() || !o.effect_grid.empty()) {
    ProcessFamily family =
        in.mode == "prior"
            ? mcnemar_family_with_prior(bundle_by_name(o.prior_name), o.sota,
                                        in.variant)
            : mcnemar_family(in.pa, in.variant);
    const std::vector<std::int64_t> ns =
        o.n_grid.empty() ? std::vector<std::int64_t>{in.n} : o.n_grid;
    const std::vector<double> effects =
        o.effect_grid.empty() ? std::vector<double>{in.delta} : o.effect_grid;
    emit_power_output(j, "accuracy", std::nullopt,
                      power_curve(family, ns, effects, cfg), o);
    return;
  }
  PowerReport report;
  if (in.mode == "analytic" && is_set(o.baseline)) {
    const ContingencySpec spec = contingency_from(in.pa, in.delta, o.baseline);
    McNemarProcess process(in.n, spec, in.variant);
    report = estimate_power(process, cfg);
  } else {
    report = mcnemar_power(in.pa, in.delta, in.n, cfg, in.variant);
  }
  emit_power_output(j, "accuracy", report, std::nullopt, o);
}

void handle_mde_accuracy(Opts& o, const std::string& command) {
  scale_if_percent(o.percent, {&o.delta, &o.agreement, &o.baseline, &o.sota});
  require(o.n > 0, "--n must be a positive evaluation set size");
  const bool prior_mode = !o.prior_name.empty();
  const McNemarVariant variant = resolve_variant(o.variant, prior_mode);
  const SimulationConfig cfg = make_config(o, o.n, 0.0);

  ordered_json j = base_report("mde", "accuracy", command);
  j["params"]["n"] = o.n;
  j["params"]["target_power"] = o.target_power;
  j["params"]["tolerance"] = o.tolerance;
  j["params"]["variant"] = variant_name(variant);

  if (o.lachenbruch) {
    require(is_set(o.sota), "--lachenbruch needs --sota (the baseline accuracy)");
    require(!prior_mode, "--lachenbruch and --prior are mutually exclusive");
    j["params"]["mode"] = "lachenbruch";
    j["params"]["sota"] = o.sota;
    const LachenbruchBounds bounds =
        lachenbruch_mde(o.sota, o.n, o.target_power, cfg, variant);
    ordered_json r;
    r["bounds"]["generous"] = bounds.mde_lower;
    r["bounds"]["midpoint"] = bounds.mde_mid;
    r["bounds"]["conservative"] = bounds.mde_upper;
    r["target_power"] = o.target_power;
    r["n"] = o.n;
    r["alpha"] = o.alpha;
    r["reps"] = o.reps;
    r["seed"] = o.seed;
    j["results"] = r;
    if (o.format == "csv") {
      std::vector<ReportRow> rows;
      for (double mde :
           {bounds.mde_lower, bounds.mde_mid, bounds.mde_upper}) {
        ReportRow row;
        row.scenario = "accuracy";
        row.n = o.n;
        row.effect = mde;
        row.alpha = o.alpha;
        row.reps = o.reps;
        row.seed = o.seed;
        row.power = o.target_power;
        rows.push_back(row);
      }
      emit_text(to_csv(rows), o.out);
    } else {
      emit_json(j, o.out);
    }
    return;
  }

  ProcessFamily family;
  if (prior_mode) {
    require(is_set(o.sota), "--prior needs --sota (the baseline accuracy)");
    j["params"]["mode"] = "prior";
    j["params"]["prior"] = o.prior_name;
    j["params"]["sota"] = o.sota;
    family =
        mcnemar_family_with_prior(bundle_by_name(o.prior_name), o.sota, variant);
  } else {
    require(is_set(o.agreement),
            "mde accuracy needs --agreement, --prior with --sota, or "
            "--lachenbruch with --sota");
    j["params"]["mode"] = "agreement";
    j["params"]["agreement"] = o.agreement;
    family = mcnemar_family(o.agreement, variant);
  }
  const double mde = find_mde(family, o.n, o.target_power, cfg, o.tolerance);
  ordered_json r;
  r["mde"] = mde;
  r["target_power"] = o.target_power;
  r["n"] = o.n;
  r["alpha"] = o.alpha;
  r["reps"] = o.reps;
  r["seed"] = o.seed;
  j["results"] = r;
  if (o.format == "csv") {
    ReportRow row;
    row.scenario = "accuracy";
    row.n = o.n;
    row.effect = mde;
    row.alpha = o.alpha;
    row.reps = o.reps;
    row.seed = o.seed;
    row.power = o.target_power;
    emit_text(to_csv({row}), o.out);
  } else {
    emit_json(j, o.out);
  }
}

// ---------------------------------------------------------------------------
// power: bleu

void handle_power_bleu(Opts& o, const std::string& command) {
  scale_if_percent(o.percent, {&o.p0_bleu});
  const bool files_mode =
      !o.ref_path.empty() || !o.hyp_a.empty() || !o.hyp_b.empty();

  ordered_json j = base_report("power", "bleu", command);
  MtGenSpec spec;
  if (files_mode) {
    require(!o.ref_path.empty() && !o.hyp_a.empty() && !o.hyp_b.empty(),
            "--ref, --hyp-a and --hyp-b must be given together");
    const auto refs = read_sentences(o.ref_path);
    const auto a = read_sentences(o.hyp_a);
    const auto b = read_sentences(o.hyp_b);
    const SwapEffects sw = swap_effects(refs, a, b, o.probes);
    const LaplaceMixtureFit fit = fit_mixture(sw.deltas);
    spec.n = o.n > 0 ? o.n : static_cast<std::int64_t>(sw.deltas.size());
    spec.delta_b = is_set(o.delta_bleu) ? o.delta_bleu : sw.delta_b;
    spec.p0 = is_set(o.p0_bleu) ? o.p0_bleu : fit.p0;
    spec.b0 = is_set(o.b0) ? o.b0 : fit.b0;
    j["params"]["mode"] = "files";
    j["params"]["ref"] = o.ref_path;
    j["params"]["hyp_a"] = o.hyp_a;
    j["params"]["hyp_b"] = o.hyp_b;
    j["params"]["bleu_a"] = sw.bleu_a;
    j["params"]["bleu_b"] = sw.bleu_b;
    j["params"]["observed_delta_b"] = sw.delta_b;
    j["params"]["additivity_r"] = sw.additivity_r;
    j["params"]["mixture"] = mixture_json(fit);
  } else {
    require(o.n > 0 && is_set(o.delta_bleu) && is_set(o.p0_bleu) && is_set(o.b0),
            "bleu needs --n, --delta-bleu, --p0 and --b0, or --ref with "
            "--hyp-a/--hyp-b");
    spec = MtGenSpec{o.n, o.delta_bleu, o.p0_bleu, o.b0};
    j["params"]["mode"] = "spec";
  }
  j["params"]["n"] = spec.n;
  j["params"]["delta_b"] = spec.delta_b;
  j["params"]["p0"] = spec.p0;
  j["params"]["b0"] = spec.b0;
  j["params"]["resamples"] = o.resamples;

  const SimulationConfig cfg = make_config(o, spec.n, spec.delta_b);
  if (!o.n_grid.empty() || !o.effect_grid.empty()) {
    ProcessFamily family = mt_family(spec.p0, spec.b0, o.resamples);
    const std::vector<std::int64_t> ns =
        o.n_grid.empty() ? std::vector<std::int64_t>{spec.n} : o.n_grid;
    const std::vector<double> effects =
        o.effect_grid.empty() ? std::vector<double>{spec.delta_b}
                              : o.effect_grid;
    emit_power_output(j, "bleu", std::nullopt,
                      power_curve(family, ns, effects, cfg), o);
    return;
  }
  emit_power_output(j, "bleu", mt_power(spec, cfg, o.resamples), std::nullopt,
                    o);
}

// ---------------------------------------------------------------------------
// power: likert

LikertParams resolve_likert_params(Opts& o, ordered_json& params_j,
                                   std::int32_t* workers,
                                   std::int32_t* items) {
  scale_if_percent(o.percent, {&o.effect, &o.beta0});
  const int modes = (!o.preset.empty() ? 1 : 0) +
                    (!o.params_path.empty() ? 1 : 0) +
                    (!o.ratings_path.empty() ? 1 : 0);
  require(modes == 1,
          "likert needs exactly one of --preset, --params, or --ratings");

  LikertParams p;
  if (!o.preset.empty()) {
    require(is_set(o.effect),
            "--preset needs --effect (the assumed between-model difference)");
    const double b0 = is_set(o.beta0) ? o.beta0 : 0.5;
    if (o.preset == "high") p = high_variance_preset(b0, o.effect);
    else if (o.preset == "low") p = low_variance_preset(b0, o.effect);
    else throw std::invalid_argument("unknown preset '" + o.preset +
                                     "'; choose high or low");
    params_j["mode"] = "preset";
    params_j["preset"] = o.preset;
  } else if (!o.params_path.empty()) {
    p = params_from_json_file(o.params_path);
    if (is_set(o.effect)) p.beta1 = o.effect;
    if (is_set(o.beta0)) p.beta0 = o.beta0;
    params_j["mode"] = "params-file";
    params_j["params_file"] = o.params_path;
  } else {
    const RatingsTable table = read_ratings_csv(o.ratings_path);
    const LmmFit fit = fit_lmm(table);
    p.beta0 = is_set(o.beta0) ? o.beta0 : fit.beta0;
    p.beta1 = is_set(o.effect) ? o.effect : fit.beta1;
    p.sigma_w0 = fit.sigma_w0;
    p.sigma_w1 = fit.sigma_w1;
    p.sigma_i0 = fit.sigma_i0;
    p.sigma_i1 = fit.sigma_i1;
    p.sigma_e = fit.sigma_e;
    params_j["mode"] = "ratings";
    params_j["ratings"] = o.ratings_path;
    params_j["fit"] = lmm_fit_json(fit);
    if (*workers <= 0) *workers = table.n_workers;
    if (*items <= 0) *items = table.n_items;
  }
  require(*workers >= 2 && *items >= 2,
          "--workers and --items must both be at least 2");
  params_j["workers"] = *workers;
  params_j["items"] = *items;
  params_j["model"] = likert_params_json(p);
  return p;
}

void handle_power_likert(Opts& o, const std::string& command) {
  ordered_json j = base_report("power", "likert", command);
  std::int32_t workers = o.workers, items = o.items;
  const LikertParams p = resolve_likert_params(o, j["params"], &workers, &items);
  const SimulationConfig cfg = make_config(o, 0, p.beta1);
  emit_power_output(j, "likert", likert_power(p, workers, items, cfg),
                    std::nullopt, o);
}

// ---------------------------------------------------------------------------
// power / mde: binomial

void handle_power_binomial(Opts& o, const std::string& command) {
  scale_if_percent(o.percent, {&o.prob, &o.p0_null});
  require(o.n > 0, "--n must be a positive trial count");
  require(is_set(o.prob), "binomial needs --prob (the assumed success rate)");
  const double p0 = is_set(o.p0_null) ? o.p0_null : 0.5;
  const double effect = o.prob - p0;

  ordered_json j = base_report("power", "binomial", command);
  j["params"]["n"] = o.n;
  j["params"]["prob"] = o.prob;
  j["params"]["p0"] = p0;
  j["params"]["effect"] = effect;
  j["params"]["exact"] = o.exact;

  if (o.exact) {
    PowerReport report;
    report.power = exact_binom_power(o.n, p0, effect, o.alpha);
    report.mc_stderr = 0.0;
    report.sign_checked = effect != 0.0;
    report.estimand = effect == 0.0 ? "type_i_rate" : "power";
    report.true_effect = effect;
    report.n = o.n;
    report.alpha = o.alpha;
    report.reps = 0;
    report.seed = o.seed;
    report.diagnostics.push_back(
        "exact tail enumeration; reps and seed are not used");
    emit_power_output(j, "binomial", report, std::nullopt, o);
    return;
  }
  const BinomialProcess process(o.n, p0, effect);
  const SimulationConfig cfg = make_config(o, o.n, effect);
  emit_power_output(j, "binomial", estimate_power(process, cfg), std::nullopt,
                    o);
}

void handle_mde_binomial(Opts& o, const std::string& command) {
  scale_if_percent(o.percent, {&o.p0_null});
  require(o.n > 0, "--n must be a positive trial count");
  const double p0 = is_set(o.p0_null) ? o.p0_null : 0.5;
  const SimulationConfig cfg = make_config(o, o.n, 0.0);
  const double mde =
      find_mde(binomial_family(p0), o.n, o.target_power, cfg, o.tolerance);

  ordered_json j = base_report("mde", "binomial", command);
  j["params"]["n"] = o.n;
  j["params"]["p0"] = p0;
  j["params"]["target_power"] = o.target_power;
  j["params"]["tolerance"] = o.tolerance;
  ordered_json r;
  r["mde"] = mde;
  r["target_power"] = o.target_power;
  r["n"] = o.n;
  r["alpha"] = o.alpha;
  r["reps"] = o.reps;
  r["seed"] = o.seed;
  j["results"] = r;
  if (o.format == "csv") {
    ReportRow row;
    row.scenario = "binomial";
    row.n = o.n;
    row.effect = mde;
    row.alpha = o.alpha;
    row.reps = o.reps;
    row.seed = o.seed;
    row.power = o.target_power;
    emit_text(to_csv({row}), o.out);
  } else {
    emit_json(j, o.out);
  }
}

// ---------------------------------------------------------------------------
// fit

void handle_fit_accuracy(Opts& o, const std::string& command) {
  ordered_json j = base_report("fit", "accuracy", command);
  if (!o.regression_csv.empty()) {
    require(!o.target_column.empty(),
            "--regression-csv needs --target-column");
    const RegressionData data = read_regression_csv(o.regression_csv);
    const OlsModel model = fit_ols(data, o.target_column);
    j["params"]["mode"] = "regression";
    j["params"]["regression_csv"] = o.regression_csv;
    j["params"]["target_column"] = o.target_column;
    ordered_json r;
    r["intercept"] = model.intercept;
    ordered_json coefs;
    for (std::size_t k = 0; k < model.predictor_names.size(); ++k)
      coefs[model.predictor_names[k]] = model.coefficients[k];
    r["coefficients"] = coefs;
    r["r_squared"] = model.r_squared;
    r["n_observations"] = model.n_observations;
    j["results"] = r;
    emit_json(j, o.out);
    return;
  }
  require(!o.pred_a.empty() && !o.pred_b.empty(),
          "fit accuracy needs --pred-a/--pred-b or --regression-csv");
  const PairedPredictions preds =
      o.gold.empty() ? read_correctness_files(o.pred_a, o.pred_b)
                     : read_label_files(o.gold, o.pred_a, o.pred_b);
  const EstimatedParams est = estimate_params(preds);
  j["params"]["mode"] = "files";
  j["params"]["pred_a"] = o.pred_a;
  j["params"]["pred_b"] = o.pred_b;
  if (!o.gold.empty()) j["params"]["gold"] = o.gold;
  ordered_json r;
  r["n"] = est.n;
  r["n_both_correct"] = est.n_both_correct;
  r["n_only_a"] = est.n_only_m1;
  r["n_only_b"] = est.n_only_m2;
  r["n_both_incorrect"] = est.n_both_incorrect;
  r["agreement"] = est.pa;
  r["delta"] = est.delta_acc;
  r["accuracy_a"] = est.spec.p_both_correct + est.spec.p_only_m1;
  r["accuracy_b"] = est.spec.p_both_correct + est.spec.p_only_m2;
  j["results"] = r;
  emit_json(j, o.out);
}

void handle_fit_bleu(Opts& o, const std::string& command) {
  require(!o.ref_path.empty() && !o.hyp_a.empty() && !o.hyp_b.empty(),
          "fit bleu needs --ref, --hyp-a and --hyp-b");
  const auto refs = read_sentences(o.ref_path);
  const auto a = read_sentences(o.hyp_a);
  const auto b = read_sentences(o.hyp_b);
  const SwapEffects sw = swap_effects(refs, a, b, o.probes);
  const LaplaceMixtureFit fit = fit_mixture(sw.deltas);

  ordered_json j = base_report("fit", "bleu", command);
  j["params"]["ref"] = o.ref_path;
  j["params"]["hyp_a"] = o.hyp_a;
  j["params"]["hyp_b"] = o.hyp_b;
  j["params"]["probes"] = o.probes;
  ordered_json r;
  r["bleu_a"] = bleu_json(corpus_bleu(refs, a));
  r["bleu_b"] = bleu_json(corpus_bleu(refs, b));
  r["delta_b"] = sw.delta_b;
  r["additivity_r"] = sw.additivity_r;
  r["n"] = static_cast<std::int64_t>(sw.deltas.size());
  r["mixture"] = mixture_json(fit);
  j["results"] = r;
  emit_json(j, o.out);
}

void handle_fit_likert(Opts& o, const std::string& command) {
  require(!o.ratings_path.empty(), "fit likert needs --ratings");
  const RatingsTable table = read_ratings_csv(o.ratings_path);
  const LmmFit fit = fit_lmm(table);
  ordered_json j = base_report("fit", "likert", command);
  j["params"]["ratings"] = o.ratings_path;
  j["params"]["workers"] = table.n_workers;
  j["params"]["items"] = table.n_items;
  j["params"]["rows"] = static_cast<std::int64_t>(table.rows.size());
  j["results"] = lmm_fit_json(fit);
  emit_json(j, o.out);
}

// ---------------------------------------------------------------------------
// simulate

void handle_sim_accuracy(Opts& o, const std::string& command) {
  scale_if_percent(o.percent, {&o.delta, &o.agreement, &o.baseline});
  require(o.n > 0, "--n must be a positive evaluation set size");
  require(is_set(o.delta) && is_set(o.agreement),
          "simulate accuracy needs --delta and --agreement");
  require(!o.out_a.empty() && !o.out_b.empty(),
          "simulate accuracy needs --out-a and --out-b");
  std::optional<double> baseline;
  if (is_set(o.baseline)) baseline = o.baseline;
  const ContingencySpec spec = contingency_from(o.agreement, o.delta, baseline);

  RngStream rng(o.seed);
  std::vector<std::string> lines_a, lines_b;
  lines_a.reserve(static_cast<std::size_t>(o.n));
  lines_b.reserve(static_cast<std::size_t>(o.n));
  std::int64_t counts[4] = {0, 0, 0, 0};
  const double cum1 = spec.p_both_correct;
  const double cum2 = cum1 + spec.p_only_m1;
  const double cum3 = cum2 + spec.p_only_m2;
  for (std::int64_t i = 0; i < o.n; ++i) {
    const double u = rng.next_double();
    int cell = u < cum1 ? 0 : u < cum2 ? 1 : u < cum3 ? 2 : 3;
    ++counts[cell];
    lines_a.push_back(cell == 0 || cell == 1 ? "1" : "0");
    lines_b.push_back(cell == 0 || cell == 2 ? "1" : "0");
  }
  write_lines(o.out_a, lines_a);
  write_lines(o.out_b, lines_b);

  ordered_json j = base_report("simulate", "accuracy", command);
  j["params"]["n"] = o.n;
  j["params"]["delta"] = o.delta;
  j["params"]["agreement"] = o.agreement;
  if (baseline.has_value()) j["params"]["baseline"] = *baseline;
  j["params"]["seed"] = o.seed;
  ordered_json r;
  r["out_a"] = o.out_a;
  r["out_b"] = o.out_b;
  r["n_both_correct"] = counts[0];
  r["n_only_a"] = counts[1];
  r["n_only_b"] = counts[2];
  r["n_both_incorrect"] = counts[3];
  j["results"] = r;
  emit_json(j, o.out);
}

void handle_sim_bleu(Opts& o, const std::string& command) {
  scale_if_percent(o.percent, {&o.p0_bleu});
  require(o.n > 0 && is_set(o.delta_bleu) && is_set(o.p0_bleu) && is_set(o.b0),
          "simulate bleu needs --n, --delta-bleu, --p0 and --b0");
  require(!o.data_out.empty(), "simulate bleu needs --out");
  const MtGenSpec spec{o.n, o.delta_bleu, o.p0_bleu, o.b0};
  RngStream rng(o.seed);
  const std::vector<double> deltas = simulate_mt_dataset(spec, rng);
  std::vector<std::string> lines;
  lines.reserve(deltas.size());
  double sum = 0.0;
  std::int64_t zeros = 0;
  for (double d : deltas) {
    lines.push_back(format_double(d));
    sum += d;
    if (std::abs(d) <= 1e-8) ++zeros;
  }
  write_lines(o.data_out, lines);

  ordered_json j = base_report("simulate", "bleu", command);
  j["params"]["n"] = o.n;
  j["params"]["delta_b"] = o.delta_bleu;
  j["params"]["p0"] = o.p0_bleu;
  j["params"]["b0"] = o.b0;
  j["params"]["seed"] = o.seed;
  ordered_json r;
  r["out"] = o.data_out;
  r["observed_delta_b"] = -0.5 * sum;
  r["n_zero"] = zeros;
  j["results"] = r;
  emit_json(j, o.out);
}

void handle_sim_likert(Opts& o, const std::string& command) {
  ordered_json j = base_report("simulate", "likert", command);
  std::int32_t workers = o.workers, items = o.items;
  const LikertParams p = resolve_likert_params(o, j["params"], &workers, &items);
  require(!o.data_out.empty(), "simulate likert needs --out");
  RngStream rng(o.seed);
  const RatingsTable table = simulate_ratings(p, workers, items, rng);
  std::vector<std::string> lines;
  lines.reserve(table.rows.size() + 1);
  lines.push_back("worker,item,condition,rating");
  for (const auto& row : table.rows) {
    std::string line = std::to_string(row.worker);
    line += ',';
    line += std::to_string(row.item);
    line += ',';
    line += row.x < 0 ? "-0.5" : "0.5";
    line += ',';
    line += format_double(row.rating);
    lines.push_back(std::move(line));
  }
  write_lines(o.data_out, lines);

  j["params"]["seed"] = o.seed;
  ordered_json r;
  r["out"] = o.data_out;
  r["rows"] = static_cast<std::int64_t>(table.rows.size());
  j["results"] = r;
  emit_json(j, o.out);
}

void handle_sim_binomial(Opts& o, const std::string& command) {
  scale_if_percent(o.percent, {&o.prob});
  require(o.n > 0, "--n must be a positive trial count");
  require(is_set(o.prob), "simulate binomial needs --prob");
  require(o.prob >= 0.0 && o.prob <= 1.0, "--prob must be in [0, 1]");
  require(!o.data_out.empty(), "simulate binomial needs --out");
  RngStream rng(o.seed);
  std::vector<std::string> lines;
  lines.reserve(static_cast<std::size_t>(o.n));
  std::int64_t successes = 0;
  for (std::int64_t i = 0; i < o.n; ++i) {
    const bool hit = rng.next_bernoulli(o.prob);
    successes += hit ? 1 : 0;
    lines.push_back(hit ? "1" : "0");
  }
  write_lines(o.data_out, lines);

  ordered_json j = base_report("simulate", "binomial", command);
  j["params"]["n"] = o.n;
  j["params"]["prob"] = o.prob;
  j["params"]["seed"] = o.seed;
  ordered_json r;
  r["out"] = o.data_out;
  r["successes"] = successes;
  j["results"] = r;
  emit_json(j, o.out);
}

// ---------------------------------------------------------------------------
// report re-emission

std::optional<double> opt_field(const ordered_json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<double>();
}

ReportRow row_from_results(const std::string& scenario,
                           const ordered_json& r) {
  ReportRow row;
  row.scenario = scenario;
  row.n = r.at("n").get<std::int64_t>();
  row.alpha = r.at("alpha").get<double>();
  row.reps = r.at("reps").get<std::int64_t>();
  row.seed = r.at("seed").get<std::uint64_t>();
  if (r.contains("power") && r.contains("mc_stderr")) {
    row.effect = r.at("true_effect").get<double>();
    row.power = r.at("power").get<double>();
    row.mc_stderr = r.at("mc_stderr").get<double>();
    row.type_m = opt_field(r, "type_m");
    row.type_s = opt_field(r, "type_s");
  } else if (r.contains("mde")) {
    row.effect = r.at("mde").get<double>();
    row.power = r.at("target_power").get<double>();
  } else {
    throw std::runtime_error("report: unrecognized results shape");
  }
  return row;
}

void handle_report(Opts& o) {
  std::ifstream f(o.in_path);
  if (!f) throw std::runtime_error("cannot open file: " + o.in_path);
  ordered_json j;
  try {
    j = ordered_json::parse(f);
  } catch (const std::exception& e) {
    throw std::runtime_error(o.in_path + ": not a JSON report (" +
                             std::string(e.what()) + ")");
  }
  if (o.format == "json") {
    emit_json(j, o.out);
    return;
  }
  const std::string scenario =
      j.contains("scenario") ? j.at("scenario").get<std::string>() : "";
  std::vector<ReportRow> rows;
  if (j.contains("curve")) {
    for (const auto& cell : j.at("curve").at("cells")) {
      if (!cell.contains("results")) continue;
      rows.push_back(row_from_results(scenario, cell.at("results")));
    }
  } else if (j.contains("results")) {
    const auto& r = j.at("results");
    if (r.contains("bounds")) {
      for (const char* key : {"generous", "midpoint", "conservative"}) {
        ReportRow row;
        row.scenario = scenario;
        row.n = r.at("n").get<std::int64_t>();
        row.effect = r.at("bounds").at(key).get<double>();
        row.alpha = r.at("alpha").get<double>();
        row.reps = r.at("reps").get<std::int64_t>();
        row.seed = r.at("seed").get<std::uint64_t>();
        row.power = r.at("target_power").get<double>();
        rows.push_back(row);
      }
    } else {
      rows.push_back(row_from_results(scenario, r));
    }
  } else {
    throw std::runtime_error(o.in_path +
                             ": no results or curve block to convert");
  }
  emit_text(to_csv(rows), o.out);
}

// ---------------------------------------------------------------------------
// flag wiring

void add_output_opts(CLI::App* cmd, Opts& o, bool with_csv = true) {
  if (with_csv)
    cmd->add_option("--format", o.format, "output format (json or csv)")
        ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", o.out, "write the report here instead of stdout");
}

void add_sim_opts(CLI::App* cmd, Opts& o) {
  cmd->add_option("--alpha", o.alpha, "significance level (default 0.05)");
  cmd->add_option("--reps", o.reps,
                  "simulation replications (default 10000; likert 1000)");
  cmd->add_option("--seed", o.seed, "base RNG seed (default 42)");
  cmd->add_option("--threads", o.threads,
                  "worker threads (0: POWCHECK_THREADS, else all cores)");
  cmd->add_flag("--percent", o.percent,
                "probability-scale flags are given in percent");
  add_output_opts(cmd, o);
}

void add_mde_opts(CLI::App* cmd, Opts& o) {
  cmd->add_option("--target-power", o.target_power,
                  "power the effect must reach (default 0.8)");
  cmd->add_option("--tolerance", o.tolerance,
                  "bisection grid width (default 0.0005)");
}

void add_accuracy_source_opts(CLI::App* cmd, Opts& o) {
  cmd->add_option("--delta", o.delta, "assumed accuracy difference (B - A)");
  cmd->add_option("--agreement", o.agreement,
                  "probability both models score the same");
  cmd->add_option("--baseline", o.baseline,
                  "model A accuracy (optional diagonal split)");
  cmd->add_option("--pred-a", o.pred_a, "model A predictions, one per line");
  cmd->add_option("--pred-b", o.pred_b, "model B predictions, one per line");
  cmd->add_option("--gold", o.gold,
                  "gold labels; without it pred files hold 0/1 correctness");
  cmd->add_option("--prior", o.prior_name, "prior bundle (glue or squad2)")
      ->check(CLI::IsMember({"glue", "squad2"}));
  cmd->add_option("--sota", o.sota, "baseline accuracy the new model must beat");
  cmd->add_option("--task", o.task, "GLUE task name for the effect prior");
  cmd->add_option("--variant", o.variant,
                  "mcnemar variant (exact or chi2; default: chi2 with "
                  "--prior, else exact)")
      ->check(CLI::IsMember({"exact", "chi2"}));
}

void add_bleu_source_opts(CLI::App* cmd, Opts& o) {
  cmd->add_option("--delta-bleu", o.delta_bleu,
                  "assumed BLEU difference in points");
  cmd->add_option("--p0", o.p0_bleu,
                  "probability a sentence swap changes nothing");
  cmd->add_option("--b0", o.b0, "Laplace scale times corpus size");
  cmd->add_option("--ref", o.ref_path, "reference sentences, one per line");
  cmd->add_option("--hyp-a", o.hyp_a, "system A hypotheses, one per line");
  cmd->add_option("--hyp-b", o.hyp_b, "system B hypotheses, one per line");
  cmd->add_option("--resamples", o.resamples,
                  "randomization resamples per dataset (default 2000)");
  cmd->add_option("--probes", o.probes,
                  "probe subsets for the additivity check (default 1000)");
}

void add_likert_source_opts(CLI::App* cmd, Opts& o, bool with_ratings) {
  cmd->add_option("--workers", o.workers, "number of raters");
  cmd->add_option("--items", o.items, "number of rated items");
  cmd->add_option("--effect", o.effect,
                  "between-model mean difference on the [0,1] scale");
  cmd->add_option("--beta0", o.beta0, "grand mean rating (default 0.5)");
  cmd->add_option("--preset", o.preset,
                  "variance preset (high or low)")
      ->check(CLI::IsMember({"high", "low"}));
  cmd->add_option("--params", o.params_path,
                  "JSON file with beta0, beta1 and the five sigmas");
  if (with_ratings)
    cmd->add_option("--ratings", o.ratings_path,
                    "ratings CSV (worker,item,condition,rating) to fit first");
}

}  // namespace

int run(int argc, const char* const* argv) {
  const std::vector<std::string> raw_args(argv + 1, argv + argc);
  Opts o;

  CLI::App app{"prospective power analysis for NLP experiment designs"};
  app.require_subcommand(1);

  auto* power = app.add_subcommand("power", "estimate detection power");
  power->require_subcommand(1);
  auto* mde = app.add_subcommand(
      "mde", "search the smallest effect reaching a target power");
  mde->require_subcommand(1);
  auto* fit = app.add_subcommand("fit", "estimate parameters from data files");
  fit->require_subcommand(1);
  auto* simulate =
      app.add_subcommand("simulate", "write a synthetic dataset to disk");
  simulate->require_subcommand(1);
  auto* report = app.add_subcommand(
      "report", "re-emit a saved JSON report, optionally as CSV");

  // power
  auto* pacc = power->add_subcommand(
      "accuracy", "paired classifier accuracies (mcnemar test)");
  pacc->add_option("--n", o.n, "evaluation set size");
  add_accuracy_source_opts(pacc, o);
  pacc->add_flag("--type-ms", o.type_ms,
                 "also estimate exaggeration (type-m) and sign error (type-s)");
  pacc->add_option("--n-grid", o.n_grid, "comma-separated n values for a curve")
      ->delimiter(',');
  pacc->add_option("--effect-grid", o.effect_grid,
                   "comma-separated effect values for a curve")
      ->delimiter(',');
  add_sim_opts(pacc, o);
  pacc->callback([&o] { o.leaf = Leaf::power_accuracy; });

  auto* pbleu = power->add_subcommand(
      "bleu", "corpus BLEU difference (randomization test)");
  pbleu->add_option("--n", o.n, "test corpus size in sentences");
  add_bleu_source_opts(pbleu, o);
  pbleu->add_flag("--type-ms", o.type_ms,
                  "also estimate exaggeration (type-m) and sign error (type-s)");
  pbleu->add_option("--n-grid", o.n_grid,
                    "comma-separated n values for a curve")
      ->delimiter(',');
  pbleu->add_option("--effect-grid", o.effect_grid,
                    "comma-separated BLEU differences for a curve")
      ->delimiter(',');
  add_sim_opts(pbleu, o);
  pbleu->callback([&o] { o.leaf = Leaf::power_bleu; });

  auto* plik = power->add_subcommand(
      "likert", "human ratings under a crossed mixed-effects model");
  add_likert_source_opts(plik, o, true);
  plik->add_flag("--type-ms", o.type_ms,
                 "also estimate exaggeration (type-m) and sign error (type-s)");
  add_sim_opts(plik, o);
  plik->callback([&o] { o.leaf = Leaf::power_likert; });

  auto* pbin = power->add_subcommand(
      "binomial", "one-sample success rate (exact binomial test)");
  pbin->add_option("--n", o.n, "number of trials");
  pbin->add_option("--prob", o.prob, "assumed true success rate");
  pbin->add_option("--p0", o.p0_null, "null success rate (default 0.5)");
  pbin->add_flag("--exact", o.exact,
                 "enumerate the rejection region instead of simulating");
  pbin->add_flag("--type-ms", o.type_ms,
                 "also estimate exaggeration (type-m) and sign error (type-s)");
  add_sim_opts(pbin, o);
  pbin->callback([&o] { o.leaf = Leaf::power_binomial; });

  // mde
  auto* macc = mde->add_subcommand(
      "accuracy", "smallest detectable accuracy difference");
  macc->add_option("--n", o.n, "evaluation set size");
  add_accuracy_source_opts(macc, o);
  macc->add_flag("--lachenbruch", o.lachenbruch,
                 "no-prior MDE bracket from discordance bounds");
  add_mde_opts(macc, o);
  add_sim_opts(macc, o);
  macc->callback([&o] { o.leaf = Leaf::mde_accuracy; });

  auto* mbin =
      mde->add_subcommand("binomial", "smallest detectable rate difference");
  mbin->add_option("--n", o.n, "number of trials");
  mbin->add_option("--p0", o.p0_null, "null success rate (default 0.5)");
  add_mde_opts(mbin, o);
  add_sim_opts(mbin, o);
  mbin->callback([&o] { o.leaf = Leaf::mde_binomial; });

  // fit
  auto* facc = fit->add_subcommand(
      "accuracy", "contingency table from predictions, or an OLS regression");
  facc->add_option("--pred-a", o.pred_a, "model A predictions, one per line");
  facc->add_option("--pred-b", o.pred_b, "model B predictions, one per line");
  facc->add_option("--gold", o.gold,
                   "gold labels; without it pred files hold 0/1 correctness");
  facc->add_option("--regression-csv", o.regression_csv,
                   "CSV with a header row to fit by least squares");
  facc->add_option("--target-column", o.target_column,
                   "dependent column of --regression-csv");
  add_output_opts(facc, o, false);
  facc->callback([&o] { o.leaf = Leaf::fit_accuracy; });

  auto* fbleu = fit->add_subcommand(
      "bleu", "BLEU scores, swap effects and the zero/Laplace mixture");
  fbleu->add_option("--ref", o.ref_path, "reference sentences, one per line");
  fbleu->add_option("--hyp-a", o.hyp_a, "system A hypotheses, one per line");
  fbleu->add_option("--hyp-b", o.hyp_b, "system B hypotheses, one per line");
  fbleu->add_option("--probes", o.probes,
                    "probe subsets for the additivity check (default 1000)");
  add_output_opts(fbleu, o, false);
  fbleu->callback([&o] { o.leaf = Leaf::fit_bleu; });

  auto* flik = fit->add_subcommand(
      "likert", "maximum-likelihood mixed-effects fit of a ratings table");
  flik->add_option("--ratings", o.ratings_path,
                   "ratings CSV (worker,item,condition,rating)");
  add_output_opts(flik, o, false);
  flik->callback([&o] { o.leaf = Leaf::fit_likert; });

  // simulate
  auto* sacc = simulate->add_subcommand(
      "accuracy", "paired 0/1 correctness files from a contingency spec");
  sacc->add_option("--n", o.n, "evaluation set size");
  sacc->add_option("--delta", o.delta, "accuracy difference (B - A)");
  sacc->add_option("--agreement", o.agreement,
                   "probability both models score the same");
  sacc->add_option("--baseline", o.baseline,
                   "model A accuracy (optional diagonal split)");
  sacc->add_option("--out-a", o.out_a, "output path for model A correctness");
  sacc->add_option("--out-b", o.out_b, "output path for model B correctness");
  sacc->add_option("--seed", o.seed, "base RNG seed (default 42)");
  sacc->add_flag("--percent", o.percent,
                 "probability-scale flags are given in percent");
  sacc->callback([&o] { o.leaf = Leaf::sim_accuracy; });

  auto* sbleu = simulate->add_subcommand(
      "bleu", "per-sentence swap effects from the zero/Laplace mixture");
  sbleu->add_option("--n", o.n, "corpus size in sentences");
  sbleu->add_option("--delta-bleu", o.delta_bleu,
                    "true BLEU difference in points");
  sbleu->add_option("--p0", o.p0_bleu,
                    "probability a sentence swap changes nothing");
  sbleu->add_option("--b0", o.b0, "Laplace scale times corpus size");
  sbleu->add_option("--out", o.data_out, "output path, one delta per line");
  sbleu->add_option("--seed", o.seed, "base RNG seed (default 42)");
  sbleu->add_flag("--percent", o.percent,
                  "probability-scale flags are given in percent");
  sbleu->callback([&o] { o.leaf = Leaf::sim_bleu; });

  auto* slik = simulate->add_subcommand(
      "likert", "a crossed ratings table under preset or given parameters");
  add_likert_source_opts(slik, o, false);
  slik->add_option("--out", o.data_out, "output path for the ratings CSV");
  slik->add_option("--seed", o.seed, "base RNG seed (default 42)");
  slik->add_flag("--percent", o.percent,
                 "probability-scale flags are given in percent");
  slik->callback([&o] { o.leaf = Leaf::sim_likert; });

  auto* sbin = simulate->add_subcommand(
      "binomial", "independent 0/1 trials at a fixed success rate");
  sbin->add_option("--n", o.n, "number of trials");
  sbin->add_option("--prob", o.prob, "success rate");
  sbin->add_option("--out", o.data_out, "output path, one 0/1 per line");
  sbin->add_option("--seed", o.seed, "base RNG seed (default 42)");
  sbin->add_flag("--percent", o.percent,
                 "probability-scale flags are given in percent");
  sbin->callback([&o] { o.leaf = Leaf::sim_binomial; });

  // report
  report->add_option("--in", o.in_path, "saved JSON report")->required();
  add_output_opts(report, o);
  report->callback([&o] { o.leaf = Leaf::report_verb; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // help request
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (o.reps < 0) o.reps = o.leaf == Leaf::power_likert ? 1000 : 10000;
    const bool seeded = o.leaf == Leaf::power_accuracy ||
                        o.leaf == Leaf::power_bleu ||
                        o.leaf == Leaf::power_likert ||
                        o.leaf == Leaf::power_binomial ||
                        o.leaf == Leaf::mde_accuracy ||
                        o.leaf == Leaf::mde_binomial ||
                        o.leaf == Leaf::sim_accuracy ||
                        o.leaf == Leaf::sim_bleu ||
                        o.leaf == Leaf::sim_likert ||
                        o.leaf == Leaf::sim_binomial;
    const std::string command = normalized_command(raw_args, o.seed, seeded);
    switch (o.leaf) {
      case Leaf::power_accuracy: handle_power_accuracy(o, command); break;
      case Leaf::power_bleu: handle_power_bleu(o, command); break;
      case Leaf::power_likert: handle_power_likert(o, command); break;
      case Leaf::power_binomial: handle_power_binomial(o, command); break;
      case Leaf::mde_accuracy: handle_mde_accuracy(o, command); break;
      case Leaf::mde_binomial: handle_mde_binomial(o, command); break;
      case Leaf::fit_accuracy: handle_fit_accuracy(o, command); break;
      case Leaf::fit_bleu: handle_fit_bleu(o, command); break;
      case Leaf::fit_likert: handle_fit_likert(o, command); break;
      case Leaf::sim_accuracy: handle_sim_accuracy(o, command); break;
      case Leaf::sim_bleu: handle_sim_bleu(o, command); break;
      case Leaf::sim_likert: handle_sim_likert(o, command); break;
      case Leaf::sim_binomial: handle_sim_binomial(o, command); break;
      case Leaf::report_verb: handle_report(o); break;
      case Leaf::none:
        throw std::invalid_argument("no subcommand given");
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace powcheck
