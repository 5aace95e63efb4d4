#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "powcheck/priors.hpp"
#include "powcheck/rng.hpp"
#include "powcheck/sim.hpp"

using namespace powcheck;
using doctest::Approx;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  std::string path = "/tmp/powcheck_priors_" + name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("GLUE overlap plug-in values") {
  // 0.4142 + 0.5819 * 0.90 - 0.4662 * 0.02 = 0.928586
  CHECK(predict_overlap(0.90, 0.02, glue_priors()) ==
        Approx(0.928586).epsilon(1e-12));
  CHECK(glue_priors().overlap.r_squared == Approx(0.966).epsilon(1e-12));
  CHECK(glue_priors().overlap.n_observations == 270);

  // higher accuracy pairs agree more; bigger gaps agree less
  CHECK(predict_overlap(0.95, 0.02, glue_priors()) >
        predict_overlap(0.85, 0.02, glue_priors()));
  CHECK(predict_overlap(0.90, 0.01, glue_priors()) >
        predict_overlap(0.90, 0.05, glue_priors()));
}

TEST_CASE("SQuAD 2.0 overlap plug-in values") {
  // 0.4339 + 0.5932 * 0.90 - 1.2849 * 0.02 = 0.942082
  CHECK(predict_overlap(0.90, 0.02, squad2_priors()) ==
        Approx(0.942082).epsilon(1e-12));
  CHECK(squad2_priors().overlap.r_squared == Approx(0.944).epsilon(1e-12));
  CHECK(squad2_priors().overlap.n_observations == 14);
}

TEST_CASE("overlap is clamped to keep the contingency feasible") {
  std::vector<std::string> warnings;
  // raw prediction 0.4339 + 0.5932*0.99 - 1.2849*0.005 = 1.014736 -> clamp
  double ov = predict_overlap(0.99, 0.005, squad2_priors(), &warnings);
  CHECK(ov == Approx(0.995).epsilon(1e-12));  // 1 - acc_diff
  CHECK_FALSE(warnings.empty());

  // plausible-range warning outside [0.5,1] x [0,0.2]
  warnings.clear();
  (void)predict_overlap(0.45, 0.02, glue_priors(), &warnings);
  CHECK_FALSE(warnings.empty());
  warnings.clear();
  (void)predict_overlap(0.9, 0.25, glue_priors(), &warnings);
  CHECK_FALSE(warnings.empty());

  // implausible min_acc warns and clamps rather than erroring
  warnings.clear();
  double high = predict_overlap(1.5, 0.02, glue_priors(), &warnings);
  CHECK(high == Approx(0.98).epsilon(1e-12));
  CHECK_FALSE(warnings.empty());
  CHECK_THROWS_AS(predict_overlap(0.9, -0.01, glue_priors()),
                  std::invalid_argument);
  CHECK_THROWS_AS(predict_overlap(0.9, 1.01, glue_priors()),
                  std::invalid_argument);
}

TEST_CASE("GLUE effect prior needs a task and predicts in fractions") {
  // reference task: (24.342 - 0.264 * 90) / 100 = 0.00582
  CHECK(predict_effect_size(0.90, std::string("MNLI-m"), glue_priors()) ==
        Approx(0.00582).epsilon(1e-10));
  // QNLI offset +2.139 percentage points
  CHECK(predict_effect_size(0.90, std::string("QNLI"), glue_priors()) ==
        Approx(0.02721).epsilon(1e-10));
  // higher baselines leave less headroom
  CHECK(predict_effect_size(0.85, std::string("MRPC"), glue_priors()) >
        predict_effect_size(0.95, std::string("MRPC"), glue_priors()));

  CHECK(glue_priors().requires_task);
  CHECK(glue_priors().effect_in_percent);
  CHECK_THROWS_AS(
      predict_effect_size(0.9, std::nullopt, glue_priors()),
      std::invalid_argument);
  CHECK_THROWS_AS(
      predict_effect_size(0.9, std::string("NOT-A-TASK"), glue_priors()),
      std::invalid_argument);
}

TEST_CASE("SQuAD effect prior floors at zero past its root") {
  // 0.1331 - 0.1408 * 0.92 = 0.003564
  CHECK(predict_effect_size(0.92, std::nullopt, squad2_priors()) ==
        Approx(0.003564).epsilon(1e-10));
  // root at 0.1331 / 0.1408 = 0.9453125; beyond it the floor kicks in
  std::vector<std::string> warnings;
  CHECK(predict_effect_size(0.96, std::nullopt, squad2_priors(), &warnings) ==
        0.0);
  CHECK_FALSE(warnings.empty());
  CHECK_FALSE(squad2_priors().requires_task);
}

TEST_CASE("odds ratio of the implied discordant cells") {
  // (1 - 0.928586 + 0.02) / (1 - 0.928586 - 0.02)
  double phi = odds_ratio(0.928586, 0.02);
  CHECK(phi == Approx(0.091414 / 0.051414).epsilon(1e-9));
  CHECK(phi > 1.0);
  CHECK(odds_ratio(0.9, 0.0) == Approx(1.0));
  // effect consuming the whole discordant mass is infeasible
  CHECK_THROWS_AS(odds_ratio(0.95, 0.051), std::invalid_argument);
  CHECK_THROWS_AS(odds_ratio(0.95, 0.06), std::invalid_argument);
}

TEST_CASE("OLS recovers an exact affine relation") {
  std::vector<std::vector<double>> rows = {{0.0}, {1.0}, {2.0}, {3.0}, {4.0}};
  std::vector<double> y = {1.0, 3.0, 5.0, 7.0, 9.0};  // y = 2x + 1
  OlsModel m = fit_ols(rows, y, {"x"});
  CHECK(m.intercept == Approx(1.0).epsilon(1e-10));
  CHECK(m.coefficients[0] == Approx(2.0).epsilon(1e-10));
  CHECK(m.r_squared == Approx(1.0).epsilon(1e-10));
  CHECK(m.n_observations == 5);
  CHECK(m.predict(std::vector<double>{10.0}) == Approx(21.0).epsilon(1e-10));
}

TEST_CASE("OLS recovers noisy coefficients within sampling error") {
  RngStream rng(13);
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 200; ++i) {
    double x1 = rng.next_double() * 2.0;
    double x2 = rng.next_normal();
    rows.push_back({x1, x2});
    y.push_back(0.7 - 0.3 * x1 + 0.5 * x2 + 0.1 * rng.next_normal());
  }
  OlsModel m = fit_ols(rows, y, {"x1", "x2"});
  // noise sd 0.1 over 200 points: coefficient SEs are well under 0.02
  CHECK(m.intercept == Approx(0.7).epsilon(0.1));
  CHECK(m.coefficients[0] == Approx(-0.3).epsilon(0.2));
  CHECK(m.coefficients[1] == Approx(0.5).epsilon(0.1));
  CHECK(m.r_squared > 0.8);
}

TEST_CASE("OLS with a centered predictor puts the mean in the intercept") {
  std::vector<std::vector<double>> rows = {{-2.0}, {-1.0}, {0.0}, {1.0}, {2.0}};
  std::vector<double> y = {1.0, 4.0, 2.0, 5.0, 3.0};
  OlsModel m = fit_ols(rows, y, {"c"});
  CHECK(m.intercept == Approx(3.0).epsilon(1e-10));  // mean of y
}

TEST_CASE("OLS rank deficiency names the collinear columns") {
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 0; i < 20; ++i) {
    double x = 0.1 * i;
    rows.push_back({x, 2.0 * x});  // dup is an exact multiple of base
    y.push_back(1.0 + x);
  }
  CHECK_THROWS_AS(fit_ols(rows, y, {"base", "dup"}), std::invalid_argument);
  try {
    fit_ols(rows, y, {"base", "dup"});
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    CHECK(msg.find("collinear") != std::string::npos);
    // pivoting decides which of the pair gets reported
    bool names_one = msg.find("base") != std::string::npos ||
                     msg.find("dup") != std::string::npos;
    CHECK(names_one);
  }
}

TEST_CASE("OLS needs more observations than predictors") {
  std::vector<std::vector<double>> rows = {{1.0, 2.0}, {3.0, 4.0}};
  std::vector<double> y = {1.0, 2.0};
  CHECK_THROWS_AS(fit_ols(rows, y, {"a", "b"}), std::invalid_argument);
}

TEST_CASE("regression CSV round trip") {
  std::string path = write_temp(
      "ok.csv", "min_acc,acc_diff,overlap\n0.9,0.02,0.93\n0.8,0.05,0.82\n"
                "0.95,0.01,0.96\n0.85,0.03,0.87\n");
  RegressionData d = read_regression_csv(path);
  REQUIRE(d.column_names.size() == 3);
  CHECK(d.column_names[0] == "min_acc");
  REQUIRE(d.rows.size() == 4);
  CHECK(d.rows[1][2] == Approx(0.82));

  OlsModel m = fit_ols(d, "overlap");
  REQUIRE(m.predictor_names.size() == 2);
  CHECK(m.predictor_names[0] == "min_acc");
  CHECK(m.predictor_names[1] == "acc_diff");
  CHECK(m.n_observations == 4);

  CHECK_THROWS_AS(fit_ols(d, "not_a_column"), std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("regression CSV ingestion errors") {
  // malformed file contents are runtime errors (CLI exit 1), with the
  // offending line or column named
  std::string ragged = write_temp("ragged.csv", "a,b\n1,2\n3\n");
  CHECK_THROWS_WITH_AS(read_regression_csv(ragged),
                       "/tmp/powcheck_priors_ragged.csv line 3: expected 2 "
                       "fields, got 1",
                       std::runtime_error);
  std::string junk = write_temp("junk.csv", "a,b\n1,x\n");
  CHECK_THROWS_WITH_AS(read_regression_csv(junk),
                       "/tmp/powcheck_priors_junk.csv line 2: bad numeric "
                       "value 'x' in column b",
                       std::runtime_error);
  std::string onecol = write_temp("one.csv", "a\n1\n");
  CHECK_THROWS_AS(read_regression_csv(onecol), std::runtime_error);
  CHECK_THROWS_AS(read_regression_csv("/tmp/powcheck_no_such.csv"),
                  std::runtime_error);
  std::remove(ragged.c_str());
  std::remove(junk.c_str());
  std::remove(onecol.c_str());
}

TEST_CASE("prior-driven family caps effects at the baseline headroom") {
  ProcessFamily fam = mcnemar_family_with_prior(glue_priors(), 0.92,
                                                McNemarVariant::chi_square);
  CHECK(fam.max_effect(1725) == Approx(1.0 - 0.92).epsilon(1e-12));
  auto proc = fam.make(1725, 0.016);
  CHECK(proc->true_effect() == Approx(0.016));

  SimulationConfig c;
  c.reps = 2000;
  c.seed = 42;
  c.threads = 1;
  PowerReport r = estimate_power(*proc, c);
  CHECK(r.power > 0.5);  // near the 80% MDE, power must be substantial
  CHECK(r.power < 1.0);

  CHECK_THROWS_AS(mcnemar_family_with_prior(glue_priors(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mcnemar_family_with_prior(glue_priors(), 1.0), std::invalid_argument);
}

TEST_CASE("prior MDE matches the chi-square oracle at MRPC scale") {
  // exact-power oracle: MDE 0.01609 at (n=1725, sota 0.920, chi-square)
  ProcessFamily fam = mcnemar_family_with_prior(glue_priors(), 0.920,
                                                McNemarVariant::chi_square);
  SimulationConfig c;
  c.reps = 4000;
  c.seed = 42;
  c.threads = 1;
  double mde = find_mde(fam, 1725, 0.8, c);
  CHECK(mde == Approx(0.01609).epsilon(0.13));
}
