#include "powcheck/likert.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "powcheck/stat_tests.hpp"

namespace powcheck {

namespace {

constexpr double kDetectT = 1.96;
constexpr double kGammaBox = 30.0;  // optimizer box for log variance ratios
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

void validate_params(const LikertParams& p) {
  const double sigmas[] = {p.sigma_w0, p.sigma_w1, p.sigma_i0, p.sigma_i1,
                           p.sigma_e};
  for (double s : sigmas)
    if (!(s >= 0.0) || !std::isfinite(s))
      throw std::invalid_argument("likert params: sigmas must be >= 0");
  if (!std::isfinite(p.beta0) || !std::isfinite(p.beta1))
    throw std::invalid_argument("likert params: betas must be finite");
}

// Sufficient statistics of a table for the profiled likelihood. Blocks of
// the random-effect design are ordered (worker intercept, worker slope,
// item intercept, item slope).
struct LmmData {
  std::int64_t n = 0;
  std::int32_t W = 0, I = 0;
  bool balanced = false;  // complete crossing with x exactly +-1/2

  // per-worker and per-item sums of y and x*y
  std::vector<double> a_w, b_w, c_i, d_i;
  double sum_y = 0.0, sum_xy = 0.0, yty = 0.0;
  double sum_x = 0.0, sum_xx = 0.0;

  // balanced-path scalars
  double aa = 0.0, bb = 0.0, cc = 0.0, dd = 0.0;  // within-block dot products

  // generic-path matrices
  Eigen::MatrixXd ZtZ;
  Eigen::MatrixXd ZtX;
  Eigen::VectorXd Zty;
};

LmmData build_data(const RatingsTable& table) {
  LmmData d;
  d.n = static_cast<std::int64_t>(table.rows.size());
  d.W = table.n_workers;
  d.I = table.n_items;
  if (d.W < 2 || d.I < 2)
    throw std::invalid_argument("fit_lmm: need at least 2 workers and 2 items");
  if (d.n < 4) throw std::invalid_argument("fit_lmm: too few rows");

  d.a_w.assign(static_cast<std::size_t>(d.W), 0.0);
  d.b_w.assign(static_cast<std::size_t>(d.W), 0.0);
  d.c_i.assign(static_cast<std::size_t>(d.I), 0.0);
  d.d_i.assign(static_cast<std::size_t>(d.I), 0.0);

  bool has_low = false, has_high = false, x_is_half = true;
  std::vector<std::uint8_t> seen(
      static_cast<std::size_t>(d.W) * static_cast<std::size_t>(d.I) * 2, 0);
  bool crossing_ok = true;
  for (const auto& r : table.rows) {
    if (r.worker < 0 || r.worker >= d.W || r.item < 0 || r.item >= d.I)
      throw std::invalid_argument("fit_lmm: worker/item id out of range");
    if (!std::isfinite(r.rating) || !std::isfinite(r.x))
      throw std::invalid_argument("fit_lmm: non-finite rating or condition");
    if (r.x == -0.5) {
      has_low = true;
    } else if (r.x == 0.5) {
      has_high = true;
    } else {
      x_is_half = false;
      if (r.x < 0.0) has_low = true;
      if (r.x > 0.0) has_high = true;
    }
    if (x_is_half) {
      const std::size_t slot =
          (static_cast<std::size_t>(r.worker) * static_cast<std::size_t>(d.I) +
           static_cast<std::size_t>(r.item)) *
              2 +
          (r.x > 0.0 ? 1 : 0);
      if (seen[slot]) {
        throw std::invalid_argument(
            "fit_lmm: duplicate (worker, item, condition) row");
      }
      seen[slot] = 1;
    } else {
      crossing_ok = false;
    }
    d.a_w[static_cast<std::size_t>(r.worker)] += r.rating;
    d.b_w[static_cast<std::size_t>(r.worker)] += r.x * r.rating;
    d.c_i[static_cast<std::size_t>(r.item)] += r.rating;
    d.d_i[static_cast<std::size_t>(r.item)] += r.x * r.rating;
    d.sum_y += r.rating;
    d.sum_xy += r.x * r.rating;
    d.yty += r.rating * r.rating;
    d.sum_x += r.x;
    d.sum_xx += r.x * r.x;
  }
  if (!(has_low && has_high))
    throw std::invalid_argument("fit_lmm: both conditions must be present");

  d.balanced = x_is_half && crossing_ok &&
               d.n == static_cast<std::int64_t>(2) * d.W * d.I &&
               std::all_of(seen.begin(), seen.end(),
                           [](std::uint8_t s) { return s == 1; });

  for (double v : d.a_w) d.aa += v * v;
  for (double v : d.b_w) d.bb += v * v;
  for (double v : d.c_i) d.cc += v * v;
  for (double v : d.d_i) d.dd += v * v;

  if (!d.balanced) {
    const Eigen::Index q = 2 * (d.W + d.I);
    d.ZtZ = Eigen::MatrixXd::Zero(q, q);
    d.ZtX = Eigen::MatrixXd::Zero(q, 2);
    d.Zty = Eigen::VectorXd::Zero(q);
    for (const auto& r : table.rows) {
      const Eigen::Index cols[4] = {
          r.worker, d.W + r.worker, 2 * d.W + r.item, 2 * d.W + d.I + r.item};
      const double vals[4] = {1.0, r.x, 1.0, r.x};
      for (int p = 0; p < 4; ++p) {
        for (int s = 0; s < 4; ++s)
          d.ZtZ(cols[p], cols[s]) += vals[p] * vals[s];
        d.ZtX(cols[p], 0) += vals[p];
        d.ZtX(cols[p], 1) += vals[p] * r.x;
        d.Zty(cols[p]) += vals[p] * r.rating;
      }
    }
  }
  return d;
}

struct ProfileResult {
  double neg2ll = std::numeric_limits<double>::infinity();
  double beta0 = 0.0, beta1 = 0.0;
  double se_beta0 = 0.0, se_beta1 = 0.0;
  double sigma2 = 0.0;  // profiled residual variance
  bool ridged = false;
};

// One decoupled block pair of the balanced-case inner matrix:
// [[alpha*I_W, c*1*1^T], [c*1*1^T, gamma*I_I]].
struct PairSolve {
  double alpha = 1.0, gamma = 1.0, c = 0.0, den = 1.0;
  double W = 0.0, I = 0.0;

  // dot(u, M^-1 v) for u = (u_w, u_i), v = (v_w, v_i):
  //   [dot(u_w, v_w) - c * t_i * sum(u_w)] / alpha
  // + [dot(u_i, v_i) - c * t_w * sum(u_i)] / gamma
  double quad(double dot_w, double dot_i, double sum_u_w, double sum_u_i,
              double sum_v_w, double sum_v_i) const {
    const double t_w = (gamma * sum_v_w - c * W * sum_v_i) / den;
    const double t_i = (alpha * sum_v_i - c * I * sum_v_w) / den;
    return (dot_w - c * t_i * sum_u_w) / alpha +
           (dot_i - c * t_w * sum_u_i) / gamma;
  }

  double logdet() const {
    return W * std::log(alpha) + I * std::log(gamma) +
           std::log(den / (alpha * gamma));
  }
};

PairSolve make_pair(double lambda_w, double lambda_i, double zz_w,
                    double zz_i, double zz_cross, double W, double I) {
  PairSolve p;
  p.W = W;
  p.I = I;
  p.alpha = 1.0 + lambda_w * zz_w;
  p.gamma = 1.0 + lambda_i * zz_i;
  p.c = std::sqrt(lambda_w * lambda_i) * zz_cross;
  p.den = p.alpha * p.gamma - p.c * p.c * W * I;
  return p;
}

ProfileResult profile_balanced(const LmmData& d,
                               const std::array<double, 4>& lambda) {
  const double W = static_cast<double>(d.W), I = static_cast<double>(d.I);
  const double n = static_cast<double>(d.n);
  // inner-matrix coefficients from the crossed design: a worker intercept
  // covers 2I rows, a worker slope sums x^2 = I/2, a (worker, item) pair
  // shares 2 rows (slopes contribute 1/2)
  const PairSolve p1 =
      make_pair(lambda[0], lambda[2], 2.0 * I, 2.0 * W, 2.0, W, I);
  const PairSolve p2 =
      make_pair(lambda[1], lambda[3], 0.5 * I, 0.5 * W, 0.5, W, I);

  const double s1 = std::sqrt(lambda[0]), s2 = std::sqrt(lambda[1]);
  const double s3 = std::sqrt(lambda[2]), s4 = std::sqrt(lambda[3]);

  // pair 1 vectors: u1 = scaled Z^T 1 (constant blocks 2I, 2W), y-part
  // (s1*a_w, s3*c_i); pair 2 vectors: u2 = scaled Z^T x (constant blocks
  // I/2, W/2), y-part (s2*b_w, s4*d_i)
  const double u1_w = s1 * 2.0 * I, u1_i = s3 * 2.0 * W;
  const double u2_w = s2 * 0.5 * I, u2_i = s4 * 0.5 * W;

  const double q_u1u1 = p1.quad(u1_w * u1_w * W, u1_i * u1_i * I, u1_w * W,
                                 u1_i * I, u1_w * W, u1_i * I);
  const double q_u2u2 = p2.quad(u2_w * u2_w * W, u2_i * u2_i * I, u2_w * W,
                                 u2_i * I, u2_w * W, u2_i * I);
  const double q_u1y =
      p1.quad(u1_w * s1 * d.sum_y, u1_i * s3 * d.sum_y, u1_w * W, u1_i * I,
               s1 * d.sum_y, s3 * d.sum_y);
  const double q_u2y =
      p2.quad(u2_w * s2 * d.sum_xy, u2_i * s4 * d.sum_xy, u2_w * W, u2_i * I,
               s2 * d.sum_xy, s4 * d.sum_xy);
  const double q_yy1 = p1.quad(lambda[0] * d.aa, lambda[2] * d.cc,
                                s1 * d.sum_y, s3 * d.sum_y, s1 * d.sum_y,
                                s3 * d.sum_y);
  const double q_yy2 = p2.quad(lambda[1] * d.bb, lambda[3] * d.dd,
                                s2 * d.sum_xy, s4 * d.sum_xy, s2 * d.sum_xy,
                                s4 * d.sum_xy);

  // balanced X^T X = diag(n, n/4) and the two fixed-effect columns live in
  // disjoint pairs, so A is diagonal
  const double A00 = n - q_u1u1;
  const double A11 = 0.25 * n - q_u2u2;
  const double r0 = d.sum_y - q_u1y;
  const double r1 = d.sum_xy - q_u2y;
  const double c_yy = d.yty - q_yy1 - q_yy2;

  ProfileResult out;
  if (A00 <= 0.0 || A11 <= 0.0) return out;  // +inf objective
  out.beta0 = r0 / A00;
  out.beta1 = r1 / A11;
  const double rss = std::max(0.0, c_yy - out.beta0 * r0 - out.beta1 * r1);
  out.sigma2 = rss / n;
  const double logdet = p1.logdet() + p2.logdet();
  out.neg2ll =
      n * kLogTwoPi + n * std::log(std::max(out.sigma2, 1e-300)) + logdet + n;
  out.se_beta0 = std::sqrt(out.sigma2 / A00);
  out.se_beta1 = std::sqrt(out.sigma2 / A11);
  return out;
}

ProfileResult profile_generic(const LmmData& d,
                              const std::array<double, 4>& lambda,
                              bool* ridged_flag) {
  const Eigen::Index q = 2 * (d.W + d.I);
  Eigen::VectorXd scale(q);
  for (Eigen::Index j = 0; j < d.W; ++j) scale(j) = std::sqrt(lambda[0]);
  for (Eigen::Index j = 0; j < d.W; ++j)
    scale(d.W + j) = std::sqrt(lambda[1]);
  for (Eigen::Index j = 0; j < d.I; ++j)
    scale(2 * d.W + j) = std::sqrt(lambda[2]);
  for (Eigen::Index j = 0; j < d.I; ++j)
    scale(2 * d.W + d.I + j) = std::sqrt(lambda[3]);

  Eigen::MatrixXd M = scale.asDiagonal() * d.ZtZ * scale.asDiagonal();
  M.diagonal().array() += 1.0;

  Eigen::LLT<Eigen::MatrixXd> llt(M);
  double ridge = 1e-10;
  int attempts = 0;
  while (llt.info() != Eigen::Success && attempts < 3) {
    M.diagonal().array() += ridge;
    llt.compute(M);
    ridge *= 100.0;
    ++attempts;
    if (ridged_flag) *ridged_flag = true;
  }
  ProfileResult out;
  if (llt.info() != Eigen::Success) return out;  // +inf objective
  out.ridged = attempts > 0;

  double logdet = 0.0;
  for (Eigen::Index j = 0; j < q; ++j)
    logdet += 2.0 * std::log(llt.matrixL()(j, j));

  const Eigen::MatrixXd U = scale.asDiagonal() * d.ZtX;
  const Eigen::VectorXd uy = scale.asDiagonal() * d.Zty;
  const Eigen::MatrixXd MU = llt.solve(U);
  const Eigen::VectorXd Muy = llt.solve(uy);

  Eigen::Matrix2d XtX;
  XtX << static_cast<double>(d.n), d.sum_x, d.sum_x, d.sum_xx;
  Eigen::Vector2d Xty;
  Xty << d.sum_y, d.sum_xy;

  const Eigen::Matrix2d A = XtX - U.transpose() * MU;
  const Eigen::Vector2d r = Xty - U.transpose() * Muy;
  const double c_yy = d.yty - uy.dot(Muy);

  const double det_a = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  if (det_a <= 0.0 || A(0, 0) <= 0.0) return out;
  const Eigen::Vector2d beta = A.inverse() * r;
  const double n = static_cast<double>(d.n);
  const double rss = std::max(0.0, c_yy - beta.dot(r));
  out.beta0 = beta(0);
  out.beta1 = beta(1);
  out.sigma2 = rss / n;
  out.neg2ll =
      n * kLogTwoPi + n * std::log(std::max(out.sigma2, 1e-300)) + logdet + n;
  const Eigen::Matrix2d Ainv = A.inverse();
  out.se_beta0 = std::sqrt(std::max(0.0, out.sigma2 * Ainv(0, 0)));
  out.se_beta1 = std::sqrt(std::max(0.0, out.sigma2 * Ainv(1, 1)));
  return out;
}

ProfileResult profile_at(const LmmData& d, const std::array<double, 4>& gamma,
                         bool* ridged_flag = nullptr) {
  std::array<double, 4> lambda{};
  for (int k = 0; k < 4; ++k) lambda[static_cast<std::size_t>(k)] =
      std::exp(gamma[static_cast<std::size_t>(k)]);
  return d.balanced ? profile_balanced(d, lambda)
                    : profile_generic(d, lambda, ridged_flag);
}

// Nelder-Mead over the four log variance ratios inside a +-kGammaBox box
// (quadratic penalty outside). Returns the best vertex.
struct NmResult {
  std::array<double, 4> gamma{};
  double f = std::numeric_limits<double>::infinity();
  bool converged = false;
};

NmResult nelder_mead(const LmmData& d, const std::array<double, 4>& start,
                     bool* ridged_flag) {
  const auto objective = [&](const std::array<double, 4>& g) {
    double penalty = 0.0;
    std::array<double, 4> clamped = g;
    for (auto& v : clamped) {
      if (v > kGammaBox) {
        penalty += (v - kGammaBox) * (v - kGammaBox);
        v = kGammaBox;
      } else if (v < -kGammaBox) {
        penalty += (v + kGammaBox) * (v + kGammaBox);
        v = -kGammaBox;
      }
    }
    return profile_at(d, clamped, ridged_flag).neg2ll + 1e6 * penalty;
  };

  constexpr int dim = 4;
  struct Vertex {
    std::array<double, 4> x;
    double f;
  };
  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  simplex.push_back({start, objective(start)});
  for (int k = 0; k < dim; ++k) {
    std::array<double, 4> x = start;
    x[static_cast<std::size_t>(k)] += 1.0;
    simplex.push_back({x, objective(x)});
  }

  const int max_evals = 600;
  int evals = dim + 1;
  NmResult result;
  while (evals < max_evals) {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    const double spread = simplex.back().f - simplex.front().f;
    if (spread < 1e-9 * (1.0 + std::abs(simplex.front().f))) {
      result.converged = true;
      break;
    }

    std::array<double, 4> centroid{};
    for (int v = 0; v < dim; ++v)
      for (int k = 0; k < dim; ++k)
        centroid[static_cast<std::size_t>(k)] +=
            simplex[static_cast<std::size_t>(v)].x[static_cast<std::size_t>(k)] /
            dim;

    const auto blend = [&](double coef) {
      std::array<double, 4> x{};
      for (int k = 0; k < dim; ++k)
        x[static_cast<std::size_t>(k)] =
            centroid[static_cast<std::size_t>(k)] +
            coef * (centroid[static_cast<std::size_t>(k)] -
                    simplex.back().x[static_cast<std::size_t>(k)]);
      return x;
    };

    const auto reflected = blend(1.0);
    const double f_r = objective(reflected);
    ++evals;
    if (f_r < simplex.front().f) {
      const auto expanded = blend(2.0);
      const double f_e = objective(expanded);
      ++evals;
      simplex.back() = f_e < f_r ? Vertex{expanded, f_e} : Vertex{reflected, f_r};
    } else if (f_r < simplex[dim - 1].f) {
      simplex.back() = {reflected, f_r};
    } else {
      const auto contracted = blend(f_r < simplex.back().f ? 0.5 : -0.5);
      const double f_c = objective(contracted);
      ++evals;
      if (f_c < std::min(f_r, simplex.back().f)) {
        simplex.back() = {contracted, f_c};
      } else {
        // shrink toward the best vertex
        for (int v = 1; v <= dim; ++v) {
          auto& vert = simplex[static_cast<std::size_t>(v)];
          for (int k = 0; k < dim; ++k)
            vert.x[static_cast<std::size_t>(k)] =
                0.5 * (vert.x[static_cast<std::size_t>(k)] +
                       simplex.front().x[static_cast<std::size_t>(k)]);
          vert.f = objective(vert.x);
          ++evals;
        }
      }
    }
  }
  std::sort(simplex.begin(), simplex.end(),
            [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  result.gamma = simplex.front().x;
  result.f = simplex.front().f;
  return result;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() &&
           (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.pop_back();
    std::size_t start = 0;
    while (start < field.size() &&
           (field[start] == ' ' || field[start] == '\t'))
      ++start;
    fields.push_back(field.substr(start));
  }
  return fields;
}

}  // namespace

LikertParams high_variance_preset(double beta0, double beta1) {
  LikertParams p;
  p.beta0 = beta0;
  p.beta1 = beta1;
  p.sigma_w0 = 0.01;
  p.sigma_w1 = 0.11;
  p.sigma_i0 = 0.04;
  p.sigma_i1 = 0.14;
  p.sigma_e = 0.26;
  return p;
}

LikertParams low_variance_preset(double beta0, double beta1) {
  LikertParams p;
  p.beta0 = beta0;
  p.beta1 = beta1;
  p.sigma_w0 = 0.01;
  p.sigma_w1 = 0.04;
  p.sigma_i0 = 0.01;
  p.sigma_i1 = 0.13;
  p.sigma_e = 0.16;
  return p;
}

RatingsTable simulate_ratings(const LikertParams& params,
                              std::int32_t n_workers, std::int32_t n_items,
                              RngStream& rng) {
  validate_params(params);
  if (n_workers < 2 || n_items < 2)
    throw std::invalid_argument(
        "simulate_ratings: need at least 2 workers and 2 items");

  std::vector<double> w0(static_cast<std::size_t>(n_workers));
  std::vector<double> w1(static_cast<std::size_t>(n_workers));
  std::vector<double> i0(static_cast<std::size_t>(n_items));
  std::vector<double> i1(static_cast<std::size_t>(n_items));
  for (auto& v : w0) v = params.sigma_w0 * rng.next_normal();
  for (auto& v : w1) v = params.sigma_w1 * rng.next_normal();
  for (auto& v : i0) v = params.sigma_i0 * rng.next_normal();
  for (auto& v : i1) v = params.sigma_i1 * rng.next_normal();

  RatingsTable table;
  table.n_workers = n_workers;
  table.n_items = n_items;
  table.rows.reserve(static_cast<std::size_t>(n_workers) *
                     static_cast<std::size_t>(n_items) * 2);
  for (std::int32_t w = 0; w < n_workers; ++w) {
    for (std::int32_t i = 0; i < n_items; ++i) {
      for (const double x : {-0.5, 0.5}) {
        const double mean =
            params.beta0 + w0[static_cast<std::size_t>(w)] +
            i0[static_cast<std::size_t>(i)] +
            (params.beta1 + w1[static_cast<std::size_t>(w)] +
             i1[static_cast<std::size_t>(i)]) *
                x;
        table.rows.push_back(
            RatingRow{w, i, x, mean + params.sigma_e * rng.next_normal()});
      }
    }
  }
  return table;
}

RatingsTable read_ratings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty ratings file");
  const auto header = split_csv_row(line);
  int col_worker = -1, col_item = -1, col_cond = -1, col_rating = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "worker") col_worker = static_cast<int>(j);
    else if (header[j] == "item") col_item = static_cast<int>(j);
    else if (header[j] == "condition") col_cond = static_cast<int>(j);
    else if (header[j] == "rating") col_rating = static_cast<int>(j);
  }
  if (col_worker < 0 || col_item < 0 || col_cond < 0 || col_rating < 0)
    throw std::runtime_error(
        path + ": header must name worker, item, condition, rating columns");

  struct RawRow {
    std::string worker, item, cond;
    double rating;
    std::size_t line_no;
  };
  std::vector<RawRow> raw;
  std::map<std::string, std::int32_t> workers, items;
  std::map<std::string, int> conditions;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_csv_row(line);
    if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
    const std::size_t needed = static_cast<std::size_t>(
        std::max(std::max(col_worker, col_item), std::max(col_cond, col_rating)));
    if (fields.size() <= needed) {
      std::ostringstream os;
      os << path << " line " << line_no << ": expected at least "
         << (needed + 1) << " comma-separated fields";
      throw std::runtime_error(os.str());
    }
    RawRow r;
    r.worker = fields[static_cast<std::size_t>(col_worker)];
    r.item = fields[static_cast<std::size_t>(col_item)];
    r.cond = fields[static_cast<std::size_t>(col_cond)];
    r.line_no = line_no;
    char* end = nullptr;
    const std::string& rs = fields[static_cast<std::size_t>(col_rating)];
    r.rating = std::strtod(rs.c_str(), &end);
    if (end == rs.c_str() || *end != '\0' || !std::isfinite(r.rating)) {
      std::ostringstream os;
      os << path << " line " << line_no << ": bad rating '" << rs << "'";
      throw std::runtime_error(os.str());
    }
    workers.emplace(r.worker, 0);
    items.emplace(r.item, 0);
    conditions.emplace(r.cond, 0);
    raw.push_back(std::move(r));
  }
  if (conditions.size() != 2) {
    std::ostringstream os;
    os << path << ": expected exactly 2 distinct condition labels, found "
       << conditions.size();
    throw std::runtime_error(os.str());
  }

  RatingsTable table;
  std::int32_t next = 0;
  for (auto& [label, id] : workers) {
    id = next++;
    table.worker_labels.push_back(label);
  }
  next = 0;
  for (auto& [label, id] : items) {
    id = next++;
    table.item_labels.push_back(label);
  }
  int cond_rank = 0;
  for (auto& [label, rank] : conditions) {
    table.condition_labels[static_cast<std::size_t>(cond_rank)] = label;
    rank = cond_rank++;
  }
  table.n_workers = static_cast<std::int32_t>(workers.size());
  table.n_items = static_cast<std::int32_t>(items.size());

  std::unordered_map<std::uint64_t, std::size_t> seen;
  for (const auto& r : raw) {
    RatingRow row;
    row.worker = workers[r.worker];
    row.item = items[r.item];
    row.x = conditions[r.cond] == 0 ? -0.5 : 0.5;
    row.rating = r.rating;
    const std::uint64_t key =
        (static_cast<std::uint64_t>(row.worker) << 33) ^
        (static_cast<std::uint64_t>(row.item) << 1) ^
        static_cast<std::uint64_t>(row.x > 0.0);
    const auto [it, inserted] = seen.emplace(key, r.line_no);
    if (!inserted) {
      std::ostringstream os;
      os << path << " line " << r.line_no << ": duplicate (worker, item, "
         << "condition) triple (first seen at line " << it->second << ")";
      throw std::runtime_error(os.str());
    }
    table.rows.push_back(row);
  }
  return table;
}

LmmProfilePoint lmm_profile_at(const RatingsTable& data,
                               const std::array<double, 4>& log_ratios) {
  const LmmData d = build_data(data);
  const ProfileResult r = profile_at(d, log_ratios);
  LmmProfilePoint p;
  p.neg2ll = r.neg2ll;
  p.beta0 = r.beta0;
  p.beta1 = r.beta1;
  p.se_beta1 = r.se_beta1;
  p.sigma_e = std::sqrt(r.sigma2);
  return p;
}

LmmFit fit_lmm(const RatingsTable& data) {
  const LmmData d = build_data(data);
  LmmFit fit;

  // perfectly explained data (e.g. constant ratings): zero variances, OLS
  // betas, no detection
  {
    const double n = static_cast<double>(d.n);
    const double det = n * d.sum_xx - d.sum_x * d.sum_x;
    const double b1 = (n * d.sum_xy - d.sum_x * d.sum_y) / det;
    const double b0 = (d.sum_y - b1 * d.sum_x) / n;
    const double rss =
        d.yty - 2.0 * (b0 * d.sum_y + b1 * d.sum_xy) +
        b0 * b0 * n + 2.0 * b0 * b1 * d.sum_x + b1 * b1 * d.sum_xx;
    if (rss <= 1e-20 * std::max(1.0, d.yty)) {
      fit.beta0 = b0;
      fit.beta1 = b1;
      fit.converged = true;
      fit.log_likelihood = std::numeric_limits<double>::infinity();
      fit.warnings.push_back("degenerate fit: zero residual variance");
      return fit;
    }
  }

  bool ridged = false;
  const std::array<double, 4> start_a{-2.302585092994046, -2.302585092994046,
                                      -2.302585092994046, -2.302585092994046};
  const std::array<double, 4> start_b{-4.605170185988091, -4.605170185988091,
                                      -4.605170185988091, -4.605170185988091};
  NmResult best = nelder_mead(d, start_a, &ridged);
  const NmResult second = nelder_mead(d, start_b, &ridged);
  if (second.f < best.f) best = second;

  const ProfileResult opt = profile_at(d, best.gamma, &ridged);
  fit.beta0 = opt.beta0;
  fit.beta1 = opt.beta1;
  fit.se_beta0 = opt.se_beta0;
  fit.se_beta1 = opt.se_beta1;
  fit.sigma_e = std::sqrt(opt.sigma2);
  fit.sigma_w0 = std::sqrt(std::exp(best.gamma[0]) * opt.sigma2);
  fit.sigma_w1 = std::sqrt(std::exp(best.gamma[1]) * opt.sigma2);
  fit.sigma_i0 = std::sqrt(std::exp(best.gamma[2]) * opt.sigma2);
  fit.sigma_i1 = std::sqrt(std::exp(best.gamma[3]) * opt.sigma2);
  fit.log_likelihood = -0.5 * opt.neg2ll;
  fit.converged = best.converged && std::isfinite(opt.neg2ll);
  if (!fit.converged)
    fit.warnings.push_back("optimizer did not converge; estimates unreliable");
  if (ridged)
    fit.warnings.push_back("singular inner matrix; ridge jitter applied");

  if (fit.se_beta1 <= 1e-15 * std::max(1.0, std::abs(fit.beta1))) {
    fit.t = 0.0;
    fit.warnings.push_back("degenerate standard error; t set to 0");
  } else {
    fit.t = fit.beta1 / fit.se_beta1;
  }
  return fit;
}

bool lmm_detect(const LmmFit& fit) {
  return fit.converged && fit.t > kDetectT;
}

namespace {

class LikertProcess final : public GenerativeProcess {
 public:
  LikertProcess(const LikertParams& params, std::int32_t n_workers,
                std::int32_t n_items)
      : params_(params), n_workers_(n_workers), n_items_(n_items) {
    validate_params(params);
    if (n_workers < 2 || n_items < 2)
      throw std::invalid_argument(
          "likert_power: need at least 2 workers and 2 items");
  }

  double true_effect() const override { return params_.beta1; }

  RepOutcome run_rep(RngStream& rng) const override {
    const RatingsTable table =
        simulate_ratings(params_, n_workers_, n_items_, rng);
    const LmmFit fit = fit_lmm(table);
    RepOutcome out;
    out.converged = fit.converged;
    out.effect = fit.beta1;
    // one-sided upper-tail p so that p <= 1 - Phi(1.96) matches t > 1.96
    out.p_value = fit.converged ? 1.0 - normal_cdf(fit.t) : 1.0;
    return out;
  }

 private:
  LikertParams params_;
  std::int32_t n_workers_;
  std::int32_t n_items_;
};

}  // namespace

PowerReport likert_power(const LikertParams& params, std::int32_t n_workers,
                         std::int32_t n_items,
                         const SimulationConfig& config) {
  if (config.reps < 200)
    throw std::invalid_argument("likert_power: reps must be >= 200");
  LikertProcess process(params, n_workers, n_items);
  SimulationConfig cfg = config;
  cfg.n = static_cast<std::int64_t>(n_workers) * n_items * 2;
  cfg.effect = params.beta1;
  cfg.alpha = 1.0 - normal_cdf(kDetectT);  // detection rule: t > 1.96
  PowerReport report = estimate_power(process, cfg);
  report.diagnostics.push_back("detection rule: t > 1.96 (one-sided)");
  return report;
}

}  // namespace powcheck
