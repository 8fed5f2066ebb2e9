#include "gax/sas.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <Eigen/Cholesky>

#include "gax/binning.hpp"
#include "gax/error.hpp"
#include "gax/random.hpp"

namespace gax {

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
    throw Error(ErrorCode::InvalidArgument, "log grid needs 0 < lo <= hi and count >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    out[static_cast<std::size_t>(k)] = std::pow(10.0, a + t * (b - a));
  }
  return out;
}

void SasConfig::validate() const {
  if (knots < 4) throw Error(ErrorCode::InvalidArgument, "SAS needs at least 4 knots");
  if (lambda_grid.empty()) throw Error(ErrorCode::InvalidArgument, "lambda grid is empty");
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    if (!(lambda_grid[k] > 0.0) || !std::isfinite(lambda_grid[k]) ||
        (k > 0 && !(lambda_grid[k] > lambda_grid[k - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "lambda grid must be positive and increasing");
    }
  }
  if (cv_folds < 2) throw Error(ErrorCode::InvalidArgument, "SAS needs at least 2 CV folds");
  if (backfit_max_iters < 1) throw Error(ErrorCode::InvalidArgument, "backfit_max_iters < 1");
  if (!(backfit_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "backfit_tol must be > 0");
}

double SplineFit::operator()(double x) const {
  if (x <= knots.front()) return values.front();
  if (x >= knots.back()) return values.back();
  const auto k = static_cast<std::size_t>(
      std::upper_bound(knots.begin(), knots.end(), x) - knots.begin() - 1);
  const double h = knots[k + 1] - knots[k];
  const double a = knots[k + 1] - x;
  const double b = x - knots[k];
  const double m0 = second_derivs[k];
  const double m1 = second_derivs[k + 1];
  return (m0 * a * a * a + m1 * b * b * b) / (6.0 * h) + (values[k] / h - m0 * h / 6.0) * a +
         (values[k + 1] / h - m1 * h / 6.0) * b;
}

double SplineFit::roughness() const {
  // s'' is piecewise linear between knots.
  double out = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double m0 = second_derivs[k];
    const double m1 = second_derivs[k + 1];
    out += (knots[k + 1] - knots[k]) * (m0 * m0 + m0 * m1 + m1 * m1) / 3.0;
  }
  return out;
}

std::vector<double> quantile_knots(std::span<const double> x, int k) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 knots");
  auto distinct = distinct_sorted(x);
  if (static_cast<int>(distinct.size()) < k) {
    throw Error(ErrorCode::TooFewDistinctValues,
                "column has " + std::to_string(distinct.size()) + " distinct values, need " +
                    std::to_string(k));
  }
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  std::vector<double> knots;
  for (int j = 0; j < k; ++j) {
    const auto pos = static_cast<std::size_t>(
        std::llround(static_cast<double>(j) * static_cast<double>(n - 1) / (k - 1)));
    if (knots.empty() || sorted[pos] > knots.back()) knots.push_back(sorted[pos]);
  }
  if (static_cast<int>(knots.size()) < k) {
    // Heavy ties: spread the knots over the distinct values instead.
    knots.clear();
    const auto m = distinct.size();
    for (int j = 0; j < k; ++j) {
      knots.push_back(distinct[static_cast<std::size_t>(
          std::llround(static_cast<double>(j) * static_cast<double>(m - 1) / (k - 1)))]);
    }
  }
  return knots;
}

namespace {

// Cubic regression spline basis parameterized by knot values beta. The
// second derivatives at the knots are F beta, and inside [k_j, k_{j+1}] the
// spline is am*beta_j + ap*beta_{j+1} + cm*(F beta)_j + cp*(F beta)_{j+1}.
class SplineBasis {
 public:
  struct Row {
    int j = 0;
    double am = 0.0, ap = 0.0, cm = 0.0, cp = 0.0;
  };

  explicit SplineBasis(std::vector<double> knots) : knots_(std::move(knots)) {
    const int k = size();
    f_ = Eigen::MatrixXd::Zero(k, k);
    s_ = Eigen::MatrixXd::Zero(k, k);
    if (k < 3) return;
    const int m = k - 2;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, k);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      const double h0 = knots_[static_cast<std::size_t>(i + 1)] - knots_[static_cast<std::size_t>(i)];
      const double h1 =
          knots_[static_cast<std::size_t>(i + 2)] - knots_[static_cast<std::size_t>(i + 1)];
      d(i, i) = 1.0 / h0;
      d(i, i + 1) = -1.0 / h0 - 1.0 / h1;
      d(i, i + 2) = 1.0 / h1;
      b(i, i) = (h0 + h1) / 3.0;
      if (i + 1 < m) b(i, i + 1) = b(i + 1, i) = h1 / 6.0;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(b);
    const Eigen::MatrixXd binv_d = llt.solve(d);
    f_.block(1, 0, m, k) = binv_d;
    s_ = d.transpose() * binv_d;
    s_ = 0.5 * (s_ + s_.transpose());
  }

  int size() const { return static_cast<int>(knots_.size()); }
  const std::vector<double>& knots() const { return knots_; }
  const Eigen::MatrixXd& second_deriv_map() const { return f_; }
  const Eigen::MatrixXd& penalty() const { return s_; }

  Row row(double x) const {
    const int k = size();
    x = std::clamp(x, knots_.front(), knots_.back());
    int j = static_cast<int>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin()) - 1;
    j = std::clamp(j, 0, k - 2);
    const double lo = knots_[static_cast<std::size_t>(j)];
    const double hi = knots_[static_cast<std::size_t>(j + 1)];
    const double h = hi - lo;
    const double a = hi - x;
    const double b = x - lo;
    Row r;
    r.j = j;
    r.am = a / h;
    r.ap = b / h;
    r.cm = (a * a * a / h - h * a) / 6.0;
    r.cp = (b * b * b / h - h * b) / 6.0;
    return r;
  }

  // Raw coordinates: [beta; F beta] has length 2K.
  static void accumulate(const Row& r, int k, double weight_r, Eigen::MatrixXd* g,
                         Eigen::VectorXd* rhs) {
    const int idx[4] = {r.j, r.j + 1, k + r.j, k + r.j + 1};
    const double w[4] = {r.am, r.ap, r.cm, r.cp};
    for (int a = 0; a < 4; ++a) {
      if (rhs) (*rhs)(idx[a]) += w[a] * weight_r;
      if (g) {
        for (int b = 0; b < 4; ++b) (*g)(idx[a], idx[b]) += w[a] * w[b];
      }
    }
  }

  // Maps raw 2K quantities to beta coordinates: T = [I; F].
  Eigen::MatrixXd reduce(const Eigen::MatrixXd& g_raw) const {
    const int k = size();
    Eigen::MatrixXd t(2 * k, k);
    t.topRows(k).setIdentity();
    t.bottomRows(k) = f_;
    Eigen::MatrixXd out = t.transpose() * g_raw * t;
    return 0.5 * (out + out.transpose());
  }
  Eigen::VectorXd reduce(const Eigen::VectorXd& b_raw) const {
    const int k = size();
    return b_raw.head(k) + f_.transpose() * b_raw.tail(k);
  }

  // Raw coefficient vector [beta; F beta] for fast row evaluation.
  Eigen::VectorXd expand(const Eigen::VectorXd& beta) const {
    const int k = size();
    Eigen::VectorXd out(2 * k);
    out.head(k) = beta;
    out.tail(k) = f_ * beta;
    return out;
  }

  static double eval(const Row& r, int k, const Eigen::VectorXd& raw) {
    return r.am * raw(r.j) + r.ap * raw(r.j + 1) + r.cm * raw(k + r.j) + r.cp * raw(k + r.j + 1);
  }

 private:
  std::vector<double> knots_;
  Eigen::MatrixXd f_;
  Eigen::MatrixXd s_;
};

Eigen::VectorXd solve_penalized(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs,
                                const Eigen::MatrixXd& penalty, double lambda) {
  const Eigen::MatrixXd a = gram + lambda * penalty;
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "penalized normal equations are not positive definite");
  }
  Eigen::VectorXd beta = llt.solve(rhs);
  if (!beta.allFinite()) {
    throw Error(ErrorCode::SingularSystem, "penalized spline solve produced non-finite values");
  }
  // A tiny pivot can pass the factorization yet leave a useless solution.
  if (((a * beta - rhs).norm()) > 1e-6 * (rhs.norm() + a.norm() * beta.norm())) {
    throw Error(ErrorCode::SingularSystem, "penalized normal equations are ill-conditioned");
  }
  return beta;
}

// Rescales the roughness penalty to the Frobenius norm of the Gram matrix so
// that lambda is dimensionless across knot spacings and feature units.
Eigen::MatrixXd scaled_penalty(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& s) {
  const double sn = s.norm();
  return sn > 0.0 ? Eigen::MatrixXd(s * (gram.norm() / sn)) : s;
}

SplineFit make_fit(const SplineBasis& basis, const Eigen::VectorXd& beta, double lambda) {
  SplineFit out;
  out.knots = basis.knots();
  out.values.assign(beta.data(), beta.data() + beta.size());
  const Eigen::VectorXd m = basis.second_deriv_map() * beta;
  out.second_derivs.assign(m.data(), m.data() + m.size());
  out.lambda = lambda;
  return out;
}

// Everything about one feature that does not depend on the residual.
struct FeatureSystem {
  SplineBasis basis;
  std::vector<SplineBasis::Row> rows;
  Eigen::MatrixXd gram;                // mean over all rows, beta coordinates
  Eigen::MatrixXd penalty;             // scaled to gram
  std::vector<Eigen::MatrixXd> fold_gram_raw;  // sums, raw coordinates
};

}  // namespace

SplineFit fit_spline_1d(std::span<const double> x, std::span<const double> r, int knots,
                        double lambda) {
  if (x.size() != r.size()) throw Error(ErrorCode::LengthMismatch, "x and r lengths differ");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be positive and finite");
  }
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (!std::isfinite(x[t]) || !std::isfinite(r[t])) {
      throw Error(ErrorCode::NonFiniteValue, "spline inputs must be finite");
    }
  }
  const SplineBasis basis(quantile_knots(x, knots));
  const int k = basis.size();
  Eigen::MatrixXd g_raw = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  Eigen::VectorXd b_raw = Eigen::VectorXd::Zero(2 * k);
  for (std::size_t t = 0; t < x.size(); ++t) {
    SplineBasis::accumulate(basis.row(x[t]), k, r[t], &g_raw, &b_raw);
  }
  const double inv_n = 1.0 / static_cast<double>(x.size());
  const Eigen::MatrixXd gram = basis.reduce(g_raw) * inv_n;
  const Eigen::VectorXd beta = solve_penalized(gram, basis.reduce(b_raw) * inv_n,
                                               scaled_penalty(gram, basis.penalty()), lambda);
  return make_fit(basis, beta, lambda);
}

AdditiveModel fit_sas(const Matrix& x, std::span<const std::string> names,
                      std::span<const double> f, const SasConfig& cfg, Task task,
                      SasTrace* trace) {
  cfg.validate();
  const Index n = x.rows();
  const Index p = x.cols();
  if (static_cast<Index>(f.size()) != n) {
    throw Error(ErrorCode::LengthMismatch, "teacher output count does not match row count");
  }
  if (static_cast<Index>(names.size()) != p) {
    throw Error(ErrorCode::DimensionMismatch, "name count does not match column count");
  }
  for (double v : f) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteTarget, "teacher output non-finite");
  }
  const auto un = static_cast<std::size_t>(n);
  const int folds = static_cast<int>(std::min<Index>(cfg.cv_folds, n));

  std::vector<int> fold_of(un);
  {
    std::vector<std::size_t> perm(un);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(mix_seed(cfg.seed, 0x5A5));
    rng.shuffle(std::span<std::size_t>(perm));
    for (std::size_t t = 0; t < un; ++t) fold_of[perm[t]] = static_cast<int>(t % static_cast<std::size_t>(folds));
  }
  std::vector<double> fold_n(static_cast<std::size_t>(folds), 0.0);
  for (int fo : fold_of) fold_n[static_cast<std::size_t>(fo)] += 1.0;

  // Build per-feature systems. Constant columns get no spline.
  std::vector<std::optional<FeatureSystem>> systems(static_cast<std::size_t>(p));
  std::vector<double> constant_value(static_cast<std::size_t>(p), 0.0);
  for (Index j = 0; j < p; ++j) {
    std::vector<double> col(un);
    for (Index t = 0; t < n; ++t) col[static_cast<std::size_t>(t)] = x(t, j);
    const auto distinct = distinct_sorted(col);
    if (distinct.size() < 2) {
      constant_value[static_cast<std::size_t>(j)] = distinct.front();
      continue;
    }
    const int kj = std::min<int>(cfg.knots, static_cast<int>(distinct.size()));
    FeatureSystem sys{SplineBasis(quantile_knots(col, kj)), {}, {}, {}, {}};
    const int k = sys.basis.size();
    sys.rows.reserve(un);
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(2 * k, 2 * k);
    sys.fold_gram_raw.assign(static_cast<std::size_t>(folds), Eigen::MatrixXd::Zero(2 * k, 2 * k));
    for (std::size_t t = 0; t < un; ++t) {
      sys.rows.push_back(sys.basis.row(col[t]));
      SplineBasis::accumulate(sys.rows.back(), k, 0.0,
                              &sys.fold_gram_raw[static_cast<std::size_t>(fold_of[t])], nullptr);
    }
    for (const auto& g : sys.fold_gram_raw) total += g;
    sys.gram = sys.basis.reduce(total) / static_cast<double>(n);
    sys.penalty = scaled_penalty(sys.gram, sys.basis.penalty());
    systems[static_cast<std::size_t>(j)] = std::move(sys);
  }

  double intercept = 0.0;
  for (double v : f) intercept += v;
  intercept /= static_cast<double>(n);

  std::vector<double> resid(un);
  for (std::size_t t = 0; t < un; ++t) resid[t] = f[t] - intercept;
  std::vector<std::vector<double>> fitted(static_cast<std::size_t>(p), std::vector<double>(un, 0.0));
  std::vector<Eigen::VectorXd> betas(static_cast<std::size_t>(p));
  std::vector<double> lambdas(static_cast<std::size_t>(p), 0.0);
  std::vector<double> cycle_mse;
  std::vector<double> cycle_objective;
  bool converged = false;
  int cycles = 0;

  for (int cycle = 0; cycle < cfg.backfit_max_iters; ++cycle) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      auto& slot = systems[static_cast<std::size_t>(j)];
      if (!slot) continue;
      const auto& sys = *slot;
      const int k = sys.basis.size();
      auto& h = fitted[static_cast<std::size_t>(j)];

      std::vector<Eigen::VectorXd> fold_b_raw(static_cast<std::size_t>(folds),
                                              Eigen::VectorXd::Zero(2 * k));
      std::vector<double> fold_rr(static_cast<std::size_t>(folds), 0.0);
      for (std::size_t t = 0; t < un; ++t) {
        const double r = resid[t] + h[t];
        const auto fo = static_cast<std::size_t>(fold_of[t]);
        SplineBasis::accumulate(sys.rows[t], k, r, nullptr, &fold_b_raw[fo]);
        fold_rr[fo] += r * r;
      }
      Eigen::VectorXd b_raw = Eigen::VectorXd::Zero(2 * k);
      for (const auto& b : fold_b_raw) b_raw += b;
      const Eigen::VectorXd rhs = sys.basis.reduce(b_raw) / static_cast<double>(n);

      if (cycle == 0) {
        double best_score = 0.0;
        for (std::size_t g = 0; g < cfg.lambda_grid.size(); ++g) {
          const double lambda = cfg.lambda_grid[g];
          double sse = 0.0;
          for (int fo = 0; fo < folds; ++fo) {
            const auto uf = static_cast<std::size_t>(fo);
            const Eigen::MatrixXd g_f = sys.basis.reduce(sys.fold_gram_raw[uf]);
            const Eigen::VectorXd b_f = sys.basis.reduce(fold_b_raw[uf]);
            const double n_train = static_cast<double>(n) - fold_n[uf];
            const Eigen::MatrixXd gram_train =
                (sys.gram * static_cast<double>(n) - g_f) / n_train;
            const Eigen::VectorXd rhs_train = (rhs * static_cast<double>(n) - b_f) / n_train;
            const Eigen::VectorXd beta =
                solve_penalized(gram_train, rhs_train, sys.penalty, lambda);
            sse += fold_rr[uf] - 2.0 * beta.dot(b_f) + beta.dot(g_f * beta);
          }
          if (g == 0 || sse < best_score) {
            best_score = sse;
            lambdas[static_cast<std::size_t>(j)] = lambda;
          }
        }
      }

      Eigen::VectorXd beta = solve_penalized(sys.gram, rhs, sys.penalty,
                                             lambdas[static_cast<std::size_t>(j)]);
      Eigen::VectorXd raw = sys.basis.expand(beta);
      std::vector<double> next(un);
      double mean = 0.0;
      for (std::size_t t = 0; t < un; ++t) {
        next[t] = SplineBasis::eval(sys.rows[t], k, raw);
        mean += next[t];
      }
      mean /= static_cast<double>(n);
      // A constant shift of the knot values shifts the spline by the same constant.
      beta.array() -= mean;
      for (std::size_t t = 0; t < un; ++t) {
        next[t] -= mean;
        max_change = std::max(max_change, std::abs(next[t] - h[t]));
        resid[t] -= next[t] - h[t];
      }
      h = std::move(next);
      betas[static_cast<std::size_t>(j)] = std::move(beta);
    }
    double mse = 0.0;
    for (double r : resid) mse += r * r;
    cycle_mse.push_back(mse / static_cast<double>(n));
    double penalty = 0.0;
    for (Index j = 0; j < p; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (systems[uj]) penalty += lambdas[uj] * betas[uj].dot(systems[uj]->penalty * betas[uj]);
    }
    cycle_objective.push_back(cycle_mse.back() + penalty);
    cycles = cycle + 1;
    if (max_change < cfg.backfit_tol) {
      converged = true;
      break;
    }
  }

  std::vector<FeatureShape> shapes;
  for (Index j = 0; j < p; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    const std::string& name = names[uj];
    if (!systems[uj]) {
      shapes.emplace_back(name, std::vector<double>{constant_value[uj]}, std::vector<double>{0.0},
                          Interpolation::CubicSpline);
      continue;
    }
    const auto& beta = betas[uj];
    shapes.emplace_back(name, systems[uj]->basis.knots(),
                        std::vector<double>(beta.data(), beta.data() + beta.size()),
                        Interpolation::CubicSpline);
  }
  if (trace) {
    trace->lambdas = lambdas;
    trace->cycle_mse = std::move(cycle_mse);
    trace->cycle_objective = std::move(cycle_objective);
    trace->cycles = cycles;
    trace->converged = converged;
  }
  AdditiveModel raw(intercept, std::move(shapes), {}, task, "SAS");
  return center(raw, x, names);
}

AdditiveModel fit_sas(const Dataset& ds, std::span<const double> f, const SasConfig& cfg,
                      SasTrace* trace) {
  return fit_sas(ds.features(), ds.feature_names(), f, cfg, ds.task(), trace);
}

}  // namespace gax
