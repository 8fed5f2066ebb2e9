#include <gtest/gtest.h>

#include <Eigen/QR>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "gax/eval.hpp"
#include "gax/random.hpp"
#include "gax/sas.hpp"
#include "gax/synthetic.hpp"
#include "helpers.hpp"

namespace gax {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> uniform_column(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

// Natural cubic spline basis in truncated-power form (1, x, N_1..N_{K-2}),
// an independent parameterization of the same function space.
Eigen::RowVectorXd natural_basis_row(double x, const std::vector<double>& knots) {
  const auto k = knots.size();
  const auto cube = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
  const auto d = [&](std::size_t j) {
    return (cube(x - knots[j]) - cube(x - knots[k - 1])) / (knots[k - 1] - knots[j]);
  };
  Eigen::RowVectorXd row(static_cast<Index>(k));
  row[0] = 1.0;
  row[1] = x;
  for (std::size_t j = 0; j + 2 < k; ++j) row[static_cast<Index>(j + 2)] = d(j) - d(k - 2);
  return row;
}

TEST(LogGrid, Endpoints) {
  const auto g = log_grid(1e-4, 1e4, 17);
  ASSERT_EQ(g.size(), 17u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-4);
  EXPECT_NEAR(g.back(), 1e4, 1e-8);
  EXPECT_NEAR(g[8], 1.0, 1e-12);
  EXPECT_GAX_ERROR(log_grid(0.0, 1.0, 3), InvalidArgument);
}

TEST(SasConfig, Validation) {
  SasConfig c;
  EXPECT_NO_THROW(c.validate());
  c.knots = 3;
  EXPECT_GAX_ERROR(c.validate(), InvalidArgument);
  c = SasConfig{};
  c.lambda_grid = {1.0, 0.5};
  EXPECT_GAX_ERROR(c.validate(), InvalidArgument);
  c = SasConfig{};
  c.cv_folds = 1;
  EXPECT_GAX_ERROR(c.validate(), InvalidArgument);
  c = SasConfig{};
  c.backfit_tol = 0.0;
  EXPECT_GAX_ERROR(c.validate(), InvalidArgument);
}

TEST(Spline1d, LinearTargetIsReproducedForAnyLambda) {
  const auto x = uniform_column(2000, 1);
  std::vector<double> r(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) r[t] = 1.5 * x[t] - 0.25;
  for (double lambda : {1e-4, 1.0, 1e4}) {
    const SplineFit s = fit_spline_1d(x, r, 20, lambda);
    // Inside the knot range; beyond it the spline is clamped.
    for (double v = s.knots.front(); v <= s.knots.back(); v += 0.01) {
      EXPECT_NEAR(s(v), 1.5 * v - 0.25, 1e-8) << lambda;
    }
    EXPECT_LT(s.roughness(), 1e-12);
  }
}

TEST(Spline1d, HugeLambdaGivesLeastSquaresLine) {
  const auto x = uniform_column(3000, 2);
  std::vector<double> r(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) r[t] = std::sin(2.5 * x[t]) + x[t] * x[t];
  // Ordinary least-squares line.
  double mx = 0, mr = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    mx += x[t];
    mr += r[t];
  }
  mx /= static_cast<double>(x.size());
  mr /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    sxy += (x[t] - mx) * (r[t] - mr);
    sxx += (x[t] - mx) * (x[t] - mx);
  }
  const double slope = sxy / sxx;
  const double icept = mr - slope * mx;
  const auto deviation = [&](double lambda) {
    const SplineFit s = fit_spline_1d(x, r, 20, lambda);
    double worst = 0.0;
    for (double v = -0.9; v <= 0.9; v += 0.01) worst = std::max(worst, std::abs(s(v) - icept - slope * v));
    return worst;
  };
  // The gap to the line shrinks like 1/lambda until the normal equations run
  // out of precision (past about 1e10 here).
  const double d8 = deviation(1e8);
  const double d9 = deviation(1e9);
  EXPECT_NEAR(d9 / d8, 0.1, 0.01);
  EXPECT_LT(deviation(1e10), 1e-6);
}

TEST(Spline1d, SineMatchesDenseLeastSquaresOracle) {
  const auto x = uniform_column(5000, 3);
  std::vector<double> r(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) r[t] = std::sin(kPi * x[t]);
  const SplineFit s = fit_spline_1d(x, r, 20, 1e-10);

  Eigen::MatrixXd a(static_cast<Index>(x.size()), 20);
  Eigen::VectorXd b(static_cast<Index>(x.size()));
  for (std::size_t t = 0; t < x.size(); ++t) {
    a.row(static_cast<Index>(t)) = natural_basis_row(x[t], s.knots);
    b[static_cast<Index>(t)] = r[t];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
  double worst_truth = 0.0, worst_oracle = 0.0;
  for (double v = s.knots.front(); v <= s.knots.back(); v += 0.002) {
    const double oracle = natural_basis_row(v, s.knots) * coef;
    worst_truth = std::max(worst_truth, std::abs(s(v) - std::sin(kPi * v)));
    worst_oracle = std::max(worst_oracle, std::abs(s(v) - oracle));
  }
  EXPECT_LT(worst_truth, 1e-2);
  EXPECT_LT(worst_oracle, 1e-6);
}

TEST(Spline1d, RoughnessNonIncreasingInLambda) {
  const auto x = uniform_column(3000, 4);
  Rng noise(5);
  std::vector<double> r(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    r[t] = std::cos(4.0 * x[t]) + 0.3 * noise.uniform(-1.0, 1.0);
  }
  double prev = INFINITY;
  for (double lambda : log_grid(1e-4, 1e4, 17)) {
    const double rough = fit_spline_1d(x, r, 20, lambda).roughness();
    EXPECT_LE(rough, prev * (1.0 + 1e-9)) << lambda;
    prev = rough;
  }
}

TEST(Spline1d, Errors) {
  const auto x = uniform_column(50, 6);
  const std::vector<double> r(50, 1.0);
  EXPECT_GAX_ERROR(fit_spline_1d(x, r, 10, 0.0), InvalidArgument);
  EXPECT_GAX_ERROR(fit_spline_1d(x, std::vector<double>(49, 1.0), 10, 1.0), LengthMismatch);
  const std::vector<double> few{0.0, 1.0, 0.0, 1.0, 2.0};
  EXPECT_GAX_ERROR(fit_spline_1d(few, std::vector<double>(5, 0.0), 4, 1.0), TooFewDistinctValues);
}

TEST(QuantileKnots, SpanTheData) {
  const auto x = uniform_column(1000, 7);
  const auto k = quantile_knots(x, 20);
  ASSERT_EQ(k.size(), 20u);
  EXPECT_EQ(k.front(), *std::min_element(x.begin(), x.end()));
  EXPECT_EQ(k.back(), *std::max_element(x.begin(), x.end()));
  EXPECT_TRUE(std::is_sorted(k.begin(), k.end()));
}

Dataset uniform_dataset(Index n, Index p, std::uint64_t seed) {
  std::vector<std::string> names;
  for (Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return Dataset(sample_uniform_features(n, p, seed), names, std::nullopt, Task::Regression);
}

TEST(Sas, CubicTeacherRecovered) {
  const Dataset ds = uniform_dataset(5000, 1, 8);
  std::vector<double> f(5000);
  for (Index i = 0; i < 5000; ++i) f[static_cast<std::size_t>(i)] = std::pow(ds.features()(i, 0), 3);
  SasConfig cfg;
  cfg.lambda_grid = {1e-8};
  const AdditiveModel m = fit_sas(ds, f, cfg);
  EXPECT_EQ(m.shapes()[0].mode(), Interpolation::CubicSpline);
  EXPECT_LE(shape_distance(m.shapes()[0], [](double v) { return v * v * v; }).l_inf, 1e-3);
}

struct AdditiveCase {
  Dataset ds;
  std::vector<std::function<double(double)>> g;
  std::vector<double> f;
};

AdditiveCase additive_case() {
  AdditiveCase c{uniform_dataset(8000, 3, 9),
                 {[](double v) { return std::sin(kPi * v); }, [](double v) { return v * v; },
                  [](double v) { return std::exp(v); }},
                 std::vector<double>(8000)};
  for (Index i = 0; i < 8000; ++i) {
    double s = 0.3;
    for (std::size_t j = 0; j < 3; ++j) s += c.g[j](c.ds.features()(i, static_cast<Index>(j)));
    c.f[static_cast<std::size_t>(i)] = s;
  }
  return c;
}

TEST(Sas, AdditiveTeacherRecoveredUpToConstants) {
  const AdditiveCase c = additive_case();
  SasConfig cfg;
  cfg.lambda_grid = {1e-8};
  SasTrace trace;
  const AdditiveModel m = fit_sas(c.ds, c.f, cfg, &trace);
  EXPECT_TRUE(trace.converged);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_LE(shape_distance(m.shapes()[j], c.g[j]).l_inf, 1e-3) << j;
  }
  const Vector fv = Eigen::Map<const Vector>(c.f.data(), 8000);
  EXPECT_LT(rmse(predict_additive(m, c.ds), fv), 1e-3);
}

TEST(Sas, CrossValidatedLambdaStaysClose) {
  // In the first cycle the other features' signal looks like noise to CV, so
  // the frozen lambdas smooth more than a noiseless target needs.
  const AdditiveCase c = additive_case();
  SasTrace trace;
  const AdditiveModel m = fit_sas(c.ds, c.f, SasConfig{}, &trace);
  EXPECT_TRUE(trace.converged);
  ASSERT_EQ(trace.lambdas.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_LE(shape_distance(m.shapes()[j], c.g[j]).l_inf, 0.05) << j;
  }
  const Vector fv = Eigen::Map<const Vector>(c.f.data(), 8000);
  EXPECT_LT(rmse(predict_additive(m, c.ds), fv), 0.02);
}

TEST(Sas, BackfitObjectiveNonIncreasing) {
  const auto data = gen_f1(5000, 10);
  const Vector& y = data.data.labels();
  SasTrace trace;
  fit_sas(data.data, std::vector<double>(y.data(), y.data() + y.size()), SasConfig{}, &trace);
  ASSERT_GE(trace.cycles, 2);
  ASSERT_EQ(trace.cycle_objective.size(), static_cast<std::size_t>(trace.cycles));
  for (std::size_t c = 1; c < trace.cycle_objective.size(); ++c) {
    EXPECT_LE(trace.cycle_objective[c], trace.cycle_objective[c - 1] * (1.0 + 1e-12)) << c;
    // Training MSE alone may drift up by a hair while roughness falls.
    EXPECT_LE(trace.cycle_mse[c], trace.cycle_mse[c - 1] * (1.0 + 1e-3)) << c;
  }
  EXPECT_LT(trace.cycle_mse.back(), 0.5 * trace.cycle_mse.front());
}

TEST(Sas, ColumnPermutationPermutesShapes) {
  const auto data = gen_f1(4000, 11);
  const Vector& y = data.data.labels();
  const std::vector<double> f(y.data(), y.data() + y.size());
  // CV sees order-dependent partial residuals, so fix lambda; the penalized
  // problem then has one solution and only the stopping point differs.
  SasConfig cfg;
  cfg.lambda_grid = {1e-2};
  cfg.backfit_tol = 1e-8;
  cfg.backfit_max_iters = 200;
  const AdditiveModel a = fit_sas(data.data, f, cfg);

  const std::vector<Index> perm{3, 0, 9, 1, 7, 2, 8, 4, 6, 5};
  Matrix xp(data.data.rows(), 10);
  std::vector<std::string> names;
  for (Index j = 0; j < 10; ++j) {
    xp.col(j) = data.data.features().col(perm[static_cast<std::size_t>(j)]);
    names.push_back(data.data.feature_names()[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])]);
  }
  const AdditiveModel b = fit_sas(xp, names, f, cfg, Task::Regression);
  for (Index j = 0; j < 10; ++j) {
    const FeatureShape& sb = b.shapes()[static_cast<std::size_t>(j)];
    const FeatureShape* sa = a.find_shape(sb.feature());
    ASSERT_NE(sa, nullptr);
    EXPECT_EQ(sa->xs(), sb.xs());
    for (std::size_t k = 0; k < sb.size(); ++k) EXPECT_NEAR(sa->ys()[k], sb.ys()[k], 1e-5);
  }
}

TEST(Sas, DeterministicAndConstantColumnHandled) {
  Dataset ds = uniform_dataset(1500, 2, 12);
  Matrix x = ds.features();
  x.col(1).setConstant(0.25);
  ds = ds.with_features(x);
  std::vector<double> f(1500);
  for (Index i = 0; i < 1500; ++i) f[static_cast<std::size_t>(i)] = std::cos(2 * x(i, 0));
  const AdditiveModel a = fit_sas(ds, f, SasConfig{});
  const AdditiveModel b = fit_sas(ds, f, SasConfig{});
  EXPECT_EQ(a.shapes()[0].ys(), b.shapes()[0].ys());
  EXPECT_EQ(a.shapes()[1].size(), 1u);
  EXPECT_EQ(a.shapes()[1].ys()[0], 0.0);
}

TEST(Sas, Errors) {
  const Dataset ds = uniform_dataset(100, 2, 13);
  EXPECT_GAX_ERROR(fit_sas(ds, std::vector<double>(99, 0.0), SasConfig{}), LengthMismatch);
  std::vector<double> f(100, 0.0);
  f[0] = std::nan("");
  EXPECT_GAX_ERROR(fit_sas(ds, f, SasConfig{}), NonFiniteTarget);
}

}  // namespace
}  // namespace gax
