#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gax/random.hpp"
#include "gax/synthetic.hpp"
#include "helpers.hpp"

namespace gax {
namespace {

constexpr double kPi = std::numbers::pi;

// Written out independently of the library.
double f1_oracle(const std::vector<double>& x) {
  const double x6 = x[5];
  return 3 * x[0] + std::pow(x[1], 3) - std::pow(kPi, x[2]) + std::exp(-2 * x[3] * x[3]) +
         1 / (2 + std::abs(x[4])) + (x6 == 0 ? 0 : x6 * std::log(std::abs(x6))) +
         std::sqrt(2 * std::abs(x[6])) + std::max(0.0, x[6]) + std::pow(x[7], 4) +
         2 * std::cos(kPi * x[7]);
}

TEST(Synthetic, F1PointValues) {
  std::vector<double> x(10, 0.0);
  EXPECT_NEAR(f1(x), 2.5, 1e-15);
  x[0] = 1.0;
  EXPECT_NEAR(f1(x), 5.5, 1e-15);
}

TEST(Synthetic, F2PointValue) {
  std::vector<double> x(10, 0.0);
  x[2] = 0.5;
  x[3] = 0.5;
  // F1 part: 2.5 with -pi^0 and exp(0) replaced by their values at 0.5.
  const double f1_part = 2.5 + 1.0 - std::sqrt(kPi) - (1.0 - std::exp(-0.5));
  EXPECT_NEAR(f1_part, 1.3340, 1e-4);  // 1.33408, quoted truncated
  EXPECT_NEAR(f2(x), f1_part + 0.5 + 1.0, 1e-14);
  EXPECT_NEAR(f2(x), 2.8340, 1e-4);
}

TEST(Synthetic, ZeroToTheZeroIsOne) {
  std::vector<double> x(10, 0.0);
  EXPECT_NEAR(f2(x) - f1(x), 1.0 + 1.0, 1e-15);  // |0|^0 + sec(0)
}

TEST(Synthetic, F1MatchesIndependentOracle) {
  const auto data = gen_f1(500, 3);
  for (Index i = 0; i < data.data.rows(); ++i) {
    std::vector<double> row(10);
    for (Index j = 0; j < 10; ++j) row[static_cast<std::size_t>(j)] = data.data.features()(i, j);
    EXPECT_NEAR(data.data.labels()[i], f1_oracle(row), 1e-12);
  }
}

TEST(Synthetic, GroundTruthSumsToLabelForF1) {
  const auto data = gen_f1(2000, 11);
  double worst = 0.0;
  for (Index i = 0; i < data.data.rows(); ++i) {
    const auto row = data.data.features().row(i);
    const double s = data.truth.sum(std::span<const double>(row.data(), 10));
    worst = std::max(worst, std::abs(s - data.data.labels()[i]));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Synthetic, NoiseFeatureShapesAreZero) {
  for (auto fn : {SyntheticFunction::F1, SyntheticFunction::F2}) {
    const auto truth = ground_truth_shapes(fn);
    for (double x : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
      EXPECT_EQ(truth.components[8](x), 0.0);
      EXPECT_EQ(truth.components[9](x), 0.0);
    }
  }
}

TEST(Synthetic, DeterministicForFixedSeed) {
  const auto a = gen_f2(300, 5);
  const auto b = gen_f2(300, 5);
  const auto c = gen_f2(300, 6);
  EXPECT_EQ(a.data.features(), b.data.features());
  EXPECT_EQ(a.data.labels(), b.data.labels());
  EXPECT_NE(a.data.features(), c.data.features());
}

TEST(Synthetic, FeaturesAreUniformOnUnitCube) {
  const auto data = gen_f1(20000, 1);
  const Matrix& x = data.data.features();
  EXPECT_GE(x.minCoeff(), -1.0);
  EXPECT_LT(x.maxCoeff(), 1.0);
  for (Index j = 0; j < 10; ++j) {
    EXPECT_NEAR(x.col(j).mean(), 0.0, 0.03);
    EXPECT_NEAR(x.col(j).array().square().mean(), 1.0 / 3.0, 0.02);
  }
}

// Midpoint rule on [0,1]^2 as the oracle for E[sec(z u v)].
double secant_oracle(double z) {
  const int n = 400;
  double s = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      s += 1.0 / std::cos(z * (a + 0.5) / n * (b + 0.5) / n);
    }
  }
  return s / (n * n);
}

TEST(Synthetic, SecantProjectionMatchesQuadrature) {
  for (double z : {-1.0, -0.4, 0.0, 0.3, 0.9, 1.0}) {
    EXPECT_NEAR(expected_secant_product(z), secant_oracle(z), 1e-5) << z;
  }
}

TEST(Synthetic, PowerProjectionMatchesQuadrature) {
  for (double z : {-0.9, -0.2, 0.05, 0.5, 1.0}) {
    const int n = 20000;
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += std::pow(std::abs(z), 2.0 * (k + 0.5) / n);
    EXPECT_NEAR(expected_power_over_exponent(z), s / n, 1e-7) << z;
  }
  // E over x3 of |x3|^(2|x4|) = 1 / (2|x4| + 1).
  const auto truth = ground_truth_shapes(SyntheticFunction::F2);
  const auto truth1 = ground_truth_shapes(SyntheticFunction::F1);
  for (double z : {-0.8, 0.0, 0.25}) {
    EXPECT_NEAR(truth.components[3](z) - truth1.components[3](z), 1.0 / (2 * std::abs(z) + 1),
                1e-15);
  }
}

TEST(Synthetic, F2ShapesAreConditionalMeans) {
  // Monte Carlo estimate of E[F2 | x_i = z] minus E[F2] against the centered
  // ground-truth component.
  const auto truth = ground_truth_shapes(SyntheticFunction::F2);
  const Matrix base = sample_uniform_features(40000, 10, 99);
  double mean_f2 = 0.0;
  for (Index r = 0; r < base.rows(); ++r) {
    mean_f2 += f2(std::span<const double>(base.row(r).data(), 10));
  }
  mean_f2 /= static_cast<double>(base.rows());
  for (std::size_t i = 0; i < 8; ++i) {
    for (double z : {-0.7, 0.1, 0.6}) {
      Matrix x = base;
      x.col(static_cast<Index>(i)).setConstant(z);
      double m = 0.0;
      for (Index r = 0; r < x.rows(); ++r) m += f2(std::span<const double>(x.row(r).data(), 10));
      m /= static_cast<double>(x.rows());
      EXPECT_NEAR(m - mean_f2, truth.centered(i, z), 0.03) << "x" << i + 1 << " at " << z;
    }
  }
}

TEST(Synthetic, OffsetRecoversMeanOfF2) {
  const auto truth = ground_truth_shapes(SyntheticFunction::F2);
  double e = truth.offset;
  for (double m : truth.uniform_means) e += m;
  const Matrix x = sample_uniform_features(200000, 10, 7);
  double mc = 0.0;
  for (Index r = 0; r < x.rows(); ++r) mc += f2(std::span<const double>(x.row(r).data(), 10));
  mc /= static_cast<double>(x.rows());
  EXPECT_NEAR(e, mc, 0.01);
}

TEST(Synthetic, SampleMeansMatchPublishedValues) {
  EXPECT_NEAR(gen_f1(50000, 1).data.labels().mean(), 1.15, 0.05);
  EXPECT_NEAR(gen_f2(50000, 1).data.labels().mean(), 2.74, 0.05);
}

TEST(Synthetic, UnknownFunctionName) {
  EXPECT_GAX_ERROR(synthetic_function_from_string("f3"), InvalidArgument);
}

TEST(Random, MixSeedSeparatesStreams) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(7, 3), mix_seed(7, 3));
}

TEST(Random, IndexStaysInRange) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int k = 0; k < 70000; ++k) ++counts[rng.index(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

}  // namespace
}  // namespace gax
