#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "gax/binning.hpp"
#include "gax/eval.hpp"
#include "gax/parallel.hpp"
#include "gax/random.hpp"
#include "gax/sat.hpp"
#include "gax/synthetic.hpp"
#include "helpers.hpp"

namespace gax {
namespace {

std::vector<double> uniform_column(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

struct SplitOracle {
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

double sse_of(const std::vector<double>& r) {
  if (r.empty()) return 0.0;
  double m = 0.0;
  for (double v : r) m += v;
  m /= static_cast<double>(r.size());
  double s = 0.0;
  for (double v : r) s += (v - m) * (v - m);
  return s;
}

// Exhaustive search over every candidate boundary for a single split of the
// rows with x in [lo, hi).
SplitOracle best_split(const std::vector<double>& x, const std::vector<double>& r,
                       const std::vector<double>& edges, double lo, double hi) {
  SplitOracle best;
  for (double e : edges) {
    if (e <= lo || e >= hi) continue;
    std::vector<double> left, right;
    for (std::size_t t = 0; t < x.size(); ++t) {
      if (x[t] < lo || x[t] >= hi) continue;
      (x[t] < e ? left : right).push_back(r[t]);
    }
    if (left.empty() || right.empty()) continue;
    const double s = sse_of(left) + sse_of(right);
    if (s < best.sse) best = {e, s};
  }
  return best;
}

TEST(Tree1d, TwoLeavesMatchExhaustiveSearchOnLinearTarget) {
  const auto x = uniform_column(3000, 1);
  std::vector<double> r(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) r[t] = x[t];
  const auto edges = quantile_edges(x, 64);
  const StepFunction tree = fit_tree_1d(x, r, 2, 64);
  ASSERT_EQ(tree.leaves(), 2u);
  const auto oracle = best_split(x, r, edges, -INFINITY, INFINITY);
  EXPECT_EQ(tree.thresholds[1], oracle.threshold);

  double lsum = 0, ln = 0, rsum = 0, rn = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (x[t] < oracle.threshold) {
      lsum += r[t];
      ln += 1;
    } else {
      rsum += r[t];
      rn += 1;
    }
  }
  EXPECT_NEAR(tree.values[0], lsum / ln, 1e-12);
  EXPECT_NEAR(tree.values[1], rsum / rn, 1e-12);
}

TEST(Tree1d, ThreeLeavesAreGreedyBestFirst) {
  const auto x = uniform_column(2000, 2);
  std::vector<double> r(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) r[t] = std::sin(3.0 * x[t]) + 0.3 * x[t] * x[t];
  const auto edges = quantile_edges(x, 32);
  const StepFunction tree = fit_tree_1d(x, r, 3, 32);
  ASSERT_EQ(tree.leaves(), 3u);

  const auto first = best_split(x, r, edges, -INFINITY, INFINITY);
  std::vector<double> rl, rr;
  for (std::size_t t = 0; t < x.size(); ++t) (x[t] < first.threshold ? rl : rr).push_back(r[t]);
  const auto left = best_split(x, r, edges, -INFINITY, first.threshold);
  const auto right = best_split(x, r, edges, first.threshold, INFINITY);
  const double gain_left = sse_of(rl) - left.sse;
  const double gain_right = sse_of(rr) - right.sse;
  std::vector<double> expected{first.threshold,
                               gain_left > gain_right ? left.threshold : right.threshold};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(tree.thresholds[1], expected[0]);
  EXPECT_EQ(tree.thresholds[2], expected[1]);
}

TEST(Tree1d, RecoversStepEdgeAtNearestBoundary) {
  const auto x = uniform_column(5000, 3);
  std::vector<double> r(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) r[t] = x[t] >= 0.3 ? 2.0 : -1.0;
  const auto edges = quantile_edges(x, 256);
  const StepFunction tree = fit_tree_1d(x, r, 2, 256);
  ASSERT_EQ(tree.leaves(), 2u);
  EXPECT_EQ(tree.thresholds[1], best_split(x, r, edges, -INFINITY, INFINITY).threshold);
  // The bin holding 0.3 is mixed, so the split lands on one of its two edges
  // and the leaf on the far side of that bin is pure.
  const auto above = std::lower_bound(edges.begin(), edges.end(), 0.3);
  const double upper = *above;
  const double lower = *(above - 1);
  ASSERT_TRUE(tree.thresholds[1] == upper || tree.thresholds[1] == lower) << tree.thresholds[1];
  if (tree.thresholds[1] == upper) {
    EXPECT_NEAR(tree(0.9), 2.0, 1e-12);
  } else {
    EXPECT_NEAR(tree(-0.9), -1.0, 1e-12);
  }
}

TEST(Tree1d, ConstantResidualGivesOneLeaf) {
  const auto x = uniform_column(500, 4);
  const std::vector<double> r(x.size(), 1.75);
  const StepFunction tree = fit_tree_1d(x, r, 3, 64);
  ASSERT_EQ(tree.leaves(), 1u);
  EXPECT_DOUBLE_EQ(tree.values[0], 1.75);
}

TEST(Tree1d, ConstantFeatureGivesOneLeaf) {
  const std::vector<double> x(100, 0.5);
  const auto r = uniform_column(100, 5);
  EXPECT_EQ(fit_tree_1d(x, r, 3, 64).leaves(), 1u);
}

TEST(Tree1d, LengthMismatch) {
  EXPECT_GAX_ERROR(fit_tree_1d(std::vector<double>{1, 2}, std::vector<double>{1}, 2, 8),
                   LengthMismatch);
}

TEST(SatConfig, Validation) {
  SatConfig c;
  EXPECT_NO_THROW(c.validate());
  for (auto mutate : std::vector<std::function<void(SatConfig&)>>{
           [](SatConfig& s) { s.rounds = 0; }, [](SatConfig& s) { s.learning_rate = 0.0; },
           [](SatConfig& s) { s.learning_rate = 1.5; }, [](SatConfig& s) { s.max_leaves = 1; },
           [](SatConfig& s) { s.bags = 0; }, [](SatConfig& s) { s.max_bins = 1; }}) {
    SatConfig bad;
    mutate(bad);
    EXPECT_GAX_ERROR(bad.validate(), InvalidArgument);
  }
}

SatConfig small_config() {
  SatConfig c;
  c.rounds = 60;
  c.bags = 4;
  c.max_bins = 64;
  return c;
}

TEST(Sat, LinearTeacherRecovered) {
  const auto data = gen_f1(10000, 1);
  const Matrix& x = data.data.features();
  std::vector<double> f(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) f[static_cast<std::size_t>(i)] = 2.0 * x(i, 0);
  SatConfig cfg;
  cfg.bags = 5;
  const AdditiveModel m = fit_sat(data.data, f, cfg);
  EXPECT_LE(shape_distance(m.shapes()[0], [](double v) { return 2.0 * v; }).l_inf, 0.05);
  for (std::size_t j = 1; j < 10; ++j) {
    EXPECT_LE(shape_distance(m.shapes()[j], [](double) { return 0.0; }).l_inf, 0.05) << j;
  }
}

TEST(Sat, ErrorsOnBadTargets) {
  const auto data = gen_f1(100, 1);
  std::vector<double> f(99, 0.0);
  EXPECT_GAX_ERROR(fit_sat(data.data, f, small_config()), LengthMismatch);
  f.assign(100, 0.0);
  f[5] = std::numeric_limits<double>::infinity();
  EXPECT_GAX_ERROR(fit_sat(data.data, f, small_config()), NonFiniteTarget);
}

TEST(Sat, BagTrainingMseIsNonIncreasing) {
  const auto data = gen_f1(3000, 2);
  const auto f = to_vec(data.data.labels());
  SatTrace trace;
  fit_sat(data.data, f, small_config(), &trace);
  ASSERT_EQ(trace.bag_train_mse.size(), 4u);
  for (const auto& mse : trace.bag_train_mse) {
    ASSERT_EQ(mse.size(), 60u);
    for (std::size_t m = 1; m < mse.size(); ++m) {
      EXPECT_LE(mse[m], mse[m - 1] * (1.0 + 1e-12)) << "round " << m;
    }
    EXPECT_LT(mse.back(), 0.1 * mse.front());
  }
}

TEST(Sat, ShapesAreMeansOfBagShapesOnUnionGrid) {
  const auto data = gen_f1(2000, 3);
  const auto f = to_vec(data.data.labels());
  SatTrace trace;
  const AdditiveModel m = fit_sat(data.data, f, small_config(), &trace);
  for (std::size_t j = 0; j < m.shapes().size(); ++j) {
    const FeatureShape& s = m.shapes()[j];
    std::set<double> grid;
    for (const auto& bag : trace.bag_shapes) grid.insert(bag[j].xs().begin(), bag[j].xs().end());
    ASSERT_EQ(s.xs(), std::vector<double>(grid.begin(), grid.end()));
    // Centering subtracts one constant per shape.
    double shift = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      double mean = 0.0;
      for (const auto& bag : trace.bag_shapes) mean += bag[j](s.xs()[k]);
      mean /= static_cast<double>(trace.bag_shapes.size());
      if (k == 0) shift = mean - s.ys()[k];
      EXPECT_NEAR(mean - s.ys()[k], shift, 1e-12);
    }
  }
}

TEST(Sat, SingleBagEqualsThatBag) {
  const auto data = gen_f1(1500, 4);
  const auto f = to_vec(data.data.labels());
  SatConfig cfg = small_config();
  cfg.bags = 1;
  SatTrace trace;
  const AdditiveModel m = fit_sat(data.data, f, cfg, &trace);
  const AdditiveModel raw(m.intercept(), trace.bag_shapes[0], {}, Task::Regression);
  const AdditiveModel c = center(raw, data.data);
  for (std::size_t j = 0; j < m.shapes().size(); ++j) {
    ASSERT_EQ(m.shapes()[j].xs(), c.shapes()[j].xs());
    for (std::size_t k = 0; k < m.shapes()[j].size(); ++k) {
      EXPECT_NEAR(m.shapes()[j].ys()[k], c.shapes()[j].ys()[k], 1e-12);
    }
  }
}

TEST(Sat, DeterministicAndThreadIndependent) {
  const auto data = gen_f1(2000, 5);
  const auto f = to_vec(data.data.labels());
  const int saved = num_threads();
  set_num_threads(1);
  const AdditiveModel a = fit_sat(data.data, f, small_config());
  set_num_threads(4);
  const AdditiveModel b = fit_sat(data.data, f, small_config());
  set_num_threads(saved);
  EXPECT_EQ(a.intercept(), b.intercept());
  for (std::size_t j = 0; j < a.shapes().size(); ++j) {
    EXPECT_EQ(a.shapes()[j].xs(), b.shapes()[j].xs());
    EXPECT_EQ(a.shapes()[j].ys(), b.shapes()[j].ys());
  }
}

TEST(Sat, LabelsNeverConsulted) {
  const auto data = gen_f1(1500, 6);
  const Vector teacher = data.data.labels() * 0.5;
  const auto f = to_vec(teacher);
  const Dataset other_labels = data.data.with_labels(Vector::Zero(1500));
  const AdditiveModel a = fit_sat(data.data, f, small_config());
  const AdditiveModel b = fit_sat(data.data.without_labels(), f, small_config());
  const AdditiveModel c = fit_sat(other_labels, f, small_config());
  for (std::size_t j = 0; j < a.shapes().size(); ++j) {
    EXPECT_EQ(a.shapes()[j].ys(), b.shapes()[j].ys());
    EXPECT_EQ(a.shapes()[j].ys(), c.shapes()[j].ys());
  }
}

TEST(Sat, SingleRowGivesOneBreakpointPerFeature) {
  Matrix x(1, 2);
  x << 0.3, -0.2;
  const Dataset ds(x, {"a", "b"}, std::nullopt, Task::Regression);
  const std::vector<double> f{1.5};
  const AdditiveModel m = fit_sat(ds, f, small_config());
  EXPECT_EQ(m.intercept(), 1.5);
  for (const auto& s : m.shapes()) EXPECT_EQ(s.size(), 1u);
}

Dataset two_features(Index n, std::uint64_t seed) {
  return Dataset(sample_uniform_features(n, 2, seed), {"a", "b"}, std::nullopt, Task::Regression);
}

TEST(SatPairs, InteractionResidualShrinks) {
  const Dataset ds = two_features(8000, 7);
  std::vector<double> f(8000);
  for (Index i = 0; i < 8000; ++i) {
    f[static_cast<std::size_t>(i)] = ds.features()(i, 0) * ds.features()(i, 1);
  }
  const AdditiveModel base = fit_sat(ds, f, small_config());
  const Vector fv = Eigen::Map<const Vector>(f.data(), 8000);
  const double before = rmse(predict_additive(base, ds), fv);
  PairConfig pc;
  pc.rounds = 400;
  const AdditiveModel with = fit_sat_pairs(ds, f, base, pc);
  const double after = rmse(predict_additive(with, ds), fv);
  EXPECT_LE(after, 0.25 * before) << before << " -> " << after;
  ASSERT_EQ(with.pairs().size(), 1u);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(with.shapes()[j].ys(), base.shapes()[j].ys());
}

TEST(SatPairs, ZeroResidualGivesZeroPairs) {
  const Dataset ds = two_features(2000, 8);
  std::vector<double> f(2000);
  for (Index i = 0; i < 2000; ++i) f[static_cast<std::size_t>(i)] = std::sin(ds.features()(i, 0));
  const AdditiveModel base = fit_sat(ds, f, small_config());
  const Vector fitted = predict_additive(base, ds);
  const AdditiveModel with = fit_sat_pairs(ds, to_vec(fitted), base, PairConfig{});
  for (const auto& p : with.pairs()) EXPECT_LT(p.values().cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SatPairs, UnknownFeature) {
  const Dataset ds = two_features(200, 9);
  const std::vector<double> f(200, 0.0);
  const AdditiveModel base = fit_sat(ds, f, small_config());
  PairConfig cfg;
  cfg.pairs = {{"a", "zz"}};
  EXPECT_GAX_ERROR(fit_sat_pairs(ds, f, base, cfg), UnknownPairFeature);
  cfg.pairs = {{"a", "a"}};
  EXPECT_GAX_ERROR(cfg.validate(), InvalidArgument);
}

}  // namespace
}  // namespace gax
