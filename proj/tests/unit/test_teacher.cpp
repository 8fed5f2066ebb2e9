#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gax/eval.hpp"
#include "gax/random.hpp"
#include "gax/synthetic.hpp"
#include "gax/teacher.hpp"
#include "helpers.hpp"

namespace gax {
namespace {

// Random net with non-trivial standardization and output scaling.
TeacherNet random_net(std::vector<Index> dims, std::uint64_t seed) {
  TeacherNet base = TeacherNet::random_init(dims, Task::Regression, 1.0, seed);
  Rng rng(seed + 1000);
  const Index p = dims.front();
  Vector mean(p), stdev(p);
  for (Index j = 0; j < p; ++j) {
    mean[j] = rng.uniform(-0.5, 0.5);
    stdev[j] = rng.uniform(0.3, 2.0);
  }
  return TeacherNet(dims, base.layers(), mean, stdev, 0.7, 1.9, Task::Regression);
}

TEST(Teacher, AffineArithmetic) {
  const std::vector<double> w{3.0, -1.0};
  const TeacherNet net = TeacherNet::affine(w, 2.0);
  const std::vector<double> x{1.0, 2.0};
  EXPECT_DOUBLE_EQ(net.predict_row(x), 3.0);
  const Vector g = net.input_gradient(x);
  EXPECT_DOUBLE_EQ(g[0], 3.0);
  EXPECT_DOUBLE_EQ(g[1], -1.0);
}

TEST(Teacher, ZeroWeightsGiveFinalBias) {
  TeacherNet net = TeacherNet::random_init({3, 5, 1}, Task::Regression, 1.0, 4);
  for (auto& layer : net.mutable_layers()) layer.weights.setZero();
  const double bias = net.layers().back().bias[0];
  const Matrix x = sample_uniform_features(10, 3, 1);
  const Vector out = net.predict(x);
  for (Index i = 0; i < out.size(); ++i) EXPECT_DOUBLE_EQ(out[i], bias);
}

TEST(Teacher, BatchAndRowPredictionsAgree) {
  const TeacherNet net = random_net({4, 16, 8, 1}, 2);
  Matrix x = sample_uniform_features(2000, 4, 3);
  x.row(7) = x.row(3);
  const Vector out = net.predict(x);
  EXPECT_EQ(out[7], out[3]);
  for (Index i = 0; i < x.rows(); i += 97) {
    EXPECT_NEAR(out[i], net.predict_row(std::span<const double>(x.row(i).data(), 4)), 1e-12);
  }
}

TEST(Teacher, DimensionMismatch) {
  const TeacherNet net = random_net({3, 4, 1}, 1);
  EXPECT_GAX_ERROR(net.predict(Matrix::Zero(2, 4)), DimensionMismatch);
  EXPECT_GAX_ERROR(net.input_gradient(std::vector<double>{1.0, 2.0}), DimensionMismatch);
}

// Central differences with step 1e-4 on the standardized scale. Points where
// the two one-sided slopes disagree straddle a ReLU kink and are skipped.
void check_finite_differences(const TeacherNet& net, std::uint64_t seed) {
  const Index p = net.num_features();
  Rng rng(seed);
  int checked = 0;
  int attempts = 0;
  while (checked < 100 && attempts < 1000) {
    ++attempts;
    std::vector<double> x(static_cast<std::size_t>(p));
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    const Vector g = net.input_gradient(x);
    bool kink = false;
    double worst = 0.0;
    for (Index j = 0; j < p && !kink; ++j) {
      const double h = 1e-4 * net.input_std()[j];
      auto xp = x, xm = x;
      xp[static_cast<std::size_t>(j)] += h;
      xm[static_cast<std::size_t>(j)] -= h;
      const double f0 = net.predict_row(x);
      const double right = (net.predict_row(xp) - f0) / h;
      const double left = (f0 - net.predict_row(xm)) / h;
      if (std::abs(right - left) > 1e-6 * (1.0 + std::abs(right))) {
        kink = true;
        break;
      }
      const double fd = 0.5 * (right + left);
      const double denom = std::max({std::abs(g[j]), std::abs(fd), 1e-8});
      worst = std::max(worst, std::abs(g[j] - fd) / denom);
    }
    if (kink) continue;
    EXPECT_LT(worst, 1e-4);
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(Teacher, InputGradientMatchesFiniteDifferences) {
  check_finite_differences(random_net({5, 12, 1}, 11), 1);
  check_finite_differences(random_net({6, 20, 20, 1}, 12), 2);
  check_finite_differences(random_net({10, 32, 16, 8, 1}, 13), 3);
}

TEST(Teacher, IgnoredFeatureHasZeroGradient) {
  TeacherNet net = random_net({4, 10, 10, 1}, 5);
  net.mutable_layers()[0].weights.col(2).setZero();
  const Matrix x = sample_uniform_features(50, 4, 9);
  for (Index i = 0; i < x.rows(); ++i) {
    EXPECT_EQ(net.input_gradient(std::span<const double>(x.row(i).data(), 4))[2], 0.0);
  }
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.early_stop_patience = cfg.epochs + 1;
  EXPECT_GAX_ERROR(cfg.validate(), InvalidArgument);
  cfg = TrainConfig{};
  cfg.learning_rate = 0.0;
  EXPECT_GAX_ERROR(cfg.validate(), InvalidArgument);
}

TEST(Train, RequiresLabels) {
  const auto data = gen_f1(200, 1);
  const std::vector<Index> dims{10, 4, 1};
  EXPECT_GAX_ERROR(train_teacher(data.data.without_labels(), dims, TrainConfig{}), NoLabels);
}

TEST(Train, ConstantLabelIsLearned) {
  auto data = gen_f1(2000, 1);
  const Dataset ds = data.data.with_labels(Vector::Constant(2000, 4.2));
  const std::vector<Index> dims{10, 8, 1};
  const TeacherNet net = train_teacher(ds, dims, TrainConfig{});
  const Vector out = net.predict(sample_uniform_features(500, 10, 4));
  EXPECT_LT((out.array() - 4.2).abs().maxCoeff(), 0.01);
}

TEST(Train, EarlyStoppingKeepsBestWeights) {
  const auto tr = gen_f1(3000, 1);
  const auto va = gen_f1(1000, 2);
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.early_stop_patience = 12;
  cfg.learning_rate = 0.2;  // large enough that validation loss is not monotone
  TrainReport report;
  const std::vector<Index> dims{10, 16, 1};
  const TeacherNet net = train_teacher(tr.data, va.data, dims, cfg, &report);
  ASSERT_FALSE(report.valid_loss.empty());
  EXPECT_LE(report.best_valid_loss, report.valid_loss.back());
  EXPECT_DOUBLE_EQ(teacher_loss(net, va.data), report.best_valid_loss);
  EXPECT_DOUBLE_EQ(report.valid_loss[static_cast<std::size_t>(report.best_epoch)],
                   report.best_valid_loss);
}

TEST(Train, PatienceStopsEarly) {
  const auto tr = gen_f1(500, 1);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.early_stop_patience = 1;
  TrainReport report;
  const std::vector<Index> dims{10, 4, 1};
  train_teacher(tr.data, dims, cfg, &report);
  EXPECT_LT(report.valid_loss.size(), 200u);
  EXPECT_EQ(static_cast<int>(report.valid_loss.size()), report.best_epoch + 2);
}

TEST(Train, Reproducible) {
  const auto tr = gen_f1(1500, 3);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.early_stop_patience = 3;
  const std::vector<Index> dims{10, 8, 8, 1};
  const TeacherNet a = train_teacher(tr.data, dims, cfg);
  const TeacherNet b = train_teacher(tr.data, dims, cfg);
  for (std::size_t l = 0; l < a.layers().size(); ++l) {
    EXPECT_EQ(a.layers()[l].weights, b.layers()[l].weights);
    EXPECT_EQ(a.layers()[l].bias, b.layers()[l].bias);
  }
}

TEST(Train, DivergenceIsReported) {
  const auto tr = gen_f1(1000, 1);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.early_stop_patience = 20;
  cfg.learning_rate = 1e6;
  const std::vector<Index> dims{10, 16, 16, 1};
  EXPECT_GAX_ERROR(train_teacher(tr.data, dims, cfg), DivergedLoss);
}

TEST(Train, ClassificationLearnsALogit) {
  const auto base = gen_f1(4000, 8);
  Vector y(4000);
  for (Index i = 0; i < 4000; ++i) y[i] = base.data.features()(i, 0) > 0.1 ? 1.0 : 0.0;
  const Dataset ds(base.data.features(), base.data.feature_names(), y, Task::BinaryClassification);
  TrainConfig cfg;
  cfg.epochs = 10;
  const std::vector<Index> dims{10, 16, 1};
  const TeacherNet net = train_teacher(ds, dims, cfg);
  const Vector logits = net.predict(ds.features());
  const std::vector<double> yl(y.data(), y.data() + y.size());
  const std::vector<double> sl(logits.data(), logits.data() + logits.size());
  EXPECT_GT(auroc_percent(yl, sl), 99.0);
  EXPECT_LT(teacher_loss(net, ds), 0.2);
}

}  // namespace
}  // namespace gax
