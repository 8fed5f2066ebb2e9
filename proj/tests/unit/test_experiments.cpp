#include <gtest/gtest.h>

#include <vector>

#include "gax/experiments.hpp"
#include "gax/synthetic.hpp"
#include "helpers.hpp"

namespace gax {
namespace {

std::vector<double> uniform_column(int n) {
  std::vector<double> col;
  for (int k = 0; k < n; ++k) col.push_back(-1.0 + (k + 0.5) * 2.0 / n);
  return col;
}

TEST(StepScore, AlignedStaircaseIsOne) {
  const FeatureShape stairs("a", {-1.0, -0.3, 0.4}, {2.0, -1.0, 0.5}, Interpolation::PiecewiseConstant);
  const std::vector<double> cuts{-0.3, 0.4};
  EXPECT_NEAR(step_score(stairs, uniform_column(1000), cuts), 1.0, 1e-12);
}

TEST(StepScore, LineWithOneCutExplainsThreeQuarters) {
  // Var(U(-1,1)) = 1/3; the two half means are -1/2 and 1/2, so 1/4 of it is
  // between bins.
  const FeatureShape line("a", {-1.0, 1.0}, {-1.0, 1.0}, Interpolation::CubicSpline);
  const std::vector<double> cuts{0.0};
  EXPECT_NEAR(step_score(line, uniform_column(20000), cuts), 0.75, 1e-6);
}

TEST(StepScore, ConstantShapeScoresZero) {
  const FeatureShape flat("a", {0.0}, {3.0}, Interpolation::PiecewiseConstant);
  const std::vector<double> cuts{0.0};
  EXPECT_EQ(step_score(flat, uniform_column(50), cuts), 0.0);
  EXPECT_GAX_ERROR(step_score(flat, std::vector<double>{}, cuts), EmptyDataset);
}

TEST(Discretize, MidpointsUseColumnRangeForOuterBins) {
  Matrix x(4, 2);
  x << -1.0, 5.0, -0.2, 6.0, 0.3, 7.0, 0.9, 8.0;
  const Dataset ds(x, {"a", "b"}, std::nullopt, Task::Regression);
  const std::vector<double> cuts{0.0};
  const Dataset out = discretize_to_midpoints(ds, "a", cuts);
  const std::vector<double> expected{-0.5, -0.5, 0.45, 0.45};
  for (Index i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(out.features()(i, 0), expected[static_cast<std::size_t>(i)]);
    EXPECT_EQ(out.features()(i, 1), x(i, 1));
  }
}

TeacherSpec small_teacher() {
  TeacherSpec t;
  t.hidden = {32};
  t.train.epochs = 20;
  t.train.learning_rate = 0.05;
  return t;
}

SatConfig small_student() {
  SatConfig s;
  s.rounds = 100;
  s.bags = 2;
  return s;
}

TEST(LabelBump, ZeroDeltaChangesNothing) {
  const Dataset base = gen_f1(2000, 3).data;
  TeacherSpec t = small_teacher();
  t.train.epochs = 3;
  t.train.early_stop_patience = 3;
  const BumpResult r = run_label_bump_experiment(base, {"x1", 0.2, 0.6, 0.0}, t, small_student());
  EXPECT_EQ(r.detected_height, 0.0);
  EXPECT_EQ(r.outside_amplitude, 0.0);
}

// Three features with a gentle linear target, so a small teacher can spend
// its capacity on the bump.
Dataset gentle(Index n, std::uint64_t seed) {
  const Matrix x = sample_uniform_features(n, 3, seed);
  return Dataset(x, {"x1", "x2", "x3"}, Vector(0.5 * x.col(0) - 0.25 * x.col(2)), Task::Regression);
}

TEST(LabelBump, UnitBumpIsDetected) {
  const Dataset base = gentle(6000, 4);
  const BumpResult r = run_label_bump_experiment(base, {"x1", 0.2, 0.6, 1.0}, small_teacher(), small_student());
  EXPECT_GT(r.detected_height, 0.5);
  EXPECT_LT(r.detected_height, 1.5);
}

TEST(LabelBump, Errors) {
  const Dataset base = gen_f1(200, 5).data;
  EXPECT_GAX_ERROR(run_label_bump_experiment(base, {"x1", 0.6, 0.2, 1.0}, small_teacher(), small_student()),
                   InvalidArgument);
  EXPECT_GAX_ERROR(run_label_bump_experiment(base, {"nope", 0.2, 0.6, 1.0}, small_teacher(), small_student()),
                   UnknownFeature);
  EXPECT_GAX_ERROR(run_label_bump_experiment(base, {"x1", 2.0, 3.0, 1.0}, small_teacher(), small_student()),
                   InvalidArgument);
}

TEST(Discretization, SteppedTeacherYieldsSteppedShape) {
  const Dataset base = gen_f1(6000, 6).data;
  const std::vector<double> cuts{0.5};
  const auto r = run_discretization_experiment(base, "x1", cuts, small_teacher(), small_student());
  EXPECT_GT(r.step_score, 0.9);
  EXPECT_GT(r.step_score, r.smooth_step_score);
}

}  // namespace
}  // namespace gax
