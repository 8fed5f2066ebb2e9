#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gax/shapes.hpp"

namespace gax {

// Student bagged additive boosted trees.
struct SatConfig {
  int rounds = 300;          // boosting cycles over all features
  double learning_rate = 0.1;
  int max_leaves = 3;
  int bags = 20;
  int max_bins = 256;
  std::uint64_t seed = 1;

  void validate() const;
};

struct PairConfig {
  // Empty means every unordered pair of features.
  std::vector<std::pair<std::string, std::string>> pairs;
  int rounds = 100;
  double learning_rate = 0.1;
  int max_leaves = 4;
  int bins_per_axis = 32;

  void validate() const;
};

// Piecewise-constant function: value[k] on [thresholds[k], thresholds[k+1]),
// clamped outside. thresholds.front() is the left-most bin edge.
struct StepFunction {
  std::vector<double> thresholds;
  std::vector<double> values;

  double operator()(double x) const;
  std::size_t leaves() const { return values.size(); }
};

// Least-squares regression tree on a single feature. Candidate splits are
// the quantile-bin boundaries; leaves are split best-first by SSE reduction;
// leaf value = mean residual.
StepFunction fit_tree_1d(std::span<const double> x, std::span<const double> r, int max_leaves,
                         int bins);

// Optional diagnostics. bag_train_mse[b][m] is the bag's training MSE
// against the (bootstrap) teacher outputs after cycle m.
struct SatTrace {
  std::vector<std::vector<double>> bag_train_mse;
  // Raw (uncentered) per-bag shapes, same order as the model's shapes.
  std::vector<std::vector<FeatureShape>> bag_shapes;
};

// Fits main-effect shapes to teacher outputs f (never to labels).
AdditiveModel fit_sat(const Matrix& x, std::span<const std::string> names,
                      std::span<const double> f, const SatConfig& cfg, Task task,
                      SatTrace* trace = nullptr);
AdditiveModel fit_sat(const Dataset& ds, std::span<const double> f, const SatConfig& cfg,
                      SatTrace* trace = nullptr);

// Boosts two-feature trees on the residual f - base(x), cycling over the
// candidate pairs. Main shapes of base are left untouched.
AdditiveModel fit_sat_pairs(const Matrix& x, std::span<const std::string> names,
                            std::span<const double> f, const AdditiveModel& base,
                            const PairConfig& cfg);
AdditiveModel fit_sat_pairs(const Dataset& ds, std::span<const double> f,
                            const AdditiveModel& base, const PairConfig& cfg);

}  // namespace gax
