#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gax/dataset.hpp"
#include "gax/scorer.hpp"

namespace gax {

enum class Interpolation { PiecewiseConstant, CubicSpline };

std::string_view to_string(Interpolation mode);
Interpolation interpolation_from_string(std::string_view name);

// Tabulated single-feature function h_i. Breakpoints are in original
// feature units.
//
//  PiecewiseConstant: ys[k] holds on [xs[k], xs[k+1]).
//  CubicSpline:       natural cubic spline through (xs, ys).
//
// Both modes clamp to the boundary value outside [xs.front(), xs.back()].
class FeatureShape {
 public:
  FeatureShape(std::string feature, std::vector<double> xs, std::vector<double> ys,
               Interpolation mode);

  double operator()(double x) const;

  const std::string& feature() const { return feature_; }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  Interpolation mode() const { return mode_; }
  std::size_t size() const { return xs_.size(); }

  // Same breakpoints, ys + delta. Exact for both modes.
  FeatureShape shifted(double delta) const;

 private:
  std::string feature_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  Interpolation mode_;
  std::vector<double> second_derivs_;  // CubicSpline only
};

inline double eval_shape(const FeatureShape& s, double x) { return s(x); }

// Piecewise-constant two-feature component h_ij on a product grid; values
// is grid_x.size() x grid_y.size().
class PairShape {
 public:
  PairShape(std::pair<std::string, std::string> features, std::vector<double> grid_x,
            std::vector<double> grid_y, Eigen::MatrixXd values);

  double operator()(double x, double y) const;

  const std::pair<std::string, std::string>& features() const { return features_; }
  const std::vector<double>& grid_x() const { return grid_x_; }
  const std::vector<double>& grid_y() const { return grid_y_; }
  const Eigen::MatrixXd& values() const { return values_; }

  PairShape shifted(double delta) const;

 private:
  std::pair<std::string, std::string> features_;
  std::vector<double> grid_x_;
  std::vector<double> grid_y_;
  Eigen::MatrixXd values_;
};

// h0 + sum_i h_i(x_i) + sum_ij h_ij(x_i, x_j).
class AdditiveModel {
 public:
  AdditiveModel(double intercept, std::vector<FeatureShape> shapes, std::vector<PairShape> pairs,
                Task task, std::string method = {});

  double intercept() const { return intercept_; }
  const std::vector<FeatureShape>& shapes() const { return shapes_; }
  const std::vector<PairShape>& pairs() const { return pairs_; }
  Task task() const { return task_; }
  const std::string& method() const { return method_; }

  const FeatureShape* find_shape(std::string_view feature) const;

  AdditiveModel with_method(std::string method) const;
  AdditiveModel with_pairs(std::vector<PairShape> pairs) const;
  AdditiveModel without_shape(std::string_view feature) const;

 private:
  double intercept_;
  std::vector<FeatureShape> shapes_;
  std::vector<PairShape> pairs_;
  Task task_;
  std::string method_;
};

// Throws MissingFeature when a shape references a column not in names.
Vector predict_additive(const AdditiveModel& m, const Matrix& x,
                        std::span<const std::string> names);
Vector predict_additive(const AdditiveModel& m, const Dataset& ds);

// Shifts each shape (mains and pairs) to zero mean over the rows and moves
// the shifts into the intercept. Predictions are unchanged.
AdditiveModel center(const AdditiveModel& m, const Matrix& x, std::span<const std::string> names);
AdditiveModel center(const AdditiveModel& m, const Dataset& ds);

// Per-row, per-feature attributions plus a per-row baseline term.
struct AttributionTable {
  std::vector<std::string> features;
  Matrix values;    // rows x features
  Vector baseline;  // rows
};

struct AttributionRow {
  std::vector<double> values;  // aligned with the model's shapes
  double baseline = 0.0;
};

// attribution_i = h_i(x_i), baseline = intercept. Pair components are not
// attributed.
AttributionRow local_attribution(const AdditiveModel& m, std::span<const double> row,
                                 std::span<const std::string> names);
AttributionTable local_attributions(const AdditiveModel& m, const Dataset& ds);

// Mean attribution at each distinct feature value. Columns with more than
// max_bins distinct values are first binned on quantiles; each bin is keyed
// by its smallest member. Mode PiecewiseConstant.
FeatureShape global_attribution_curve(const AttributionTable& attrs, const Dataset& ds,
                                      std::string_view feature, int max_bins = 256);

enum class Direction { Increasing, Decreasing };

struct MonotonicityCheck {
  bool holds = true;
  double worst_violation = 0.0;
  // Breakpoint index (and x) where the worst violation ends; -1 if none.
  std::ptrdiff_t location = -1;
  double location_x = 0.0;
};

MonotonicityCheck check_monotonic(const FeatureShape& s, Direction direction, double tol);

// Pointwise mean of piecewise-constant shapes on the union of their
// breakpoints.
FeatureShape average_shapes(std::span<const FeatureShape> shapes);

// Binds an AdditiveModel to a column order so it can stand in as a teacher.
class AdditiveScorer final : public Scorer {
 public:
  AdditiveScorer(AdditiveModel model, std::vector<std::string> names)
      : model_(std::move(model)), names_(std::move(names)) {}
  Vector predict(const Matrix& x) const override { return predict_additive(model_, x, names_); }
  Index num_features() const override { return static_cast<Index>(names_.size()); }
  const AdditiveModel& model() const { return model_; }

 private:
  AdditiveModel model_;
  std::vector<std::string> names_;
};

}  // namespace gax
