#pragma once

#include <span>
#include <string>
#include <vector>

#include "gax/sat.hpp"
#include "gax/teacher.hpp"

namespace gax {

// Teacher architecture (hidden widths) plus its training settings.
struct TeacherSpec {
  std::vector<Index> hidden{128, 128};
  TrainConfig train;
};

struct BumpSpec {
  std::string feature;
  double lo = 0.2;
  double hi = 0.6;
  double delta = 1.0;
};

struct BumpResult {
  // Shape of the bumped run minus the shape of the original run, on the
  // union of both breakpoint sets.
  FeatureShape shape_delta;
  // Row-weighted mean of shape_delta inside [lo, hi] minus the mean outside.
  double detected_height = 0.0;
  // max - min of shape_delta over breakpoints outside [lo, hi].
  double outside_amplitude = 0.0;
};

// Trains one teacher on base and one on the bumped labels (same seeds),
// distills both with SAT on the base features and compares the feature's
// shapes.
BumpResult run_label_bump_experiment(const Dataset& base, const BumpSpec& bump,
                                     const TeacherSpec& teacher, const SatConfig& student);

// 1 - (pooled within-bin variance) / (total variance) of shape(x) over the
// column values, with bins given by the cut points.
double step_score(const FeatureShape& shape, std::span<const double> column,
                  std::span<const double> cuts);

struct DiscretizationResult {
  double step_score = 0.0;         // student of the teacher trained on the discretized feature
  double smooth_step_score = 0.0;  // student of the teacher trained on the raw feature
  FeatureShape staircase_shape;
  FeatureShape smooth_shape;
};

// The discretized teacher sees the feature replaced by its bin midpoint
// (outer bins bounded by the column min and max). Both students are fitted
// on the original continuous features.
DiscretizationResult run_discretization_experiment(const Dataset& base, const std::string& feature,
                                                   std::span<const double> cuts,
                                                   const TeacherSpec& teacher,
                                                   const SatConfig& student);

// Column with every value replaced by the midpoint of its bin.
Dataset discretize_to_midpoints(const Dataset& ds, const std::string& feature,
                                std::span<const double> cuts);

}  // namespace gax
