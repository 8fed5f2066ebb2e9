#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gax/shapes.hpp"
#include "gax/synthetic.hpp"

namespace gax {

double rmse(std::span<const double> a, std::span<const double> b);
inline double rmse(const Vector& a, const Vector& b) {
  return rmse(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
              std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

// Area under the ROC curve in percent. Tied scores count one half. Labels
// must be 0/1 with both classes present.
double auroc_percent(std::span<const double> labels, std::span<const double> scores);

struct EvalReport {
  std::string method;
  std::string teacher;
  std::string dataset;
  std::uint64_t seed = 0;
  double fidelity_rmse = 0.0;
  // RMSE (regression) or AUROC percent (classification) against labels;
  // empty when the dataset is unlabeled.
  std::optional<double> accuracy;
  Index n_eval = 0;

  std::string_view accuracy_metric(Task task) const {
    return task == Task::Regression ? "rmse" : "auroc";
  }
};

// Fidelity is the RMSE between explanation and teacher outputs (logits for
// classification); accuracy compares the explanation against ds labels.
EvalReport evaluate(const AdditiveModel& explanation, const Scorer& teacher, const Dataset& ds);
EvalReport evaluate(const AdditiveModel& explanation, const Vector& teacher_outputs,
                    const Dataset& ds);

struct ShapeDistance {
  double l_inf = 0.0;
  double l2 = 0.0;  // root mean square over the grid
};

// Both curves are centered on a uniform grid of grid_n points over [lo, hi]
// before comparison, so constant offsets never count.
ShapeDistance shape_distance(const FeatureShape& learned, const std::function<double(double)>& truth,
                             double lo = -0.95, double hi = 0.95, int grid_n = 100);

// Amplitude (max - min) of a shape on the same kind of grid.
double shape_amplitude(const FeatureShape& s, double lo = -0.95, double hi = 0.95,
                       int grid_n = 100);

struct ProbeValue {
  Index feature = 0;
  double value = 0.0;
};

struct ProbeSpec {
  std::vector<ProbeValue> easy;  // features pinned where learned shapes agree with truth
  std::vector<ProbeValue> hard;  // features pinned where they disagree, errors aligned
  Index samples = 20000;
  std::uint64_t seed = 1;
};

// Scores every feature by its largest pointwise error between the learned
// (centered) shape and the centered truth and keeps the top k. Easy pins each
// at the grid value whose worst |error| within +-easy_window is smallest; hard
// pins each at its signed extreme, all extremes sharing one sign.
ProbeSpec derive_probe_spec(const AdditiveModel& learned, std::span<const std::string> names,
                            const GroundTruthShapes& truth, int top_k = 4, Index samples = 20000,
                            std::uint64_t seed = 1, double lo = -0.95, double hi = 0.95,
                            int grid_n = 191, double easy_window = 0.0);

struct ProbeResult {
  double rmse_easy = 0.0;
  double rmse_all = 0.0;
  double rmse_hard = 0.0;
};

// Teacher RMSE against the truth on three probe sets sharing the same
// U(-1, 1) draws: unconstrained, easy features pinned, hard features pinned.
ProbeResult probe_easy_hard(const Scorer& teacher, const ProbeSpec& spec,
                            const std::function<double(std::span<const double>)>& truth,
                            Index num_features);

struct MonotonicityReport {
  std::string feature;
  Direction expected = Direction::Increasing;
  MonotonicityCheck check;
};

std::vector<MonotonicityReport> monotonicity_audit(
    const AdditiveModel& m, std::span<const std::pair<std::string, Direction>> expectations,
    double tol);

struct MonotoneProbe {
  double fraction = 0.0;  // share of rows whose prediction moves in the expected direction
  Index rows = 0;
};

// Overwrites the feature with each grid value for every row and counts rows
// whose teacher prediction is monotone along the grid (within tol).
MonotoneProbe teacher_monotone_probe(const Scorer& teacher, const Dataset& ds,
                                     std::string_view feature, Direction direction,
                                     int grid_points = 32, double tol = 0.0);

}  // namespace gax
