#include "gax/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "gax/error.hpp"

namespace gax {

namespace {

std::vector<double> outputs(const TeacherNet& net, const Dataset& ds) {
  const Vector f = net.predict(ds.features());
  return {f.data(), f.data() + f.size()};
}

std::vector<double> union_breakpoints(const FeatureShape& a, const FeatureShape& b) {
  std::vector<double> xs = a.xs();
  xs.insert(xs.end(), b.xs().begin(), b.xs().end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

const FeatureShape& shape_of(const AdditiveModel& m, const std::string& feature) {
  const FeatureShape* s = m.find_shape(feature);
  if (!s) throw Error(ErrorCode::UnknownFeature, "model has no shape for '" + feature + "'");
  return *s;
}

}  // namespace

BumpResult run_label_bump_experiment(const Dataset& base, const BumpSpec& bump,
                                     const TeacherSpec& teacher, const SatConfig& student) {
  if (base.task() != Task::Regression) {
    throw Error(ErrorCode::InvalidArgument, "label bump needs a regression dataset");
  }
  if (!(bump.hi > bump.lo)) throw Error(ErrorCode::InvalidArgument, "bump range is empty");
  const Index j = base.feature_index(bump.feature);
  const Dataset bumped = bump_labels(base, bump.feature, bump.lo, bump.hi, bump.delta);
  const auto dims = architecture(base.cols(), teacher.hidden);

  const TeacherNet net0 = train_teacher(base, dims, teacher.train);
  const TeacherNet net1 = train_teacher(bumped, dims, teacher.train);
  const Dataset x = base.without_labels();
  const AdditiveModel m0 = fit_sat(x, outputs(net0, x), student);
  const AdditiveModel m1 = fit_sat(x, outputs(net1, x), student);
  const FeatureShape& s0 = shape_of(m0, bump.feature);
  const FeatureShape& s1 = shape_of(m1, bump.feature);

  const auto xs = union_breakpoints(s0, s1);
  std::vector<double> ys(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) ys[k] = s1(xs[k]) - s0(xs[k]);
  FeatureShape delta(bump.feature, xs, ys, Interpolation::PiecewiseConstant);

  double in_sum = 0.0, in_n = 0.0, out_sum = 0.0, out_n = 0.0;
  for (Index i = 0; i < base.rows(); ++i) {
    const double v = base.features()(i, j);
    const double d = delta(v);
    if (v >= bump.lo && v <= bump.hi) {
      in_sum += d;
      in_n += 1.0;
    } else {
      out_sum += d;
      out_n += 1.0;
    }
  }
  if (in_n == 0.0 || out_n == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "bump range must split the rows into two nonempty sets");
  }
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (xs[k] >= bump.lo && xs[k] <= bump.hi) continue;
    lo = any ? std::min(lo, ys[k]) : ys[k];
    hi = any ? std::max(hi, ys[k]) : ys[k];
    any = true;
  }
  return {std::move(delta), in_sum / in_n - out_sum / out_n, hi - lo};
}

double step_score(const FeatureShape& shape, std::span<const double> column,
                  std::span<const double> cuts) {
  if (column.empty()) throw Error(ErrorCode::EmptyDataset, "step score of no values");
  const std::size_t bins = cuts.size() + 1;
  std::vector<double> sum(bins, 0.0), sum_sq(bins, 0.0), count(bins, 0.0);
  double total = 0.0, total_sq = 0.0;
  for (double v : column) {
    const double y = shape(v);
    const auto b = static_cast<std::size_t>(discretize_value(cuts, v));
    sum[b] += y;
    sum_sq[b] += y * y;
    count[b] += 1.0;
    total += y;
    total_sq += y * y;
  }
  const double n = static_cast<double>(column.size());
  const double sst = total_sq - total * total / n;
  if (!(sst > 0.0)) return 0.0;
  double ssw = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (count[b] > 0.0) ssw += sum_sq[b] - sum[b] * sum[b] / count[b];
  }
  return 1.0 - std::max(0.0, ssw) / sst;
}

Dataset discretize_to_midpoints(const Dataset& ds, const std::string& feature,
                                std::span<const double> cuts) {
  const Index j = ds.feature_index(feature);
  const Dataset binned = discretize_feature(ds, feature, cuts);
  const auto col = ds.column(j);
  const double mn = *std::min_element(col.begin(), col.end());
  const double mx = *std::max_element(col.begin(), col.end());
  std::vector<double> bounds;
  bounds.push_back(std::min(mn, cuts.front()));
  bounds.insert(bounds.end(), cuts.begin(), cuts.end());
  bounds.push_back(std::max(mx, cuts.back()));
  Matrix x = binned.features();
  for (Index i = 0; i < x.rows(); ++i) {
    const auto b = static_cast<std::size_t>(x(i, j));
    x(i, j) = 0.5 * (bounds[b] + bounds[b + 1]);
  }
  return ds.with_features(std::move(x));
}

DiscretizationResult run_discretization_experiment(const Dataset& base, const std::string& feature,
                                                   std::span<const double> cuts,
                                                   const TeacherSpec& teacher,
                                                   const SatConfig& student) {
  if (base.task() != Task::Regression) {
    throw Error(ErrorCode::InvalidArgument, "discretization experiment needs a regression dataset");
  }
  const Index j = base.feature_index(feature);
  const auto dims = architecture(base.cols(), teacher.hidden);
  const Dataset staircase = discretize_to_midpoints(base, feature, cuts);

  const TeacherNet stepped = train_teacher(staircase, dims, teacher.train);
  const TeacherNet smooth = train_teacher(base, dims, teacher.train);
  const Dataset x = base.without_labels();
  // The stepped teacher is queried on the inputs it was trained on.
  const Dataset xs = staircase.without_labels();
  const AdditiveModel m_step = fit_sat(x, outputs(stepped, xs), student);
  const AdditiveModel m_smooth = fit_sat(x, outputs(smooth, x), student);
  const auto col = base.column(j);
  const FeatureShape& a = shape_of(m_step, feature);
  const FeatureShape& b = shape_of(m_smooth, feature);
  return {step_score(a, col, cuts), step_score(b, col, cuts), a, b};
}

}  // namespace gax
