#include "gax/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "gax/binning.hpp"
#include "gax/error.hpp"

namespace gax {

std::string_view to_string(Interpolation mode) {
  return mode == Interpolation::PiecewiseConstant ? "piecewise_constant" : "cubic_spline";
}

Interpolation interpolation_from_string(std::string_view name) {
  if (name == "piecewise_constant") return Interpolation::PiecewiseConstant;
  if (name == "cubic_spline") return Interpolation::CubicSpline;
  throw Error(ErrorCode::InvalidArgument, "unknown interpolation '" + std::string(name) + "'");
}

namespace {

void require_increasing(const std::vector<double>& xs, const char* what) {
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!std::isfinite(xs[k])) {
      throw Error(ErrorCode::NonFiniteValue, std::string(what) + " contains non-finite values");
    }
    if (k > 0 && !(xs[k - 1] < xs[k])) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be strictly increasing");
    }
  }
}

// Natural cubic spline second derivatives (Thomas algorithm).
std::vector<double> natural_second_derivatives(const std::vector<double>& x,
                                               const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double h0 = x[i + 1] - x[i];
    const double h1 = x[i + 2] - x[i + 1];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
  }
  // Sub-diagonal entry of row i is h_i = x[i+1]-x[i] (for i >= 1).
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = x[i + 1] - x[i];
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> sol(k);
  sol[k - 1] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) {
    sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];
  }
  for (std::size_t i = 0; i < k; ++i) m[i + 1] = sol[i];
  return m;
}

}  // namespace

FeatureShape::FeatureShape(std::string feature, std::vector<double> xs, std::vector<double> ys,
                           Interpolation mode)
    : feature_(std::move(feature)), xs_(std::move(xs)), ys_(std::move(ys)), mode_(mode) {
  if (xs_.empty() || xs_.size() != ys_.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "shape '" + feature_ + "' needs equal-length, non-empty xs and ys");
  }
  require_increasing(xs_, "shape breakpoints");
  for (double y : ys_) {
    if (!std::isfinite(y)) {
      throw Error(ErrorCode::NonFiniteValue, "shape '" + feature_ + "' has non-finite values");
    }
  }
  if (mode_ == Interpolation::CubicSpline) second_derivs_ = natural_second_derivatives(xs_, ys_);
}

double FeatureShape::operator()(double x) const {
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  const auto k = static_cast<std::size_t>(
      std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin() - 1);
  if (mode_ == Interpolation::PiecewiseConstant) return ys_[k];
  const double h = xs_[k + 1] - xs_[k];
  const double a = xs_[k + 1] - x;
  const double b = x - xs_[k];
  const double m0 = second_derivs_[k];
  const double m1 = second_derivs_[k + 1];
  return (m0 * a * a * a + m1 * b * b * b) / (6.0 * h) + (ys_[k] / h - m0 * h / 6.0) * a +
         (ys_[k + 1] / h - m1 * h / 6.0) * b;
}

FeatureShape FeatureShape::shifted(double delta) const {
  std::vector<double> ys = ys_;
  for (double& y : ys) y += delta;
  return FeatureShape(feature_, xs_, std::move(ys), mode_);
}

PairShape::PairShape(std::pair<std::string, std::string> features, std::vector<double> grid_x,
                     std::vector<double> grid_y, Eigen::MatrixXd values)
    : features_(std::move(features)),
      grid_x_(std::move(grid_x)),
      grid_y_(std::move(grid_y)),
      values_(std::move(values)) {
  if (features_.first == features_.second) {
    throw Error(ErrorCode::InvalidArgument, "pair shape needs two distinct features");
  }
  if (grid_x_.empty() || grid_y_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "pair shape grids must be non-empty");
  }
  require_increasing(grid_x_, "pair grid_x");
  require_increasing(grid_y_, "pair grid_y");
  if (values_.rows() != static_cast<Index>(grid_x_.size()) ||
      values_.cols() != static_cast<Index>(grid_y_.size())) {
    throw Error(ErrorCode::DimensionMismatch, "pair values do not match grid sizes");
  }
  if (!values_.allFinite()) throw Error(ErrorCode::NonFiniteValue, "pair values non-finite");
}

double PairShape::operator()(double x, double y) const {
  return values_(bin_of(grid_x_, x), bin_of(grid_y_, y));
}

PairShape PairShape::shifted(double delta) const {
  Eigen::MatrixXd v = values_.array() + delta;
  return PairShape(features_, grid_x_, grid_y_, std::move(v));
}

AdditiveModel::AdditiveModel(double intercept, std::vector<FeatureShape> shapes,
                             std::vector<PairShape> pairs, Task task, std::string method)
    : intercept_(intercept),
      shapes_(std::move(shapes)),
      pairs_(std::move(pairs)),
      task_(task),
      method_(std::move(method)) {
  if (!std::isfinite(intercept_)) throw Error(ErrorCode::NonFiniteValue, "intercept non-finite");
  std::set<std::string_view> seen;
  for (const auto& s : shapes_) {
    if (!seen.insert(s.feature()).second) {
      throw Error(ErrorCode::DuplicateFeature, "two shapes for feature '" + s.feature() + "'");
    }
  }
}

const FeatureShape* AdditiveModel::find_shape(std::string_view feature) const {
  for (const auto& s : shapes_) {
    if (s.feature() == feature) return &s;
  }
  return nullptr;
}

AdditiveModel AdditiveModel::with_method(std::string method) const {
  return AdditiveModel(intercept_, shapes_, pairs_, task_, std::move(method));
}

AdditiveModel AdditiveModel::with_pairs(std::vector<PairShape> pairs) const {
  return AdditiveModel(intercept_, shapes_, std::move(pairs), task_, method_);
}

AdditiveModel AdditiveModel::without_shape(std::string_view feature) const {
  std::vector<FeatureShape> kept;
  for (const auto& s : shapes_) {
    if (s.feature() != feature) kept.push_back(s);
  }
  return AdditiveModel(intercept_, std::move(kept), pairs_, task_, method_);
}

namespace {

Index column_of(std::span<const std::string> names, std::string_view feature) {
  const auto it = std::find(names.begin(), names.end(), feature);
  if (it == names.end()) {
    throw Error(ErrorCode::MissingFeature,
                "model references feature '" + std::string(feature) + "' absent from the data");
  }
  return static_cast<Index>(it - names.begin());
}

}  // namespace

Vector predict_additive(const AdditiveModel& m, const Matrix& x,
                        std::span<const std::string> names) {
  if (static_cast<Index>(names.size()) != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "name count does not match column count");
  }
  Vector out = Vector::Constant(x.rows(), m.intercept());
  for (const auto& s : m.shapes()) {
    const Index j = column_of(names, s.feature());
    for (Index i = 0; i < x.rows(); ++i) out[i] += s(x(i, j));
  }
  for (const auto& pr : m.pairs()) {
    const Index a = column_of(names, pr.features().first);
    const Index b = column_of(names, pr.features().second);
    for (Index i = 0; i < x.rows(); ++i) out[i] += pr(x(i, a), x(i, b));
  }
  return out;
}

Vector predict_additive(const AdditiveModel& m, const Dataset& ds) {
  return predict_additive(m, ds.features(), ds.feature_names());
}

AdditiveModel center(const AdditiveModel& m, const Matrix& x, std::span<const std::string> names) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyDataset, "cannot center on an empty dataset");
  const double n = static_cast<double>(x.rows());
  double intercept = m.intercept();
  std::vector<FeatureShape> shapes;
  for (const auto& s : m.shapes()) {
    const Index j = column_of(names, s.feature());
    double mean = 0.0;
    for (Index i = 0; i < x.rows(); ++i) mean += s(x(i, j));
    mean /= n;
    shapes.push_back(s.shifted(-mean));
    intercept += mean;
  }
  std::vector<PairShape> pairs;
  for (const auto& pr : m.pairs()) {
    const Index a = column_of(names, pr.features().first);
    const Index b = column_of(names, pr.features().second);
    double mean = 0.0;
    for (Index i = 0; i < x.rows(); ++i) mean += pr(x(i, a), x(i, b));
    mean /= n;
    pairs.push_back(pr.shifted(-mean));
    intercept += mean;
  }
  return AdditiveModel(intercept, std::move(shapes), std::move(pairs), m.task(), m.method());
}

AdditiveModel center(const AdditiveModel& m, const Dataset& ds) {
  return center(m, ds.features(), ds.feature_names());
}

AttributionRow local_attribution(const AdditiveModel& m, std::span<const double> row,
                                 std::span<const std::string> names) {
  if (row.size() != names.size()) {
    throw Error(ErrorCode::DimensionMismatch, "row length does not match name count");
  }
  AttributionRow out;
  out.baseline = m.intercept();
  for (const auto& s : m.shapes()) {
    out.values.push_back(s(row[static_cast<std::size_t>(column_of(names, s.feature()))]));
  }
  return out;
}

AttributionTable local_attributions(const AdditiveModel& m, const Dataset& ds) {
  AttributionTable table;
  for (const auto& s : m.shapes()) table.features.push_back(s.feature());
  table.values.resize(ds.rows(), static_cast<Index>(m.shapes().size()));
  table.baseline = Vector::Constant(ds.rows(), m.intercept());
  for (std::size_t k = 0; k < m.shapes().size(); ++k) {
    const auto& s = m.shapes()[k];
    const Index j = column_of(ds.feature_names(), s.feature());
    for (Index i = 0; i < ds.rows(); ++i) {
      table.values(i, static_cast<Index>(k)) = s(ds.features()(i, j));
    }
  }
  return table;
}

FeatureShape global_attribution_curve(const AttributionTable& attrs, const Dataset& ds,
                                      std::string_view feature, int max_bins) {
  const auto it = std::find(attrs.features.begin(), attrs.features.end(), feature);
  if (it == attrs.features.end()) {
    throw Error(ErrorCode::UnknownFeature,
                "attribution table has no feature '" + std::string(feature) + "'");
  }
  const Index a = static_cast<Index>(it - attrs.features.begin());
  const Index j = ds.feature_index(feature);
  if (attrs.values.rows() != ds.rows()) {
    throw Error(ErrorCode::LengthMismatch, "attribution table not aligned with dataset");
  }
  const auto column = ds.column(j);
  const auto edges = quantile_edges(column, max_bins);
  std::vector<double> sums(edges.size(), 0.0);
  std::vector<double> counts(edges.size(), 0.0);
  for (Index i = 0; i < ds.rows(); ++i) {
    const auto b = static_cast<std::size_t>(bin_of(edges, column[static_cast<std::size_t>(i)]));
    sums[b] += attrs.values(i, a);
    counts[b] += 1.0;
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t b = 0; b < edges.size(); ++b) {
    // Every edge is an observed value, so counts[b] >= 1.
    xs.push_back(edges[b]);
    ys.push_back(sums[b] / counts[b]);
  }
  return FeatureShape(std::string(feature), std::move(xs), std::move(ys),
                      Interpolation::PiecewiseConstant);
}

MonotonicityCheck check_monotonic(const FeatureShape& s, Direction direction, double tol) {
  if (tol < 0.0) throw Error(ErrorCode::InvalidArgument, "tolerance must be >= 0");
  MonotonicityCheck out;
  const auto& ys = s.ys();
  for (std::size_t k = 1; k < ys.size(); ++k) {
    const double step = ys[k] - ys[k - 1];
    const double violation = direction == Direction::Increasing ? -step : step;
    if (violation > out.worst_violation) {
      out.worst_violation = violation;
      out.location = static_cast<std::ptrdiff_t>(k);
      out.location_x = s.xs()[k];
    }
    if (violation > tol) out.holds = false;
  }
  return out;
}

FeatureShape average_shapes(std::span<const FeatureShape> shapes) {
  if (shapes.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to average");
  std::set<double> grid;
  for (const auto& s : shapes) {
    if (s.mode() != Interpolation::PiecewiseConstant) {
      throw Error(ErrorCode::InvalidArgument, "only piecewise-constant shapes can be averaged");
    }
    if (s.feature() != shapes.front().feature()) {
      throw Error(ErrorCode::InvalidArgument, "averaged shapes must share a feature");
    }
    grid.insert(s.xs().begin(), s.xs().end());
  }
  std::vector<double> xs(grid.begin(), grid.end());
  std::vector<double> ys(xs.size(), 0.0);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    for (const auto& s : shapes) ys[k] += s(xs[k]);
    ys[k] /= static_cast<double>(shapes.size());
  }
  return FeatureShape(shapes.front().feature(), std::move(xs), std::move(ys),
                      Interpolation::PiecewiseConstant);
}

}  // namespace gax
