#include "gax/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gax/baselines.hpp"
#include "gax/error.hpp"
#include "gax/random.hpp"

namespace gax {

double rmse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "rmse inputs differ in length");
  if (a.empty()) throw Error(ErrorCode::EmptyDataset, "rmse of no values");
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(ss / static_cast<double>(a.size()));
}

double auroc_percent(std::span<const double> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw Error(ErrorCode::LengthMismatch, "labels and scores differ in length");
  }
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney: sum of midranks of the positives.
  double rank_sum = 0.0;
  double positives = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      const double y = labels[order[k]];
      if (y != 0.0 && y != 1.0) throw Error(ErrorCode::InvalidLabel, "AUROC labels must be 0/1");
      if (y == 1.0) {
        rank_sum += midrank;
        positives += 1.0;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw Error(ErrorCode::InvalidLabel, "AUROC needs both classes present");
  }
  const double u = rank_sum - positives * (positives + 1.0) / 2.0;
  return 100.0 * u / (positives * negatives);
}

EvalReport evaluate(const AdditiveModel& explanation, const Vector& teacher_outputs,
                    const Dataset& ds) {
  const Vector pred = predict_additive(explanation, ds);
  if (teacher_outputs.size() != pred.size()) {
    throw Error(ErrorCode::LengthMismatch, "teacher outputs not aligned with dataset");
  }
  EvalReport out;
  out.method = explanation.method();
  out.n_eval = ds.rows();
  out.fidelity_rmse = rmse(pred, teacher_outputs);
  if (ds.has_labels()) {
    const Vector& y = ds.labels();
    const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
    const std::span<const double> ps(pred.data(), static_cast<std::size_t>(pred.size()));
    out.accuracy = ds.task() == Task::Regression ? rmse(ys, ps) : auroc_percent(ys, ps);
  }
  return out;
}

EvalReport evaluate(const AdditiveModel& explanation, const Scorer& teacher, const Dataset& ds) {
  return evaluate(explanation, teacher.predict(ds.features()), ds);
}

namespace {

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw Error(ErrorCode::InvalidArgument, "grid needs n >= 2, hi > lo");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
  return g;
}

// Centered differences learned - truth on the grid.
std::vector<double> centered_error(const FeatureShape& learned,
                                   const std::function<double(double)>& truth,
                                   const std::vector<double>& grid) {
  std::vector<double> e(grid.size());
  double mean = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    e[k] = learned(grid[k]) - truth(grid[k]);
    mean += e[k];
  }
  mean /= static_cast<double>(grid.size());
  for (double& v : e) v -= mean;
  return e;
}

}  // namespace

ShapeDistance shape_distance(const FeatureShape& learned, const std::function<double(double)>& truth,
                             double lo, double hi, int grid_n) {
  const auto grid = uniform_grid(lo, hi, grid_n);
  const auto e = centered_error(learned, truth, grid);
  ShapeDistance out;
  double ss = 0.0;
  for (double v : e) {
    out.l_inf = std::max(out.l_inf, std::abs(v));
    ss += v * v;
  }
  out.l2 = std::sqrt(ss / static_cast<double>(e.size()));
  return out;
}

double shape_amplitude(const FeatureShape& s, double lo, double hi, int grid_n) {
  const auto grid = uniform_grid(lo, hi, grid_n);
  double mn = s(grid.front());
  double mx = mn;
  for (double x : grid) {
    mn = std::min(mn, s(x));
    mx = std::max(mx, s(x));
  }
  return mx - mn;
}

ProbeSpec derive_probe_spec(const AdditiveModel& learned, std::span<const std::string> names,
                            const GroundTruthShapes& truth, int top_k, Index samples,
                            std::uint64_t seed, double lo, double hi, int grid_n,
                            double easy_window) {
  if (top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be >= 1");
  const auto grid = uniform_grid(lo, hi, grid_n);
  struct Candidate {
    Index feature;
    double score;
    double easy_x;
    double max_e, max_x;  // most positive error
    double min_e, min_x;  // most negative error
  };
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < truth.feature_names.size(); ++t) {
    const auto& name = truth.feature_names[t];
    const FeatureShape* shape = learned.find_shape(name);
    if (!shape) continue;
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      throw Error(ErrorCode::UnknownFeature, "probe feature '" + name + "' not in column list");
    }
    const auto e = centered_error(*shape, truth.components[t], grid);
    Candidate c{static_cast<Index>(it - names.begin()), 0.0, grid[0], e[0], grid[0], e[0], grid[0]};
    // Easy values must agree over a neighbourhood, not just at a crossing.
    const double step = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
    const auto half = static_cast<std::ptrdiff_t>(std::floor(easy_window / step + 1e-9));
    double best_worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < e.size(); ++k) {
      c.score = std::max(c.score, std::abs(e[k]));
      double worst = 0.0;
      for (std::ptrdiff_t d = -half; d <= half; ++d) {
        const auto q = static_cast<std::ptrdiff_t>(k) + d;
        if (q < 0 || q >= static_cast<std::ptrdiff_t>(e.size())) continue;
        worst = std::max(worst, std::abs(e[static_cast<std::size_t>(q)]));
      }
      if (worst < best_worst) {
        best_worst = worst;
        c.easy_x = grid[k];
      }
      if (e[k] > c.max_e) {
        c.max_e = e[k];
        c.max_x = grid[k];
      }
      if (e[k] < c.min_e) {
        c.min_e = e[k];
        c.min_x = grid[k];
      }
    }
    candidates.push_back(c);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  if (static_cast<int>(candidates.size()) > top_k) candidates.resize(static_cast<std::size_t>(top_k));

  double up = 0.0;
  double down = 0.0;
  for (const auto& c : candidates) {
    up += c.max_e;
    down -= c.min_e;
  }
  ProbeSpec spec;
  spec.samples = samples;
  spec.seed = seed;
  for (const auto& c : candidates) {
    spec.easy.push_back({c.feature, c.easy_x});
    spec.hard.push_back({c.feature, up >= down ? c.max_x : c.min_x});
  }
  return spec;
}

ProbeResult probe_easy_hard(const Scorer& teacher, const ProbeSpec& spec,
                            const std::function<double(std::span<const double>)>& truth,
                            Index num_features) {
  if (spec.samples < 1) throw Error(ErrorCode::InvalidArgument, "probe needs samples >= 1");
  for (const auto* set : {&spec.easy, &spec.hard}) {
    for (const auto& v : *set) {
      if (v.feature < 0 || v.feature >= num_features || v.value < -1.0 || v.value > 1.0) {
        throw Error(ErrorCode::InvalidArgument, "probe value outside the feature domain");
      }
    }
  }
  const Matrix all = sample_uniform_features(spec.samples, num_features, spec.seed);
  auto score = [&](const Matrix& x) {
    const Vector pred = teacher.predict(x);
    Vector target(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
      target[i] = truth(std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols())));
    }
    return rmse(pred, target);
  };
  auto pinned = [&](const std::vector<ProbeValue>& values) {
    Matrix x = all;
    for (const auto& v : values) x.col(v.feature).setConstant(v.value);
    return x;
  };
  ProbeResult out;
  out.rmse_all = score(all);
  out.rmse_easy = score(pinned(spec.easy));
  out.rmse_hard = score(pinned(spec.hard));
  return out;
}

std::vector<MonotonicityReport> monotonicity_audit(
    const AdditiveModel& m, std::span<const std::pair<std::string, Direction>> expectations,
    double tol) {
  std::vector<MonotonicityReport> out;
  for (const auto& [feature, direction] : expectations) {
    const FeatureShape* s = m.find_shape(feature);
    if (!s) throw Error(ErrorCode::UnknownFeature, "model has no shape for '" + feature + "'");
    out.push_back({feature, direction, check_monotonic(*s, direction, tol)});
  }
  return out;
}

MonotoneProbe teacher_monotone_probe(const Scorer& teacher, const Dataset& ds,
                                     std::string_view feature, Direction direction,
                                     int grid_points, double tol) {
  const Index j = ds.feature_index(feature);
  const auto grid = quantile_grid(ds.column(j), grid_points);
  const Index n = ds.rows();
  Matrix preds(n, static_cast<Index>(grid.size()));
  Matrix x = ds.features();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    x.col(j).setConstant(grid[k]);
    preds.col(static_cast<Index>(k)) = teacher.predict(x);
  }
  Index ok = 0;
  for (Index i = 0; i < n; ++i) {
    bool monotone = true;
    for (Index k = 1; k < preds.cols() && monotone; ++k) {
      const double step = preds(i, k) - preds(i, k - 1);
      monotone = direction == Direction::Increasing ? step >= -tol : step <= tol;
    }
    if (monotone) ++ok;
  }
  return {static_cast<double>(ok) / static_cast<double>(n), n};
}

}  // namespace gax
