#include "gax/baselines.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "gax/binning.hpp"
#include "gax/error.hpp"
#include "gax/parallel.hpp"
#include "gax/random.hpp"

namespace gax {

std::vector<double> quantile_grid(std::span<const double> values, int points) {
  if (values.empty()) throw Error(ErrorCode::EmptyDataset, "cannot build a grid on no values");
  if (points < 1) throw Error(ErrorCode::InvalidArgument, "grid needs at least one point");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  std::vector<double> grid;
  for (int k = 0; k < points; ++k) {
    const double t = points == 1 ? 0.5 : static_cast<double>(k) / (points - 1);
    const auto pos = static_cast<std::size_t>(std::llround(t * static_cast<double>(n - 1)));
    if (grid.empty() || sorted[pos] > grid.back()) grid.push_back(sorted[pos]);
  }
  return grid;
}

FeatureShape partial_dependence(const Scorer& model, const Dataset& ds, std::string_view feature,
                                std::span<const double> grid) {
  const Index j = ds.feature_index(feature);
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "PD grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "PD grid must be strictly increasing");
    }
  }
  std::vector<double> ys(grid.size());
  Matrix x = ds.features();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    x.col(j).setConstant(grid[k]);
    ys[k] = model.predict(x).mean();
  }
  return FeatureShape(std::string(feature), std::vector<double>(grid.begin(), grid.end()),
                      std::move(ys), Interpolation::PiecewiseConstant);
}

AdditiveModel pd_model(const Scorer& model, const Dataset& ds, int grid_points) {
  std::vector<FeatureShape> shapes;
  for (Index j = 0; j < ds.cols(); ++j) {
    const auto grid = quantile_grid(ds.column(j), grid_points);
    shapes.push_back(partial_dependence(model, ds, ds.feature_names()[static_cast<std::size_t>(j)],
                                        grid));
  }
  const double mean = model.predict(ds.features()).mean();
  const AdditiveModel centered =
      center(AdditiveModel(0.0, std::move(shapes), {}, ds.task(), "PD"), ds);
  return AdditiveModel(mean, centered.shapes(), {}, ds.task(), "PD");
}

AttributionTable ggrad_attributions(const DifferentiableScorer& model, const Dataset& ds) {
  AttributionTable out;
  out.features = ds.feature_names();
  out.values.resize(ds.rows(), ds.cols());
  const Matrix zero = Matrix::Zero(1, ds.cols());
  out.baseline = Vector::Constant(ds.rows(), model.predict(zero)[0]);
  const Matrix& x = ds.features();
  parallel_for(0, ds.rows(), [&](Index lo, Index hi) {
    for (Index i = lo; i < hi; ++i) {
      const std::span<const double> row(x.row(i).data(), static_cast<std::size_t>(x.cols()));
      const Vector g = model.input_gradient(row);
      for (Index j = 0; j < x.cols(); ++j) out.values(i, j) = g[j] * x(i, j);
    }
  }, 64);
  return out;
}

std::string_view to_string(ShapMode mode) {
  return mode == ShapMode::ExactEnumeration ? "exact" : "permutation";
}

ShapMode shap_mode_from_string(std::string_view name) {
  if (name == "exact") return ShapMode::ExactEnumeration;
  if (name == "permutation" || name == "sampling") return ShapMode::PermutationSampling;
  throw Error(ErrorCode::InvalidArgument, "unknown SHAP mode '" + std::string(name) + "'");
}

void ShapConfig::validate() const {
  if (background_size < 1) throw Error(ErrorCode::InvalidArgument, "background_size < 1");
  if (permutations < 1) throw Error(ErrorCode::InvalidArgument, "permutations < 1");
}

Matrix sample_rows(const Matrix& x, int size, std::uint64_t seed) {
  if (size < 1) throw Error(ErrorCode::InvalidArgument, "sample size < 1");
  if (size >= x.rows()) return x;
  std::vector<Index> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng(seed);
  // Partial Fisher-Yates over the first `size` slots.
  for (std::size_t i = 0; i < static_cast<std::size_t>(size); ++i) {
    const auto j = i + rng.index(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  std::sort(idx.begin(), idx.begin() + size);
  Matrix out(size, x.cols());
  for (Index i = 0; i < size; ++i) out.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
  return out;
}

namespace {

// Shapley weight |S|! (p - |S| - 1)! / p! for every coalition size.
std::vector<double> shapley_weights(Index p) {
  std::vector<double> w(static_cast<std::size_t>(p));
  for (Index s = 0; s < p; ++s) {
    w[static_cast<std::size_t>(s)] =
        std::exp(std::lgamma(static_cast<double>(s + 1)) +
                 std::lgamma(static_cast<double>(p - s)) - std::lgamma(static_cast<double>(p + 1)));
  }
  return w;
}

void exact_row(const Scorer& model, std::span<const double> x, const Matrix& background,
               const std::vector<double>& weights, double* phi) {
  const Index p = background.cols();
  const Index nb = background.rows();
  const std::uint64_t masks = std::uint64_t{1} << p;
  // One stacked batch: background rows with coalition features overwritten.
  Matrix batch(static_cast<Index>(masks) * nb, p);
  for (std::uint64_t m = 0; m < masks; ++m) {
    for (Index b = 0; b < nb; ++b) {
      const Index r = static_cast<Index>(m) * nb + b;
      batch.row(r) = background.row(b);
      for (Index j = 0; j < p; ++j) {
        if (m >> j & 1U) batch(r, j) = x[static_cast<std::size_t>(j)];
      }
    }
  }
  const Vector out = model.predict(batch);
  std::vector<double> value(masks);
  for (std::uint64_t m = 0; m < masks; ++m) {
    value[m] = out.segment(static_cast<Index>(m) * nb, nb).mean();
  }
  for (Index j = 0; j < p; ++j) {
    double acc = 0.0;
    const std::uint64_t bit = std::uint64_t{1} << j;
    for (std::uint64_t m = 0; m < masks; ++m) {
      if (m & bit) continue;
      const auto s = static_cast<std::size_t>(std::popcount(m));
      acc += weights[s] * (value[m | bit] - value[m]);
    }
    phi[j] = acc;
  }
}

void permutation_row(const Scorer& model, std::span<const double> x, const Matrix& background,
                     int permutations, std::uint64_t row_seed, double* phi) {
  const Index p = background.cols();
  const Index nb = background.rows();
  std::fill(phi, phi + p, 0.0);
  std::vector<Index> order(static_cast<std::size_t>(p));
  Matrix batch((p + 1) * nb, p);
  for (int k = 0; k < permutations; ++k) {
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(mix_seed(row_seed, static_cast<std::uint64_t>(k)));
    rng.shuffle(std::span<Index>(order));
    // Stage s has the first s features of the permutation taken from x.
    for (Index s = 0; s <= p; ++s) {
      batch.middleRows(s * nb, nb) = background;
      for (Index q = 0; q < s; ++q) {
        const Index j = order[static_cast<std::size_t>(q)];
        batch.block(s * nb, j, nb, 1).setConstant(x[static_cast<std::size_t>(j)]);
      }
    }
    const Vector out = model.predict(batch);
    double prev = out.segment(0, nb).mean();
    for (Index s = 1; s <= p; ++s) {
      const double cur = out.segment(s * nb, nb).mean();
      phi[order[static_cast<std::size_t>(s - 1)]] += cur - prev;
      prev = cur;
    }
  }
  for (Index j = 0; j < p; ++j) phi[j] /= permutations;
}

}  // namespace

AttributionTable shap_attributions(const Scorer& model, const Dataset& ds,
                                   const Matrix& background, const ShapConfig& cfg) {
  cfg.validate();
  if (background.rows() == 0) throw Error(ErrorCode::EmptyBackground, "SHAP background is empty");
  if (background.cols() != ds.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "background column count differs from dataset");
  }
  const Index p = ds.cols();
  if (cfg.mode == ShapMode::ExactEnumeration && p > kMaxExactShapFeatures) {
    throw Error(ErrorCode::ExactModeTooManyFeatures,
                "exact Shapley enumeration supports at most " +
                    std::to_string(kMaxExactShapFeatures) + " features, got " + std::to_string(p));
  }
  AttributionTable out;
  out.features = ds.feature_names();
  out.values.resize(ds.rows(), p);
  out.baseline = Vector::Constant(ds.rows(), model.predict(background).mean());
  const auto weights = shapley_weights(p);
  const Matrix& x = ds.features();
  parallel_for(0, ds.rows(), [&](Index lo, Index hi) {
    std::vector<double> phi(static_cast<std::size_t>(p));
    for (Index i = lo; i < hi; ++i) {
      const std::span<const double> row(x.row(i).data(), static_cast<std::size_t>(p));
      if (cfg.mode == ShapMode::ExactEnumeration) {
        exact_row(model, row, background, weights, phi.data());
      } else {
        permutation_row(model, row, background, cfg.permutations,
                        mix_seed(cfg.seed, static_cast<std::uint64_t>(i)), phi.data());
      }
      for (Index j = 0; j < p; ++j) out.values(i, j) = phi[static_cast<std::size_t>(j)];
    }
  }, 1);
  return out;
}

AttributionTable shap_attributions(const Scorer& model, const Dataset& ds,
                                   const ShapConfig& cfg) {
  cfg.validate();
  const Matrix background =
      sample_rows(ds.features(), cfg.background_size, mix_seed(cfg.seed, 0xB6));
  return shap_attributions(model, ds, background, cfg);
}

AdditiveModel globalize(const AttributionTable& attrs, const Dataset& ds, std::string method,
                        int max_bins) {
  if (attrs.baseline.size() != ds.rows()) {
    throw Error(ErrorCode::LengthMismatch, "attribution table not aligned with dataset");
  }
  std::vector<FeatureShape> shapes;
  for (const auto& feature : attrs.features) {
    shapes.push_back(global_attribution_curve(attrs, ds, feature, max_bins));
  }
  const double intercept = attrs.baseline.size() > 0 ? attrs.baseline.mean() : 0.0;
  return center(AdditiveModel(intercept, std::move(shapes), {}, ds.task(), std::move(method)), ds);
}

void write_attributions_csv(const AttributionTable& attrs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  auto num = [](double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  out << "row,feature,value\n";
  for (Index i = 0; i < attrs.values.rows(); ++i) {
    out << i << ",(baseline)," << num(attrs.baseline[i]) << '\n';
    for (Index j = 0; j < attrs.values.cols(); ++j) {
      out << i << ',' << attrs.features[static_cast<std::size_t>(j)] << ','
          << num(attrs.values(i, j)) << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

}  // namespace gax
