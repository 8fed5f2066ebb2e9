#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gax/shapes.hpp"

namespace gax {

// Up to `points` sample quantiles of a column, deduplicated and sorted.
std::vector<double> quantile_grid(std::span<const double> values, int points);

// Mean scorer output with `feature` overwritten by each grid value in turn.
FeatureShape partial_dependence(const Scorer& model, const Dataset& ds, std::string_view feature,
                                std::span<const double> grid);

// PD curve for every feature on a quantile grid. Intercept = mean output on
// ds, shapes centered on ds.
AdditiveModel pd_model(const Scorer& model, const Dataset& ds, int grid_points = 64);

// attribution_i = dF/dx_i * x_i, baseline = F(0). Not clipped.
AttributionTable ggrad_attributions(const DifferentiableScorer& model, const Dataset& ds);

enum class ShapMode { ExactEnumeration, PermutationSampling };

std::string_view to_string(ShapMode mode);
ShapMode shap_mode_from_string(std::string_view name);

struct ShapConfig {
  ShapMode mode = ShapMode::PermutationSampling;
  int background_size = 128;
  int permutations = 16;
  std::uint64_t seed = 1;

  void validate() const;
};

inline constexpr Index kMaxExactShapFeatures = 15;

// Rows drawn without replacement (all rows if size >= rows).
Matrix sample_rows(const Matrix& x, int size, std::uint64_t seed);

// Interventional Shapley values with value function
// v(S) = mean_b F(x_S, b_notS) over the background rows.
AttributionTable shap_attributions(const Scorer& model, const Dataset& ds,
                                   const Matrix& background, const ShapConfig& cfg);
// Background = cfg.background_size rows sampled from ds.
AttributionTable shap_attributions(const Scorer& model, const Dataset& ds,
                                   const ShapConfig& cfg);

// Mean attribution per (binned) feature value, intercept = mean baseline,
// centered on ds.
AdditiveModel globalize(const AttributionTable& attrs, const Dataset& ds, std::string method,
                        int max_bins = 256);

// CSV `row,feature,value`; baselines are written with feature `(baseline)`.
void write_attributions_csv(const AttributionTable& attrs, const std::filesystem::path& path);

}  // namespace gax
