#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gax/shapes.hpp"

namespace gax {

// CSV with header `feature,breakpoint,value,mode`, 17 significant digits.
void write_shapes_csv(const AdditiveModel& m, const std::filesystem::path& path);
void write_shapes_csv(std::span<const FeatureShape> shapes, const std::filesystem::path& path);
std::vector<FeatureShape> read_shapes_csv(const std::filesystem::path& path);

struct SvgSeries {
  std::string label;
  const AdditiveModel* model = nullptr;
};

// One SVG per feature (shape_<feature>.svg) with every series overlaid, and
// one heatmap per pair component (pair_<a>__<b>.svg). Returns the written
// paths in a deterministic order.
std::vector<std::filesystem::path> render_shape_svgs(std::span<const SvgSeries> series,
                                                     const std::filesystem::path& svg_dir);

// Single-model convenience: shapes CSV plus per-feature SVGs.
std::vector<std::filesystem::path> export_shapes(const AdditiveModel& m,
                                                 const std::filesystem::path& csv_path,
                                                 const std::filesystem::path& svg_dir);

// Rendering helpers exposed for golden tests.
std::string render_feature_svg(const std::string& feature, std::span<const SvgSeries> series);
std::string render_pair_svg(const PairShape& pair);

}  // namespace gax
