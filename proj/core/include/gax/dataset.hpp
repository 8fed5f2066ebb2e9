#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gax/types.hpp"

namespace gax {

// Numeric feature matrix plus optional labels. Immutable once constructed;
// the constructor enforces finiteness, unique names and {0,1} labels for
// classification.
class Dataset {
 public:
  Dataset(Matrix features, std::vector<std::string> feature_names,
          std::optional<Vector> labels, Task task);

  const Matrix& features() const { return features_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  Task task() const { return task_; }
  Index rows() const { return features_.rows(); }
  Index cols() const { return features_.cols(); }

  bool has_labels() const { return labels_.has_value(); }
  // Throws NoLabels when the dataset is unlabeled.
  const Vector& labels() const;

  // Throws UnknownFeature.
  Index feature_index(std::string_view name) const;
  std::vector<double> column(Index j) const;

  Dataset with_labels(Vector labels) const;
  Dataset without_labels() const;
  Dataset with_features(Matrix features) const;
  Dataset subset(std::span<const Index> rows) const;

 private:
  Matrix features_;
  std::vector<std::string> names_;
  std::optional<Vector> labels_;
  Task task_;
};

struct SplitSpec {
  double train_fraction = 0.7;
  double valid_fraction = 0.15;
  double test_fraction = 0.15;
  std::uint64_t seed = 0;
};

struct DatasetSplit {
  Dataset train;
  Dataset valid;
  Dataset test;
};

// Uniform shuffle, then contiguous partition. No stratification.
DatasetSplit split_dataset(const Dataset& ds, const SplitSpec& spec);

// Header row required; every non-label column becomes a feature. Pass
// std::nullopt as label_column for unlabeled data.
Dataset load_csv(const std::filesystem::path& path, Task task,
                 const std::optional<std::string>& label_column);

// Writes features (and labels, if present, as the last column).
void write_csv(const Dataset& ds, const std::filesystem::path& path,
               std::string_view label_column = "label");

// Adds delta to the label of every row with lo <= x_feature <= hi.
Dataset bump_labels(const Dataset& ds, std::string_view feature, double lo,
                    double hi, double delta);

// Replaces the feature by its bin index 0..k for k strictly increasing cut
// points; values equal to a cut go to the upper bin.
Dataset discretize_feature(const Dataset& ds, std::string_view feature,
                           std::span<const double> cut_points);

// Bin index of a single value under the discretize_feature rule.
int discretize_value(std::span<const double> cut_points, double x);

}  // namespace gax
