#include "gax/binning.hpp"

#include <algorithm>
#include <cmath>

#include "gax/error.hpp"

namespace gax {

std::vector<double> distinct_sorted(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  return sorted;
}

std::vector<double> quantile_edges(std::span<const double> values, int max_bins) {
  if (values.empty()) {
    throw Error(ErrorCode::EmptyDataset, "cannot bin an empty column");
  }
  if (max_bins < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_bins must be >= 1");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (static_cast<int>(distinct.size()) <= max_bins) return distinct;

  const auto n = sorted.size();
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(max_bins));
  for (int k = 0; k < max_bins; ++k) {
    const auto pos = static_cast<std::size_t>(
        (static_cast<unsigned long long>(k) * n) / static_cast<unsigned long long>(max_bins));
    const double edge = sorted[pos];
    if (edges.empty() || edge > edges.back()) edges.push_back(edge);
  }
  return edges;
}

std::vector<std::uint16_t> assign_bins(std::span<const double> edges,
                                       std::span<const double> values) {
  std::vector<std::uint16_t> bins(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    bins[i] = static_cast<std::uint16_t>(bin_of(edges, values[i]));
  }
  return bins;
}

}  // namespace gax
