#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gax/types.hpp"

namespace gax {

// Left bin edges for quantile binning. When the column has at most max_bins
// distinct values every distinct value gets its own bin; otherwise edges are
// the (deduplicated) sample quantiles at k/max_bins. edges.front() is the
// column minimum, so every observed value falls in some bin.
std::vector<double> quantile_edges(std::span<const double> values, int max_bins);

// Bin of x under right-open intervals [edges[k], edges[k+1]); values left of
// edges.front() map to bin 0.
inline int bin_of(std::span<const double> edges, double x);

// Bins every value of a column.
std::vector<std::uint16_t> assign_bins(std::span<const double> edges,
                                       std::span<const double> values);

// Sorted distinct values.
std::vector<double> distinct_sorted(std::span<const double> values);

}  // namespace gax

#include <algorithm>

namespace gax {

inline int bin_of(std::span<const double> edges, double x) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const auto k = static_cast<int>(it - edges.begin()) - 1;
  return k < 0 ? 0 : k;
}

}  // namespace gax
