#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gax/dataset.hpp"

namespace gax {

enum class SyntheticFunction { F1, F2 };

SyntheticFunction synthetic_function_from_string(std::string_view name);
std::string_view to_string(SyntheticFunction fn);

// Closed-form test functions over x in [-1, 1]^10 (x9, x10 are inert).
double f1(std::span<const double> x);
double f2(std::span<const double> x);
std::function<double(std::span<const double>)> synthetic_target(SyntheticFunction fn);

// Per-feature additive components of a synthetic target. For F1 these are the
// literal terms, so sum(component_i(x_i)) + offset == F1(x). For F2 they are
// the projections E[F2 | x_i] (interaction terms averaged over the other
// features); offset then only recovers E[F2].
struct GroundTruthShapes {
  std::vector<std::string> feature_names;
  std::vector<std::function<double(double)>> components;
  // Mean of each component under U(-1, 1).
  std::vector<double> uniform_means;
  double offset = 0.0;

  double sum(std::span<const double> x) const;
  // Component minus its U(-1, 1) mean.
  double centered(std::size_t feature, double x) const;
};

GroundTruthShapes ground_truth_shapes(SyntheticFunction fn);

struct SyntheticData {
  Dataset data;
  GroundTruthShapes truth;
};

// Features ~ U(-1, 1) drawn row by row from a seeded generator.
SyntheticData generate_synthetic(SyntheticFunction fn, Index n, std::uint64_t seed);
inline SyntheticData gen_f1(Index n, std::uint64_t seed) {
  return generate_synthetic(SyntheticFunction::F1, n, seed);
}
inline SyntheticData gen_f2(Index n, std::uint64_t seed) {
  return generate_synthetic(SyntheticFunction::F2, n, seed);
}

// Uniform rows on [-1, 1]^p.
Matrix sample_uniform_features(Index n, Index p, std::uint64_t seed);

// E over u, v ~ U(-1, 1) of sec(z * u * v); the additive projection of the
// F2 secant term onto one of its three arguments.
double expected_secant_product(double z);

// E over t ~ U(-1, 1) of |z|^(2|t|); projection of the F2 power term onto x3.
double expected_power_over_exponent(double z);

}  // namespace gax
