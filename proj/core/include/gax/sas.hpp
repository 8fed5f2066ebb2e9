#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gax/shapes.hpp"

namespace gax {

// Log-spaced grid of count values over [lo, hi].
std::vector<double> log_grid(double lo, double hi, int count);

// Student additive splines.
struct SasConfig {
  int knots = 40;
  std::vector<double> lambda_grid = log_grid(1e-4, 1e4, 17);
  int cv_folds = 5;
  int backfit_max_iters = 50;
  double backfit_tol = 1e-5;
  std::uint64_t seed = 1;

  void validate() const;
};

// Natural cubic regression spline parameterized by its values at the knots.
// The objective is mean squared error plus lambda times the integrated
// squared second derivative, with the penalty rescaled per fit to the norm of
// the mean Gram matrix; lambda is therefore free of row count and units.
struct SplineFit {
  std::vector<double> knots;
  std::vector<double> values;         // spline value at each knot
  std::vector<double> second_derivs;  // natural: zero at both ends
  double lambda = 0.0;

  double operator()(double x) const;
  // Integrated squared second derivative over the knot range.
  double roughness() const;
};

// Knots at sample quantiles. Requires at least k distinct values.
std::vector<double> quantile_knots(std::span<const double> x, int k);

SplineFit fit_spline_1d(std::span<const double> x, std::span<const double> r, int knots,
                        double lambda);

struct SasTrace {
  std::vector<double> lambdas;     // chosen per feature
  std::vector<double> cycle_mse;   // training MSE against f after each cycle
  // cycle_mse plus the lambda-weighted (scaled) penalties; the quantity each
  // backfit step minimizes once lambda is frozen.
  std::vector<double> cycle_objective;
  int cycles = 0;
  bool converged = false;
};

AdditiveModel fit_sas(const Matrix& x, std::span<const std::string> names,
                      std::span<const double> f, const SasConfig& cfg, Task task,
                      SasTrace* trace = nullptr);
AdditiveModel fit_sas(const Dataset& ds, std::span<const double> f, const SasConfig& cfg,
                      SasTrace* trace = nullptr);

}  // namespace gax
