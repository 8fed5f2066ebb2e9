#include "gax/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "gax/error.hpp"
#include "gax/random.hpp"

namespace gax {

namespace {

constexpr Index kSyntheticFeatures = 10;
constexpr double kPi = std::numbers::pi;

double x_log_abs_x(double x) { return x == 0.0 ? 0.0 : x * std::log(std::abs(x)); }

double f1_term(std::size_t i, double x) {
  switch (i) {
    case 0: return 3.0 * x;
    case 1: return x * x * x;
    case 2: return -std::pow(kPi, x);
    case 3: return std::exp(-2.0 * x * x);
    case 4: return 1.0 / (2.0 + std::abs(x));
    case 5: return x_log_abs_x(x);
    case 6: return std::sqrt(2.0 * std::abs(x)) + std::max(0.0, x);
    case 7: return x * x * x * x + 2.0 * std::cos(kPi * x);
    default: return 0.0;
  }
}

// |a|^(2|b|) with 0^0 := 1.
double abs_power(double a, double b) {
  if (a == 0.0) return b == 0.0 ? 1.0 : 0.0;
  return std::pow(std::abs(a), 2.0 * std::abs(b));
}

// 24-point Gauss-Legendre rule on [0, 1].
struct GaussLegendre {
  static constexpr int kNodes = 24;
  std::array<double, kNodes> nodes{};
  std::array<double, kNodes> weights{};

  GaussLegendre() {
    for (int i = 0; i < kNodes; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (kNodes + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= kNodes; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = kNodes * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
      weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre rule;
  return rule;
}

// gd^{-1}(a) / a, the mean of sec over [0, a].
double mean_secant(double a) {
  if (std::abs(a) < 1e-6) return 1.0 + a * a / 6.0;
  return std::asinh(std::tan(a)) / a;
}

double uniform_mean(const std::function<double(double)>& g) {
  // Composite Simpson on [-1, 0] and [0, 1]; every component's kink sits at 0.
  constexpr int kIntervals = 2000;
  const double h = 1.0 / kIntervals;
  double total = 0.0;
  for (double sign : {-1.0, 1.0}) {
    double s = g(0.0) + g(sign);
    for (int k = 1; k < kIntervals; ++k) {
      s += (k % 2 ? 4.0 : 2.0) * g(sign * k * h);
    }
    total += s * h / 3.0;
  }
  return total / 2.0;
}

}  // namespace

SyntheticFunction synthetic_function_from_string(std::string_view name) {
  if (name == "f1" || name == "F1") return SyntheticFunction::F1;
  if (name == "f2" || name == "F2") return SyntheticFunction::F2;
  throw Error(ErrorCode::InvalidArgument,
              "unknown synthetic function '" + std::string(name) + "' (expected f1|f2)");
}

std::string_view to_string(SyntheticFunction fn) {
  return fn == SyntheticFunction::F1 ? "f1" : "f2";
}

double f1(std::span<const double> x) {
  if (x.size() < 8) throw Error(ErrorCode::DimensionMismatch, "F1 needs 8+ features");
  double s = 0.0;
  for (std::size_t i = 0; i < 8; ++i) s += f1_term(i, x[i]);
  return s;
}

double f2(std::span<const double> x) {
  if (x.size() < 8) throw Error(ErrorCode::DimensionMismatch, "F2 needs 8+ features");
  return f1(x) + x[0] * x[1] + abs_power(x[2], x[3]) + 1.0 / std::cos(x[2] * x[4] * x[5]);
}

std::function<double(std::span<const double>)> synthetic_target(SyntheticFunction fn) {
  if (fn == SyntheticFunction::F1) return [](std::span<const double> x) { return f1(x); };
  return [](std::span<const double> x) { return f2(x); };
}

double expected_secant_product(double z) {
  // E[sec(z u v)] = int_0^1 int_0^1 sec(z u v) dv du = int_0^1 gd^{-1}(z u) / (z u) du.
  const auto& rule = gauss_legendre();
  double s = 0.0;
  for (int k = 0; k < GaussLegendre::kNodes; ++k) {
    const auto i = static_cast<std::size_t>(k);
    s += rule.weights[i] * mean_secant(z * rule.nodes[i]);
  }
  return s;
}

double expected_power_over_exponent(double z) {
  // int_0^1 |z|^(2t) dt = (z^2 - 1) / (2 ln|z|).
  if (z == 0.0) return 0.0;
  const double l = 2.0 * std::log(std::abs(z));
  if (l == 0.0) return 1.0;
  return std::expm1(l) / l;
}

double GroundTruthShapes::sum(std::span<const double> x) const {
  double s = offset;
  for (std::size_t i = 0; i < components.size(); ++i) s += components[i](x[i]);
  return s;
}

double GroundTruthShapes::centered(std::size_t feature, double x) const {
  return components.at(feature)(x) - uniform_means.at(feature);
}

GroundTruthShapes ground_truth_shapes(SyntheticFunction fn) {
  GroundTruthShapes truth;
  for (Index i = 0; i < kSyntheticFeatures; ++i) {
    truth.feature_names.push_back("x" + std::to_string(i + 1));
    const auto term = static_cast<std::size_t>(i);
    truth.components.emplace_back([term](double x) { return f1_term(term, x); });
  }
  if (fn == SyntheticFunction::F2) {
    // x1*x2 projects to zero on both arguments; the power and secant terms
    // project onto x3/x4 and x3/x5/x6 respectively.
    truth.components[2] = [](double x) {
      return f1_term(2, x) + expected_power_over_exponent(x) + expected_secant_product(x);
    };
    truth.components[3] = [](double x) {
      return f1_term(3, x) + 1.0 / (2.0 * std::abs(x) + 1.0);
    };
    truth.components[4] = [](double x) { return f1_term(4, x) + expected_secant_product(x); };
    truth.components[5] = [](double x) { return f1_term(5, x) + expected_secant_product(x); };
  }
  double mean_sum = 0.0;
  for (const auto& g : truth.components) {
    truth.uniform_means.push_back(uniform_mean(g));
    mean_sum += truth.uniform_means.back();
  }
  if (fn == SyntheticFunction::F2) {
    // E[F2] counts the secant term once, the projections three times.
    const double e_secant = uniform_mean([](double z) { return expected_secant_product(z); });
    double e_f1 = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      e_f1 += uniform_mean([i](double x) { return f1_term(i, x); });
    }
    const double e_f2 = e_f1 + 0.5 * std::log(3.0) + e_secant;
    truth.offset = e_f2 - mean_sum;
  }
  return truth;
}

Matrix sample_uniform_features(Index n, Index p, std::uint64_t seed) {
  if (n < 1 || p < 1) throw Error(ErrorCode::InvalidArgument, "need n >= 1 and p >= 1");
  Rng rng(seed);
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
  }
  return x;
}

SyntheticData generate_synthetic(SyntheticFunction fn, Index n, std::uint64_t seed) {
  Matrix x = sample_uniform_features(n, kSyntheticFeatures, seed);
  const auto target = synthetic_target(fn);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    y[i] = target(std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols())));
  }
  auto truth = ground_truth_shapes(fn);
  auto names = truth.feature_names;
  return SyntheticData{Dataset(std::move(x), std::move(names), std::move(y), Task::Regression),
                       std::move(truth)};
}

}  // namespace gax
