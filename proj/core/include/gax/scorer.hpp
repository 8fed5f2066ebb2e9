#pragma once

#include <functional>
#include <span>

#include "gax/types.hpp"

namespace gax {

// A black-box model queried in batches: one score (regression output or
// logit) per row of X.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual Vector predict(const Matrix& x) const = 0;
  virtual Index num_features() const = 0;
};

// A scorer that also exposes d score / d x at a single point.
class DifferentiableScorer : public Scorer {
 public:
  virtual Vector input_gradient(std::span<const double> x) const = 0;
};

// Adapts a per-row function, e.g. a closed-form synthetic target.
class FunctionScorer final : public Scorer {
 public:
  using RowFunction = std::function<double(std::span<const double>)>;

  FunctionScorer(RowFunction fn, Index num_features)
      : fn_(std::move(fn)), num_features_(num_features) {}

  Vector predict(const Matrix& x) const override {
    Vector out(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
      out[i] = fn_(std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols())));
    }
    return out;
  }
  Index num_features() const override { return num_features_; }

 private:
  RowFunction fn_;
  Index num_features_;
};

}  // namespace gax
