#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gax/dataset.hpp"
#include "gax/scorer.hpp"

namespace gax {

struct TrainConfig {
  int epochs = 40;
  int batch_size = 32;
  double learning_rate = 0.05;
  int early_stop_patience = 6;
  std::uint64_t seed = 1;
  double weight_init_scale = 1.0;
  // Share of rows held out for early stopping when no validation set is given.
  double valid_fraction = 0.2;

  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

// Fully-connected ReLU network. Inputs are standardized inside the net and
// the final linear output is mapped back through (offset + scale * out), so
// callers always work in original feature and label units. For
// classification offset=0, scale=1 and the output is a logit.
class TeacherNet final : public DifferentiableScorer {
 public:
  TeacherNet(std::vector<Index> layer_dims, std::vector<DenseLayer> layers, Vector input_mean,
             Vector input_std, double output_offset, double output_scale, Task task);

  // Network with weights drawn U(-s/sqrt(fan_in), s/sqrt(fan_in)), identity
  // standardization.
  static TeacherNet random_init(std::vector<Index> layer_dims, Task task, double init_scale,
                                std::uint64_t seed);

  // Single affine layer: out = w.x + b.
  static TeacherNet affine(std::span<const double> w, double b);

  Vector predict(const Matrix& x) const override;
  double predict_row(std::span<const double> x) const;
  Vector input_gradient(std::span<const double> x) const override;
  Index num_features() const override { return layer_dims_.front(); }

  const std::vector<Index>& layer_dims() const { return layer_dims_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  const Vector& input_mean() const { return input_mean_; }
  const Vector& input_std() const { return input_std_; }
  double output_offset() const { return output_offset_; }
  double output_scale() const { return output_scale_; }
  Task task() const { return task_; }

 private:
  // Raw network output on already-standardized inputs (one sample per column).
  Eigen::MatrixXd forward_standardized(const Eigen::MatrixXd& z) const;

  std::vector<Index> layer_dims_;
  std::vector<DenseLayer> layers_;
  Vector input_mean_;
  Vector input_std_;
  double output_offset_;
  double output_scale_;
  Task task_;
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> valid_loss;  // per epoch
  int best_epoch = -1;
  double best_valid_loss = 0.0;
};

// (p, hidden..., 1).
std::vector<Index> architecture(Index num_features, std::span<const Index> hidden);

// Mini-batch SGD on squared error (regression) or logistic loss
// (classification); the weights with the best validation loss are returned.
TeacherNet train_teacher(const Dataset& train, const Dataset& valid,
                         std::span<const Index> layer_dims, const TrainConfig& cfg,
                         TrainReport* report = nullptr);

// Holds out cfg.valid_fraction of ds for early stopping.
TeacherNet train_teacher(const Dataset& ds, std::span<const Index> layer_dims,
                         const TrainConfig& cfg, TrainReport* report = nullptr);

// Mean loss of the net on a labeled dataset, in the units train_teacher
// optimizes: MSE for regression, mean log loss for classification.
double teacher_loss(const TeacherNet& net, const Dataset& ds);

}  // namespace gax
