#include "gax/teacher.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "gax/error.hpp"
#include "gax/parallel.hpp"
#include "gax/random.hpp"

namespace gax {

void TrainConfig::validate() const {
  if (epochs <= 0 || batch_size <= 0 || !(learning_rate > 0.0) || early_stop_patience <= 0 ||
      !(weight_init_scale > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "train config values must be positive");
  }
  if (early_stop_patience > epochs) {
    throw Error(ErrorCode::InvalidArgument, "early_stop_patience must not exceed epochs");
  }
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "valid_fraction must lie in (0, 1)");
  }
}

TeacherNet::TeacherNet(std::vector<Index> layer_dims, std::vector<DenseLayer> layers,
                       Vector input_mean, Vector input_std, double output_offset,
                       double output_scale, Task task)
    : layer_dims_(std::move(layer_dims)),
      layers_(std::move(layers)),
      input_mean_(std::move(input_mean)),
      input_std_(std::move(input_std)),
      output_offset_(output_offset),
      output_scale_(output_scale),
      task_(task) {
  if (layer_dims_.size() < 2 || layer_dims_.back() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "layer dims must be (p, ..., 1)");
  }
  if (layers_.size() + 1 != layer_dims_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "layer count does not match layer dims");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].weights.rows() != layer_dims_[l + 1] ||
        layers_[l].weights.cols() != layer_dims_[l] ||
        layers_[l].bias.size() != layer_dims_[l + 1]) {
      std::ostringstream msg;
      msg << "layer " << l << " weight shape inconsistent with layer dims";
      throw Error(ErrorCode::DimensionMismatch, msg.str());
    }
  }
  const Index p = layer_dims_.front();
  if (input_mean_.size() != p || input_std_.size() != p) {
    throw Error(ErrorCode::DimensionMismatch, "standardization size != input dim");
  }
  if ((input_std_.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "standardization std must be positive");
  }
}

TeacherNet TeacherNet::random_init(std::vector<Index> layer_dims, Task task, double init_scale,
                                   std::uint64_t seed) {
  if (layer_dims.size() < 2) throw Error(ErrorCode::DimensionMismatch, "need >= 2 layer dims");
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const Index in = layer_dims[l];
    const Index out = layer_dims[l + 1];
    const double bound = init_scale / std::sqrt(static_cast<double>(in));
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
    for (Index r = 0; r < out; ++r) {
      for (Index c = 0; c < in; ++c) layer.weights(r, c) = rng.uniform(-bound, bound);
    }
    for (Index r = 0; r < out; ++r) layer.bias[r] = rng.uniform(-bound, bound);
    layers.push_back(std::move(layer));
  }
  const Index p = layer_dims.front();
  return TeacherNet(std::move(layer_dims), std::move(layers), Vector::Zero(p), Vector::Ones(p),
                    0.0, 1.0, task);
}

TeacherNet TeacherNet::affine(std::span<const double> w, double b) {
  const auto p = static_cast<Index>(w.size());
  DenseLayer layer{Eigen::MatrixXd(1, p), Eigen::VectorXd::Constant(1, b)};
  for (Index j = 0; j < p; ++j) layer.weights(0, j) = w[static_cast<std::size_t>(j)];
  return TeacherNet({p, 1}, {std::move(layer)}, Vector::Zero(p), Vector::Ones(p), 0.0, 1.0,
                    Task::Regression);
}

Eigen::MatrixXd TeacherNet::forward_standardized(const Eigen::MatrixXd& z) const {
  Eigen::MatrixXd a = z;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd next = layers_[l].weights * a;
    next.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) next = next.cwiseMax(0.0);
    a = std::move(next);
  }
  return a;
}

Vector TeacherNet::predict(const Matrix& x) const {
  const Index p = num_features();
  if (x.cols() != p) {
    std::ostringstream msg;
    msg << "input has " << x.cols() << " columns, net expects " << p;
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  Vector out(x.rows());
  constexpr Index kChunk = 512;
  const Index chunks = (x.rows() + kChunk - 1) / kChunk;
  parallel_for(0, chunks, [&](Index c0, Index c1) {
    for (Index c = c0; c < c1; ++c) {
      const Index lo = c * kChunk;
      const Index len = std::min(kChunk, x.rows() - lo);
      Eigen::MatrixXd z = x.middleRows(lo, len).transpose();
      z.colwise() -= input_mean_;
      z.array().colwise() /= input_std_.array();
      const Eigen::MatrixXd o = forward_standardized(z);
      out.segment(lo, len) = (output_offset_ + output_scale_ * o.row(0).array()).transpose();
    }
  });
  return out;
}

double TeacherNet::predict_row(std::span<const double> x) const {
  if (static_cast<Index>(x.size()) != num_features()) {
    throw Error(ErrorCode::DimensionMismatch, "row length does not match net input dim");
  }
  Eigen::MatrixXd z(num_features(), 1);
  for (Index j = 0; j < num_features(); ++j) {
    z(j, 0) = (x[static_cast<std::size_t>(j)] - input_mean_[j]) / input_std_[j];
  }
  return output_offset_ + output_scale_ * forward_standardized(z)(0, 0);
}

Vector TeacherNet::input_gradient(std::span<const double> x) const {
  const Index p = num_features();
  if (static_cast<Index>(x.size()) != p) {
    throw Error(ErrorCode::DimensionMismatch, "row length does not match net input dim");
  }
  std::vector<Eigen::VectorXd> pre;
  Eigen::VectorXd a(p);
  for (Index j = 0; j < p; ++j) a[j] = (x[static_cast<std::size_t>(j)] - input_mean_[j]) / input_std_[j];
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::VectorXd z = layers_[l].weights * a + layers_[l].bias;
    pre.push_back(z);
    a = (l + 1 < layers_.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, output_scale_);
  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (l + 1 < layers_.size()) {
      // ReLU subgradient: 0 at exactly-zero pre-activations.
      delta = delta.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
    }
    delta = layers_[l].weights.transpose() * delta;
  }
  return delta.cwiseQuotient(input_std_);
}

std::vector<Index> architecture(Index num_features, std::span<const Index> hidden) {
  std::vector<Index> dims{num_features};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  return dims;
}

namespace {

double sigmoid(double v) {
  return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

// log(1 + exp(v)) without overflow.
double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

double mean_loss(const Vector& score, const Vector& y, Task task) {
  double s = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    if (task == Task::Regression) {
      const double d = score[i] - y[i];
      s += d * d;
    } else {
      s += softplus(score[i]) - y[i] * score[i];
    }
  }
  return s / static_cast<double>(y.size());
}

}  // namespace

double teacher_loss(const TeacherNet& net, const Dataset& ds) {
  return mean_loss(net.predict(ds.features()), ds.labels(), net.task());
}

TeacherNet train_teacher(const Dataset& ds, std::span<const Index> layer_dims,
                         const TrainConfig& cfg, TrainReport* report) {
  cfg.validate();
  if (!ds.has_labels()) throw Error(ErrorCode::NoLabels, "teacher training needs labels");
  const Index n = ds.rows();
  const auto n_valid = static_cast<Index>(std::llround(cfg.valid_fraction * static_cast<double>(n)));
  if (n_valid < 1 || n - n_valid < 1) {
    throw Error(ErrorCode::EmptyDataset, "too few rows for a validation hold-out");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(mix_seed(cfg.seed, 0xa11));
  rng.shuffle(std::span<Index>(order));
  std::span<const Index> all(order);
  const auto split = static_cast<std::size_t>(n - n_valid);
  return train_teacher(ds.subset(all.subspan(0, split)), ds.subset(all.subspan(split)),
                       layer_dims, cfg, report);
}

TeacherNet train_teacher(const Dataset& train, const Dataset& valid,
                         std::span<const Index> layer_dims, const TrainConfig& cfg,
                         TrainReport* report) {
  cfg.validate();
  if (!train.has_labels() || !valid.has_labels()) {
    throw Error(ErrorCode::NoLabels, "teacher training needs labeled train and valid data");
  }
  const Index p = train.cols();
  if (layer_dims.size() < 2 || layer_dims.front() != p || layer_dims.back() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "architecture must be (p, ..., 1)");
  }
  if (valid.cols() != p) throw Error(ErrorCode::DimensionMismatch, "valid column count differs");
  const Task task = train.task();
  const Index n = train.rows();
  const Matrix& x = train.features();
  const Vector& y = train.labels();

  Vector mean = x.colwise().mean().transpose();
  Vector stdev(p);
  for (Index j = 0; j < p; ++j) {
    const double var = (x.col(j).array() - mean[j]).square().mean();
    stdev[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  double out_offset = 0.0;
  double out_scale = 1.0;
  if (task == Task::Regression) {
    out_offset = y.mean();
    const double var = (y.array() - out_offset).square().mean();
    out_scale = var > 1e-24 ? std::sqrt(var) : 1.0;
  }

  std::vector<Index> dims(layer_dims.begin(), layer_dims.end());
  TeacherNet init = TeacherNet::random_init(dims, task, cfg.weight_init_scale, cfg.seed);
  TeacherNet net(dims, init.layers(), mean, stdev, out_offset, out_scale, task);
  auto& layers = net.mutable_layers();
  const std::size_t depth = layers.size();

  // Standardized inputs (one sample per column) and targets.
  Eigen::MatrixXd z_all = x.transpose();
  z_all.colwise() -= mean;
  z_all.array().colwise() /= stdev.array();
  Eigen::VectorXd t_all = task == Task::Regression
                              ? Eigen::VectorXd((y.array() - out_offset) / out_scale)
                              : Eigen::VectorXd(y);

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(mix_seed(cfg.seed, 0xba7c));

  std::vector<Eigen::MatrixXd> acts(depth + 1);
  std::vector<Eigen::MatrixXd> pre(depth);
  std::vector<DenseLayer> best = layers;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int since_best = 0;
  TrainReport local;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<Index>(order));
    double epoch_loss = 0.0;
    for (Index start = 0; start < n; start += cfg.batch_size) {
      const Index b = std::min<Index>(cfg.batch_size, n - start);
      Eigen::MatrixXd& a0 = acts[0];
      a0.resize(p, b);
      Eigen::RowVectorXd target(b);
      for (Index k = 0; k < b; ++k) {
        const Index r = order[static_cast<std::size_t>(start + k)];
        a0.col(k) = z_all.col(r);
        target[k] = t_all[r];
      }
      for (std::size_t l = 0; l < depth; ++l) {
        pre[l] = layers[l].weights * acts[l];
        pre[l].colwise() += layers[l].bias;
        acts[l + 1] = l + 1 < depth ? Eigen::MatrixXd(pre[l].cwiseMax(0.0)) : pre[l];
      }
      Eigen::MatrixXd delta(1, b);
      for (Index k = 0; k < b; ++k) {
        const double o = acts[depth](0, k);
        if (task == Task::Regression) {
          const double d = o - target[k];
          epoch_loss += d * d;
          delta(0, k) = 2.0 * d / static_cast<double>(b);
        } else {
          epoch_loss += softplus(o) - target[k] * o;
          delta(0, k) = (sigmoid(o) - target[k]) / static_cast<double>(b);
        }
      }
      for (std::size_t l = depth; l-- > 0;) {
        Eigen::MatrixXd grad_w = delta * acts[l].transpose();
        Eigen::VectorXd grad_b = delta.rowwise().sum();
        if (l > 0) {
          Eigen::MatrixXd back = layers[l].weights.transpose() * delta;
          delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
        layers[l].weights.noalias() -= cfg.learning_rate * grad_w;
        layers[l].bias.noalias() -= cfg.learning_rate * grad_b;
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (task == Task::Regression) epoch_loss *= out_scale * out_scale;
    const double valid_loss = teacher_loss(net, valid);
    if (!std::isfinite(epoch_loss) || !std::isfinite(valid_loss)) {
      std::ostringstream msg;
      msg << "loss became non-finite at epoch " << epoch;
      throw Error(ErrorCode::DivergedLoss, msg.str());
    }
    local.train_loss.push_back(epoch_loss);
    local.valid_loss.push_back(valid_loss);
    if (valid_loss < best_loss) {
      best_loss = valid_loss;
      best = layers;
      best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      break;
    }
  }
  layers = std::move(best);
  local.best_epoch = best_epoch;
  local.best_valid_loss = best_loss;
  if (report) *report = std::move(local);
  return net;
}

}  // namespace gax
