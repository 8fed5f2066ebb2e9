#include "gax/sat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gax/binning.hpp"
#include "gax/error.hpp"
#include "gax/parallel.hpp"
#include "gax/random.hpp"

namespace gax {

void SatConfig::validate() const {
  if (rounds < 1 || !(learning_rate > 0.0 && learning_rate <= 1.0) || max_leaves < 2 ||
      bags < 1 || max_bins < 2 || max_bins > 65535) {
    throw Error(ErrorCode::InvalidArgument,
                "SAT config needs rounds>=1, 0<lr<=1, leaves>=2, bags>=1, 2<=bins<=65535");
  }
}

void PairConfig::validate() const {
  if (rounds < 1 || !(learning_rate > 0.0 && learning_rate <= 1.0) || max_leaves < 2 ||
      bins_per_axis < 2 || bins_per_axis > 65535) {
    throw Error(ErrorCode::InvalidArgument,
                "pair config needs rounds>=1, 0<lr<=1, leaves>=2, 2<=bins<=65535");
  }
  for (const auto& [a, b] : pairs) {
    if (a == b) throw Error(ErrorCode::InvalidArgument, "pair '" + a + "' repeats a feature");
  }
}

double StepFunction::operator()(double x) const {
  return values[static_cast<std::size_t>(bin_of(thresholds, x))];
}

namespace {

// Contiguous run of histogram bins [lo, hi) that forms one leaf.
struct Leaf {
  int lo = 0;
  int hi = 0;
  double sum = 0.0;
  double count = 0.0;
  int split = -1;  // first bin of the right child
  double gain = 0.0;
};

void find_best_split(const double* sums, const double* counts, Leaf& leaf) {
  leaf.split = -1;
  leaf.gain = 0.0;
  if (leaf.count <= 0.0) return;
  const double parent = leaf.sum * leaf.sum / leaf.count;
  double left_sum = 0.0;
  double left_count = 0.0;
  for (int s = leaf.lo + 1; s < leaf.hi; ++s) {
    left_sum += sums[s - 1];
    left_count += counts[s - 1];
    const double right_count = leaf.count - left_count;
    if (left_count <= 0.0) continue;
    if (right_count <= 0.0) break;
    const double right_sum = leaf.sum - left_sum;
    const double gain =
        left_sum * left_sum / left_count + right_sum * right_sum / right_count - parent;
    if (gain > leaf.gain) {
      leaf.gain = gain;
      leaf.split = s;
    }
  }
}

// Greedy best-first tree over a 1-D histogram. Writes the leaf value of every
// bin into bin_values and returns the leaves in bin order.
std::vector<Leaf> fit_histogram_tree(const double* sums, const double* counts, int nbins,
                                     int max_leaves, double min_gain, double* bin_values) {
  std::vector<Leaf> leaves(1);
  leaves[0].lo = 0;
  leaves[0].hi = nbins;
  for (int k = 0; k < nbins; ++k) {
    leaves[0].sum += sums[k];
    leaves[0].count += counts[k];
  }
  find_best_split(sums, counts, leaves[0]);
  while (static_cast<int>(leaves.size()) < max_leaves) {
    std::size_t best = leaves.size();
    for (std::size_t l = 0; l < leaves.size(); ++l) {
      if (leaves[l].split >= 0 && leaves[l].gain > min_gain &&
          (best == leaves.size() || leaves[l].gain > leaves[best].gain)) {
        best = l;
      }
    }
    if (best == leaves.size()) break;
    Leaf right;
    right.lo = leaves[best].split;
    right.hi = leaves[best].hi;
    for (int k = right.lo; k < right.hi; ++k) {
      right.sum += sums[k];
      right.count += counts[k];
    }
    Leaf& left = leaves[best];
    left.hi = right.lo;
    left.sum -= right.sum;
    left.count -= right.count;
    find_best_split(sums, counts, left);
    find_best_split(sums, counts, right);
    leaves.insert(leaves.begin() + static_cast<std::ptrdiff_t>(best) + 1, right);
  }
  for (const auto& leaf : leaves) {
    const double v = leaf.count > 0.0 ? leaf.sum / leaf.count : 0.0;
    for (int k = leaf.lo; k < leaf.hi; ++k) bin_values[k] = v;
  }
  return leaves;
}

double min_gain_for(std::span<const double> r) {
  double ss = 0.0;
  for (double v : r) ss += v * v;
  return 1e-12 * ss + 1e-300;
}

void check_targets(Index rows, std::span<const double> f) {
  if (static_cast<Index>(f.size()) != rows) {
    throw Error(ErrorCode::LengthMismatch, "teacher output count does not match row count");
  }
  for (double v : f) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteTarget, "teacher output non-finite");
  }
}

struct BinnedColumn {
  std::vector<double> edges;
  std::vector<std::uint16_t> bins;
};

BinnedColumn bin_column(const Matrix& x, Index j, int max_bins) {
  std::vector<double> col(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) col[static_cast<std::size_t>(i)] = x(i, j);
  BinnedColumn out;
  out.edges = quantile_edges(col, max_bins);
  out.bins = assign_bins(out.edges, col);
  return out;
}

}  // namespace

StepFunction fit_tree_1d(std::span<const double> x, std::span<const double> r, int max_leaves,
                         int bins) {
  if (x.size() != r.size()) throw Error(ErrorCode::LengthMismatch, "x and r lengths differ");
  if (x.empty()) throw Error(ErrorCode::EmptyDataset, "cannot fit a tree on no rows");
  if (max_leaves < 1 || bins < 1 || bins > 65535) {
    throw Error(ErrorCode::InvalidArgument, "tree needs max_leaves >= 1 and 1 <= bins <= 65535");
  }
  const auto edges = quantile_edges(x, bins);
  const int nb = static_cast<int>(edges.size());
  std::vector<double> sums(static_cast<std::size_t>(nb), 0.0);
  std::vector<double> counts(static_cast<std::size_t>(nb), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    const auto b = static_cast<std::size_t>(bin_of(edges, x[t]));
    sums[b] += r[t];
    counts[b] += 1.0;
  }
  std::vector<double> bin_values(static_cast<std::size_t>(nb));
  const auto leaves = fit_histogram_tree(sums.data(), counts.data(), nb, max_leaves,
                                         min_gain_for(r), bin_values.data());
  StepFunction out;
  for (const auto& leaf : leaves) {
    out.thresholds.push_back(edges[static_cast<std::size_t>(leaf.lo)]);
    out.values.push_back(bin_values[static_cast<std::size_t>(leaf.lo)]);
  }
  return out;
}

AdditiveModel fit_sat(const Matrix& x, std::span<const std::string> names,
                      std::span<const double> f, const SatConfig& cfg, Task task,
                      SatTrace* trace) {
  cfg.validate();
  check_targets(x.rows(), f);
  if (static_cast<Index>(names.size()) != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "name count does not match column count");
  }
  const Index n = x.rows();
  const Index p = x.cols();
  std::vector<BinnedColumn> columns;
  for (Index j = 0; j < p; ++j) columns.push_back(bin_column(x, j, cfg.max_bins));

  const auto bags = static_cast<std::size_t>(cfg.bags);
  std::vector<std::vector<std::vector<double>>> bag_values(bags);
  std::vector<std::vector<double>> bag_mse(bags);

  parallel_for(0, cfg.bags, [&](Index b0, Index b1) {
    for (Index b = b0; b < b1; ++b) {
      Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(b)));
      std::vector<Index> idx(static_cast<std::size_t>(n));
      for (auto& v : idx) v = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));

      std::vector<double> r(idx.size());
      double mean = 0.0;
      for (std::size_t t = 0; t < idx.size(); ++t) mean += f[static_cast<std::size_t>(idx[t])];
      mean /= static_cast<double>(n);
      for (std::size_t t = 0; t < idx.size(); ++t) r[t] = f[static_cast<std::size_t>(idx[t])] - mean;

      std::vector<std::vector<std::uint16_t>> local_bins(static_cast<std::size_t>(p));
      std::vector<std::vector<double>> counts(static_cast<std::size_t>(p));
      auto& values = bag_values[static_cast<std::size_t>(b)];
      values.resize(static_cast<std::size_t>(p));
      for (Index j = 0; j < p; ++j) {
        const auto& col = columns[static_cast<std::size_t>(j)];
        auto& lb = local_bins[static_cast<std::size_t>(j)];
        auto& cnt = counts[static_cast<std::size_t>(j)];
        lb.resize(idx.size());
        cnt.assign(col.edges.size(), 0.0);
        for (std::size_t t = 0; t < idx.size(); ++t) {
          lb[t] = col.bins[static_cast<std::size_t>(idx[t])];
          cnt[lb[t]] += 1.0;
        }
        values[static_cast<std::size_t>(j)].assign(col.edges.size(), 0.0);
      }

      std::vector<double> sums;
      std::vector<double> tree;
      auto& mse_trace = bag_mse[static_cast<std::size_t>(b)];
      const double min_gain = min_gain_for(r);
      for (int m = 0; m < cfg.rounds; ++m) {
        for (Index j = 0; j < p; ++j) {
          const auto& lb = local_bins[static_cast<std::size_t>(j)];
          const auto& cnt = counts[static_cast<std::size_t>(j)];
          const int nb = static_cast<int>(cnt.size());
          sums.assign(cnt.size(), 0.0);
          tree.resize(cnt.size());
          for (std::size_t t = 0; t < r.size(); ++t) sums[lb[t]] += r[t];
          fit_histogram_tree(sums.data(), cnt.data(), nb, cfg.max_leaves, min_gain, tree.data());
          auto& h = values[static_cast<std::size_t>(j)];
          for (int k = 0; k < nb; ++k) {
            tree[static_cast<std::size_t>(k)] *= cfg.learning_rate;
            h[static_cast<std::size_t>(k)] += tree[static_cast<std::size_t>(k)];
          }
          for (std::size_t t = 0; t < r.size(); ++t) r[t] -= tree[lb[t]];
        }
        double mse = 0.0;
        for (double v : r) mse += v * v;
        mse_trace.push_back(mse / static_cast<double>(r.size()));
      }
    }
  });

  std::vector<FeatureShape> shapes;
  std::vector<std::vector<FeatureShape>> per_bag(bags);
  for (Index j = 0; j < p; ++j) {
    std::vector<FeatureShape> across;
    for (std::size_t b = 0; b < bags; ++b) {
      across.emplace_back(names[static_cast<std::size_t>(j)],
                          columns[static_cast<std::size_t>(j)].edges,
                          bag_values[b][static_cast<std::size_t>(j)],
                          Interpolation::PiecewiseConstant);
    }
    shapes.push_back(average_shapes(across));
    for (std::size_t b = 0; b < bags; ++b) per_bag[b].push_back(std::move(across[b]));
  }
  double mean_f = 0.0;
  for (double v : f) mean_f += v;
  mean_f /= static_cast<double>(n);

  if (trace) {
    trace->bag_train_mse = std::move(bag_mse);
    trace->bag_shapes = std::move(per_bag);
  }
  AdditiveModel raw(mean_f, std::move(shapes), {}, task, "SAT");
  return center(raw, x, names);
}

AdditiveModel fit_sat(const Dataset& ds, std::span<const double> f, const SatConfig& cfg,
                      SatTrace* trace) {
  return fit_sat(ds.features(), ds.feature_names(), f, cfg, ds.task(), trace);
}

namespace {

// Rectangle of 2-D histogram cells [a0, a1) x [b0, b1).
struct Box {
  int a0, a1, b0, b1;
  double sum = 0.0;
  double count = 0.0;
  int axis = -1;  // 0: split along a, 1: along b
  int split = -1;
  double gain = 0.0;
};

class Histogram2d {
 public:
  Histogram2d(int na, int nb) : na_(na), nb_(nb) {}
  int na() const { return na_; }
  int nb() const { return nb_; }
  std::size_t at(int a, int b) const {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(nb_) + static_cast<std::size_t>(b);
  }

 private:
  int na_;
  int nb_;
};

void box_totals(const Histogram2d& h, const std::vector<double>& sums,
                const std::vector<double>& counts, Box& box) {
  box.sum = 0.0;
  box.count = 0.0;
  for (int a = box.a0; a < box.a1; ++a) {
    for (int b = box.b0; b < box.b1; ++b) {
      box.sum += sums[h.at(a, b)];
      box.count += counts[h.at(a, b)];
    }
  }
}

void best_box_split(const Histogram2d& h, const std::vector<double>& sums,
                    const std::vector<double>& counts, Box& box) {
  box.axis = -1;
  box.split = -1;
  box.gain = 0.0;
  if (box.count <= 0.0) return;
  const double parent = box.sum * box.sum / box.count;
  for (int axis = 0; axis < 2; ++axis) {
    const int lo = axis == 0 ? box.a0 : box.b0;
    const int hi = axis == 0 ? box.a1 : box.b1;
    double left_sum = 0.0;
    double left_count = 0.0;
    for (int s = lo + 1; s < hi; ++s) {
      // Add the slab at index s-1 along the split axis.
      if (axis == 0) {
        for (int b = box.b0; b < box.b1; ++b) {
          left_sum += sums[h.at(s - 1, b)];
          left_count += counts[h.at(s - 1, b)];
        }
      } else {
        for (int a = box.a0; a < box.a1; ++a) {
          left_sum += sums[h.at(a, s - 1)];
          left_count += counts[h.at(a, s - 1)];
        }
      }
      const double right_count = box.count - left_count;
      if (left_count <= 0.0) continue;
      if (right_count <= 0.0) break;
      const double right_sum = box.sum - left_sum;
      const double gain =
          left_sum * left_sum / left_count + right_sum * right_sum / right_count - parent;
      if (gain > box.gain) {
        box.gain = gain;
        box.axis = axis;
        box.split = s;
      }
    }
  }
}

void fit_box_tree(const Histogram2d& h, const std::vector<double>& sums,
                  const std::vector<double>& counts, int max_leaves, double min_gain,
                  std::vector<double>& cell_values) {
  std::vector<Box> boxes{Box{0, h.na(), 0, h.nb()}};
  box_totals(h, sums, counts, boxes[0]);
  best_box_split(h, sums, counts, boxes[0]);
  while (static_cast<int>(boxes.size()) < max_leaves) {
    std::size_t best = boxes.size();
    for (std::size_t l = 0; l < boxes.size(); ++l) {
      if (boxes[l].split >= 0 && boxes[l].gain > min_gain &&
          (best == boxes.size() || boxes[l].gain > boxes[best].gain)) {
        best = l;
      }
    }
    if (best == boxes.size()) break;
    Box left = boxes[best];
    Box right = boxes[best];
    if (left.axis == 0) {
      left.a1 = right.a0 = left.split;
    } else {
      left.b1 = right.b0 = left.split;
    }
    box_totals(h, sums, counts, left);
    box_totals(h, sums, counts, right);
    best_box_split(h, sums, counts, left);
    best_box_split(h, sums, counts, right);
    boxes[best] = left;
    boxes.push_back(right);
  }
  for (const auto& box : boxes) {
    const double v = box.count > 0.0 ? box.sum / box.count : 0.0;
    for (int a = box.a0; a < box.a1; ++a) {
      for (int b = box.b0; b < box.b1; ++b) cell_values[h.at(a, b)] = v;
    }
  }
}

Index pair_column(std::span<const std::string> names, const std::string& feature) {
  const auto it = std::find(names.begin(), names.end(), feature);
  if (it == names.end()) {
    throw Error(ErrorCode::UnknownPairFeature, "pair references unknown feature '" + feature + "'");
  }
  return static_cast<Index>(it - names.begin());
}

}  // namespace

AdditiveModel fit_sat_pairs(const Matrix& x, std::span<const std::string> names,
                            std::span<const double> f, const AdditiveModel& base,
                            const PairConfig& cfg) {
  cfg.validate();
  check_targets(x.rows(), f);
  if (static_cast<Index>(names.size()) != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "name count does not match column count");
  }
  std::vector<std::pair<Index, Index>> pairs;
  if (cfg.pairs.empty()) {
    for (Index a = 0; a < x.cols(); ++a) {
      for (Index b = a + 1; b < x.cols(); ++b) pairs.emplace_back(a, b);
    }
  } else {
    for (const auto& [a, b] : cfg.pairs) pairs.emplace_back(pair_column(names, a), pair_column(names, b));
  }

  const Vector base_pred = predict_additive(base, x, names);
  std::vector<double> r(f.size());
  for (std::size_t t = 0; t < f.size(); ++t) r[t] = f[t] - base_pred[static_cast<Index>(t)];
  const double min_gain = min_gain_for(r);

  struct PairState {
    BinnedColumn a, b;
    Histogram2d hist{0, 0};
    std::vector<std::size_t> cell;  // per row
    std::vector<double> counts;
    std::vector<double> values;
  };
  std::vector<PairState> states;
  for (const auto& [ia, ib] : pairs) {
    PairState s;
    s.a = bin_column(x, ia, cfg.bins_per_axis);
    s.b = bin_column(x, ib, cfg.bins_per_axis);
    s.hist = Histogram2d(static_cast<int>(s.a.edges.size()), static_cast<int>(s.b.edges.size()));
    const auto cells = s.a.edges.size() * s.b.edges.size();
    s.counts.assign(cells, 0.0);
    s.values.assign(cells, 0.0);
    s.cell.resize(r.size());
    for (std::size_t t = 0; t < r.size(); ++t) {
      s.cell[t] = s.hist.at(s.a.bins[t], s.b.bins[t]);
      s.counts[s.cell[t]] += 1.0;
    }
    states.push_back(std::move(s));
  }

  std::vector<double> sums;
  std::vector<double> tree;
  for (int m = 0; m < cfg.rounds; ++m) {
    for (auto& s : states) {
      sums.assign(s.counts.size(), 0.0);
      tree.assign(s.counts.size(), 0.0);
      for (std::size_t t = 0; t < r.size(); ++t) sums[s.cell[t]] += r[t];
      fit_box_tree(s.hist, sums, s.counts, cfg.max_leaves, min_gain, tree);
      for (std::size_t c = 0; c < tree.size(); ++c) {
        tree[c] *= cfg.learning_rate;
        s.values[c] += tree[c];
      }
      for (std::size_t t = 0; t < r.size(); ++t) r[t] -= tree[s.cell[t]];
    }
  }

  std::vector<PairShape> out = base.pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    auto& s = states[k];
    Eigen::MatrixXd grid(s.hist.na(), s.hist.nb());
    for (int a = 0; a < s.hist.na(); ++a) {
      for (int b = 0; b < s.hist.nb(); ++b) grid(a, b) = s.values[s.hist.at(a, b)];
    }
    out.emplace_back(std::make_pair(names[static_cast<std::size_t>(pairs[k].first)],
                                    names[static_cast<std::size_t>(pairs[k].second)]),
                     s.a.edges, s.b.edges, std::move(grid));
  }
  return base.with_pairs(std::move(out));
}

AdditiveModel fit_sat_pairs(const Dataset& ds, std::span<const double> f,
                            const AdditiveModel& base, const PairConfig& cfg) {
  return fit_sat_pairs(ds.features(), ds.feature_names(), f, base, cfg);
}

}  // namespace gax
