#include "gax/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "gax/error.hpp"
#include "gax/random.hpp"

namespace gax {

Dataset::Dataset(Matrix features, std::vector<std::string> feature_names,
                 std::optional<Vector> labels, Task task)
    : features_(std::move(features)),
      names_(std::move(feature_names)),
      labels_(std::move(labels)),
      task_(task) {
  if (features_.rows() < 1 || features_.cols() < 1) {
    throw Error(ErrorCode::EmptyDataset, "dataset needs at least one row and one column");
  }
  if (static_cast<Index>(names_.size()) != features_.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "feature name count does not match column count");
  }
  std::set<std::string_view> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::DuplicateFeature, "duplicate feature name '" + name + "'");
    }
  }
  if (!features_.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "feature matrix contains NaN or inf");
  }
  if (labels_) {
    if (labels_->size() != features_.rows()) {
      throw Error(ErrorCode::LengthMismatch, "label count does not match row count");
    }
    if (!labels_->allFinite()) {
      throw Error(ErrorCode::NonFiniteValue, "labels contain NaN or inf");
    }
    if (task_ == Task::BinaryClassification) {
      for (Index i = 0; i < labels_->size(); ++i) {
        const double y = (*labels_)[i];
        if (y != 0.0 && y != 1.0) {
          std::ostringstream msg;
          msg << "classification label " << y << " at row " << i << " is not 0 or 1";
          throw Error(ErrorCode::InvalidLabel, msg.str());
        }
      }
    }
  }
}

const Vector& Dataset::labels() const {
  if (!labels_) throw Error(ErrorCode::NoLabels, "dataset has no labels");
  return *labels_;
}

Index Dataset::feature_index(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw Error(ErrorCode::UnknownFeature, "unknown feature '" + std::string(name) + "'");
  }
  return static_cast<Index>(it - names_.begin());
}

std::vector<double> Dataset::column(Index j) const {
  std::vector<double> out(static_cast<std::size_t>(rows()));
  for (Index i = 0; i < rows(); ++i) out[static_cast<std::size_t>(i)] = features_(i, j);
  return out;
}

Dataset Dataset::with_labels(Vector labels) const {
  return Dataset(features_, names_, std::move(labels), task_);
}

Dataset Dataset::without_labels() const { return Dataset(features_, names_, std::nullopt, task_); }

Dataset Dataset::with_features(Matrix features) const {
  return Dataset(std::move(features), names_, labels_, task_);
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  Matrix x(static_cast<Index>(rows.size()), cols());
  std::optional<Vector> y;
  if (labels_) y = Vector(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Index r = rows[k];
    if (r < 0 || r >= this->rows()) {
      throw Error(ErrorCode::InvalidArgument, "subset row index out of range");
    }
    x.row(static_cast<Index>(k)) = features_.row(r);
    if (y) (*y)[static_cast<Index>(k)] = (*labels_)[r];
  }
  return Dataset(std::move(x), names_, std::move(y), task_);
}

DatasetSplit split_dataset(const Dataset& ds, const SplitSpec& spec) {
  const double fr[3] = {spec.train_fraction, spec.valid_fraction, spec.test_fraction};
  for (double f : fr) {
    if (!(f > 0.0 && f < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "split fractions must lie in (0, 1)");
    }
  }
  if (std::abs(fr[0] + fr[1] + fr[2] - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "split fractions must sum to 1");
  }
  const Index n = ds.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(spec.seed);
  rng.shuffle(std::span<Index>(order));

  const auto n_train = static_cast<Index>(std::llround(fr[0] * static_cast<double>(n)));
  const auto n_valid = static_cast<Index>(std::llround(fr[1] * static_cast<double>(n)));
  if (n_train < 1 || n_valid < 1 || n - n_train - n_valid < 1) {
    throw Error(ErrorCode::EmptyDataset, "split leaves an empty partition");
  }
  std::span<const Index> all(order);
  return DatasetSplit{
      ds.subset(all.subspan(0, static_cast<std::size_t>(n_train))),
      ds.subset(all.subspan(static_cast<std::size_t>(n_train), static_cast<std::size_t>(n_valid))),
      ds.subset(all.subspan(static_cast<std::size_t>(n_train + n_valid)))};
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_double(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc() || ptr != end || cell.empty()) return std::nullopt;
  return value;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, Task task,
                 const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");

  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      for (auto cell : split_commas(line)) header.emplace_back(cell);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorCode::EmptyFile, "'" + path.string() + "' is empty");

  std::optional<std::size_t> label_pos;
  if (label_column) {
    const auto it = std::find(header.begin(), header.end(), *label_column);
    if (it == header.end()) {
      throw Error(ErrorCode::MissingColumn,
                  "label column '" + *label_column + "' not in header of '" + path.string() + "'");
    }
    label_pos = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!label_pos || c != *label_pos) names.push_back(header[c]);
  }
  if (names.empty()) throw Error(ErrorCode::MissingColumn, "no feature columns");

  std::vector<double> values;
  std::vector<double> labels;
  Index row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "line " << line_no << " has " << cells.size() << " cells, header has "
          << header.size();
      throw Error(ErrorCode::MissingColumn, msg.str());
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v || !std::isfinite(*v)) {
        std::ostringstream msg;
        msg << "non-numeric cell '" << cells[c] << "' at row " << row + 1 << ", column "
            << c + 1 << " ('" << header[c] << "')";
        throw Error(ErrorCode::NonNumericCell, msg.str());
      }
      if (label_pos && c == *label_pos) {
        labels.push_back(*v);
      } else {
        values.push_back(*v);
      }
    }
    ++row;
  }
  if (row == 0) throw Error(ErrorCode::EmptyFile, "'" + path.string() + "' has no data rows");

  const auto p = static_cast<Index>(names.size());
  Matrix x = Eigen::Map<Matrix>(values.data(), row, p);
  std::optional<Vector> y;
  if (label_pos) y = Eigen::Map<Vector>(labels.data(), row);
  return Dataset(std::move(x), std::move(names), std::move(y), task);
}

void write_csv(const Dataset& ds, const std::filesystem::path& path,
               std::string_view label_column) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  const auto& names = ds.feature_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    out << (j ? "," : "") << names[j];
  }
  if (ds.has_labels()) out << ',' << label_column;
  out << '\n';
  char buf[32];
  const auto put = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, ptr - buf);
  };
  for (Index i = 0; i < ds.rows(); ++i) {
    for (Index j = 0; j < ds.cols(); ++j) {
      if (j) out << ',';
      put(ds.features()(i, j));
    }
    if (ds.has_labels()) {
      out << ',';
      put(ds.labels()[i]);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

Dataset bump_labels(const Dataset& ds, std::string_view feature, double lo, double hi,
                    double delta) {
  const Index j = ds.feature_index(feature);
  if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "bump range needs lo < hi");
  if (ds.task() != Task::Regression) {
    throw Error(ErrorCode::InvalidArgument, "label bump requires a regression dataset");
  }
  Vector y = ds.labels();
  for (Index i = 0; i < ds.rows(); ++i) {
    const double x = ds.features()(i, j);
    if (lo <= x && x <= hi) y[i] += delta;
  }
  return ds.with_labels(std::move(y));
}

int discretize_value(std::span<const double> cut_points, double x) {
  return static_cast<int>(std::upper_bound(cut_points.begin(), cut_points.end(), x) -
                          cut_points.begin());
}

Dataset discretize_feature(const Dataset& ds, std::string_view feature,
                           std::span<const double> cut_points) {
  const Index j = ds.feature_index(feature);
  if (cut_points.empty()) {
    throw Error(ErrorCode::UnsortedCuts, "discretization needs at least one cut point");
  }
  for (std::size_t k = 1; k < cut_points.size(); ++k) {
    if (!(cut_points[k - 1] < cut_points[k])) {
      throw Error(ErrorCode::UnsortedCuts, "cut points must be strictly increasing");
    }
  }
  Matrix x = ds.features();
  for (Index i = 0; i < x.rows(); ++i) {
    x(i, j) = discretize_value(cut_points, x(i, j));
  }
  return ds.with_features(std::move(x));
}

}  // namespace gax
