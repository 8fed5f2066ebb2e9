#include "gax/serialization.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gax/error.hpp"

namespace gax {

using json = nlohmann::ordered_json;

namespace {

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed JSON: ") + e.what());
  }
}

void check_header(const json& j, std::string_view kind) {
  if (!j.is_object() || !j.contains("format_version")) {
    throw Error(ErrorCode::SchemaVersionMismatch, "artifact has no format_version");
  }
  const int version = j.at("format_version").get<int>();
  if (version != kFormatVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                "artifact format_version " + std::to_string(version) + ", expected " +
                    std::to_string(kFormatVersion));
  }
  if (j.value("kind", std::string()) != kind) {
    throw Error(ErrorCode::InvalidArgument,
                "expected a '" + std::string(kind) + "' artifact, got '" +
                    j.value("kind", std::string("?")) + "'");
  }
}

// Wraps nlohmann type errors so callers only ever see gax::Error.
template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("bad artifact field: ") + e.what());
  }
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

std::string teacher_to_json(const TeacherNet& net) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "teacher";
  j["task"] = std::string(to_string(net.task()));
  j["layer_dims"] = net.layer_dims();
  j["input_mean"] = to_vec(net.input_mean());
  j["input_std"] = to_vec(net.input_std());
  j["output_offset"] = net.output_offset();
  j["output_scale"] = net.output_scale();
  json layers = json::array();
  for (const auto& layer : net.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weights.size()));
    for (Index r = 0; r < layer.weights.rows(); ++r) {
      for (Index c = 0; c < layer.weights.cols(); ++c) w.push_back(layer.weights(r, c));
    }
    layers.push_back({{"rows", layer.weights.rows()},
                      {"cols", layer.weights.cols()},
                      {"weights", w},
                      {"bias", to_vec(layer.bias)}});
  }
  j["layers"] = std::move(layers);
  return j.dump(1) + "\n";
}

TeacherNet teacher_from_json(std::string_view text) {
  const json j = parse(text);
  check_header(j, "teacher");
  return guarded([&] {
    std::vector<DenseLayer> layers;
    for (const auto& l : j.at("layers")) {
      const auto rows = l.at("rows").get<Index>();
      const auto cols = l.at("cols").get<Index>();
      const auto w = l.at("weights").get<std::vector<double>>();
      if (static_cast<Index>(w.size()) != rows * cols) {
        throw Error(ErrorCode::DimensionMismatch, "teacher layer weight count mismatch");
      }
      DenseLayer layer;
      layer.weights.resize(rows, cols);
      for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
          layer.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
        }
      }
      layer.bias = from_vec(l.at("bias").get<std::vector<double>>());
      layers.push_back(std::move(layer));
    }
    return TeacherNet(j.at("layer_dims").get<std::vector<Index>>(), std::move(layers),
                      from_vec(j.at("input_mean").get<std::vector<double>>()),
                      from_vec(j.at("input_std").get<std::vector<double>>()),
                      j.at("output_offset").get<double>(), j.at("output_scale").get<double>(),
                      task_from_string(j.at("task").get<std::string>()));
  });
}

std::string model_to_json(const AdditiveModel& m, std::string_view config_json) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "additive_model";
  j["method"] = m.method();
  j["task"] = std::string(to_string(m.task()));
  j["intercept"] = m.intercept();
  json shapes = json::array();
  for (const auto& s : m.shapes()) {
    shapes.push_back({{"feature", s.feature()},
                      {"mode", std::string(to_string(s.mode()))},
                      {"breakpoints", s.xs()},
                      {"values", s.ys()}});
  }
  j["shapes"] = std::move(shapes);
  json pairs = json::array();
  for (const auto& p : m.pairs()) {
    std::vector<double> values;
    for (Index r = 0; r < p.values().rows(); ++r) {
      for (Index c = 0; c < p.values().cols(); ++c) values.push_back(p.values()(r, c));
    }
    pairs.push_back({{"features", {p.features().first, p.features().second}},
                     {"grid_x", p.grid_x()},
                     {"grid_y", p.grid_y()},
                     {"values", values}});
  }
  j["pairs"] = std::move(pairs);
  if (!config_json.empty()) {
    json config = parse(config_json);
    if (!config.is_object()) throw Error(ErrorCode::InvalidArgument, "config echo must be an object");
    j["config"] = std::move(config);
  }
  return j.dump(1) + "\n";
}

AdditiveModel model_from_json(std::string_view text) {
  const json j = parse(text);
  check_header(j, "additive_model");
  return guarded([&] {
    std::vector<FeatureShape> shapes;
    for (const auto& s : j.at("shapes")) {
      shapes.emplace_back(s.at("feature").get<std::string>(),
                          s.at("breakpoints").get<std::vector<double>>(),
                          s.at("values").get<std::vector<double>>(),
                          interpolation_from_string(s.at("mode").get<std::string>()));
    }
    std::vector<PairShape> pairs;
    for (const auto& p : j.at("pairs")) {
      const auto gx = p.at("grid_x").get<std::vector<double>>();
      const auto gy = p.at("grid_y").get<std::vector<double>>();
      const auto v = p.at("values").get<std::vector<double>>();
      if (v.size() != gx.size() * gy.size()) {
        throw Error(ErrorCode::DimensionMismatch, "pair grid value count mismatch");
      }
      Eigen::MatrixXd values(static_cast<Index>(gx.size()), static_cast<Index>(gy.size()));
      for (Index r = 0; r < values.rows(); ++r) {
        for (Index c = 0; c < values.cols(); ++c) {
          values(r, c) = v[static_cast<std::size_t>(r * values.cols() + c)];
        }
      }
      const auto names = p.at("features").get<std::vector<std::string>>();
      if (names.size() != 2) throw Error(ErrorCode::InvalidArgument, "pair needs two features");
      pairs.emplace_back(std::make_pair(names[0], names[1]), gx, gy, std::move(values));
    }
    return AdditiveModel(j.at("intercept").get<double>(), std::move(shapes), std::move(pairs),
                         task_from_string(j.at("task").get<std::string>()),
                         j.value("method", std::string()));
  });
}

std::string read_text_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingArtifact, "missing file '" + path.string() + "'");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

void save_teacher(const TeacherNet& net, const std::filesystem::path& path) {
  write_text_file(path, teacher_to_json(net));
}

TeacherNet load_teacher(const std::filesystem::path& path) {
  return teacher_from_json(read_text_file(path));
}

void save_model(const AdditiveModel& m, const std::filesystem::path& path,
                std::string_view config_json) {
  write_text_file(path, model_to_json(m, config_json));
}

AdditiveModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

}  // namespace gax
