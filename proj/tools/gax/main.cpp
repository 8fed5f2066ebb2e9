#include <cstdio>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gax/baselines.hpp"
#include "gax/error.hpp"
#include "gax/eval.hpp"
#include "gax/experiments.hpp"
#include "gax/parallel.hpp"
#include "gax/random.hpp"
#include "gax/report.hpp"
#include "gax/sas.hpp"
#include "gax/sat.hpp"
#include "gax/serialization.hpp"
#include "gax/shape_export.hpp"
#include "gax/synthetic.hpp"
#include "gax/teacher.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace gax::cli {
namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Numeric: return 4;
  }
  return 3;
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "'");
  return dir / name;
}

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Task parse_task(const std::string& s) { return task_from_string(s); }

// CSV path or a synthetic function name.
Dataset load_data(const RunConfig& cfg, const std::string& source) {
  if (source == "f1" || source == "f2") {
    return generate_synthetic(synthetic_function_from_string(source), cfg.rows, cfg.seed).data;
  }
  if (!fs::exists(source)) throw Error(ErrorCode::MissingArtifact, "missing data file '" + source + "'");
  return load_csv(source, cfg.task, cfg.label);
}

Dataset load_features(const RunConfig& cfg, const std::string& source) {
  if (source == "f1" || source == "f2") return load_data(cfg, source);
  if (!fs::exists(source)) throw Error(ErrorCode::MissingArtifact, "missing data file '" + source + "'");
  // Labels are optional for explanation fitting.
  std::ifstream in(source);
  std::string header;
  std::getline(in, header);
  std::stringstream ss(header);
  std::string cell;
  bool has_label = false;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    if (cell == cfg.label) has_label = true;
  }
  return load_csv(source, cfg.task,
                  has_label ? std::optional<std::string>(cfg.label) : std::nullopt);
}

std::vector<Index> parse_hidden(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad hidden layer width '" + item + "'");
    }
  }
  return out;
}

std::string hidden_string(const std::vector<Index>& hidden) {
  std::string s;
  for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "," : "") + std::to_string(hidden[i]);
  return s;
}

// ---- synth ---------------------------------------------------------------

void cmd_synth(const RunConfig& cfg, const std::string& fn_name, int truth_points) {
  const auto fn = synthetic_function_from_string(fn_name);
  const auto data = generate_synthetic(fn, cfg.rows, cfg.seed);
  const auto name = std::string(to_string(fn));
  write_csv(data.data, out_path(cfg, name + ".csv"), cfg.label);
  std::vector<FeatureShape> truth;
  for (std::size_t j = 0; j < data.truth.feature_names.size(); ++j) {
    std::vector<double> xs, ys;
    for (int k = 0; k < truth_points; ++k) {
      const double x = -1.0 + 2.0 * k / (truth_points - 1);
      xs.push_back(x);
      ys.push_back(data.truth.centered(j, x));
    }
    truth.emplace_back(data.truth.feature_names[j], xs, ys, Interpolation::CubicSpline);
  }
  write_shapes_csv(truth, out_path(cfg, name + "_truth.csv"));
  std::printf("wrote %s.csv (%ld rows) and %s_truth.csv\n", name.c_str(),
              static_cast<long>(data.data.rows()), name.c_str());
}

// ---- load ----------------------------------------------------------------

void cmd_load(const RunConfig& cfg, const std::string& source) {
  const Dataset ds = load_data(cfg, source);
  SplitSpec spec = cfg.split;
  spec.seed = cfg.seed;
  const auto split = split_dataset(ds, spec);
  write_csv(split.train, out_path(cfg, "train.csv"), cfg.label);
  write_csv(split.valid, out_path(cfg, "valid.csv"), cfg.label);
  write_csv(split.test, out_path(cfg, "test.csv"), cfg.label);
  std::printf("%ld rows x %ld features -> train %ld, valid %ld, test %ld\n",
              static_cast<long>(ds.rows()), static_cast<long>(ds.cols()),
              static_cast<long>(split.train.rows()), static_cast<long>(split.valid.rows()),
              static_cast<long>(split.test.rows()));
}

// ---- train ---------------------------------------------------------------

void cmd_train(RunConfig cfg, const std::string& train_src, const std::string& valid_src,
               const std::string& out_name) {
  const Dataset train = load_data(cfg, train_src);
  cfg.teacher.train.seed = cfg.seed;
  const auto dims = architecture(train.cols(), cfg.teacher.hidden);
  TrainReport report;
  const TeacherNet net =
      valid_src.empty()
          ? train_teacher(train, dims, cfg.teacher.train, &report)
          : train_teacher(train, load_data(cfg, valid_src), dims, cfg.teacher.train, &report);
  save_teacher(net, out_path(cfg, out_name));
  std::printf("teacher %s: best epoch %d, validation loss %.6g -> %s\n",
              hidden_string(cfg.teacher.hidden).c_str(), report.best_epoch + 1,
              report.best_valid_loss, out_name.c_str());
}

// ---- distill -------------------------------------------------------------

void cmd_distill(RunConfig cfg, const std::string& teacher_path, const std::string& data_src,
                 const std::string& method) {
  if (method != "sat" && method != "sas" && method != "all") {
    throw Error(ErrorCode::InvalidArgument, "distill method must be sat, sas or all");
  }
  const TeacherNet net = load_teacher(teacher_path);
  const Dataset ds = load_features(cfg, data_src).without_labels();
  const auto f = to_std(net.predict(ds.features()));
  cfg.sat.seed = cfg.seed;
  cfg.sas.seed = cfg.seed;
  if (method == "sat" || method == "all") {
    AdditiveModel m = fit_sat(ds.features(), ds.feature_names(), f, cfg.sat, net.task());
    if (cfg.fit_pairs) m = fit_sat_pairs(ds, f, m, cfg.pairs);
    save_model(m, out_path(cfg, "sat.json"), config_echo(cfg, "SAT"));
    std::printf("SAT -> sat.json\n");
  }
  if (method == "sas" || method == "all") {
    const AdditiveModel m = fit_sas(ds.features(), ds.feature_names(), f, cfg.sas, net.task());
    save_model(m, out_path(cfg, "sas.json"), config_echo(cfg, "SAS"));
    std::printf("SAS -> sas.json\n");
  }
}

// ---- baseline ------------------------------------------------------------

void cmd_baseline(RunConfig cfg, const std::string& teacher_path, const std::string& data_src,
                  const std::string& method, bool write_attributions) {
  if (method != "pd" && method != "ggrad" && method != "gshap" && method != "all") {
    throw Error(ErrorCode::InvalidArgument, "baseline method must be pd, ggrad, gshap or all");
  }
  const TeacherNet net = load_teacher(teacher_path);
  Dataset ds = load_features(cfg, data_src).without_labels();
  ds = Dataset(ds.features(), ds.feature_names(), std::nullopt, net.task());
  if (method == "pd" || method == "all") {
    const Dataset rows = ds.with_features(sample_rows(ds.features(), static_cast<int>(cfg.pd_rows),
                                                      mix_seed(cfg.seed, 0xD0)));
    save_model(pd_model(net, rows, cfg.pd_grid), out_path(cfg, "pd.json"), config_echo(cfg, "PD"));
    std::printf("PD -> pd.json\n");
  }
  if (method == "ggrad" || method == "all") {
    const auto attrs = ggrad_attributions(net, ds);
    if (write_attributions) write_attributions_csv(attrs, out_path(cfg, "ggrad_attributions.csv"));
    save_model(globalize(attrs, ds, "gGRAD"), out_path(cfg, "ggrad.json"), config_echo(cfg, "gGRAD"));
    std::printf("gGRAD -> ggrad.json\n");
  }
  if (method == "gshap" || method == "all") {
    cfg.shap.seed = cfg.seed;
    const Dataset rows = ds.with_features(sample_rows(
        ds.features(), static_cast<int>(cfg.shap_rows), mix_seed(cfg.seed, 0x5AF)));
    const auto attrs = shap_attributions(net, rows, cfg.shap);
    if (write_attributions) write_attributions_csv(attrs, out_path(cfg, "gshap_attributions.csv"));
    save_model(globalize(attrs, rows, "gSHAP"), out_path(cfg, "gshap.json"),
               config_echo(cfg, "gSHAP"));
    std::printf("gSHAP -> gshap.json\n");
  }
}

// ---- eval ----------------------------------------------------------------

void cmd_eval(const RunConfig& cfg, const std::string& teacher_path, const std::string& data_src,
              const std::vector<std::string>& model_paths, const std::string& dataset_name,
              const std::string& teacher_name) {
  if (model_paths.empty()) throw Error(ErrorCode::InvalidArgument, "eval needs at least one --model");
  const TeacherNet net = load_teacher(teacher_path);
  Dataset ds = load_features(cfg, data_src);
  if (ds.task() != net.task()) ds = Dataset(ds.features(), ds.feature_names(),
                                            ds.has_labels() ? std::optional<Vector>(ds.labels())
                                                            : std::nullopt,
                                            net.task());
  const Vector f = net.predict(ds.features());
  std::vector<EvalReport> reports;
  for (const auto& path : model_paths) {
    const AdditiveModel m = load_model(path);
    EvalReport r = evaluate(m, f, ds);
    if (r.method.empty()) r.method = fs::path(path).stem().string();
    r.teacher = teacher_name.empty() ? fs::path(teacher_path).stem().string() : teacher_name;
    r.dataset = dataset_name.empty() ? fs::path(data_src).stem().string() : dataset_name;
    r.seed = cfg.seed;
    reports.push_back(std::move(r));
  }
  write_text_file(out_path(cfg, "report.json"), report_json(reports, net.task()));
  const std::string table = report_table(reports, net.task());
  write_text_file(out_path(cfg, "report.txt"), table);
  std::fputs(table.c_str(), stdout);
}

// ---- experiment ----------------------------------------------------------

json probe_json(const ProbeSpec& spec, std::span<const std::string> names) {
  json out = json::object();
  for (const char* kind : {"easy", "hard"}) {
    json arr = json::array();
    for (const auto& v : std::string(kind) == "easy" ? spec.easy : spec.hard) {
      arr.push_back({{"feature", names[static_cast<std::size_t>(v.feature)]}, {"value", v.value}});
    }
    out[kind] = std::move(arr);
  }
  out["samples"] = spec.samples;
  out["seed"] = spec.seed;
  return out;
}

void cmd_experiment_easyhard(RunConfig cfg, const std::string& fn_name, int top_k,
                             Index probe_samples, double easy_window) {
  const auto fn = synthetic_function_from_string(fn_name);
  const auto data = generate_synthetic(fn, cfg.rows, cfg.seed);
  SplitSpec spec = cfg.split;
  spec.seed = cfg.seed;
  const auto split = split_dataset(data.data, spec);
  cfg.teacher.train.seed = cfg.seed;
  const TeacherNet net = train_teacher(split.train, split.valid,
                                       architecture(split.train.cols(), cfg.teacher.hidden),
                                       cfg.teacher.train);
  const Vector test_pred = net.predict(split.test.features());
  const Dataset x = split.train.without_labels();
  cfg.sat.seed = cfg.seed;
  const AdditiveModel sat = fit_sat(x, to_std(net.predict(x.features())), cfg.sat);
  const auto probe = derive_probe_spec(sat, x.feature_names(), data.truth, top_k, probe_samples,
                                       mix_seed(cfg.seed, 0xE4), -0.95, 0.95, 191, easy_window);
  const auto result = probe_easy_hard(net, probe, synthetic_target(fn), x.cols());
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "easyhard";
  j["function"] = fn_name;
  j["teacher"] = hidden_string(cfg.teacher.hidden);
  j["seed"] = cfg.seed;
  j["teacher_test_rmse"] = rmse(test_pred, split.test.labels());
  j["probe"] = probe_json(probe, x.feature_names());
  j["rmse_easy"] = result.rmse_easy;
  j["rmse_all"] = result.rmse_all;
  j["rmse_hard"] = result.rmse_hard;
  write_json(out_path(cfg, "easyhard.json"), j);
  std::printf("easy %.4f  all %.4f  hard %.4f\n", result.rmse_easy, result.rmse_all,
              result.rmse_hard);
}

void cmd_experiment_bump(RunConfig cfg, const std::string& data_src, const BumpSpec& bump) {
  const Dataset ds = load_data(cfg, data_src);
  cfg.teacher.train.seed = cfg.seed;
  cfg.sat.seed = cfg.seed;
  const auto result = run_label_bump_experiment(ds, bump, cfg.teacher, cfg.sat);
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "label_bump";
  j["feature"] = bump.feature;
  j["range"] = {bump.lo, bump.hi};
  j["delta"] = bump.delta;
  j["seed"] = cfg.seed;
  j["detected_height"] = result.detected_height;
  j["outside_amplitude"] = result.outside_amplitude;
  write_json(out_path(cfg, "bump.json"), j);
  write_shapes_csv(std::span<const FeatureShape>(&result.shape_delta, 1),
                   out_path(cfg, "bump_shape_delta.csv"));
  std::printf("detected height %.4f (outside amplitude %.4f)\n", result.detected_height,
              result.outside_amplitude);
}

void cmd_experiment_discretize(RunConfig cfg, const std::string& data_src,
                               const std::string& feature, const std::vector<double>& cuts) {
  const Dataset ds = load_data(cfg, data_src);
  cfg.teacher.train.seed = cfg.seed;
  cfg.sat.seed = cfg.seed;
  const auto result = run_discretization_experiment(ds, feature, cuts, cfg.teacher, cfg.sat);
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "discretization";
  j["feature"] = feature;
  j["cuts"] = cuts;
  j["seed"] = cfg.seed;
  j["step_score"] = result.step_score;
  j["smooth_step_score"] = result.smooth_step_score;
  write_json(out_path(cfg, "discretize.json"), j);
  const std::vector<FeatureShape> shapes{
      FeatureShape(feature + ":staircase", result.staircase_shape.xs(),
                   result.staircase_shape.ys(), result.staircase_shape.mode()),
      FeatureShape(feature + ":smooth", result.smooth_shape.xs(), result.smooth_shape.ys(),
                   result.smooth_shape.mode())};
  write_shapes_csv(shapes, out_path(cfg, "discretize_shapes.csv"));
  std::printf("step score %.4f (smooth teacher %.4f)\n", result.step_score,
              result.smooth_step_score);
}

Direction parse_direction(const std::string& s) {
  if (s == "inc" || s == "increasing") return Direction::Increasing;
  if (s == "dec" || s == "decreasing") return Direction::Decreasing;
  throw Error(ErrorCode::InvalidArgument, "direction must be inc or dec, got '" + s + "'");
}

void cmd_experiment_monotone(const RunConfig& cfg, const std::string& model_path,
                             const std::vector<std::string>& expects, double tol,
                             const std::string& teacher_path, const std::string& data_src) {
  const AdditiveModel m = load_model(model_path);
  std::vector<std::pair<std::string, Direction>> expectations;
  for (const auto& e : expects) {
    const auto eq = e.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "expectation must look like feature=inc|dec");
    }
    expectations.emplace_back(e.substr(0, eq), parse_direction(e.substr(eq + 1)));
  }
  const auto audit = monotonicity_audit(m, expectations, tol);
  std::optional<TeacherNet> net;
  std::optional<Dataset> ds;
  if (!teacher_path.empty()) {
    if (data_src.empty()) throw Error(ErrorCode::InvalidArgument, "--teacher needs --data");
    net = load_teacher(teacher_path);
    ds = load_features(cfg, data_src);
  }
  json rows = json::array();
  for (const auto& r : audit) {
    json row;
    row["feature"] = r.feature;
    row["expected"] = r.expected == Direction::Increasing ? "increasing" : "decreasing";
    row["holds"] = r.check.holds;
    row["worst_violation"] = r.check.worst_violation;
    if (r.check.location >= 0) row["violation_at"] = r.check.location_x;
    if (net) {
      const auto probe = teacher_monotone_probe(*net, *ds, r.feature, r.expected);
      row["teacher_monotone_fraction"] = probe.fraction;
    }
    std::printf("%-12s %-10s %s (worst violation %.4g)\n", r.feature.c_str(),
                r.expected == Direction::Increasing ? "increasing" : "decreasing",
                r.check.holds ? "ok" : "VIOLATED", r.check.worst_violation);
    rows.push_back(std::move(row));
  }
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "monotonicity_audit";
  j["tolerance"] = tol;
  j["features"] = std::move(rows);
  write_json(out_path(cfg, "monotone.json"), j);
}

// ---- plot ----------------------------------------------------------------

void cmd_plot(const RunConfig& cfg, const std::vector<std::string>& model_paths) {
  if (model_paths.empty()) throw Error(ErrorCode::InvalidArgument, "plot needs at least one --model");
  std::vector<AdditiveModel> models;
  for (const auto& p : model_paths) models.push_back(load_model(p));
  std::vector<SvgSeries> series;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string label =
        models[i].method().empty() ? fs::path(model_paths[i]).stem().string() : models[i].method();
    series.push_back({label, &models[i]});
    write_shapes_csv(models[i], out_path(cfg, fs::path(model_paths[i]).stem().string() + "_shapes.csv"));
  }
  const auto written = render_shape_svgs(series, fs::path(cfg.out_dir));
  std::printf("wrote %zu SVG files\n", written.size());
}

std::optional<std::string> find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return std::nullopt;
}

int run(int argc, char** argv) {
  RunConfig cfg;
  if (const auto path = find_config_arg(argc, argv)) cfg = load_run_config(*path);

  CLI::App app{"Distill black-box models into additive feature shapes and compare explanations."};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  app.add_option("--out-dir", cfg.out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--rows", cfg.rows, "Rows for synthetic data")->capture_default_str();
  app.add_option("--label", cfg.label, "Label column name")->capture_default_str();
  std::string task_name(to_string(cfg.task));
  app.add_option("--task", task_name, "regression or classification")->capture_default_str();

  std::string hidden = hidden_string(cfg.teacher.hidden);
  bool patience_given = false;
  auto add_teacher_opts = [&](CLI::App* sub) {
    sub->add_option("--hidden", hidden, "Hidden layer widths, e.g. 128,128")->capture_default_str();
    sub->add_option("--epochs", cfg.teacher.train.epochs)->capture_default_str();
    sub->add_option("--batch-size", cfg.teacher.train.batch_size)->capture_default_str();
    sub->add_option("--lr", cfg.teacher.train.learning_rate)->capture_default_str();
    sub->add_option("--patience", cfg.teacher.train.early_stop_patience)
        ->capture_default_str()
        ->each([&](const std::string&) { patience_given = true; });
  };
  auto add_sat_opts = [&](CLI::App* sub) {
    sub->add_option("--rounds", cfg.sat.rounds)->capture_default_str();
    sub->add_option("--bags", cfg.sat.bags)->capture_default_str();
    sub->add_option("--max-leaves", cfg.sat.max_leaves)->capture_default_str();
    sub->add_option("--max-bins", cfg.sat.max_bins)->capture_default_str();
  };

  std::string fn_name = "f1";
  int truth_points = 201;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset and its true shapes");
  synth->add_option("--fn", fn_name, "f1 or f2")->capture_default_str()
      ->check(CLI::IsMember({"f1", "f2"}));
  synth->add_option("--n", cfg.rows, "Rows")->capture_default_str();
  synth->add_option("--truth-points", truth_points)->capture_default_str();

  std::string data_src = cfg.data;
  auto* load = app.add_subcommand("load", "Validate a CSV and split it into train/valid/test");
  load->add_option("--data", data_src, "CSV path, f1 or f2")->capture_default_str();

  std::string valid_src;
  std::string teacher_out = "teacher.json";
  auto* train = app.add_subcommand("train", "Train a ReLU teacher network");
  train->add_option("--data", data_src, "Training CSV (or f1/f2)")->capture_default_str();
  train->add_option("--valid", valid_src, "Validation CSV; default holds out a fraction");
  train->add_option("--out", teacher_out, "Teacher file name")->capture_default_str();
  add_teacher_opts(train);

  std::string teacher_path = "teacher.json";
  std::string method = "all";
  auto* distill = app.add_subcommand("distill", "Fit SAT and/or SAS students to a teacher");
  distill->add_option("--teacher", teacher_path)->capture_default_str();
  distill->add_option("--data", data_src)->capture_default_str();
  distill->add_option("--method", method, "sat, sas or all")->capture_default_str();
  distill->add_flag("--pairs", cfg.fit_pairs, "Add pairwise components to SAT");
  add_sat_opts(distill);
  distill->add_option("--knots", cfg.sas.knots)->capture_default_str();

  bool write_attrs = false;
  std::string shap_mode(to_string(cfg.shap.mode));
  auto* baseline = app.add_subcommand("baseline", "Build PD, gGRAD and gSHAP explanations");
  baseline->add_option("--teacher", teacher_path)->capture_default_str();
  baseline->add_option("--data", data_src)->capture_default_str();
  baseline->add_option("--method", method, "pd, ggrad, gshap or all")->capture_default_str();
  baseline->add_option("--shap-mode", shap_mode, "permutation or exact")->capture_default_str();
  baseline->add_option("--background", cfg.shap.background_size)->capture_default_str();
  baseline->add_option("--permutations", cfg.shap.permutations)->capture_default_str();
  baseline->add_option("--shap-rows", cfg.shap_rows)->capture_default_str();
  baseline->add_option("--pd-grid", cfg.pd_grid)->capture_default_str();
  baseline->add_option("--pd-rows", cfg.pd_rows)->capture_default_str();
  baseline->add_flag("--attributions", write_attrs, "Also write per-row attribution CSVs");

  std::vector<std::string> models;
  std::string dataset_name;
  std::string teacher_name;
  auto* eval = app.add_subcommand("eval", "Fidelity/accuracy report for explanation models");
  eval->add_option("--teacher", teacher_path)->capture_default_str();
  eval->add_option("--data", data_src)->capture_default_str();
  eval->add_option("--model", models, "Model JSON (repeatable)")->required();
  eval->add_option("--dataset-name", dataset_name);
  eval->add_option("--teacher-name", teacher_name);

  auto* experiment = app.add_subcommand("experiment", "Controlled experiments");
  experiment->require_subcommand(1);
  experiment->fallthrough();
  int top_k = 4;
  Index probe_samples = 20000;
  double easy_window = 0.0;
  auto* easyhard = experiment->add_subcommand("easyhard", "Teacher error on easy/hard probes");
  easyhard->add_option("--fn", fn_name)->capture_default_str()->check(CLI::IsMember({"f1", "f2"}));
  easyhard->add_option("--top-k", top_k)->capture_default_str();
  easyhard->add_option("--samples", probe_samples)->capture_default_str();
  easyhard->add_option("--easy-window", easy_window, "Half-width over which easy values must agree")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_teacher_opts(easyhard);
  add_sat_opts(easyhard);

  BumpSpec bump{"x5", 0.2, 0.6, 1.0};
  auto* bump_cmd = experiment->add_subcommand("bump", "Label-bump detection");
  bump_cmd->add_option("--data", data_src)->capture_default_str();
  bump_cmd->add_option("--feature", bump.feature)->capture_default_str();
  bump_cmd->add_option("--lo", bump.lo)->capture_default_str();
  bump_cmd->add_option("--hi", bump.hi)->capture_default_str();
  bump_cmd->add_option("--delta", bump.delta)->capture_default_str();
  add_teacher_opts(bump_cmd);
  add_sat_opts(bump_cmd);

  std::string disc_feature = "x1";
  std::vector<double> cuts{0.5};
  auto* disc = experiment->add_subcommand("discretize", "Discretized-feature staircase test");
  disc->add_option("--data", data_src)->capture_default_str();
  disc->add_option("--feature", disc_feature)->capture_default_str();
  disc->add_option("--cuts", cuts, "Cut points")->delimiter(',')->capture_default_str();
  add_teacher_opts(disc);
  add_sat_opts(disc);

  std::string model_path;
  std::vector<std::string> expects;
  double tol = 0.0;
  std::string mono_teacher;
  std::string mono_data;
  auto* mono = experiment->add_subcommand("monotone", "Monotonicity audit of a model");
  mono->add_option("--model", model_path)->required();
  mono->add_option("--expect", expects, "feature=inc|dec (repeatable)");
  mono->add_option("--tol", tol)->capture_default_str();
  mono->add_option("--teacher", mono_teacher, "Also probe this teacher");
  mono->add_option("--data", mono_data, "Rows for the teacher probe");

  auto* plot = app.add_subcommand("plot", "SVG shape plots and shape CSVs");
  plot->add_option("--model", models, "Model JSON (repeatable)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error[InvalidArgument]: %s\n", e.what());
    return 2;
  }

  cfg.task = parse_task(task_name);
  // A short run keeps the default patience from exceeding the epoch budget.
  if (!patience_given) {
    cfg.teacher.train.early_stop_patience =
        std::min(cfg.teacher.train.early_stop_patience, cfg.teacher.train.epochs);
  }
  cfg.teacher.hidden = parse_hidden(hidden);
  cfg.shap.mode = shap_mode_from_string(shap_mode);
  set_num_threads(cfg.threads);

  if (*synth) cmd_synth(cfg, fn_name, truth_points);
  else if (*load) cmd_load(cfg, data_src);
  else if (*train) cmd_train(cfg, data_src, valid_src, teacher_out);
  else if (*distill) cmd_distill(cfg, teacher_path, data_src, method);
  else if (*baseline) cmd_baseline(cfg, teacher_path, data_src, method, write_attrs);
  else if (*eval) cmd_eval(cfg, teacher_path, data_src, models, dataset_name, teacher_name);
  else if (*easyhard) cmd_experiment_easyhard(cfg, fn_name, top_k, probe_samples, easy_window);
  else if (*bump_cmd) cmd_experiment_bump(cfg, data_src, bump);
  else if (*disc) cmd_experiment_discretize(cfg, data_src, disc_feature, cuts);
  else if (*mono) cmd_experiment_monotone(cfg, model_path, expects, tol, mono_teacher, mono_data);
  else if (*plot) cmd_plot(cfg, models);
  return 0;
}

}  // namespace
}  // namespace gax::cli

int main(int argc, char** argv) {
  try {
    return gax::cli::run(argc, argv);
  } catch (const gax::Error& e) {
    std::fprintf(stderr, "error[%s]: %s\n", std::string(gax::error_code_name(e.code())).c_str(),
                 e.what());
    return gax::cli::exit_code(gax::error_category(e.code()));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[Internal]: %s\n", e.what());
    return 3;
  }
}
