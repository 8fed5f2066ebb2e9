#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gax/baselines.hpp"
#include "gax/experiments.hpp"
#include "gax/sas.hpp"
#include "gax/sat.hpp"

namespace gax::cli {

// Declarative run description. Every field has a default; a JSON file given
// with --config overrides defaults, and explicit flags override both.
struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";

  // Dataset source: "f1", "f2" or a CSV path.
  std::string data = "f1";
  Index rows = 50000;
  std::string label = "label";
  Task task = Task::Regression;
  SplitSpec split;

  TeacherSpec teacher;
  SatConfig sat;
  SasConfig sas;
  PairConfig pairs;
  bool fit_pairs = false;

  ShapConfig shap;
  Index shap_rows = 1000;
  int pd_grid = 64;
  Index pd_rows = 2000;
};

inline constexpr int kRunConfigVersion = 1;

// SchemaVersionMismatch on a wrong format_version, InvalidArgument on
// unknown keys or bad values, MissingArtifact if the file is absent.
RunConfig load_run_config(const std::filesystem::path& path);

// Echo of the settings that shaped a model, stored next to it.
std::string config_echo(const RunConfig& cfg, const std::string& method);

}  // namespace gax::cli
