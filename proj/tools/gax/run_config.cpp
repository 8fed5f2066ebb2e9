#include "run_config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "gax/error.hpp"
#include "gax/serialization.hpp"

namespace gax::cli {

using json = nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw Error(ErrorCode::InvalidArgument, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "config is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
  if (!j.contains("format_version") || j.at("format_version") != kRunConfigVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                "config format_version must be " + std::to_string(kRunConfigVersion));
  }
  RunConfig cfg;
  try {
    reject_unknown(j, {"format_version", "seed", "threads", "out_dir", "data", "teacher", "sat",
                       "sas", "pairs", "shap", "pd"},
                   "config");
    read(j, "seed", cfg.seed);
    read(j, "threads", cfg.threads);
    read(j, "out_dir", cfg.out_dir);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      reject_unknown(d, {"source", "rows", "label", "task", "split"}, "data");
      read(d, "source", cfg.data);
      read(d, "rows", cfg.rows);
      read(d, "label", cfg.label);
      if (d.contains("task")) cfg.task = task_from_string(d.at("task").get<std::string>());
      if (d.contains("split")) {
        const auto s = d.at("split").get<std::vector<double>>();
        if (s.size() != 3) throw Error(ErrorCode::InvalidArgument, "data.split needs 3 fractions");
        cfg.split.train_fraction = s[0];
        cfg.split.valid_fraction = s[1];
        cfg.split.test_fraction = s[2];
      }
    }
    if (j.contains("teacher")) {
      const auto& t = j.at("teacher");
      reject_unknown(t, {"hidden", "epochs", "batch_size", "learning_rate", "patience",
                         "init_scale", "valid_fraction"},
                     "teacher");
      read(t, "hidden", cfg.teacher.hidden);
      read(t, "epochs", cfg.teacher.train.epochs);
      read(t, "batch_size", cfg.teacher.train.batch_size);
      read(t, "learning_rate", cfg.teacher.train.learning_rate);
      read(t, "patience", cfg.teacher.train.early_stop_patience);
      read(t, "init_scale", cfg.teacher.train.weight_init_scale);
      read(t, "valid_fraction", cfg.teacher.train.valid_fraction);
    }
    if (j.contains("sat")) {
      const auto& s = j.at("sat");
      reject_unknown(s, {"rounds", "learning_rate", "max_leaves", "bags", "max_bins"}, "sat");
      read(s, "rounds", cfg.sat.rounds);
      read(s, "learning_rate", cfg.sat.learning_rate);
      read(s, "max_leaves", cfg.sat.max_leaves);
      read(s, "bags", cfg.sat.bags);
      read(s, "max_bins", cfg.sat.max_bins);
    }
    if (j.contains("sas")) {
      const auto& s = j.at("sas");
      reject_unknown(s, {"knots", "lambda_grid", "cv_folds", "backfit_max_iters", "backfit_tol"},
                     "sas");
      read(s, "knots", cfg.sas.knots);
      read(s, "lambda_grid", cfg.sas.lambda_grid);
      read(s, "cv_folds", cfg.sas.cv_folds);
      read(s, "backfit_max_iters", cfg.sas.backfit_max_iters);
      read(s, "backfit_tol", cfg.sas.backfit_tol);
    }
    if (j.contains("pairs")) {
      const auto& p = j.at("pairs");
      reject_unknown(p, {"enabled", "pairs", "rounds", "learning_rate", "max_leaves",
                         "bins_per_axis"},
                     "pairs");
      read(p, "enabled", cfg.fit_pairs);
      read(p, "pairs", cfg.pairs.pairs);
      read(p, "rounds", cfg.pairs.rounds);
      read(p, "learning_rate", cfg.pairs.learning_rate);
      read(p, "max_leaves", cfg.pairs.max_leaves);
      read(p, "bins_per_axis", cfg.pairs.bins_per_axis);
    }
    if (j.contains("shap")) {
      const auto& s = j.at("shap");
      reject_unknown(s, {"mode", "background", "permutations", "rows"}, "shap");
      if (s.contains("mode")) cfg.shap.mode = shap_mode_from_string(s.at("mode").get<std::string>());
      read(s, "background", cfg.shap.background_size);
      read(s, "permutations", cfg.shap.permutations);
      read(s, "rows", cfg.shap_rows);
    }
    if (j.contains("pd")) {
      const auto& p = j.at("pd");
      reject_unknown(p, {"grid", "rows"}, "pd");
      read(p, "grid", cfg.pd_grid);
      read(p, "rows", cfg.pd_rows);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "bad config value: " + std::string(e.what()));
  }
  cfg.teacher.train.validate();
  cfg.sat.validate();
  cfg.sas.validate();
  cfg.pairs.validate();
  cfg.shap.validate();
  return cfg;
}

std::string config_echo(const RunConfig& cfg, const std::string& method) {
  json j;
  j["seed"] = cfg.seed;
  if (method == "SAT") {
    j["sat"] = {{"rounds", cfg.sat.rounds},       {"learning_rate", cfg.sat.learning_rate},
                {"max_leaves", cfg.sat.max_leaves}, {"bags", cfg.sat.bags},
                {"max_bins", cfg.sat.max_bins}};
    if (cfg.fit_pairs) {
      j["pairs"] = {{"pairs", cfg.pairs.pairs},
                    {"rounds", cfg.pairs.rounds},
                    {"learning_rate", cfg.pairs.learning_rate},
                    {"max_leaves", cfg.pairs.max_leaves},
                    {"bins_per_axis", cfg.pairs.bins_per_axis}};
    }
  } else if (method == "SAS") {
    j["sas"] = {{"knots", cfg.sas.knots},
                {"lambda_grid", cfg.sas.lambda_grid},
                {"cv_folds", cfg.sas.cv_folds},
                {"backfit_max_iters", cfg.sas.backfit_max_iters},
                {"backfit_tol", cfg.sas.backfit_tol}};
  } else if (method == "PD") {
    j["pd"] = {{"grid", cfg.pd_grid}, {"rows", cfg.pd_rows}};
  } else if (method == "gSHAP") {
    j["shap"] = {{"mode", std::string(to_string(cfg.shap.mode))},
                 {"background", cfg.shap.background_size},
                 {"permutations", cfg.shap.permutations},
                 {"rows", cfg.shap_rows}};
  }
  return j.dump();
}

}  // namespace gax::cli
