#include "gax/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

namespace gax {

MeanStderr summarize(std::span<const double> values) {
  MeanStderr out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(out.n);
  if (out.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / static_cast<double>(out.n - 1)) / std::sqrt(static_cast<double>(out.n));
  }
  return out;
}

namespace {

struct Cell {
  std::vector<double> fidelity;
  std::vector<double> accuracy;
  std::vector<std::uint64_t> seeds;
  Index n_eval = 0;
};

struct Grid {
  std::vector<std::string> methods;
  std::vector<std::string> datasets;
  std::map<std::pair<std::string, std::string>, Cell> cells;
};

Grid group(std::span<const EvalReport> reports) {
  Grid g;
  for (const auto& r : reports) {
    if (std::find(g.methods.begin(), g.methods.end(), r.method) == g.methods.end()) {
      g.methods.push_back(r.method);
    }
    if (std::find(g.datasets.begin(), g.datasets.end(), r.dataset) == g.datasets.end()) {
      g.datasets.push_back(r.dataset);
    }
    auto& c = g.cells[{r.method, r.dataset}];
    c.fidelity.push_back(r.fidelity_rmse);
    if (r.accuracy) c.accuracy.push_back(*r.accuracy);
    c.seeds.push_back(r.seed);
    c.n_eval = r.n_eval;
  }
  return g;
}

std::string format_cell(const std::vector<double>& values) {
  if (values.empty()) return "-";
  const auto s = summarize(values);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f ± %.3f", s.mean, s.stderr_);
  return buf;
}

}  // namespace

std::string report_json(std::span<const EvalReport> reports, Task task) {
  const Grid g = group(reports);
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  const std::string metric = task == Task::Regression ? "rmse" : "auroc";
  for (const auto& method : g.methods) {
    for (const auto& dataset : g.datasets) {
      const auto it = g.cells.find({method, dataset});
      if (it == g.cells.end()) continue;
      const Cell& c = it->second;
      const auto fid = summarize(c.fidelity);
      nlohmann::ordered_json j;
      j["method"] = method;
      j["dataset"] = dataset;
      j["seeds"] = c.seeds;
      j["n_eval"] = c.n_eval;
      j["fidelity_rmse"] = {{"mean", fid.mean}, {"stderr", fid.stderr_}, {"values", c.fidelity}};
      if (!c.accuracy.empty()) {
        const auto acc = summarize(c.accuracy);
        j["accuracy"] = {{"metric", metric}, {"mean", acc.mean}, {"stderr", acc.stderr_},
                         {"values", c.accuracy}};
      } else {
        j["accuracy"] = nullptr;
      }
      cells.push_back(std::move(j));
    }
  }
  nlohmann::ordered_json root;
  root["format_version"] = 1;
  root["kind"] = "eval_report";
  root["task"] = std::string(to_string(task));
  std::vector<std::string> teachers;
  for (const auto& r : reports) {
    if (std::find(teachers.begin(), teachers.end(), r.teacher) == teachers.end()) {
      teachers.push_back(r.teacher);
    }
  }
  root["teachers"] = teachers;
  root["cells"] = std::move(cells);
  return root.dump(2) + "\n";
}

std::string report_table(std::span<const EvalReport> reports, Task task) {
  const Grid g = group(reports);
  std::size_t name_w = 8;
  for (const auto& m : g.methods) name_w = std::max(name_w, m.size());
  const std::size_t col_w = 20;
  auto pad = [](std::string s, std::size_t w) {
    // Count code points so the "±" sign does not skew alignment.
    std::size_t len = 0;
    for (unsigned char ch : s) len += (ch & 0xC0) != 0x80;
    if (len < w) s.append(w - len, ' ');
    return s;
  };
  std::string out;
  auto end_line = [&] {
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
  };
  auto block = [&](const std::string& title, bool accuracy) {
    out += title + "\n";
    out += pad("method", name_w + 2);
    for (const auto& d : g.datasets) out += pad(d, col_w);
    end_line();
    for (const auto& m : g.methods) {
      out += pad(m, name_w + 2);
      for (const auto& d : g.datasets) {
        const auto it = g.cells.find({m, d});
        const std::string cell =
            it == g.cells.end() ? "-" : format_cell(accuracy ? it->second.accuracy : it->second.fidelity);
        out += pad(cell, col_w);
      }
      end_line();
    }
  };
  block(std::string("Accuracy (") + (task == Task::Regression ? "RMSE" : "AUROC %") + ")", true);
  out += "\n";
  block("Fidelity (RMSE to teacher)", false);
  return out;
}

}  // namespace gax
