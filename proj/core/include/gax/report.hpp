#pragma once

#include <span>
#include <string>
#include <vector>

#include "gax/eval.hpp"

namespace gax {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample std / sqrt(n); 0 for a single value
  std::size_t n = 0;
};

MeanStderr summarize(std::span<const double> values);

// Reports are grouped by (method, dataset) across seeds. Methods and
// datasets keep their first-seen order.
std::string report_json(std::span<const EvalReport> reports, Task task);

// Methods as rows, datasets as columns; an accuracy block followed by a
// fidelity block, each cell "mean ± stderr".
std::string report_table(std::span<const EvalReport> reports, Task task);

}  // namespace gax
