#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>

namespace gax {

// Feature matrices are row-major: one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Task { Regression, BinaryClassification };

std::string_view to_string(Task task);
Task task_from_string(std::string_view name);

}  // namespace gax
