#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace lpinfer {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Row-major copy used where tableau-style row access dominates.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Known (deterministic) vs estimated component of a parameter vector.
enum class Component { Known, Estimated };

using ComponentMask = std::vector<Component>;

inline std::size_t count_estimated(const ComponentMask& mask) {
  std::size_t k = 0;
  for (auto c : mask) k += (c == Component::Estimated);
  return k;
}

}  // namespace lpinfer
