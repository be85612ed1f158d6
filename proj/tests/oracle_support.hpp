#pragma once

#include "gpk/oracles.hpp"
#include "gpk/random_systems.hpp"

namespace gpk::testing {

inline PartitionedSystem one_by_one() {
  Eigen::MatrixXd A(1, 1), B(1, 1);
  A << 2.0;
  B << 3.0;
  return PartitionedSystem::make(Operator::dense(A), Operator::dense(B), 1.0, 1.0, {1.0}, {1.0});
}

}  // namespace gpk::testing
