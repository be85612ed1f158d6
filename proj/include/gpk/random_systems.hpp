#pragma once

#include <cstdint>

#include "gpk/linop.hpp"

namespace gpk {

struct RandomSystemOptions {
  std::size_t m = 12;
  std::size_t n = 12;
  double lambda = 1.0;
  double mu = -0.1;
  std::uint64_t seed = 7;
  bool symmetric_coupling = false;  // B = A^T
  bool sparse = false;              // CSR-backed operators
  double density = 1.0;             // kept entries when sparse
  bool random_shadows = false;      // f, g random instead of b, c
};

/// Gaussian A, B scaled by 1/sqrt(max(m, n)) and Gaussian b, c from a seeded
/// generator. Deterministic for a given seed on one standard library.
PartitionedSystem random_system(const RandomSystemOptions& opts);

/// Seeded Gaussian matrix with entries scaled by `scale`.
Eigen::MatrixXd random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                              double scale = 1.0);

}  // namespace gpk
