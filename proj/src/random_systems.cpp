#include "gpk/random_systems.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gpk {

namespace {

Vector gaussian(std::mt19937_64& rng, std::size_t len) {
  std::normal_distribution<double> dist;
  Vector v(len);
  for (double& e : v) e = dist(rng);
  return v;
}

Eigen::MatrixXd gaussian(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double s) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, j) = s * dist(rng);
  }
  return M;
}

void sparsify(std::mt19937_64& rng, Eigen::MatrixXd& M, double density) {
  std::uniform_real_distribution<double> u;
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      if (u(rng) >= density) M(i, j) = 0.0;
    }
  }
}

}  // namespace

Eigen::MatrixXd random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                              double scale) {
  std::mt19937_64 rng(seed);
  return gaussian(rng, rows, cols, scale);
}

PartitionedSystem random_system(const RandomSystemOptions& o) {
  std::mt19937_64 rng(o.seed);
  const double s = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>({o.m, o.n, 1})));
  Eigen::MatrixXd A = gaussian(rng, o.m, o.n, s);
  Eigen::MatrixXd B = o.symmetric_coupling ? Eigen::MatrixXd(A.transpose())
                                           : gaussian(rng, o.n, o.m, s);
  if (o.sparse && o.density < 1.0) {
    sparsify(rng, A, o.density);
    if (o.symmetric_coupling) {
      B = A.transpose();
    } else {
      sparsify(rng, B, o.density);
    }
  }
  Vector b = gaussian(rng, o.m);
  Vector c = gaussian(rng, o.n);
  std::optional<Vector> f, g;
  if (o.random_shadows) {
    f = gaussian(rng, o.m);
    g = gaussian(rng, o.n);
  }
  Operator opA = o.sparse ? Operator::sparse(SparseMatrix::from_dense(A)) : Operator::dense(A);
  Operator opB = o.sparse ? Operator::sparse(SparseMatrix::from_dense(B)) : Operator::dense(B);
  return PartitionedSystem::make(std::move(opA), std::move(opB), o.lambda, o.mu, std::move(b),
                                 std::move(c), std::move(f), std::move(g));
}

}  // namespace gpk
