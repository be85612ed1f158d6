#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpk/sparse.hpp"

namespace gpk {

using Vector = std::vector<double>;

/// Largest order m + n for which a partitioned system may be assembled densely.
inline constexpr std::size_t kDenseGuard = 2000;

/// Matrix-free linear map with its transpose.
///
/// Both kernels follow gemv semantics, y <- alpha * op(x) + beta * y, so the
/// solvers can fold a recurrence subtraction into the product and keep their
/// working set fixed. With beta == 0 the previous contents of y are ignored.
class Operator {
 public:
  using Kernel =
      std::function<void(std::span<const double> x, std::span<double> y, double alpha, double beta)>;

  Operator() = default;
  Operator(std::size_t rows, std::size_t cols, Kernel apply, Kernel apply_transpose);

  static Operator dense(Eigen::MatrixXd matrix);
  static Operator sparse(SparseMatrix matrix);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void apply(std::span<const double> x, std::span<double> y, double alpha = 1.0,
             double beta = 0.0) const;
  void apply_transpose(std::span<const double> x, std::span<double> y, double alpha = 1.0,
                       double beta = 0.0) const;

  Vector operator*(std::span<const double> x) const;
  Vector transpose_times(std::span<const double> x) const;

  /// The adjoint as an operator of its own; shares the kernels.
  Operator transposed() const;

  /// Explicit matrix built column by column from unit vectors.
  Eigen::MatrixXd to_dense() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Kernel apply_;
  Kernel apply_transpose_;
};

/// The system [lambda I, A; B, mu I] [x; y] = [b; c] with shadow vectors f, g
/// for the biorthogonal reduction.
struct PartitionedSystem {
  double lambda = 1.0;
  double mu = 1.0;
  Operator A;  // m x n
  Operator B;  // n x m
  Vector b;
  Vector c;
  Vector f;
  Vector g;

  std::size_t m() const { return A.rows(); }
  std::size_t n() const { return A.cols(); }

  /// Checks dimensions and that b, c, f, g are nonzero. Throws UsageError.
  void validate() const;

  /// Builds and validates a system. Shadow vectors default to f = b, g = c.
  static PartitionedSystem make(Operator A, Operator B, double lambda, double mu, Vector b,
                                Vector c, std::optional<Vector> f = std::nullopt,
                                std::optional<Vector> g = std::nullopt);
};

/// (lambda x + A y, B x + mu y) written into out_x, out_y.
void apply_partitioned(const PartitionedSystem& sys, std::span<const double> x,
                       std::span<const double> y, std::span<double> out_x, std::span<double> out_y);

std::pair<Vector, Vector> apply_partitioned(const PartitionedSystem& sys, std::span<const double> x,
                                            std::span<const double> y);

/// Euclidean norm of [b; c] - K [x; y].
double residual_norm(const PartitionedSystem& sys, std::span<const double> x,
                     std::span<const double> y);

/// Explicit [lambda I, A; B, mu I]. Throws SizeGuardError when m + n > max_order.
Eigen::MatrixXd assemble_dense(const PartitionedSystem& sys, std::size_t max_order = kDenseGuard);

// Small BLAS-1 helpers shared by the solvers.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);

}  // namespace gpk
