#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gpk {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed-row matrix. Duplicate coordinates are summed on assembly.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

  static SparseMatrix from_dense(const Eigen::MatrixXd& dense, double drop_tol = 0.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_index() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  // y <- alpha * M x + beta * y; beta == 0 ignores the previous contents of y.
  void multiply(std::span<const double> x, std::span<double> y, double alpha, double beta) const;
  // y <- alpha * M^T x + beta * y
  void multiply_transpose(std::span<const double> x, std::span<double> y, double alpha,
                          double beta) const;

  SparseMatrix transposed() const;
  std::vector<Triplet> triplets() const;
  Eigen::MatrixXd to_dense() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

}  // namespace gpk
