#include "gpk/linop.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "gpk/error.hpp"

namespace gpk {

namespace {

void check_sizes(std::size_t expected_in, std::size_t got_in, std::size_t expected_out,
                 std::size_t got_out, const char* what) {
  if (expected_in != got_in || expected_out != got_out) {
    throw DimensionError(std::string(what) + ": expected input " + std::to_string(expected_in) +
                         " / output " + std::to_string(expected_out) + ", got " +
                         std::to_string(got_in) + " / " + std::to_string(got_out));
  }
}

bool is_zero(std::span<const double> v) {
  for (double e : v) {
    if (e != 0.0) return false;
  }
  return true;
}

}  // namespace

Operator::Operator(std::size_t rows, std::size_t cols, Kernel apply, Kernel apply_transpose)
    : rows_(rows),
      cols_(cols),
      apply_(std::move(apply)),
      apply_transpose_(std::move(apply_transpose)) {
  if (!apply_ || !apply_transpose_) throw UsageError("operator kernels must be callable");
}

Operator Operator::dense(Eigen::MatrixXd matrix) {
  auto m = std::make_shared<const Eigen::MatrixXd>(std::move(matrix));
  const auto rows = static_cast<std::size_t>(m->rows());
  const auto cols = static_cast<std::size_t>(m->cols());
  using ConstMap = Eigen::Map<const Eigen::VectorXd>;
  using Map = Eigen::Map<Eigen::VectorXd>;
  auto fwd = [m](std::span<const double> x, std::span<double> y, double alpha, double beta) {
    ConstMap xm(x.data(), static_cast<Eigen::Index>(x.size()));
    Map ym(y.data(), static_cast<Eigen::Index>(y.size()));
    if (beta == 0.0) {
      ym.noalias() = alpha * (*m) * xm;
    } else {
      if (beta != 1.0) ym *= beta;
      ym.noalias() += alpha * (*m) * xm;
    }
  };
  auto adj = [m](std::span<const double> x, std::span<double> y, double alpha, double beta) {
    ConstMap xm(x.data(), static_cast<Eigen::Index>(x.size()));
    Map ym(y.data(), static_cast<Eigen::Index>(y.size()));
    if (beta == 0.0) {
      ym.noalias() = alpha * m->transpose() * xm;
    } else {
      if (beta != 1.0) ym *= beta;
      ym.noalias() += alpha * m->transpose() * xm;
    }
  };
  return Operator(rows, cols, std::move(fwd), std::move(adj));
}

Operator Operator::sparse(SparseMatrix matrix) {
  auto m = std::make_shared<const SparseMatrix>(std::move(matrix));
  const std::size_t rows = m->rows();
  const std::size_t cols = m->cols();
  return Operator(
      rows, cols,
      [m](std::span<const double> x, std::span<double> y, double alpha, double beta) {
        m->multiply(x, y, alpha, beta);
      },
      [m](std::span<const double> x, std::span<double> y, double alpha, double beta) {
        m->multiply_transpose(x, y, alpha, beta);
      });
}

void Operator::apply(std::span<const double> x, std::span<double> y, double alpha,
                     double beta) const {
  check_sizes(cols_, x.size(), rows_, y.size(), "Operator::apply");
  apply_(x, y, alpha, beta);
}

void Operator::apply_transpose(std::span<const double> x, std::span<double> y, double alpha,
                               double beta) const {
  check_sizes(rows_, x.size(), cols_, y.size(), "Operator::apply_transpose");
  apply_transpose_(x, y, alpha, beta);
}

Vector Operator::operator*(std::span<const double> x) const {
  Vector y(rows_);
  apply(x, y);
  return y;
}

Vector Operator::transpose_times(std::span<const double> x) const {
  Vector y(cols_);
  apply_transpose(x, y);
  return y;
}

Operator Operator::transposed() const { return Operator(cols_, rows_, apply_transpose_, apply_); }

Eigen::MatrixXd Operator::to_dense() const {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  Vector e(cols_, 0.0);
  Vector col(rows_);
  for (std::size_t j = 0; j < cols_; ++j) {
    e[j] = 1.0;
    apply(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    }
  }
  return d;
}

void PartitionedSystem::validate() const {
  const std::size_t m_ = A.rows();
  const std::size_t n_ = A.cols();
  if (B.rows() != n_ || B.cols() != m_) {
    throw DimensionError("B must be " + std::to_string(n_) + "x" + std::to_string(m_) +
                         " to match A (" + std::to_string(m_) + "x" + std::to_string(n_) + ")");
  }
  if (m_ == 0 || n_ == 0) throw DimensionError("empty operator blocks");
  if (b.size() != m_ || f.size() != m_) throw DimensionError("b and f must have length m");
  if (c.size() != n_ || g.size() != n_) throw DimensionError("c and g must have length n");
  if (is_zero(b) || is_zero(c)) throw UsageError("right-hand sides b and c must be nonzero");
  if (is_zero(f) || is_zero(g)) throw UsageError("shadow vectors f and g must be nonzero");
  if (!std::isfinite(lambda) || !std::isfinite(mu)) throw UsageError("lambda and mu must be finite");
}

PartitionedSystem PartitionedSystem::make(Operator A, Operator B, double lambda, double mu,
                                          Vector b, Vector c, std::optional<Vector> f,
                                          std::optional<Vector> g) {
  PartitionedSystem sys;
  sys.lambda = lambda;
  sys.mu = mu;
  sys.A = std::move(A);
  sys.B = std::move(B);
  sys.f = f ? std::move(*f) : b;
  sys.g = g ? std::move(*g) : c;
  sys.b = std::move(b);
  sys.c = std::move(c);
  sys.validate();
  return sys;
}

void apply_partitioned(const PartitionedSystem& sys, std::span<const double> x,
                       std::span<const double> y, std::span<double> out_x,
                       std::span<double> out_y) {
  if (x.size() != sys.m() || y.size() != sys.n() || out_x.size() != sys.m() ||
      out_y.size() != sys.n()) {
    throw DimensionError("apply_partitioned: vector lengths do not match (m, n)");
  }
  sys.A.apply(y, out_x);
  axpy(sys.lambda, x, out_x);
  sys.B.apply(x, out_y);
  axpy(sys.mu, y, out_y);
}

std::pair<Vector, Vector> apply_partitioned(const PartitionedSystem& sys,
                                            std::span<const double> x,
                                            std::span<const double> y) {
  Vector ox(sys.m());
  Vector oy(sys.n());
  apply_partitioned(sys, x, y, ox, oy);
  return {std::move(ox), std::move(oy)};
}

double residual_norm(const PartitionedSystem& sys, std::span<const double> x,
                     std::span<const double> y) {
  auto [kx, ky] = apply_partitioned(sys, x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < kx.size(); ++i) s += (sys.b[i] - kx[i]) * (sys.b[i] - kx[i]);
  for (std::size_t i = 0; i < ky.size(); ++i) s += (sys.c[i] - ky[i]) * (sys.c[i] - ky[i]);
  return std::sqrt(s);
}

Eigen::MatrixXd assemble_dense(const PartitionedSystem& sys, std::size_t max_order) {
  const std::size_t m = sys.m();
  const std::size_t n = sys.n();
  if (m + n > max_order) {
    throw SizeGuardError("dense assembly of order " + std::to_string(m + n) +
                         " exceeds the guard of " + std::to_string(max_order));
  }
  const auto M = static_cast<Eigen::Index>(m);
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(M + N, M + N);
  K.topLeftCorner(M, M).diagonal().setConstant(sys.lambda);
  K.bottomRightCorner(N, N).diagonal().setConstant(sys.mu);
  K.topRightCorner(M, N) = sys.A.to_dense();
  K.bottomLeftCorner(N, M) = sys.B.to_dense();
  return K;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  for (auto& v : x) v *= alpha;
}

}  // namespace gpk
