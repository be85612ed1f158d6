#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpk/linop.hpp"
#include "gpk/solve_report.hpp"

namespace gpk {

/// Simultaneous orthogonal Hessenberg reduction: V'AU = H, U'BV = F with
/// orthonormal V (m x k), U (n x k) and nonnegative subdiagonals. Full bases
/// are kept; each new vector is orthogonalized twice with modified Gram-Schmidt.
class HessenbergProcess {
 public:
  HessenbergProcess(const Operator& A, const Operator& B, std::span<const double> b,
                    std::span<const double> c);

  /// Adds column k of H and F together with v_{k+1}, u_{k+1}. Returns false
  /// when h_{k+1,k} or f_{k+1,k} vanishes; the zero vector is stored then.
  bool step();

  std::size_t k() const { return k_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  const std::vector<Vector>& V() const { return V_; }
  const std::vector<Vector>& U() const { return U_; }
  /// (k + 1) x k leading blocks.
  Eigen::MatrixXd H() const { return H_.topLeftCorner(k_ + 1, k_); }
  Eigen::MatrixXd F() const { return F_.topLeftCorner(k_ + 1, k_); }
  double h(std::size_t i, std::size_t j) const { return H_(i - 1, j - 1); }
  double f(std::size_t i, std::size_t j) const { return F_(i - 1, j - 1); }
  bool broken() const { return broken_; }

 private:
  const Operator* A_;
  const Operator* B_;
  std::vector<Vector> V_, U_;
  Eigen::MatrixXd H_, F_;
  std::size_t k_ = 0;
  double beta_ = 0.0, gamma_ = 0.0;
  bool broken_ = false;
};

/// Minimum-residual GPMR with full bases. Stops on the projected residual,
/// which equals the true residual because the block basis is orthonormal.
SolveReport gpmr_solve(const PartitionedSystem& sys, const SolveOptions& opts = {});

/// GPMR(r): restarts from the current residual every opts.restart steps.
/// Iterations count inner steps across cycles.
SolveReport gpmr_restarted_solve(const PartitionedSystem& sys, const SolveOptions& opts = {});

/// Minimum-norm solution of the consistent system H z = rhs (H has full row
/// rank). Throws RankError when H is row-rank deficient or rhs is outside its range.
Eigen::VectorXd oracle_minnorm(const Eigen::MatrixXd& H, const Eigen::VectorXd& rhs);

/// Least-squares solution of min ||H z - rhs||. Throws RankError when H is
/// column-rank deficient.
Eigen::VectorXd oracle_lsq(const Eigen::MatrixXd& H, const Eigen::VectorXd& rhs);

/// Direct solve of the assembled system. Throws RankError when singular.
std::pair<Vector, Vector> oracle_dense_solve(const PartitionedSystem& sys);

/// Minimum residual over x in span{s_1..s_k}, y in span{t_1..t_k} with
/// s_1 = b, t_1 = c, s_{j+1} = A t_j, t_{j+1} = B s_j: the dense
/// characterization of the GPMR iterate.
std::pair<Vector, Vector> oracle_block_krylov_minres(const PartitionedSystem& sys, std::size_t k);

/// Dispatch by method name.
SolveReport solve(Method method, const PartitionedSystem& sys, const SolveOptions& opts = {});

}  // namespace gpk
