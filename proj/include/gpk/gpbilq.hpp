#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpk/givens.hpp"
#include "gpk/linop.hpp"
#include "gpk/reduction.hpp"
#include "gpk/solve_report.hpp"

namespace gpk {

/// Relative guard on the trailing 2x2 determinant for the Galerkin transfer.
inline constexpr double kTransferTol = 1e-13;

/// Entries of one row r of a lower-banded factor: rho_r on the diagonal, then
/// nu_r, omega_r, zeta_r, xi_r at columns r-1 .. r-4.
struct BandRow {
  double rho = 0.0;
  double nu = 0.0;
  double omega = 0.0;
  double zeta = 0.0;
  double xi = 0.0;
};

/// The four rotations of one window step, in application order.
using RotationSet = std::array<Givens, 4>;

/// Full record of a sliding LQ factorization, kept only for verification.
struct LQTrace {
  std::vector<BandRow> rows;         // finalized rows 1, 2, ... (index r - 1)
  std::vector<RotationSet> steps;    // step i at index i - 1
};

/// Coefficients entering LQ step i.
struct LQStepInput {
  double gamma = 0.0;       // gamma_{i+1}
  double eta = 0.0;         // eta_{i+1}
  double alpha = 0.0;       // alpha_{i+1}
  double theta = 0.0;       // theta_{i+1}
  double beta_next = 0.0;   // beta_{i+2}
  double delta_next = 0.0;  // delta_{i+2}
};

/// Result of the last rotation that triangularizes the trailing 2x2 block.
struct TransferRotation {
  bool defined = false;
  Givens g;
  double rho_odd = 0.0;  // rho..{2k-1}
  double nu_even = 0.0;  // nu..{2k}
  double rho_even = 0.0; // rho..{2k}
};

/// Sliding LQ factorization of the projected block-tridiagonal matrix H_k.
/// Finalized band rows live in an 8-row ring; only the two newest rotation
/// sets are kept.
class LQWindow {
 public:
  void init(double lambda, double mu, double alpha1, double theta1, double beta2,
            double delta2, LQTrace* trace = nullptr);

  /// Applies step i = steps() + 1. Throws SingularWindowError when a
  /// finalized diagonal entry vanishes.
  void step(const LQStepInput& in);

  std::size_t steps() const { return steps_; }

  /// Row r of the band; valid for the eight newest rows.
  const BandRow& row(std::size_t r) const { return ring_[(r - 1) % 8]; }

  /// Rotations of step i; valid for i = steps() and steps() - 1. Identity for i < 1.
  const RotationSet& rotations(std::size_t i) const;

  TransferRotation transfer() const;

  // Provisional entries after `steps()` steps (k = steps() + 1):
  // rho_bar_{2k-1}, alpha_bar_k, nu_bar_{2k}, rho_bar_{2k}, omega_bar_{2k+1},
  // nu_bar_{2k+1}, zeta_bar_{2k+2}.
  double rho_bar_odd = 0.0;
  double alpha_bar = 0.0;
  double nu_bar_even = 0.0;
  double rho_bar_even = 0.0;
  double omega_bar = 0.0;
  double nu_bar_odd = 0.0;
  double zeta_bar = 0.0;

 private:
  BandRow& mut_row(std::size_t r) { return ring_[(r - 1) % 8]; }

  double lambda_ = 0.0;
  double mu_ = 0.0;
  std::size_t steps_ = 0;
  std::array<BandRow, 8> ring_{};
  std::array<RotationSet, 2> rot_{};
  LQTrace* trace_ = nullptr;
};

/// Residual quantities of the GPBiLQ and GPBiCG iterates at step k.
struct BiLQResidualEstimate {
  double theta = 0.0;  // vartheta_k
  double rho = 0.0;    // varrho_k
  double chi = 0.0;
  double sigma = 0.0;
  double chi_tilde = kNaN;
  double sigma_tilde = kNaN;
  double est_norm_L = 0.0;
  double est_norm_C = kNaN;  // NaN when the Galerkin iterate does not exist
};

/// Step-by-step GPBiLQ with the GPBiCG transfer.
///
/// The working set is nine length-m and nine length-n vectors: the reduction
/// window (p, q, u, v pairs), the iterate and four direction columns. All of
/// it is allocated in the constructor.
class GpbilqIteration {
 public:
  explicit GpbilqIteration(const PartitionedSystem& sys, ReductionHistory* history = nullptr,
                           LQTrace* trace = nullptr);

  /// False when the reduction could not even start (f'b or c'g vanishes).
  bool started() const { return started_; }
  std::size_t k() const { return k_; }
  const BreakdownReport& breakdown() const { return breakdown_; }
  bool can_advance() const { return started_ && !breakdown_ && !consumed_; }

  /// Moves from step k to k + 1.
  void advance();

  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }

  bool transfer_defined() const { return transfer_.defined; }
  const TransferRotation& transfer() const { return transfer_; }
  double varpi_tilde_odd() const { return wt_odd_; }
  double varpi_tilde_even() const { return wt_even_; }

  /// varpi_j of the forward substitution, for the eight newest j; 0 for j < 1.
  double varpi(std::ptrdiff_t j) const;

  /// Writes the GPBiCG iterate. Requires transfer_defined().
  void bicg_iterate(std::span<double> x, std::span<double> y) const;
  /// Overwrites the GPBiLQ iterate with the GPBiCG iterate; ends the iteration.
  void form_bicg_in_place();
  /// Moves the current iterate out; the iteration cannot advance afterwards.
  void release_solution(Vector& x, Vector& y) {
    x = std::move(x_);
    y = std::move(y_);
    consumed_ = true;
  }

  BiLQResidualEstimate estimate() const;

  /// Direction columns after step k: 0, 1 -> f_{2k-3}, f_{2k-2};
  /// 2, 3 -> f~_{2k-1}, f~_{2k}. At k = 1 only 2, 3 are meaningful.
  std::span<const double> direction_x(int which) const;
  std::span<const double> direction_y(int which) const;

  const ReductionState& reduction() const { return red_; }
  const LQWindow& window() const { return lq_; }

  /// Dense L~_k from the trace (requires a trace).
  Eigen::MatrixXd assemble_L_tilde() const;
  /// Dense G_k, or Q~_k^T = G_k G~ when `with_transfer` (requires a trace).
  Eigen::MatrixXd assemble_G(bool with_transfer) const;

 private:
  void substitute();
  void compute_transfer();
  std::size_t slot(int which) const { return (base_ + static_cast<std::size_t>(which) + 2) % 4; }

  const PartitionedSystem* sys_;
  ReductionHistory* history_;
  LQTrace* trace_;
  ReductionState red_;
  LQWindow lq_;
  BreakdownReport breakdown_;
  bool started_ = false;
  bool consumed_ = false;
  std::size_t k_ = 0;
  double r0_ = 0.0;

  // alpha_k, theta_k, beta_k, delta_k, gamma_k, eta_k and beta_{k+1}, delta_{k+1}
  double alpha_ = 0.0, theta_ = 0.0;
  double beta_ = 0.0, delta_ = 0.0, gamma_ = 0.0, eta_ = 0.0;
  double beta_next_ = 0.0, delta_next_ = 0.0;

  std::array<double, 8> varpi_{};
  TransferRotation transfer_;
  double wt_odd_ = 0.0;
  double wt_even_ = 0.0;

  Vector x_, y_;
  std::array<Vector, 4> fx_, fy_;
  std::size_t base_ = 0;  // slots base, base+1 hold f~_{2k-1}, f~_{2k}
};

/// GPBiLQ: stops on the residual of the minimum-norm iterate.
SolveReport gpbilq_solve(const PartitionedSystem& sys, const SolveOptions& opts = {});

/// GPBiCG through the GPBiLQ recurrences: stops on the Galerkin residual.
SolveReport gpbicg_solve(const PartitionedSystem& sys, const SolveOptions& opts = {});

}  // namespace gpk
