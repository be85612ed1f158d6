#pragma once

#include <array>
#include <cmath>
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

/// Column j of the banded upper-triangular factor R^: entries at rows
/// j-4 .. j, i.e. xi, zeta, omega, nu, rho.
using QRColumn = std::array<double, 5>;

/// Full record of a sliding QR factorization, kept only for verification.
struct QRTrace {
  std::vector<QRColumn> columns;          // column j at index j - 1
  std::vector<std::array<Givens, 4>> steps;  // step i at index i - 1
};

/// Coefficients entering QR step k: the two new columns 2k-1, 2k of H_{k+1,k}.
struct QRStepInput {
  double gamma = 0.0;       // gamma_k (0 at k = 1)
  double eta = 0.0;         // eta_k (0 at k = 1)
  double alpha = 0.0;       // alpha_k
  double theta = 0.0;       // theta_k
  double beta_next = 0.0;   // beta_{k+1}
  double delta_next = 0.0;  // delta_{k+1}
};

/// Sliding QR factorization of H_{k+1,k} and of the rotated right-hand side
/// Q^'(beta1 e1 + delta1 e2).
///
/// Each step receives the two newest columns, applies the rotation sets of
/// the two previous steps, and eliminates the four subdiagonal entries with
/// rotations on rows (2k-1, 2k+2), (2k-1, 2k), (2k, 2k+2), (2k, 2k+1).
class QRWindow {
 public:
  void init(double lambda, double mu, double beta1, double delta1, QRTrace* trace = nullptr);

  /// Applies step k = steps() + 1. Throws SingularWindowError when a new
  /// diagonal entry vanishes.
  void step(const QRStepInput& in);

  std::size_t steps() const { return steps_; }

  /// Newest columns 2k-1 and 2k.
  const QRColumn& column_odd() const { return col_odd_; }
  const QRColumn& column_even() const { return col_even_; }

  /// Rotations of step i in row form [c s; -s c]; identity outside the two newest steps.
  const std::array<Givens, 4>& rotations(std::size_t i) const;

  double varpi_odd() const { return varpi_odd_; }    // varpi_{2k-1}
  double varpi_even() const { return varpi_even_; }  // varpi_{2k}
  double varpi_bar_odd() const { return bar_odd_; }  // varpi-bar_{2k+1}
  double varpi_bar_even() const { return bar_even_; }
  /// sqrt(varpi-bar_{2k+1}^2 + varpi-bar_{2k+2}^2).
  double quasi_residual() const { return std::hypot(bar_odd_, bar_even_); }

 private:
  double lambda_ = 0.0;
  double mu_ = 0.0;
  std::size_t steps_ = 0;
  std::array<std::array<Givens, 4>, 2> rot_{};
  QRColumn col_odd_{}, col_even_{};
  double varpi_odd_ = 0.0, varpi_even_ = 0.0;
  double bar_odd_ = 0.0, bar_even_ = 0.0;
  QRTrace* trace_ = nullptr;
};

/// Step-by-step GPQMR. Working set as in GPBiLQ: nine length-m and nine
/// length-n vectors, all allocated in the constructor.
class GpqmrIteration {
 public:
  explicit GpqmrIteration(const PartitionedSystem& sys, ReductionHistory* history = nullptr,
                          QRTrace* trace = nullptr);

  bool started() const { return started_; }
  std::size_t k() const { return k_; }
  const BreakdownReport& breakdown() const { return breakdown_; }
  bool can_advance() const { return started_ && !breakdown_ && !released_; }

  /// Moves from step k to k + 1.
  void advance();

  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  void release_solution(Vector& x, Vector& y) {
    x = std::move(x_);
    y = std::move(y_);
    released_ = true;
  }

  /// Projected least-squares residual; the true residual is at most
  /// ||W_{k+1}|| times this. At k = 0 it is sqrt(beta1^2 + delta1^2).
  double quasi_residual() const { return qr_.quasi_residual(); }

  /// Direction pair f_j for j in 2k-3 .. 2k (zero for j < 1).
  std::span<const double> direction_x(std::ptrdiff_t j) const { return fx_[slot(j)]; }
  std::span<const double> direction_y(std::ptrdiff_t j) const { return fy_[slot(j)]; }

  const ReductionState& reduction() const { return red_; }
  const QRWindow& window() const { return qr_; }

  /// Dense R^_k (2k x 2k) from the trace.
  Eigen::MatrixXd assemble_R() const;
  /// Dense Q^_k' ((2k+2) x (2k+2)) from the trace.
  Eigen::MatrixXd assemble_QT() const;

 private:
  static std::size_t slot(std::ptrdiff_t j) { return static_cast<std::size_t>(((j % 4) + 4) % 4); }

  const PartitionedSystem* sys_;
  ReductionHistory* history_;
  QRTrace* trace_;
  ReductionState red_;
  QRWindow qr_;
  BreakdownReport breakdown_;
  bool started_ = false;
  bool released_ = false;
  std::size_t k_ = 0;

  Vector x_, y_;
  std::array<Vector, 4> fx_, fy_;  // f_j in slot j mod 4
};

/// GPQMR: stops on the quasi-residual, or on the true residual under the
/// explicit policy.
SolveReport gpqmr_solve(const PartitionedSystem& sys, const SolveOptions& opts = {});

}  // namespace gpk
