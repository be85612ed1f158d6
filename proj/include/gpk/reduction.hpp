#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gpk/linop.hpp"

namespace gpk {

/// Relative threshold on |p~'q~| and |u~'v~| below which the reduction stops.
inline constexpr double kBreakdownTol = 1e-14;
/// A broken pair whose primal vector (q~ or u~) is this small relative to its
/// unreduced norm counts as an invariant subspace (lucky termination).
inline constexpr double kLuckyTol = 1e-13;

enum class BreakdownKind { none, p_q, u_v };

struct BreakdownReport {
  BreakdownKind kind = BreakdownKind::none;
  bool lucky = false;
  double magnitude = 0.0;     // |p~'q~| or |u~'v~| that triggered the report
  std::size_t iteration = 0;  // index of the vectors that could not be scaled

  explicit operator bool() const { return kind != BreakdownKind::none; }
};

const char* to_string(BreakdownKind kind);

/// Two-term window of the biorthogonal reduction. Between steps, *_cur hold
/// p_k, q_k, u_k, v_k and *_prev hold the vectors of step k - 1.
struct ReductionState {
  std::size_t k = 0;
  Vector p_prev, p_cur, q_prev, q_cur;  // length m
  Vector u_prev, u_cur, v_prev, v_cur;  // length n
  double alpha = 0.0;  // alpha_{k-1}, the last diagonal entry produced
  double theta = 0.0;
  double beta = 0.0;  // beta_k, gamma_k, delta_k, eta_k
  double gamma = 0.0;
  double delta = 0.0;
  double eta = 0.0;
  double beta1 = 0.0;
  double delta1 = 0.0;
  double gamma1 = 0.0;
  double eta1 = 0.0;
};

/// Coefficients produced by one step: alpha_k, theta_k and the scaling
/// factors of the (k+1)-th vectors.
struct StepCoefficients {
  double alpha = 0.0;
  double theta = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double eta = 0.0;
};

struct StepOutcome {
  StepCoefficients coeffs;
  BreakdownReport breakdown;
};

/// Coefficient sequences, 1-based in the math and stored 0-based:
/// alpha[i-1] = alpha_i. beta, gamma, delta, eta start at index 1.
struct CoefficientSequence {
  std::vector<double> alpha, theta, beta, gamma, delta, eta;

  std::size_t steps() const { return alpha.size(); }
};

/// Opt-in record of every basis vector and coefficient, used by the oracles.
class ReductionHistory {
 public:
  void record_init(const ReductionState& s);
  void record_step(const ReductionState& s, const StepCoefficients& c);

  std::size_t steps() const { return coeffs_.steps(); }
  const CoefficientSequence& coefficients() const { return coeffs_; }

  // Basis matrices with the first `cols` columns.
  Eigen::MatrixXd P(std::size_t cols) const;
  Eigen::MatrixXd Q(std::size_t cols) const;
  Eigen::MatrixXd U(std::size_t cols) const;
  Eigen::MatrixXd V(std::size_t cols) const;

  /// S_{rows,cols}: alpha on the diagonal, beta below, gamma above.
  Eigen::MatrixXd S(std::size_t rows, std::size_t cols) const;
  /// T_{rows,cols}: theta on the diagonal, delta below, eta above.
  Eigen::MatrixXd T(std::size_t rows, std::size_t cols) const;

  /// W_k = blkdiag(Q_k, U_k) with interleaved columns (q_1,0), (0,u_1), ...
  Eigen::MatrixXd W(std::size_t k) const;

 private:
  CoefficientSequence coeffs_;
  std::vector<Vector> p_, q_, u_, v_;
};

/// Scales f, b, c, g into p_1, q_1, u_1, v_1. Reports a breakdown when f'b or
/// c'g vanishes.
std::variant<ReductionState, BreakdownReport> reduction_init(const PartitionedSystem& sys,
                                                             ReductionHistory* history = nullptr);

/// One step of the reduction: four operator products, in place.
///
/// On breakdown the (k+1)-th vectors are still normalized by their norms so
/// that the relations through step k stay usable, and the report is set.
StepOutcome reduction_step(ReductionState& state, const PartitionedSystem& sys,
                           ReductionHistory* history = nullptr);

/// H_{k+1,k} from the first k steps; needs beta_{k+1}, delta_{k+1} (taken as 0
/// when absent).
Eigen::MatrixXd build_projected_H(const CoefficientSequence& c, double lambda, double mu,
                                  std::size_t k);

}  // namespace gpk
