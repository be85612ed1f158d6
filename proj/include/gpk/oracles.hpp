#pragma once

// Dense reference quantities for the short-recurrence solvers, built from a
// recorded reduction history.

#include <algorithm>
#include <span>

#include <Eigen/Dense>

#include "gpk/baselines.hpp"
#include "gpk/linop.hpp"
#include "gpk/reduction.hpp"

namespace gpk {

inline Eigen::VectorXd stack(std::span<const double> x, std::span<const double> y) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size() + y.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = x[i];
  for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(x.size() + i)) = y[i];
  return v;
}

/// beta1 e1 + delta1 e2 of the given length.
inline Eigen::VectorXd projected_rhs(const ReductionHistory& h, Eigen::Index rows) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(rows);
  r(0) = h.coefficients().beta.at(0);
  r(1) = h.coefficients().delta.at(0);
  return r;
}

/// H_{k+1,k} from the recorded coefficients.
inline Eigen::MatrixXd projected(const ReductionHistory& h, double lambda, double mu,
                                 std::size_t k) {
  return build_projected_H(h.coefficients(), lambda, mu, k);
}

/// W_k z for the minimum-norm solution of H_{k-1,k} z = beta1 e1 + delta1 e2.
inline Eigen::VectorXd bilq_oracle(const ReductionHistory& h, double lambda, double mu,
                                   std::size_t k) {
  const Eigen::MatrixXd H = projected(h, lambda, mu, k);
  const auto rows = static_cast<Eigen::Index>(2 * k - 2);
  const Eigen::VectorXd z = oracle_minnorm(H.topRows(rows), projected_rhs(h, rows));
  return h.W(k) * z;
}

/// W_k H_k^{-1} (beta1 e1 + delta1 e2).
inline Eigen::VectorXd bicg_oracle(const ReductionHistory& h, double lambda, double mu,
                                   std::size_t k) {
  const Eigen::MatrixXd H = projected(h, lambda, mu, k);
  const auto rows = static_cast<Eigen::Index>(2 * k);
  const Eigen::VectorXd z = H.topRows(rows).fullPivLu().solve(projected_rhs(h, rows));
  return h.W(k) * z;
}

/// W_k argmin ||H_{k+1,k} z - (beta1 e1 + delta1 e2)||.
inline Eigen::VectorXd qmr_oracle(const ReductionHistory& h, double lambda, double mu,
                                  std::size_t k) {
  const Eigen::MatrixXd H = projected(h, lambda, mu, k);
  const Eigen::VectorXd z = oracle_lsq(H, projected_rhs(h, H.rows()));
  return h.W(k) * z;
}

inline double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace gpk
