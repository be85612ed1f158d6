#include "gpk/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace gpk {

const char* to_string(BreakdownKind kind) {
  switch (kind) {
    case BreakdownKind::none: return "none";
    case BreakdownKind::p_q: return "p_q";
    case BreakdownKind::u_v: return "u_v";
  }
  return "unknown";
}

namespace {

// Splits the inner product w = x'y into (root, signed) factors.
std::pair<double, double> split_product(double w) {
  const double root = std::sqrt(std::abs(w));
  return {root, w / root};
}

struct PairCheck {
  bool broken = false;
  bool lucky = false;
  double magnitude = 0.0;
};

PairCheck check_pair(double product, double norm_dual, double norm_primal, double scale_dual,
                     double scale_primal) {
  PairCheck r;
  r.magnitude = std::abs(product);
  const double floor = scale_dual * scale_primal;
  r.broken = r.magnitude <= kBreakdownTol * std::max(norm_dual * norm_primal, floor);
  r.lucky = r.broken && norm_primal <= kLuckyTol * std::max(scale_primal, 1e-300);
  return r;
}

// v /= s, or zeros when s vanishes.
void normalize(std::span<double> v, double s) {
  if (s != 0.0) {
    scale(1.0 / s, v);
  } else {
    std::fill(v.begin(), v.end(), 0.0);
  }
}

Eigen::MatrixXd columns(const std::vector<Vector>& cols, std::size_t count) {
  const std::size_t k = std::min(count, cols.size());
  const std::size_t rows = cols.empty() ? 0 : cols.front().size();
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    M.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXd>(cols[j].data(), static_cast<Eigen::Index>(rows));
  }
  return M;
}

double at(const std::vector<double>& v, std::size_t one_based) {
  return one_based >= 1 && one_based <= v.size() ? v[one_based - 1] : 0.0;
}

Eigen::MatrixXd tridiagonal(const std::vector<double>& diag, const std::vector<double>& sub,
                            const std::vector<double>& super, std::size_t rows,
                            std::size_t cols) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(cols));
  for (std::size_t j = 1; j <= cols; ++j) {
    const auto c = static_cast<Eigen::Index>(j - 1);
    if (j <= rows) M(c, c) = at(diag, j);
    if (j + 1 <= rows) M(c + 1, c) = at(sub, j + 1);
    if (j >= 2) M(c - 1, c) = at(super, j);
  }
  return M;
}

}  // namespace

void ReductionHistory::record_init(const ReductionState& s) {
  coeffs_ = {};
  coeffs_.beta.push_back(s.beta1);
  coeffs_.delta.push_back(s.delta1);
  coeffs_.gamma.push_back(s.gamma1);
  coeffs_.eta.push_back(s.eta1);
  p_ = {s.p_cur};
  q_ = {s.q_cur};
  u_ = {s.u_cur};
  v_ = {s.v_cur};
}

void ReductionHistory::record_step(const ReductionState& s, const StepCoefficients& c) {
  coeffs_.alpha.push_back(c.alpha);
  coeffs_.theta.push_back(c.theta);
  coeffs_.beta.push_back(c.beta);
  coeffs_.gamma.push_back(c.gamma);
  coeffs_.delta.push_back(c.delta);
  coeffs_.eta.push_back(c.eta);
  p_.push_back(s.p_cur);
  q_.push_back(s.q_cur);
  u_.push_back(s.u_cur);
  v_.push_back(s.v_cur);
}

Eigen::MatrixXd ReductionHistory::P(std::size_t cols) const { return columns(p_, cols); }
Eigen::MatrixXd ReductionHistory::Q(std::size_t cols) const { return columns(q_, cols); }
Eigen::MatrixXd ReductionHistory::U(std::size_t cols) const { return columns(u_, cols); }
Eigen::MatrixXd ReductionHistory::V(std::size_t cols) const { return columns(v_, cols); }

Eigen::MatrixXd ReductionHistory::S(std::size_t rows, std::size_t cols) const {
  return tridiagonal(coeffs_.alpha, coeffs_.beta, coeffs_.gamma, rows, cols);
}

Eigen::MatrixXd ReductionHistory::T(std::size_t rows, std::size_t cols) const {
  return tridiagonal(coeffs_.theta, coeffs_.delta, coeffs_.eta, rows, cols);
}

Eigen::MatrixXd ReductionHistory::W(std::size_t k) const {
  const Eigen::MatrixXd Qk = Q(k);
  const Eigen::MatrixXd Uk = U(k);
  const Eigen::Index m = Qk.rows();
  const Eigen::Index n = Uk.rows();
  const auto kk = static_cast<Eigen::Index>(std::min({k, q_.size(), u_.size()}));
  Eigen::MatrixXd Wk = Eigen::MatrixXd::Zero(m + n, 2 * kk);
  for (Eigen::Index j = 0; j < kk; ++j) {
    Wk.block(0, 2 * j, m, 1) = Qk.col(j);
    Wk.block(m, 2 * j + 1, n, 1) = Uk.col(j);
  }
  return Wk;
}

std::variant<ReductionState, BreakdownReport> reduction_init(const PartitionedSystem& sys,
                                                             ReductionHistory* history) {
  sys.validate();
  const std::size_t m = sys.m();
  const std::size_t n = sys.n();

  const double fb = dot(sys.f, sys.b);
  const double cg = dot(sys.c, sys.g);
  const double nf = norm2(sys.f), nb = norm2(sys.b), nc = norm2(sys.c), ng = norm2(sys.g);
  if (std::abs(fb) <= kBreakdownTol * nf * nb) {
    return BreakdownReport{BreakdownKind::p_q, false, std::abs(fb), 1};
  }
  if (std::abs(cg) <= kBreakdownTol * nc * ng) {
    return BreakdownReport{BreakdownKind::u_v, false, std::abs(cg), 1};
  }

  ReductionState s;
  s.k = 1;
  std::tie(s.eta, s.beta) = split_product(fb);
  std::tie(s.delta, s.gamma) = split_product(cg);
  s.beta1 = s.beta;
  s.delta1 = s.delta;
  s.gamma1 = s.gamma;
  s.eta1 = s.eta;

  s.p_cur = sys.f;
  scale(1.0 / s.eta, s.p_cur);
  s.q_cur = sys.b;
  scale(1.0 / s.beta, s.q_cur);
  s.u_cur = sys.c;
  scale(1.0 / s.delta, s.u_cur);
  s.v_cur = sys.g;
  scale(1.0 / s.gamma, s.v_cur);
  s.p_prev.assign(m, 0.0);
  s.q_prev.assign(m, 0.0);
  s.u_prev.assign(n, 0.0);
  s.v_prev.assign(n, 0.0);

  if (history) history->record_init(s);
  return s;
}

StepOutcome reduction_step(ReductionState& s, const PartitionedSystem& sys,
                           ReductionHistory* history) {
  StepOutcome out;
  const bool first = s.k == 1;

  // The previous vectors are overwritten by the new unnormalized ones:
  // q~ = A u_k - gamma_k q_{k-1} - alpha_k q_k and so on.
  sys.A.apply(s.u_cur, s.q_prev, 1.0, first ? 0.0 : -s.gamma);
  sys.B.apply(s.q_cur, s.u_prev, 1.0, first ? 0.0 : -s.eta);
  sys.B.apply_transpose(s.v_cur, s.p_prev, 1.0, first ? 0.0 : -s.delta);
  sys.A.apply_transpose(s.p_cur, s.v_prev, 1.0, first ? 0.0 : -s.beta);

  const double alpha = dot(s.p_cur, s.q_prev);
  const double theta = dot(s.v_cur, s.u_prev);
  const double scale_q = norm2(s.q_prev);
  const double scale_u = norm2(s.u_prev);
  const double scale_p = norm2(s.p_prev);
  const double scale_v = norm2(s.v_prev);

  axpy(-alpha, s.q_cur, s.q_prev);
  axpy(-alpha, s.v_cur, s.v_prev);
  axpy(-theta, s.p_cur, s.p_prev);
  axpy(-theta, s.u_cur, s.u_prev);

  const double pq = dot(s.p_prev, s.q_prev);
  const double uv = dot(s.u_prev, s.v_prev);
  const double np = norm2(s.p_prev), nq = norm2(s.q_prev);
  const double nu = norm2(s.u_prev), nv = norm2(s.v_prev);

  const PairCheck cpq = check_pair(pq, np, nq, scale_p, scale_q);
  const PairCheck cuv = check_pair(uv, nv, nu, scale_v, scale_u);

  StepCoefficients& c = out.coeffs;
  c.alpha = alpha;
  c.theta = theta;
  if (cpq.broken) {
    c.eta = np;
    c.beta = nq;
  } else {
    std::tie(c.eta, c.beta) = split_product(pq);
  }
  if (cuv.broken) {
    c.gamma = nv;
    c.delta = nu;
  } else {
    std::tie(c.delta, c.gamma) = split_product(uv);
  }
  normalize(s.p_prev, c.eta);
  normalize(s.q_prev, c.beta);
  normalize(s.u_prev, c.delta);
  normalize(s.v_prev, c.gamma);

  std::swap(s.p_prev, s.p_cur);
  std::swap(s.q_prev, s.q_cur);
  std::swap(s.u_prev, s.u_cur);
  std::swap(s.v_prev, s.v_cur);

  if (cpq.broken || cuv.broken) {
    BreakdownReport& r = out.breakdown;
    r.kind = cpq.broken ? BreakdownKind::p_q : BreakdownKind::u_v;
    r.magnitude = cpq.broken ? cpq.magnitude : cuv.magnitude;
    r.lucky = (!cpq.broken || cpq.lucky) && (!cuv.broken || cuv.lucky);
    r.iteration = s.k + 1;
  }

  s.alpha = alpha;
  s.theta = theta;
  s.beta = c.beta;
  s.gamma = c.gamma;
  s.delta = c.delta;
  s.eta = c.eta;
  ++s.k;

  if (history) history->record_step(s, c);
  return out;
}

Eigen::MatrixXd build_projected_H(const CoefficientSequence& c, double lambda, double mu,
                                  std::size_t k) {
  const auto K = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * K + 2, 2 * K);
  for (std::size_t i = 1; i <= k; ++i) {
    const auto r = static_cast<Eigen::Index>(2 * (i - 1));  // first row/col of block i
    H(r, r) = lambda;
    H(r, r + 1) = at(c.alpha, i);
    H(r + 1, r) = at(c.theta, i);
    H(r + 1, r + 1) = mu;
    // E_{i+1,i} = [0 beta_{i+1}; delta_{i+1} 0]
    H(r + 2, r + 1) = at(c.beta, i + 1);
    H(r + 3, r) = at(c.delta, i + 1);
    if (i >= 2) {
      // E_{i-1,i} = [0 gamma_i; eta_i 0]
      H(r - 2, r + 1) = at(c.gamma, i);
      H(r - 1, r) = at(c.eta, i);
    }
  }
  return H;
}

}  // namespace gpk
