#include "gpk/gpbilq.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <variant>

#include "gpk/error.hpp"
#include "solve_common.hpp"

namespace gpk {

namespace {

const RotationSet kIdentitySet{};

// w <- G w for the 4x4 block G = R1 R2 R3 R4 of one LQ step (R4 acts first).
void apply_lq_block(const RotationSet& r, double* w) {
  auto rot = [](const Givens& g, double& a, double& b) {
    const double na = g.c * a - g.s * b;
    b = g.s * a + g.c * b;
    a = na;
  };
  rot(r[3], w[1], w[2]);
  rot(r[2], w[1], w[3]);
  rot(r[1], w[0], w[1]);
  rot(r[0], w[0], w[3]);
}

// Dense 4x4 block R1 R2 R3 R4 with each R = [c -s; s c] on its index pair.
Eigen::Matrix4d lq_block(const RotationSet& r) {
  static constexpr int pairs[4][2] = {{0, 3}, {0, 1}, {1, 3}, {1, 2}};
  Eigen::Matrix4d G = Eigen::Matrix4d::Identity();
  for (int j = 0; j < 4; ++j) {
    Eigen::Matrix4d R = Eigen::Matrix4d::Identity();
    const int a = pairs[j][0], b = pairs[j][1];
    R(a, a) = r[j].c;
    R(a, b) = -r[j].s;
    R(b, a) = r[j].s;
    R(b, b) = r[j].c;
    G = G * R;
  }
  return G;
}

void check_diagonal(double rho, std::size_t row) {
  if (rho == 0.0) {
    throw SingularWindowError("LQ factor diagonal entry " + std::to_string(row) + " vanished");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// LQWindow

void LQWindow::init(double lambda, double mu, double alpha1, double theta1, double beta2,
                    double delta2, LQTrace* trace) {
  lambda_ = lambda;
  mu_ = mu;
  steps_ = 0;
  ring_.fill(BandRow{});
  rot_.fill(RotationSet{});
  trace_ = trace;
  if (trace_) *trace_ = {};

  rho_bar_odd = lambda;
  alpha_bar = alpha1;
  nu_bar_even = theta1;
  rho_bar_even = mu;
  omega_bar = 0.0;
  nu_bar_odd = beta2;
  zeta_bar = delta2;
}

const RotationSet& LQWindow::rotations(std::size_t i) const {
  if (i < 1 || i > steps_ || i + 1 < steps_) return kIdentitySet;
  return rot_[i % 2];
}

void LQWindow::step(const LQStepInput& in) {
  const std::size_t i = ++steps_;
  mut_row(2 * i + 3) = {};
  mut_row(2 * i + 4) = {};
  RotationSet& g = rot_[i % 2];

  // Column pair (2i-1, 2i+2): removes gamma_{i+1}.
  double rho_t;
  g[0] = make_givens(rho_bar_odd, in.gamma, rho_t);
  const auto [c1, s1] = g[0];
  const double nu_t = c1 * nu_bar_even;
  const double t = -s1 * nu_bar_even;
  const double omega_t = c1 * omega_bar + s1 * in.alpha;
  const double alpha_t = -s1 * omega_bar + c1 * in.alpha;
  const double zeta_t = c1 * zeta_bar + s1 * mu_;
  const double rho_t_next = -s1 * zeta_bar + c1 * mu_;
  const double xi_t = s1 * in.beta_next;
  const double nu_t_next = c1 * in.beta_next;

  // (2i-1, 2i): removes alpha_bar_i, finalizes column 2i-1.
  double rho_odd;
  g[1] = make_givens(rho_t, alpha_bar, rho_odd);
  const auto [c2, s2] = g[1];
  const double nu_even = c2 * nu_t + s2 * rho_bar_even;
  const double rho_hat = -s2 * nu_t + c2 * rho_bar_even;
  const double omega_odd = c2 * omega_t + s2 * nu_bar_odd;
  const double nu_hat = -s2 * omega_t + c2 * nu_bar_odd;
  const double zeta_even = c2 * zeta_t;
  const double omega_hat = -s2 * zeta_t;
  const double xi_odd = c2 * xi_t;
  const double zeta_hat = -s2 * xi_t;

  // (2i, 2i+2): removes the fill-in t_i.
  double rho_check;
  g[2] = make_givens(rho_hat, t, rho_check);
  const auto [c3, s3] = g[2];
  const double nu_check = c3 * nu_hat + s3 * alpha_t;
  const double alpha_bar_next = -s3 * nu_hat + c3 * alpha_t;
  const double omega_check = c3 * omega_hat + s3 * rho_t_next;
  const double rho_bar_even_next = -s3 * omega_hat + c3 * rho_t_next;
  const double zeta_check = c3 * zeta_hat + s3 * nu_t_next;
  const double nu_bar_odd_next = -s3 * zeta_hat + c3 * nu_t_next;

  // (2i, 2i+1): removes eta_{i+1}, finalizes column 2i.
  double rho_even;
  g[3] = make_givens(rho_check, in.eta, rho_even);
  const auto [c4, s4] = g[3];
  const double nu_odd = c4 * nu_check + s4 * lambda_;
  const double rho_bar_odd_next = -s4 * nu_check + c4 * lambda_;
  const double omega_even = c4 * omega_check + s4 * in.theta;
  const double nu_bar_even_next = -s4 * omega_check + c4 * in.theta;
  const double zeta_odd = c4 * zeta_check;
  const double omega_bar_next = -s4 * zeta_check;
  const double xi_even = s4 * in.delta_next;
  const double zeta_bar_next = c4 * in.delta_next;

  check_diagonal(rho_odd, 2 * i - 1);
  check_diagonal(rho_even, 2 * i);

  mut_row(2 * i - 1).rho = rho_odd;
  mut_row(2 * i).nu = nu_even;
  mut_row(2 * i).rho = rho_even;
  mut_row(2 * i + 1).omega = omega_odd;
  mut_row(2 * i + 1).nu = nu_odd;
  mut_row(2 * i + 2).zeta = zeta_even;
  mut_row(2 * i + 2).omega = omega_even;
  mut_row(2 * i + 3).xi = xi_odd;
  mut_row(2 * i + 3).zeta = zeta_odd;
  mut_row(2 * i + 4).xi = xi_even;

  rho_bar_odd = rho_bar_odd_next;
  alpha_bar = alpha_bar_next;
  nu_bar_even = nu_bar_even_next;
  rho_bar_even = rho_bar_even_next;
  omega_bar = omega_bar_next;
  nu_bar_odd = nu_bar_odd_next;
  zeta_bar = zeta_bar_next;

  if (trace_) {
    trace_->rows.push_back(row(2 * i - 1));
    trace_->rows.push_back(row(2 * i));
    trace_->steps.push_back(g);
  }
}

TransferRotation LQWindow::transfer() const {
  TransferRotation tr;
  tr.g = make_givens(rho_bar_odd, alpha_bar, tr.rho_odd);
  tr.nu_even = tr.g.c * nu_bar_even + tr.g.s * rho_bar_even;
  tr.rho_even = -tr.g.s * nu_bar_even + tr.g.c * rho_bar_even;
  const double d1 = rho_bar_odd * rho_bar_even;
  const double d2 = alpha_bar * nu_bar_even;
  tr.defined = std::abs(d1 - d2) > kTransferTol * (std::abs(d1) + std::abs(d2));
  return tr;
}

// ---------------------------------------------------------------------------
// GpbilqIteration

GpbilqIteration::GpbilqIteration(const PartitionedSystem& sys, ReductionHistory* history,
                                 LQTrace* trace)
    : sys_(&sys), history_(history), trace_(trace) {
  r0_ = detail::rhs_norm(sys);
  auto init = reduction_init(sys, history);
  x_.assign(sys.m(), 0.0);
  y_.assign(sys.n(), 0.0);
  if (auto* bd = std::get_if<BreakdownReport>(&init)) {
    breakdown_ = *bd;
    return;
  }
  red_ = std::get<ReductionState>(std::move(init));
  started_ = true;

  beta_ = red_.beta1;
  delta_ = red_.delta1;
  gamma_ = red_.gamma1;
  eta_ = red_.eta1;

  fx_[0] = red_.q_cur;
  fy_[1] = red_.u_cur;
  fx_[1].assign(sys.m(), 0.0);
  fy_[0].assign(sys.n(), 0.0);
  for (int j = 2; j < 4; ++j) {
    fx_[j].assign(sys.m(), 0.0);
    fy_[j].assign(sys.n(), 0.0);
  }
  base_ = 0;

  const StepOutcome out = reduction_step(red_, sys, history);
  alpha_ = out.coeffs.alpha;
  theta_ = out.coeffs.theta;
  beta_next_ = out.coeffs.beta;
  delta_next_ = out.coeffs.delta;
  breakdown_ = out.breakdown;
  k_ = 1;

  lq_.init(sys.lambda, sys.mu, alpha_, theta_, beta_next_, delta_next_, trace);
  compute_transfer();
}

double GpbilqIteration::varpi(std::ptrdiff_t j) const {
  if (j < 1) return 0.0;
  return varpi_[static_cast<std::size_t>(j - 1) % 8];
}

void GpbilqIteration::advance() {
  if (!can_advance()) throw UsageError("GPBiLQ iteration cannot advance past a breakdown");
  const std::size_t k = k_ + 1;

  const double gamma_k = red_.gamma;
  const double eta_k = red_.eta;
  const double beta_k = red_.beta;
  const double delta_k = red_.delta;
  const StepOutcome out = reduction_step(red_, *sys_, history_);

  beta_ = beta_k;
  delta_ = delta_k;
  gamma_ = gamma_k;
  eta_ = eta_k;
  alpha_ = out.coeffs.alpha;
  theta_ = out.coeffs.theta;
  beta_next_ = out.coeffs.beta;
  delta_next_ = out.coeffs.delta;

  lq_.step({gamma_k, eta_k, alpha_, theta_, beta_next_, delta_next_});
  k_ = k;
  substitute();

  // [f~_{2k-3} f~_{2k-2} (q_k,0) (0,u_k)] times the newest 4x4 rotation block,
  // fused with the iterate update.
  const RotationSet& g = lq_.rotations(k - 1);
  const auto [c1, s1] = g[0];
  const auto [c2, s2] = g[1];
  const auto [c3, s3] = g[2];
  const auto [c4, s4] = g[3];
  const double w1 = varpi(static_cast<std::ptrdiff_t>(2 * k - 3));
  const double w2 = varpi(static_cast<std::ptrdiff_t>(2 * k - 2));

  auto rotate = [&](Vector& A, Vector& B, Vector& C, Vector& D, const double* qk, bool q_side,
                    Vector& iterate) {
    const std::size_t len = A.size();
    for (std::size_t j = 0; j < len; ++j) {
      double a = A[j];
      double b = B[j];
      double c = q_side ? qk[j] : 0.0;
      double d = q_side ? 0.0 : qk[j];
      // R1 on (a, d)
      double t = c1 * a + s1 * d;
      d = -s1 * a + c1 * d;
      a = t;
      // R2 on (a, b)
      t = c2 * a + s2 * b;
      b = -s2 * a + c2 * b;
      a = t;
      // R3 on (b, d)
      t = c3 * b + s3 * d;
      d = -s3 * b + c3 * d;
      b = t;
      // R4 on (b, c)
      t = c4 * b + s4 * c;
      c = -s4 * b + c4 * c;
      b = t;
      A[j] = a;
      B[j] = b;
      C[j] = c;
      D[j] = d;
      iterate[j] += w1 * a + w2 * b;
    }
  };
  const std::size_t sA = base_, sB = (base_ + 1) % 4, sC = (base_ + 2) % 4,
                    sD = (base_ + 3) % 4;
  rotate(fx_[sA], fx_[sB], fx_[sC], fx_[sD], red_.q_prev.data(), true, x_);
  rotate(fy_[sA], fy_[sB], fy_[sC], fy_[sD], red_.u_prev.data(), false, y_);
  base_ = sC;

  breakdown_ = out.breakdown;
  compute_transfer();
}

void GpbilqIteration::substitute() {
  const double rhs[2] = {red_.beta1, red_.delta1};
  for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(2 * k_ - 3);
       j <= static_cast<std::ptrdiff_t>(2 * k_ - 2); ++j) {
    const BandRow& r = lq_.row(static_cast<std::size_t>(j));
    const double b = j <= 2 ? rhs[j - 1] : 0.0;
    const double v = (b - r.xi * varpi(j - 4) - r.zeta * varpi(j - 3) - r.omega * varpi(j - 2) -
                      r.nu * varpi(j - 1)) /
                     r.rho;
    varpi_[static_cast<std::size_t>(j - 1) % 8] = v;
  }
}

void GpbilqIteration::compute_transfer() {
  transfer_ = lq_.transfer();
  wt_odd_ = wt_even_ = 0.0;
  if (!transfer_.defined) return;
  const auto j1 = static_cast<std::ptrdiff_t>(2 * k_ - 1);
  const auto j2 = j1 + 1;
  const BandRow& r1 = lq_.row(static_cast<std::size_t>(j1));
  const BandRow& r2 = lq_.row(static_cast<std::size_t>(j2));
  const double b1 = k_ == 1 ? red_.beta1 : 0.0;
  const double b2 = k_ == 1 ? red_.delta1 : 0.0;
  wt_odd_ = (b1 - r1.xi * varpi(j1 - 4) - r1.zeta * varpi(j1 - 3) - r1.omega * varpi(j1 - 2) -
             r1.nu * varpi(j1 - 1)) /
            transfer_.rho_odd;
  wt_even_ = (b2 - r2.xi * varpi(j2 - 4) - r2.zeta * varpi(j2 - 3) - r2.omega * varpi(j2 - 2) -
              transfer_.nu_even * wt_odd_) /
             transfer_.rho_even;
}

void GpbilqIteration::bicg_iterate(std::span<double> x, std::span<double> y) const {
  if (!transfer_.defined) throw UsageError("the GPBiCG iterate is not defined at this step");
  const auto [c, s] = transfer_.g;
  const double a = c * wt_odd_ - s * wt_even_;
  const double b = s * wt_odd_ + c * wt_even_;
  const Vector& fx1 = fx_[slot(2)];
  const Vector& fx2 = fx_[slot(3)];
  const Vector& fy1 = fy_[slot(2)];
  const Vector& fy2 = fy_[slot(3)];
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = x_[j] + a * fx1[j] + b * fx2[j];
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = y_[j] + a * fy1[j] + b * fy2[j];
}

void GpbilqIteration::form_bicg_in_place() {
  bicg_iterate(x_, y_);
  consumed_ = true;
}

std::span<const double> GpbilqIteration::direction_x(int which) const {
  return fx_[slot(which)];
}

std::span<const double> GpbilqIteration::direction_y(int which) const {
  return fy_[slot(which)];
}

BiLQResidualEstimate GpbilqIteration::estimate() const {
  BiLQResidualEstimate e;
  if (!started_) {
    e.est_norm_L = r0_;
    return e;
  }
  const double lambda = sys_->lambda;
  const double mu = sys_->mu;
  const Vector& qk = red_.q_prev;
  const Vector& qk1 = red_.q_cur;
  const Vector& uk = red_.u_prev;
  const Vector& uk1 = red_.u_cur;

  if (k_ >= 2) {
    const auto k = static_cast<std::ptrdiff_t>(k_);
    double v[6] = {varpi(2 * k - 5), varpi(2 * k - 4), varpi(2 * k - 3), varpi(2 * k - 2),
                   0.0, 0.0};
    apply_lq_block(lq_.rotations(k_ - 1), v + 2);
    apply_lq_block(lq_.rotations(k_ - 2), v);
    e.theta = beta_ * v[3] + lambda * v[4] + alpha_ * v[5];
    e.rho = delta_ * v[2] + theta_ * v[4] + mu * v[5];
    e.chi = beta_next_ * v[5];
    e.sigma = delta_next_ * v[4];
  }

  double sx = 0.0, sy = 0.0, nq1 = 0.0, nu1 = 0.0;
  for (std::size_t j = 0; j < qk.size(); ++j) {
    const double r = e.theta * qk[j] + e.chi * qk1[j];
    sx += r * r;
    nq1 += qk1[j] * qk1[j];
  }
  for (std::size_t j = 0; j < uk.size(); ++j) {
    const double r = e.rho * uk[j] + e.sigma * uk1[j];
    sy += r * r;
    nu1 += uk1[j] * uk1[j];
  }
  e.est_norm_L = k_ >= 2 ? std::sqrt(sx + sy) : r0_;

  if (transfer_.defined) {
    const auto [c, s] = transfer_.g;
    double w[4] = {varpi(static_cast<std::ptrdiff_t>(2 * k_) - 3),
                   varpi(static_cast<std::ptrdiff_t>(2 * k_) - 2), c * wt_odd_ - s * wt_even_,
                   s * wt_odd_ + c * wt_even_};
    if (k_ >= 2) apply_lq_block(lq_.rotations(k_ - 1), w);
    e.chi_tilde = beta_next_ * w[3];
    e.sigma_tilde = delta_next_ * w[2];
    e.est_norm_C = std::sqrt(e.chi_tilde * e.chi_tilde * nq1 + e.sigma_tilde * e.sigma_tilde * nu1);
  }
  return e;
}

Eigen::MatrixXd GpbilqIteration::assemble_L_tilde() const {
  if (!trace_) throw UsageError("assemble_L_tilde needs an LQ trace");
  const auto n = static_cast<Eigen::Index>(2 * k_);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  auto put = [&](Eigen::Index r, const BandRow& b, bool diag) {
    const double vals[5] = {b.rho, b.nu, b.omega, b.zeta, b.xi};
    for (int d = diag ? 0 : 1; d < 5; ++d) {
      if (r - d >= 0) L(r, r - d) = vals[d];
    }
  };
  for (Eigen::Index r = 0; r < n - 2; ++r) put(r, trace_->rows[static_cast<std::size_t>(r)], true);
  put(n - 2, lq_.row(2 * k_ - 1), false);
  put(n - 1, lq_.row(2 * k_), false);
  L(n - 2, n - 2) = transfer_.rho_odd;
  L(n - 1, n - 2) = transfer_.nu_even;
  L(n - 1, n - 1) = transfer_.rho_even;
  return L;
}

Eigen::MatrixXd GpbilqIteration::assemble_G(bool with_transfer) const {
  if (!trace_) throw UsageError("assemble_G needs an LQ trace");
  const auto n = static_cast<Eigen::Index>(2 * k_);
  Eigen::MatrixXd G = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 1; i < k_; ++i) {
    const auto off = static_cast<Eigen::Index>(2 * i - 2);
    G.middleCols(off, 4) = G.middleCols(off, 4) * lq_block(trace_->steps[i - 1]);
  }
  if (with_transfer) {
    const auto [c, s] = transfer_.g;
    Eigen::Matrix2d R;
    R << c, -s, s, c;
    G.rightCols(2) = G.rightCols(2) * R;
  }
  return G;
}

// ---------------------------------------------------------------------------
// Drivers

namespace {

enum class BiLQTarget { minimum_norm, galerkin };

SolveReport run_bilq(const PartitionedSystem& sys, const SolveOptions& opts, BiLQTarget target) {
  sys.validate();
  SolveReport rep;
  rep.method = target == BiLQTarget::galerkin ? Method::gpbicg : Method::gpbilq;
  detail::Recorder rec(rep, opts);
  const bool expl = opts.residual == ResidualPolicy::explicit_residual;

  const double r0 = detail::rhs_norm(sys);
  rec.push(0, r0, expl ? r0 : kNaN, false);
  rep.residual = r0;
  if (r0 <= opts.tol || opts.maxit == 0) {
    rep.x.assign(sys.m(), 0.0);
    rep.y.assign(sys.n(), 0.0);
    rec.finish(r0 <= opts.tol ? Termination::converged : Termination::max_iterations);
    return rep;
  }

  GpbilqIteration it(sys);
  if (!it.started()) {
    rep.x.assign(it.x().begin(), it.x().end());
    rep.y.assign(it.y().begin(), it.y().end());
    rep.breakdown = it.breakdown();
    rec.finish(Termination::breakdown, detail::describe(it.breakdown()));
    return rep;
  }

  Vector sx, sy, cx, cy;
  if (expl) {
    sx.resize(sys.m());
    sy.resize(sys.n());
    cx.resize(sys.m());
    cy.resize(sys.n());
  }
  bool switched = false;

  try {
    for (;;) {
      const std::size_t k = it.k();
      const BiLQResidualEstimate e = it.estimate();
      const bool transfer = it.transfer_defined();
      double est = target == BiLQTarget::galerkin ? e.est_norm_C : e.est_norm_L;
      double stop = est;
      double truth = kNaN;
      if (expl) {
        if (target == BiLQTarget::minimum_norm) {
          truth = detail::explicit_residual(sys, it.x(), it.y(), sx, sy);
        } else if (transfer) {
          it.bicg_iterate(cx, cy);
          truth = detail::explicit_residual(sys, cx, cy, sx, sy);
        }
        stop = truth;
      }
      // The minimum-norm solve also accepts the Galerkin iterate once it
      // meets the tolerance; at a lucky breakdown only the latter is exact.
      double stop_c = kNaN;
      if (target == BiLQTarget::minimum_norm && transfer) {
        if (expl) {
          it.bicg_iterate(cx, cy);
          stop_c = detail::explicit_residual(sys, cx, cy, sx, sy);
        } else {
          stop_c = e.est_norm_C;
        }
      }
      rec.push(k, est, truth, transfer);
      if (!std::isnan(stop)) rep.residual = stop;

      if (!std::isnan(stop) && stop <= opts.tol) {
        rec.finish(Termination::converged);
        break;
      }
      if (!std::isnan(stop_c) && stop_c <= opts.tol) {
        switched = true;
        rep.residual = stop_c;
        rec.finish(Termination::converged, "Galerkin iterate met the tolerance");
        break;
      }
      if (it.breakdown()) {
        rep.breakdown = it.breakdown();
        rec.finish(Termination::breakdown, detail::describe(it.breakdown()));
        break;
      }
      if (k >= opts.maxit) {
        rec.finish(Termination::max_iterations);
        break;
      }
      it.advance();
    }
  } catch (const SingularWindowError& e) {
    rep.singular_window = true;
    rec.finish(Termination::breakdown, e.what());
  }

  if (target == BiLQTarget::galerkin) {
    rep.bicg_defined = it.transfer_defined();
    if (rep.bicg_defined) {
      it.form_bicg_in_place();
    } else if (rep.message.empty()) {
      rep.message = "no Galerkin iterate at the final step; returning the minimum-norm iterate";
    }
  } else if (switched) {
    rep.bicg_defined = true;
    it.form_bicg_in_place();
  } else if (opts.keep_bicg_iterate && it.transfer_defined()) {
    rep.x_bicg.emplace(sys.m());
    rep.y_bicg.emplace(sys.n());
    it.bicg_iterate(*rep.x_bicg, *rep.y_bicg);
  }
  it.release_solution(rep.x, rep.y);
  return rep;
}

}  // namespace

SolveReport gpbilq_solve(const PartitionedSystem& sys, const SolveOptions& opts) {
  return run_bilq(sys, opts, BiLQTarget::minimum_norm);
}

SolveReport gpbicg_solve(const PartitionedSystem& sys, const SolveOptions& opts) {
  return run_bilq(sys, opts, BiLQTarget::galerkin);
}

}  // namespace gpk
