#include "gpk/gpqmr.hpp"

#include <string>
#include <variant>

#include "gpk/error.hpp"
#include "solve_common.hpp"

namespace gpk {

namespace {

using RotSet = std::array<Givens, 4>;
const RotSet kIdentity{};

// Index pairs, within a 4-row block, of the four rotations in application order.
constexpr int kPairs[4][2] = {{0, 3}, {0, 1}, {1, 3}, {1, 2}};

void rotate_rows(const Givens& g, double& a, double& b) {
  const double na = g.c * a + g.s * b;
  b = -g.s * a + g.c * b;
  a = na;
}

// Left-applies one step's rotation block to v[off .. off+3].
void apply_block(const RotSet& r, double* v) {
  for (int j = 0; j < 4; ++j) rotate_rows(r[j], v[kPairs[j][0]], v[kPairs[j][1]]);
}

Givens eliminate(double& keep, double& kill) {
  double r;
  const Givens g = make_givens(keep, kill, r);
  keep = r;
  kill = 0.0;
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// QRWindow

void QRWindow::init(double lambda, double mu, double beta1, double delta1, QRTrace* trace) {
  lambda_ = lambda;
  mu_ = mu;
  steps_ = 0;
  rot_.fill(RotSet{});
  col_odd_ = {};
  col_even_ = {};
  varpi_odd_ = varpi_even_ = 0.0;
  bar_odd_ = beta1;
  bar_even_ = delta1;
  trace_ = trace;
  if (trace_) *trace_ = {};
}

const RotSet& QRWindow::rotations(std::size_t i) const {
  if (i < 1 || i > steps_ || i + 1 < steps_) return kIdentity;
  return rot_[i % 2];
}

void QRWindow::step(const QRStepInput& in) {
  const std::size_t k = steps_ + 1;
  const RotSet& older = rotations(k - 2);
  const RotSet& prev = rotations(k - 1);
  ++steps_;
  // Rows 2k-5 .. 2k+2 of columns 2k-1 and 2k.
  double a[8] = {0, 0, 0, in.eta, lambda_, in.theta, 0, in.delta_next};
  double b[8] = {0, 0, in.gamma, 0, in.alpha, mu_, in.beta_next, 0};

  apply_block(older, a);
  apply_block(older, b);
  apply_block(prev, a + 2);
  apply_block(prev, b + 2);

  RotSet& g = rot_[k % 2];
  g[0] = eliminate(a[4], a[7]);
  rotate_rows(g[0], b[4], b[7]);
  g[1] = eliminate(a[4], a[5]);
  rotate_rows(g[1], b[4], b[5]);
  g[2] = eliminate(b[5], b[7]);
  g[3] = eliminate(b[5], b[6]);

  if (a[4] == 0.0 || b[5] == 0.0) {
    throw SingularWindowError("QR factor diagonal entry " +
                              std::to_string(a[4] == 0.0 ? 2 * k - 1 : 2 * k) + " vanished");
  }
  col_odd_ = {a[0], a[1], a[2], a[3], a[4]};
  col_even_ = {b[1], b[2], b[3], b[4], b[5]};

  double w[4] = {bar_odd_, bar_even_, 0.0, 0.0};
  apply_block(g, w);
  varpi_odd_ = w[0];
  varpi_even_ = w[1];
  bar_odd_ = w[2];
  bar_even_ = w[3];

  if (trace_) {
    trace_->columns.push_back(col_odd_);
    trace_->columns.push_back(col_even_);
    trace_->steps.push_back(g);
  }
}

// ---------------------------------------------------------------------------
// GpqmrIteration

GpqmrIteration::GpqmrIteration(const PartitionedSystem& sys, ReductionHistory* history,
                               QRTrace* trace)
    : sys_(&sys), history_(history), trace_(trace) {
  auto init = reduction_init(sys, history);
  x_.assign(sys.m(), 0.0);
  y_.assign(sys.n(), 0.0);
  if (auto* bd = std::get_if<BreakdownReport>(&init)) {
    breakdown_ = *bd;
    return;
  }
  red_ = std::get<ReductionState>(std::move(init));
  started_ = true;
  for (int j = 0; j < 4; ++j) {
    fx_[j].assign(sys.m(), 0.0);
    fy_[j].assign(sys.n(), 0.0);
  }
  qr_.init(sys.lambda, sys.mu, red_.beta1, red_.delta1, trace);
}

void GpqmrIteration::advance() {
  if (!can_advance()) throw UsageError("GPQMR iteration cannot advance past a breakdown");
  const std::size_t k = k_ + 1;
  const double gamma_k = k == 1 ? 0.0 : red_.gamma;
  const double eta_k = k == 1 ? 0.0 : red_.eta;
  const StepOutcome out = reduction_step(red_, *sys_, history_);
  qr_.step({gamma_k, eta_k, out.coeffs.alpha, out.coeffs.theta, out.coeffs.beta,
            out.coeffs.delta});
  k_ = k;

  const QRColumn& ca = qr_.column_odd();
  const QRColumn& cb = qr_.column_even();
  const double w1 = qr_.varpi_odd();
  const double w2 = qr_.varpi_even();
  const auto j = static_cast<std::ptrdiff_t>(2 * k);

  // f_{2k-1} replaces f_{2k-5} and f_{2k} replaces f_{2k-4}.
  auto update = [&](std::array<Vector, 4>& f, const Vector& basis, bool odd_gets_basis,
                    Vector& iterate) {
    Vector& f5 = f[slot(j - 5)];
    Vector& f4 = f[slot(j - 4)];
    const Vector& f3 = f[slot(j - 3)];
    const Vector& f2 = f[slot(j - 2)];
    const std::size_t len = iterate.size();
    for (std::size_t e = 0; e < len; ++e) {
      const double a = f5[e], b = f4[e], c = f3[e], d = f2[e];
      const double wa = odd_gets_basis ? basis[e] : 0.0;
      const double wb = odd_gets_basis ? 0.0 : basis[e];
      const double fa = (wa - ca[0] * a - ca[1] * b - ca[2] * c - ca[3] * d) / ca[4];
      const double fb = (wb - cb[0] * b - cb[1] * c - cb[2] * d - cb[3] * fa) / cb[4];
      f5[e] = fa;
      f4[e] = fb;
      iterate[e] += w1 * fa + w2 * fb;
    }
  };
  update(fx_, red_.q_prev, true, x_);
  update(fy_, red_.u_prev, false, y_);

  breakdown_ = out.breakdown;
}

Eigen::MatrixXd GpqmrIteration::assemble_R() const {
  if (!trace_) throw UsageError("assemble_R needs a QR trace");
  const auto n = static_cast<Eigen::Index>(2 * k_);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const QRColumn& col = trace_->columns[static_cast<std::size_t>(j)];
    for (int d = 0; d < 5; ++d) {
      const Eigen::Index row = j - 4 + d;
      if (row >= 0) R(row, j) = col[static_cast<std::size_t>(d)];
    }
  }
  return R;
}

Eigen::MatrixXd GpqmrIteration::assemble_QT() const {
  if (!trace_) throw UsageError("assemble_QT needs a QR trace");
  const auto n = static_cast<Eigen::Index>(2 * k_ + 2);
  Eigen::MatrixXd QT = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 1; i <= k_; ++i) {
    const auto off = static_cast<Eigen::Index>(2 * i - 2);
    Eigen::Matrix4d G = Eigen::Matrix4d::Identity();
    const RotSet& r = trace_->steps[i - 1];
    for (int j = 0; j < 4; ++j) {
      Eigen::Matrix4d R = Eigen::Matrix4d::Identity();
      const int p = kPairs[j][0], q = kPairs[j][1];
      R(p, p) = r[j].c;
      R(p, q) = r[j].s;
      R(q, p) = -r[j].s;
      R(q, q) = r[j].c;
      G = R * G;
    }
    QT.middleRows(off, 4) = G * QT.middleRows(off, 4);
  }
  return QT;
}

// ---------------------------------------------------------------------------
// Driver

SolveReport gpqmr_solve(const PartitionedSystem& sys, const SolveOptions& opts) {
  sys.validate();
  SolveReport rep;
  rep.method = Method::gpqmr;
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

  GpqmrIteration it(sys);
  if (!it.started()) {
    it.release_solution(rep.x, rep.y);
    rep.breakdown = it.breakdown();
    rec.finish(Termination::breakdown, detail::describe(it.breakdown()));
    return rep;
  }

  Vector sx(expl ? sys.m() : 0), sy(expl ? sys.n() : 0);
  try {
    for (;;) {
      if (it.k() >= opts.maxit) {
        rec.finish(Termination::max_iterations);
        break;
      }
      it.advance();
      const double est = it.quasi_residual();
      const double truth = expl ? detail::explicit_residual(sys, it.x(), it.y(), sx, sy) : kNaN;
      const double stop = expl ? truth : est;
      rec.push(it.k(), est, truth, false);
      rep.residual = stop;
      if (stop <= opts.tol) {
        rec.finish(Termination::converged);
        break;
      }
      if (it.breakdown()) {
        rep.breakdown = it.breakdown();
        rec.finish(Termination::breakdown, detail::describe(it.breakdown()));
        break;
      }
    }
  } catch (const SingularWindowError& e) {
    rep.singular_window = true;
    rec.finish(Termination::breakdown, e.what());
  }
  it.release_solution(rep.x, rep.y);
  return rep;
}

}  // namespace gpk
