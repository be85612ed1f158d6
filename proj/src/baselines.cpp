#include "gpk/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpk/error.hpp"
#include "gpk/gpbilq.hpp"
#include "gpk/gpqmr.hpp"
#include "gpk/givens.hpp"
#include "solve_common.hpp"

namespace gpk {

namespace {

// Unit vector scaled from v, or e1 with a zero scale when v vanishes.
Vector unit_or_e1(std::span<const double> v, double& scale_out, std::size_t len) {
  scale_out = norm2(v);
  Vector u(v.begin(), v.end());
  if (scale_out == 0.0) {
    u.assign(len, 0.0);
    if (len > 0) u[0] = 1.0;
  } else {
    scale(1.0 / scale_out, u);
  }
  return u;
}

// Orthogonalizes w against basis twice (MGS), accumulating coefficients in col.
void orthogonalize(const std::vector<Vector>& basis, std::size_t count, Vector& w,
                   Eigen::Ref<Eigen::VectorXd> col) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < count; ++i) {
      const double h = dot(basis[i], w);
      axpy(-h, basis[i], w);
      col(static_cast<Eigen::Index>(i)) += h;
    }
  }
}

// Incremental QR of the interleaved projected GPMR matrix by generic plane
// rotations; columns arrive two at a time.
class ProjectedLeastSquares {
 public:
  ProjectedLeastSquares(double beta, double gamma) {
    rhs_ = Eigen::VectorXd(2);
    rhs_ << beta, gamma;
  }

  void add_pair(Eigen::VectorXd a, Eigen::VectorXd b) {
    const Eigen::Index rows = a.size();
    rhs_.conservativeResize(rows);
    rhs_.tail(rows - rhs_before_).setZero();
    rhs_before_ = rows;
    for (const Rot& r : rots_) {
      rotate(r, a);
      rotate(r, b);
    }
    const auto ca = static_cast<Eigen::Index>(cols_.size());
    eliminate(ca, a, &b);
    eliminate(ca + 1, b, nullptr);
    cols_.push_back(std::move(a));
    cols_.push_back(std::move(b));
  }

  double residual() const {
    const auto n = static_cast<Eigen::Index>(cols_.size());
    return rhs_.tail(rhs_.size() - n).norm();
  }

  Eigen::VectorXd solve() const {
    const auto n = static_cast<Eigen::Index>(cols_.size());
    Eigen::VectorXd z = rhs_.head(n);
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      const Eigen::VectorXd& col = cols_[static_cast<std::size_t>(j)];
      z(j) /= col(j);
      for (Eigen::Index i = 0; i < j; ++i) z(i) -= col(i) * z(j);
    }
    return z;
  }

 private:
  struct Rot {
    Eigen::Index i, j;
    Givens g;
  };

  static void rotate(const Rot& r, Eigen::VectorXd& v) {
    const double a = v(r.i), b = v(r.j);
    v(r.i) = r.g.c * a + r.g.s * b;
    v(r.j) = -r.g.s * a + r.g.c * b;
  }

  void eliminate(Eigen::Index col, Eigen::VectorXd& v, Eigen::VectorXd* other) {
    for (Eigen::Index r = col + 1; r < v.size(); ++r) {
      if (v(r) == 0.0) continue;
      double rr;
      Rot rot{col, r, make_givens(v(col), v(r), rr)};
      rotate(rot, v);
      v(r) = 0.0;
      if (other) rotate(rot, *other);
      rotate(rot, rhs_);
      rots_.push_back(rot);
    }
  }

  std::vector<Eigen::VectorXd> cols_;
  std::vector<Rot> rots_;
  Eigen::VectorXd rhs_;
  Eigen::Index rhs_before_ = 2;
};

// One GPMR run of at most `steps` steps from (x0, y0); updates x0, y0 in place.
struct CycleResult {
  std::size_t steps = 0;
  bool converged = false;
  bool broken = false;
};

CycleResult gpmr_cycle(const PartitionedSystem& sys, const SolveOptions& opts,
                       detail::Recorder& rec, Vector& x, Vector& y, std::size_t k_offset,
                       std::size_t steps, double& last_residual) {
  const std::size_t m = sys.m(), n = sys.n();
  Vector rb(m), rc(n);
  apply_partitioned(sys, x, y, rb, rc);
  for (std::size_t i = 0; i < m; ++i) rb[i] = sys.b[i] - rb[i];
  for (std::size_t i = 0; i < n; ++i) rc[i] = sys.c[i] - rc[i];

  HessenbergProcess hp(sys.A, sys.B, rb, rc);
  ProjectedLeastSquares ls(hp.beta(), hp.gamma());
  const bool expl = opts.residual == ResidualPolicy::explicit_residual;
  Vector sx(expl ? m : 0), sy(expl ? n : 0), tx, ty;

  auto form = [&](Vector& ox, Vector& oy) {
    const Eigen::VectorXd z = ls.solve();
    ox = x;
    oy = y;
    for (std::size_t j = 0; j < hp.k(); ++j) {
      axpy(z(static_cast<Eigen::Index>(2 * j)), hp.V()[j], ox);
      axpy(z(static_cast<Eigen::Index>(2 * j + 1)), hp.U()[j], oy);
    }
  };

  CycleResult res;
  for (std::size_t k = 1; k <= steps; ++k) {
    const bool ok = hp.step();
    const auto rows = static_cast<Eigen::Index>(2 * k + 2);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(rows), b = Eigen::VectorXd::Zero(rows);
    a(static_cast<Eigen::Index>(2 * k - 2)) = sys.lambda;
    b(static_cast<Eigen::Index>(2 * k - 1)) = sys.mu;
    for (std::size_t i = 1; i <= k + 1; ++i) {
      a(static_cast<Eigen::Index>(2 * i - 1)) = hp.f(i, k);
      b(static_cast<Eigen::Index>(2 * i - 2)) = hp.h(i, k);
    }
    ls.add_pair(std::move(a), std::move(b));
    res.steps = k;

    const double est = ls.residual();
    double truth = kNaN, stop = est;
    if (expl) {
      form(tx, ty);
      truth = detail::explicit_residual(sys, tx, ty, sx, sy);
      stop = truth;
    }
    rec.push(k_offset + k, est, truth, false);
    last_residual = stop;
    if (stop <= opts.tol) {
      res.converged = true;
      break;
    }
    if (!ok) {
      res.broken = true;
      break;
    }
    if (k_offset + k >= opts.maxit) break;
  }
  form(tx, ty);
  x = std::move(tx);
  y = std::move(ty);
  return res;
}

SolveReport run_gpmr(const PartitionedSystem& sys, const SolveOptions& opts, bool restarted) {
  sys.validate();
  if (restarted && opts.restart == 0) throw UsageError("restart length must be at least 1");
  SolveReport rep;
  rep.method = restarted ? Method::gpmr_restarted : Method::gpmr;
  detail::Recorder rec(rep, opts);
  const bool expl = opts.residual == ResidualPolicy::explicit_residual;
  const double r0 = detail::rhs_norm(sys);
  rec.push(0, r0, expl ? r0 : kNaN, false);
  rep.residual = r0;
  rep.x.assign(sys.m(), 0.0);
  rep.y.assign(sys.n(), 0.0);
  if (r0 <= opts.tol || opts.maxit == 0) {
    rec.finish(r0 <= opts.tol ? Termination::converged : Termination::max_iterations);
    return rep;
  }

  std::size_t done = 0;
  for (;;) {
    const std::size_t budget = opts.maxit - done;
    const std::size_t steps = restarted ? std::min(opts.restart, budget) : budget;
    const CycleResult c = gpmr_cycle(sys, opts, rec, rep.x, rep.y, done, steps, rep.residual);
    done += c.steps;
    if (c.converged) {
      rec.finish(Termination::converged);
      break;
    }
    if (c.broken) {
      rep.breakdown = {BreakdownKind::none, true, 0.0, done + 1};
      rec.finish(Termination::breakdown,
                 "Hessenberg process reached an invariant subspace at vector " +
                     std::to_string(done + 1));
      break;
    }
    if (done >= opts.maxit) {
      rec.finish(Termination::max_iterations);
      break;
    }
  }
  return rep;
}

}  // namespace

HessenbergProcess::HessenbergProcess(const Operator& A, const Operator& B,
                                     std::span<const double> b, std::span<const double> c)
    : A_(&A), B_(&B) {
  if (b.size() != A.rows() || c.size() != A.cols() || B.rows() != A.cols() ||
      B.cols() != A.rows()) {
    throw DimensionError("Hessenberg process: inconsistent dimensions");
  }
  V_.push_back(unit_or_e1(b, beta_, A.rows()));
  U_.push_back(unit_or_e1(c, gamma_, A.cols()));
  H_ = Eigen::MatrixXd::Zero(2, 1);
  F_ = Eigen::MatrixXd::Zero(2, 1);
}

bool HessenbergProcess::step() {
  if (broken_) throw UsageError("Hessenberg process cannot continue after a breakdown");
  const std::size_t k = ++k_;
  const auto K = static_cast<Eigen::Index>(k);
  if (H_.cols() < K) {
    const Eigen::Index cap = std::max<Eigen::Index>(K, 2 * H_.cols());
    H_.conservativeResize(cap + 1, cap);
    F_.conservativeResize(cap + 1, cap);
  }
  H_.col(K - 1).setZero();
  F_.col(K - 1).setZero();
  H_.row(K).setZero();
  F_.row(K).setZero();

  Vector w = *A_ * U_[k - 1];
  Vector t = *B_ * V_[k - 1];
  const double nw0 = norm2(w), nt0 = norm2(t);
  orthogonalize(V_, k, w, H_.col(K - 1));
  orthogonalize(U_, k, t, F_.col(K - 1));

  double h = norm2(w), f = norm2(t);
  const double eps = 1e-14;
  bool ok = true;
  if (h <= eps * nw0 || h == 0.0) {
    h = 0.0;
    ok = false;
  }
  if (f <= eps * nt0 || f == 0.0) {
    f = 0.0;
    ok = false;
  }
  H_(K, K - 1) = h;
  F_(K, K - 1) = f;
  if (h > 0.0) {
    scale(1.0 / h, w);
  } else {
    std::fill(w.begin(), w.end(), 0.0);
  }
  if (f > 0.0) {
    scale(1.0 / f, t);
  } else {
    std::fill(t.begin(), t.end(), 0.0);
  }
  V_.push_back(std::move(w));
  U_.push_back(std::move(t));
  broken_ = !ok;
  return ok;
}

SolveReport gpmr_solve(const PartitionedSystem& sys, const SolveOptions& opts) {
  return run_gpmr(sys, opts, false);
}

SolveReport gpmr_restarted_solve(const PartitionedSystem& sys, const SolveOptions& opts) {
  return run_gpmr(sys, opts, true);
}

Eigen::VectorXd oracle_minnorm(const Eigen::MatrixXd& H, const Eigen::VectorXd& rhs) {
  if (rhs.size() != H.rows()) throw DimensionError("oracle_minnorm: rhs length mismatch");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(H);
  if (cod.rank() < H.rows()) {
    throw RankError("oracle_minnorm: matrix is row-rank deficient (rank " +
                    std::to_string(cod.rank()) + " of " + std::to_string(H.rows()) + ")");
  }
  Eigen::VectorXd z = cod.solve(rhs);
  const double scale = std::max(1.0, rhs.norm());
  if ((H * z - rhs).norm() > 1e-8 * scale) throw RankError("oracle_minnorm: inconsistent system");
  return z;
}

Eigen::VectorXd oracle_lsq(const Eigen::MatrixXd& H, const Eigen::VectorXd& rhs) {
  if (rhs.size() != H.rows()) throw DimensionError("oracle_lsq: rhs length mismatch");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(H);
  if (qr.rank() < H.cols()) {
    throw RankError("oracle_lsq: matrix is column-rank deficient (rank " +
                    std::to_string(qr.rank()) + " of " + std::to_string(H.cols()) + ")");
  }
  return qr.solve(rhs);
}

std::pair<Vector, Vector> oracle_dense_solve(const PartitionedSystem& sys) {
  const Eigen::MatrixXd K = assemble_dense(sys);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) throw RankError("oracle_dense_solve: assembled matrix is singular");
  const auto m = static_cast<Eigen::Index>(sys.m()), n = static_cast<Eigen::Index>(sys.n());
  Eigen::VectorXd rhs(m + n);
  rhs.head(m) = Eigen::Map<const Eigen::VectorXd>(sys.b.data(), m);
  rhs.tail(n) = Eigen::Map<const Eigen::VectorXd>(sys.c.data(), n);
  const Eigen::VectorXd z = lu.solve(rhs);
  return {Vector(z.data(), z.data() + m), Vector(z.data() + m, z.data() + m + n)};
}

std::pair<Vector, Vector> oracle_block_krylov_minres(const PartitionedSystem& sys, std::size_t k) {
  const auto m = static_cast<Eigen::Index>(sys.m()), n = static_cast<Eigen::Index>(sys.n());
  const auto K = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd S(m, K), T(n, K);
  Vector s = sys.b, t = sys.c;
  for (Eigen::Index j = 0; j < K; ++j) {
    S.col(j) = Eigen::Map<const Eigen::VectorXd>(s.data(), m);
    T.col(j) = Eigen::Map<const Eigen::VectorXd>(t.data(), n);
    Vector s_next = sys.A * t;
    Vector t_next = sys.B * s;
    s = std::move(s_next);
    t = std::move(t_next);
  }
  // Orthonormal bases keep the dense problem well scaled.
  const Eigen::MatrixXd Qs = Eigen::HouseholderQR<Eigen::MatrixXd>(S).householderQ() *
                             Eigen::MatrixXd::Identity(m, std::min(m, K));
  const Eigen::MatrixXd Qt = Eigen::HouseholderQR<Eigen::MatrixXd>(T).householderQ() *
                             Eigen::MatrixXd::Identity(n, std::min(n, K));
  const Eigen::MatrixXd Kd = assemble_dense(sys);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(m + n, Qs.cols() + Qt.cols());
  Z.topLeftCorner(m, Qs.cols()) = Qs;
  Z.bottomRightCorner(n, Qt.cols()) = Qt;
  Eigen::VectorXd rhs(m + n);
  rhs.head(m) = Eigen::Map<const Eigen::VectorXd>(sys.b.data(), m);
  rhs.tail(n) = Eigen::Map<const Eigen::VectorXd>(sys.c.data(), n);
  const Eigen::VectorXd w = (Kd * Z).colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd sol = Z * w;
  return {Vector(sol.data(), sol.data() + m), Vector(sol.data() + m, sol.data() + m + n)};
}

SolveReport solve(Method method, const PartitionedSystem& sys, const SolveOptions& opts) {
  switch (method) {
    case Method::gpbilq: return gpbilq_solve(sys, opts);
    case Method::gpbicg: return gpbicg_solve(sys, opts);
    case Method::gpqmr: return gpqmr_solve(sys, opts);
    case Method::gpmr: return gpmr_solve(sys, opts);
    case Method::gpmr_restarted: return gpmr_restarted_solve(sys, opts);
  }
  throw UsageError("unknown method");
}

}  // namespace gpk
