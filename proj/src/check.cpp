#include "gpk/check.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "gpk/baselines.hpp"
#include "gpk/error.hpp"
#include "gpk/gpbilq.hpp"
#include "gpk/gpqmr.hpp"
#include "gpk/oracles.hpp"
#include "gpk/random_systems.hpp"

namespace gpk {

bool CheckReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

std::string CheckReport::first_failure() const {
  for (const auto& r : results)
    if (!r.passed) return r.name;
  return {};
}

namespace {

// Keeps the worst measurement per invariant, in first-seen order.
class Table {
 public:
  void record(const std::string& name, double value, double threshold) {
    auto& r = get(name, threshold);
    if (std::isnan(value)) {
      r.passed = false;
      r.measured = value;
      return;
    }
    if (!std::isnan(r.measured)) r.measured = std::max(r.measured, value);
    if (!(value <= threshold)) r.passed = false;
  }

  void note(const std::string& name, double threshold, const std::string& text) {
    get(name, threshold).note = text;
  }

  void fail(const std::string& name, const std::string& text) {
    auto& r = get(name, 0.0);
    r.passed = false;
    r.note = text;
  }

  CheckReport finish() && {
    CheckReport rep;
    for (const auto& n : order_) rep.results.push_back(std::move(rows_[n]));
    return rep;
  }

 private:
  InvariantResult& get(const std::string& name, double threshold) {
    auto it = rows_.find(name);
    if (it == rows_.end()) {
      order_.push_back(name);
      it = rows_.emplace(name, InvariantResult{name, true, 0.0, threshold, {}}).first;
    }
    return it->second;
  }

  std::vector<std::string> order_;
  std::map<std::string, InvariantResult> rows_;
};

double max_abs(const Eigen::MatrixXd& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

double rel(double num, double den) { return num / std::max(den, 1e-300); }

double band_violation(const Eigen::MatrixXd& M, bool lower) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      const bool outside = lower ? (j > i || i - j > 4) : (i > j || j - i > 4);
      if (outside) worst = std::max(worst, std::abs(M(i, j)));
    }
  return worst;
}

void reduction_invariants(Table& t, const ReductionHistory& h, const PartitionedSystem& sys,
                          std::size_t k) {
  const Eigen::MatrixXd A = sys.A.to_dense(), B = sys.B.to_dense();
  const Eigen::MatrixXd Pk = h.P(k), Qk = h.Q(k), Uk = h.U(k), Vk = h.V(k);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                                      static_cast<Eigen::Index>(k));
  t.record("biorthogonality P'Q = I, U'V = I",
           std::max(max_abs(Pk.transpose() * Qk - I), max_abs(Uk.transpose() * Vk - I)), 1e-8);

  const double e1 = rel((A * Uk - h.Q(k + 1) * h.S(k + 1, k)).norm(), A.norm() * Uk.norm());
  const double e2 = rel((A.transpose() * Pk - h.V(k + 1) * h.S(k, k + 1).transpose()).norm(),
                        A.norm() * Pk.norm());
  const double e3 = rel((B * Qk - h.U(k + 1) * h.T(k + 1, k)).norm(), B.norm() * Qk.norm());
  const double e4 = rel((B.transpose() * Vk - h.P(k + 1) * h.T(k, k + 1).transpose()).norm(),
                        B.norm() * Vk.norm());
  t.record("tridiagonal relations AU, A'P, BQ, B'V", std::max({e1, e2, e3, e4}), 1e-10);

  const Eigen::MatrixXd K = assemble_dense(sys);
  const Eigen::MatrixXd H = projected(h, sys.lambda, sys.mu, k);
  t.record("projected identity K W_k = W_{k+1} H_{k+1,k}",
           rel((K * h.W(k) - h.W(k + 1) * H).norm(), K.norm() * h.W(k).norm()), 1e-10);
}

void bilq_invariants(Table& t, const PartitionedSystem& sys, std::size_t max_steps) {
  ReductionHistory hist;
  LQTrace trace;
  GpbilqIteration it(sys, &hist, &trace);
  // Relative errors are measured against this floor near convergence.
  const double floor = 1e-10 * std::hypot(norm2(sys.b), norm2(sys.c));
  std::size_t checked = 0;
  while (it.can_advance() && it.k() < max_steps) {
    it.advance();
    const std::size_t k = it.k();
    if (hist.steps() < k) break;
    ++checked;
    const Eigen::MatrixXd H = projected(hist, sys.lambda, sys.mu, k);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(H.topRows(static_cast<Eigen::Index>(2 * k - 2)));
    t.record("H_{k-1,k} has full row rank", static_cast<double>(2 * k - 2 - lu.rank()), 0.0);
    t.record("GPBiLQ iterate = minimum-norm oracle",
             rel_diff(stack(it.x(), it.y()), bilq_oracle(hist, sys.lambda, sys.mu, k)), 1e-8);

    const BiLQResidualEstimate e = it.estimate();
    const double rl = residual_norm(sys, it.x(), it.y());
    t.record("GPBiLQ residual estimate exact", rel(std::abs(e.est_norm_L - rl), std::max(rl, floor)), 1e-8);

    if (it.transfer_defined()) {
      Vector x(sys.m()), y(sys.n());
      it.bicg_iterate(x, y);
      t.record("GPBiCG iterate = Galerkin oracle",
               rel_diff(stack(x, y), bicg_oracle(hist, sys.lambda, sys.mu, k)), 1e-8);
      const double rc = residual_norm(sys, x, y);
      t.record("GPBiCG residual estimate exact", rel(std::abs(e.est_norm_C - rc), std::max(rc, floor)), 1e-8);

      const Eigen::MatrixXd Hk = H.topRows(static_cast<Eigen::Index>(2 * k));
      const Eigen::MatrixXd L = it.assemble_L_tilde();
      const Eigen::MatrixXd Qt = it.assemble_G(true).transpose();
      t.record("LQ reconstruction L~Q~ = H_k", rel((L * Qt - Hk).norm(), Hk.norm()), 1e-12);
      t.record("LQ factor orthogonal",
               (Qt * Qt.transpose() - Eigen::MatrixXd::Identity(Qt.rows(), Qt.cols())).norm(),
               1e-12);
      t.record("LQ factor lower band 4", band_violation(L, true), 0.0);
    }
  }
  if (checked == 0) return;
  reduction_invariants(t, hist, sys, hist.steps());
}

void qmr_invariants(Table& t, const PartitionedSystem& sys, std::size_t max_steps) {
  ReductionHistory hist;
  QRTrace trace;
  GpqmrIteration it(sys, &hist, &trace);
  double prev = it.quasi_residual();
  while (it.can_advance() && it.k() < max_steps) {
    it.advance();
    const std::size_t k = it.k();
    if (hist.steps() < k) break;
    const Eigen::MatrixXd H = projected(hist, sys.lambda, sys.mu, k);
    const Eigen::VectorXd sv = H.jacobiSvd().singularValues();
    t.record("H_{k+1,k} has full column rank",
             sv(sv.size() - 1) > 1e-12 * sv(0) ? 0.0 : 1.0, 0.0);
    t.record("GPQMR iterate = least-squares oracle",
             rel_diff(stack(it.x(), it.y()), qmr_oracle(hist, sys.lambda, sys.mu, k)), 1e-8);
    t.record("quasi-residual nonincreasing", it.quasi_residual() - prev, 1e-12);
    prev = it.quasi_residual();
    const double wnorm = hist.W(k + 1).jacobiSvd().singularValues()(0);
    t.record("GPQMR residual <= ||W_{k+1}|| quasi",
             residual_norm(sys, it.x(), it.y()) - wnorm * it.quasi_residual(), 1e-9);

    const Eigen::MatrixXd QT = it.assemble_QT();
    const Eigen::MatrixXd R = it.assemble_R();
    Eigen::MatrixXd Rpad = Eigen::MatrixXd::Zero(H.rows(), H.cols());
    Rpad.topRows(R.rows()) = R;
    t.record("QR reconstruction Q^[R^;0] = H_{k+1,k}",
             rel((QT.transpose() * Rpad - H).norm(), H.norm()), 1e-12);
    t.record("QR factor orthogonal",
             (QT * QT.transpose() - Eigen::MatrixXd::Identity(QT.rows(), QT.cols())).norm(),
             1e-12);
    t.record("QR factor upper band 4", band_violation(R, false), 0.0);
  }
}

void gpmr_invariants(Table& t, const PartitionedSystem& sys, std::size_t max_steps) {
  for (std::size_t k = 1; k <= max_steps; ++k) {
    SolveOptions opts;
    opts.tol = 0.0;
    opts.maxit = k;
    const SolveReport r = gpmr_solve(sys, opts);
    if (r.iterations < k) break;
    const auto [x, y] = oracle_block_krylov_minres(sys, k);
    t.record("GPMR iterate = block Krylov min-residual oracle",
             rel_diff(stack(r.x, r.y), stack(x, y)), 1e-8);
  }
}

void symmetric_coupling_invariant(Table& t, RandomSystemOptions o, std::size_t max_steps) {
  o.symmetric_coupling = true;
  o.random_shadows = false;
  const PartitionedSystem sys = random_system(o);
  auto init = reduction_init(sys);
  if (!std::holds_alternative<ReductionState>(init)) return;
  auto& s = std::get<ReductionState>(init);
  for (std::size_t k = 0; k < max_steps; ++k) {
    if (reduction_step(s, sys).breakdown) break;
    Vector dp = s.p_cur, du = s.u_cur;
    axpy(-1.0, s.q_cur, dp);
    axpy(-1.0, s.v_cur, du);
    t.record("B = A' keeps p = q and u = v", std::max(norm2(dp), norm2(du)), 1e-10);
  }
}

PartitionedSystem with_orthogonal_shadow(const PartitionedSystem& base, std::uint64_t seed) {
  const Eigen::MatrixXd r = random_matrix(base.m(), 1, seed ^ 0x5bd1e995u);
  Vector f(r.data(), r.data() + r.size());
  const double bb = dot(base.b, base.b);
  axpy(-dot(f, base.b) / bb, base.b, f);
  axpy(-dot(f, base.b) / bb, base.b, f);
  PartitionedSystem sys = base;
  sys.f = std::move(f);
  return sys;
}

void breakdown_invariant(Table& t, const PartitionedSystem& sys) {
  const std::string name = "f orthogonal to b reports a clean breakdown";
  try {
    for (Method m : {Method::gpbilq, Method::gpbicg, Method::gpqmr}) {
      const SolveReport r = solve(m, sys);
      if (r.termination != Termination::breakdown || r.iterations != 0) {
        t.fail(name, std::string(to_string(m)) + " did not stop at the start");
        return;
      }
    }
    t.record(name, 0.0, 0.0);
    t.note(name, 0.0, "stopped at k = 0 with a breakdown report");
  } catch (const std::exception& e) {
    t.fail(name, e.what());
  }
}

}  // namespace

CheckReport run_invariant_suite(const CheckOptions& opts) {
  if (opts.size == 0) throw UsageError("check size must be positive");
  if (opts.size > kCheckMaxSize)
    throw SizeGuardError("check size " + std::to_string(opts.size) + " exceeds the dense limit " +
                         std::to_string(kCheckMaxSize));

  Table t;
  RandomSystemOptions o;
  o.m = opts.size;
  o.n = opts.size;
  const std::size_t steps = std::min(opts.max_steps, opts.size);

  for (std::size_t s = 0; s < std::max<std::size_t>(opts.systems, 1); ++s) {
    o.seed = opts.seed + s;
    const PartitionedSystem sys = random_system(o);
    const std::string seed_note = "seed " + std::to_string(o.seed);
    if (opts.force_breakdown) {
      breakdown_invariant(t, with_orthogonal_shadow(sys, o.seed));
      continue;
    }
    try {
      bilq_invariants(t, sys, steps);
      qmr_invariants(t, sys, steps);
      gpmr_invariants(t, sys, steps);
      symmetric_coupling_invariant(t, o, steps);
    } catch (const std::exception& e) {
      t.fail("suite ran without exceptions", seed_note + ": " + e.what());
    }
  }
  if (!opts.force_breakdown) {
    o.seed = opts.seed;
    breakdown_invariant(t, with_orthogonal_shadow(random_system(o), o.seed));
  }
  return std::move(t).finish();
}

void print_check_table(const CheckReport& report, std::ostream& out) {
  char buf[256];
  for (const auto& r : report.results) {
    std::snprintf(buf, sizeof buf, "%-4s  %-50s  worst %-11.3e  limit %-9.1e", r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.measured, r.threshold);
    out << buf;
    if (!r.note.empty()) out << "  " << r.note;
    out << '\n';
  }
  const auto failed = std::count_if(report.results.begin(), report.results.end(),
                                    [](const auto& r) { return !r.passed; });
  out << (failed ? "FAILED" : "all passed") << ": " << report.results.size() - failed << " of "
      << report.results.size() << " invariants\n";
}

}  // namespace gpk
