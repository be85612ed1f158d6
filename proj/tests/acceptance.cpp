// Acceptance criteria: one PASS/FAIL/SKIP line each. Exit status is nonzero
// when any criterion fails.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <new>
#include <string>
#include <vector>

#include "gpk/baselines.hpp"
#include "gpk/gpbilq.hpp"
#include "gpk/gpqmr.hpp"
#include "gpk/io.hpp"
#include "gpk/oracles.hpp"
#include "gpk/random_systems.hpp"

// Allocation counter for the storage audit. Counts blocks of two watched
// byte sizes and all blocks while armed.
namespace alloc_audit {
std::atomic<bool> armed{false};
std::atomic<std::size_t> watch_m{0}, watch_n{0};
std::atomic<std::size_t> count_m{0}, count_n{0}, count_all{0};

void note(std::size_t bytes) {
  if (!armed.load(std::memory_order_relaxed)) return;
  ++count_all;
  if (bytes == watch_m) ++count_m;
  if (bytes == watch_n) ++count_n;
}

void reset() {
  count_m = 0;
  count_n = 0;
  count_all = 0;
}
}  // namespace alloc_audit

void* operator new(std::size_t bytes) {
  alloc_audit::note(bytes);
  if (void* p = std::malloc(bytes ? bytes : 1)) return p;
  throw std::bad_alloc();
}
void* operator new[](std::size_t bytes) {
  alloc_audit::note(bytes);
  if (void* p = std::malloc(bytes ? bytes : 1)) return p;
  throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }

using namespace gpk;

namespace {

enum class Outcome { pass, fail, skip };
int failures = 0;

void report(int id, Outcome o, const std::string& what, const std::string& detail) {
  const char* tag = o == Outcome::pass ? "PASS" : o == Outcome::fail ? "FAIL" : "SKIP";
  if (o == Outcome::fail) ++failures;
  std::printf("%s  criterion %2d  %-44s %s\n", tag, id, what.c_str(), detail.c_str());
  std::fflush(stdout);
}

Outcome verdict(bool ok) { return ok ? Outcome::pass : Outcome::fail; }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PartitionedSystem seeded(std::uint64_t seed, std::size_t m, std::size_t n,
                         bool symmetric = false) {
  RandomSystemOptions o;
  o.m = m;
  o.n = n;
  o.seed = seed;
  o.symmetric_coupling = symmetric;
  return random_system(o);
}

double max_abs(const Eigen::MatrixXd& M) { return M.cwiseAbs().maxCoeff(); }

ReductionHistory reduce(const PartitionedSystem& sys, std::size_t steps, bool& broke) {
  ReductionHistory h;
  auto init = reduction_init(sys, &h);
  broke = !std::holds_alternative<ReductionState>(init);
  if (broke) return h;
  auto& s = std::get<ReductionState>(init);
  for (std::size_t i = 0; i < steps; ++i) {
    if (reduction_step(s, sys, &h).breakdown) {
      broke = true;
      break;
    }
  }
  return h;
}

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  double biorth = 0.0, rel = 0.0;
  bool broke_any = false;
  const std::size_t k = 10;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const PartitionedSystem sys = seeded(seed, 20, 20);
    bool broke = false;
    const ReductionHistory h = reduce(sys, k, broke);
    broke_any |= broke;
    if (broke) continue;
    const Eigen::MatrixXd A = sys.A.to_dense(), B = sys.B.to_dense();
    const Eigen::MatrixXd P = h.P(k), Q = h.Q(k), U = h.U(k), V = h.V(k);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
    biorth = std::max({biorth, max_abs(P.transpose() * Q - I), max_abs(U.transpose() * V - I)});
    rel = std::max({rel,
                    (A * U - h.Q(k + 1) * h.S(k + 1, k)).norm() / (A.norm() * U.norm()),
                    (A.transpose() * P - h.V(k + 1) * h.S(k, k + 1).transpose()).norm() /
                        (A.norm() * P.norm()),
                    (B * Q - h.U(k + 1) * h.T(k + 1, k)).norm() / (B.norm() * Q.norm()),
                    (B.transpose() * V - h.P(k + 1) * h.T(k, k + 1).transpose()).norm() /
                        (B.norm() * V.norm())});
  }
  const double secs = seconds_since(t0);
  report(1, verdict(!broke_any && biorth <= 1e-8 && rel <= 1e-10 && secs < 1.0),
         "reduction invariants (10 x 20x20, k=10)",
         fmt("biorth %.2e <= 1e-8, relations %.2e <= 1e-10, %.3f s < 1 s", biorth, rel, secs));
}

void criterion_2() {
  const PartitionedSystem sys = seeded(4, 15, 15, true);
  auto init = reduction_init(sys);
  double dpq = 0.0, duv = 0.0;
  bool ok = std::holds_alternative<ReductionState>(init);
  if (ok) {
    auto& s = std::get<ReductionState>(init);
    for (int k = 1; k <= 8; ++k) {
      // s holds p_k, q_k, u_k, v_k
      Vector dp = s.p_cur, du = s.u_cur;
      axpy(-1.0, s.q_cur, dp);
      axpy(-1.0, s.v_cur, du);
      dpq = std::max(dpq, norm2(dp));
      duv = std::max(duv, norm2(du));
      if (k < 8 && reduction_step(s, sys).breakdown) ok = false;
    }
  }
  report(2, verdict(ok && dpq <= 1e-10 && duv <= 1e-10), "symmetric coupling keeps p = q, u = v",
         fmt("max ||p-q|| %.2e, max ||u-v|| %.2e (<= 1e-10, k <= 8)", dpq, duv));
}

void criterion_3() {
  double worst = 0.0;
  long rank_deficit = 0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const PartitionedSystem sys = seeded(seed, 12, 10);
    ReductionHistory h;
    GpbilqIteration it(sys, &h);
    for (std::size_t k = 2; k <= 8 && it.can_advance(); ++k) {
      it.advance();
      const Eigen::MatrixXd H = projected(h, sys.lambda, sys.mu, k);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(H.topRows(static_cast<Eigen::Index>(2 * k - 2)));
      rank_deficit += static_cast<long>(2 * k - 2) - static_cast<long>(lu.rank());
      worst = std::max(worst, rel_diff(stack(it.x(), it.y()), bilq_oracle(h, sys.lambda, sys.mu, k)));
      ++checked;
    }
  }
  report(3, verdict(checked == 35 && worst <= 1e-8 && rank_deficit == 0),
         "GPBiLQ = minimum-norm oracle (k=2..8)",
         fmt("max rel diff %.2e <= 1e-8, row-rank deficit %.0f, %.0f steps", worst,
             static_cast<double>(rank_deficit), static_cast<double>(checked)));
}

void criterion_4() {
  double worst = 0.0, rise = -INFINITY;
  long rank_deficit = 0;
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const PartitionedSystem sys = seeded(seed, 12, 10);
    ReductionHistory h;
    GpqmrIteration it(sys, &h);
    double prev = it.quasi_residual();
    for (std::size_t k = 1; k <= 8 && it.can_advance(); ++k) {
      it.advance();
      const Eigen::MatrixXd H = projected(h, sys.lambda, sys.mu, k);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
      rank_deficit += static_cast<long>(2 * k) - static_cast<long>(lu.rank());
      if (k >= 2) {
        worst = std::max(worst, rel_diff(stack(it.x(), it.y()), qmr_oracle(h, sys.lambda, sys.mu, k)));
        ++checked;
      }
      rise = std::max(rise, it.quasi_residual() - prev);
      prev = it.quasi_residual();
    }
  }
  report(4, verdict(checked == 35 && worst <= 1e-8 && rank_deficit == 0 && rise <= 1e-12),
         "GPQMR = least-squares oracle (k=2..8)",
         fmt("max rel diff %.2e <= 1e-8, col-rank deficit %.0f, max quasi rise %.2e <= 1e-12",
             worst, static_cast<double>(rank_deficit), rise));
}

void criterion_5() {
  double worst = 0.0;
  std::size_t defined = 0, undefined = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const PartitionedSystem sys = seeded(seed, 12, 10);
    ReductionHistory h;
    GpbilqIteration it(sys, &h);
    for (std::size_t k = 1; k <= 8 && it.can_advance(); ++k) {
      if (k > 1) it.advance();
      if (!it.transfer_defined()) {
        ++undefined;
        continue;
      }
      Vector x(sys.m()), y(sys.n());
      it.bicg_iterate(x, y);
      worst = std::max(worst, rel_diff(stack(x, y), bicg_oracle(h, sys.lambda, sys.mu, k)));
      ++defined;
    }
  }

  // H_1 = [0 alpha1; theta1 0] with alpha1 = 0: no Galerkin iterate at k = 1.
  Eigen::MatrixXd A(2, 2), B(2, 2);
  A << 0.0, 1.0, 1.0, 0.0;
  B << 1.0, 0.0, 0.0, 1.0;
  const PartitionedSystem singular = PartitionedSystem::make(
      Operator::dense(A), Operator::dense(B), 0.0, 0.0, {1.0, 0.0}, {1.0, 0.0});
  bool reported = false, stream_ok = false;
  try {
    GpbilqIteration it(singular);
    reported = !it.transfer_defined() && std::isnan(it.estimate().est_norm_C);
    const double est = it.estimate().est_norm_L;
    stream_ok = std::isfinite(est) && std::isfinite(norm2(it.x()));
    SolveOptions o;
    o.tol = 1e-12;
    o.maxit = 4;
    const SolveReport r = gpbicg_solve(singular, o);
    stream_ok = stream_ok && r.record.rows.size() >= 2 && !r.record.rows[1].transfer_defined;
  } catch (const std::exception&) {
    stream_ok = false;
  }
  report(5, verdict(defined > 0 && worst <= 1e-8 && reported && stream_ok),
         "GPBiCG transfer = Galerkin oracle",
         fmt("max rel diff %.2e <= 1e-8 over %.0f steps; singular H_1 reported as undefined: ",
             worst, static_cast<double>(defined)) +
             (reported && stream_ok ? "yes" : "no"));
}

void criterion_6() {
  double wl = 0.0, wc = 0.0, bound = -INFINITY;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const PartitionedSystem sys = seeded(seed, 12, 10);
    GpbilqIteration it(sys);
    for (std::size_t k = 1; k <= 8 && it.can_advance(); ++k) {
      if (k > 1) it.advance();
      const BiLQResidualEstimate e = it.estimate();
      const double rl = residual_norm(sys, it.x(), it.y());
      wl = std::max(wl, std::abs(e.est_norm_L - rl) / rl);
      if (it.transfer_defined()) {
        Vector x(sys.m()), y(sys.n());
        it.bicg_iterate(x, y);
        const double rc = residual_norm(sys, x, y);
        wc = std::max(wc, std::abs(e.est_norm_C - rc) / rc);
      }
    }
    ReductionHistory h;
    GpqmrIteration q(sys, &h);
    for (std::size_t k = 1; k <= 8 && q.can_advance(); ++k) {
      q.advance();
      const double wnorm = h.W(k + 1).jacobiSvd().singularValues()(0);
      bound = std::max(bound, residual_norm(sys, q.x(), q.y()) - wnorm * q.quasi_residual());
    }
  }
  report(6, verdict(wl <= 1e-8 && wc <= 1e-8 && bound <= 1e-9), "residual estimates exact",
         fmt("est_L %.2e, est_C %.2e (<= 1e-8 rel); max ||r_Q|| - ||W||quasi %.2e <= 1e-9", wl,
             wc, bound));
}

double band_violation(const Eigen::MatrixXd& M, bool lower) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (lower ? (j > i || i - j > 4) : (i > j || j - i > 4))
        worst = std::max(worst, std::abs(M(i, j)));
  return worst;
}

void criterion_7() {
  double lq = 0.0, qr = 0.0, orth = 0.0, band = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const PartitionedSystem sys = seeded(seed, 12, 10);
    ReductionHistory h;
    LQTrace lt;
    GpbilqIteration it(sys, &h, &lt);
    for (std::size_t k = 2; k <= 8 && it.can_advance(); ++k) {
      it.advance();
      if (!it.transfer_defined()) continue;
      const Eigen::MatrixXd Hk = projected(h, sys.lambda, sys.mu, k).topRows(2 * k);
      const Eigen::MatrixXd L = it.assemble_L_tilde();
      const Eigen::MatrixXd Qt = it.assemble_G(true).transpose();
      lq = std::max(lq, (L * Qt - Hk).norm() / Hk.norm());
      orth = std::max(orth, (Qt * Qt.transpose() - Eigen::MatrixXd::Identity(Qt.rows(), Qt.cols())).norm());
      band = std::max(band, band_violation(L, true));
    }
    ReductionHistory hq;
    QRTrace qt;
    GpqmrIteration q(sys, &hq, &qt);
    for (std::size_t k = 1; k <= 8 && q.can_advance(); ++k) {
      q.advance();
      const Eigen::MatrixXd H = projected(hq, sys.lambda, sys.mu, k);
      const Eigen::MatrixXd QT = q.assemble_QT();
      const Eigen::MatrixXd R = q.assemble_R();
      Eigen::MatrixXd Rpad = Eigen::MatrixXd::Zero(H.rows(), H.cols());
      Rpad.topRows(R.rows()) = R;
      qr = std::max(qr, (QT.transpose() * Rpad - H).norm() / H.norm());
      orth = std::max(orth, (QT * QT.transpose() - Eigen::MatrixXd::Identity(QT.rows(), QT.cols())).norm());
      band = std::max(band, band_violation(R, false));
    }
  }
  report(7, verdict(lq <= 1e-12 && qr <= 1e-12 && orth <= 1e-12 && band == 0.0),
         "LQ / QR factorizations",
         fmt("LQ %.2e, QR %.2e, orthogonality %.2e (<= 1e-12), off-band %.1e", lq, qr, orth, band));
}

void criterion_8() {
  double qmr = 0.0, bicg = 0.0, gpmr = 0.0;
  std::size_t gpmr_steps = 0;
  bool all = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const PartitionedSystem sys = seeded(seed, 6, 6);
    SolveOptions o;
    o.tol = 1e-10;
    o.maxit = 6;
    o.residual = ResidualPolicy::explicit_residual;
    const SolveReport q = gpqmr_solve(sys, o);
    const SolveReport c = gpbicg_solve(sys, o);
    o.maxit = 12;
    const SolveReport g = gpmr_solve(sys, o);
    const double rq = residual_norm(sys, q.x, q.y), rc = residual_norm(sys, c.x, c.y),
                 rg = residual_norm(sys, g.x, g.y);
    qmr = std::max(qmr, rq);
    bicg = std::max(bicg, rc);
    gpmr = std::max(gpmr, rg);
    gpmr_steps = std::max(gpmr_steps, g.iterations);
    all = all && rq <= 1e-10 && rc <= 1e-10 && rg <= 1e-10 && q.iterations <= 6 &&
          c.iterations <= 6 && g.iterations <= 12;
  }
  report(8, verdict(all), "exact termination (10 x 6x6)",
         fmt("residual GPQMR %.2e, GPBiCG %.2e by k=6; GPMR %.2e by k=%.0f", qmr, bicg, gpmr,
             static_cast<double>(gpmr_steps)));
}

void criterion_9() {
  const char* dir = std::getenv("GPK_SUITESPARSE_DIR");
  if (!dir) {
    report(9, Outcome::skip, "well1033 figure shape",
           "GPK_SUITESPARSE_DIR not set (needs well1033.mtx, illc1033.mtx)");
    return;
  }
  PartitionedSystem sys;
  try {
    sys = load_experiment("well1033", dir);
  } catch (const std::exception& e) {
    report(9, Outcome::skip, "well1033 figure shape", e.what());
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  SolveOptions o;
  o.tol = 1e-6;
  o.maxit = 5000;
  o.residual = ResidualPolicy::explicit_residual;
  o.restart = 9;
  std::vector<std::pair<Method, SolveReport>> runs;
  for (Method m : {Method::gpbilq, Method::gpbicg, Method::gpqmr, Method::gpmr,
                   Method::gpmr_restarted})
    runs.emplace_back(m, solve(m, sys, o));
  const double secs = seconds_since(t0);
  bool converged = true;
  std::size_t fewest = SIZE_MAX, most = 0;
  std::string counts;
  for (const auto& [m, r] : runs) {
    converged = converged && r.termination == Termination::converged;
    fewest = std::min(fewest, r.iterations);
    most = std::max(most, r.iterations);
    counts += std::string(to_string(m)) + "=" + std::to_string(r.iterations) + " ";
  }
  const bool order = runs[3].second.iterations == fewest && runs[4].second.iterations == most;
  report(9, verdict(converged && order && secs < 30.0), "well1033 figure shape",
         counts + fmt("(%.1f s)", secs));
}

void criterion_10() {
  RandomSystemOptions ro;
  ro.m = 300;
  ro.n = 200;
  ro.sparse = true;
  ro.density = 0.05;
  ro.seed = 11;
  const PartitionedSystem sys = random_system(ro);

  alloc_audit::watch_m = sys.m() * sizeof(double);
  alloc_audit::watch_n = sys.n() * sizeof(double);
  alloc_audit::reset();
  alloc_audit::armed = true;
  GpbilqIteration it(sys);
  alloc_audit::armed = false;
  const std::size_t setup_m = alloc_audit::count_m, setup_n = alloc_audit::count_n;

  alloc_audit::reset();
  alloc_audit::armed = true;
  std::size_t steps = 0;
  while (it.can_advance() && it.k() < 50) {
    it.advance();
    (void)it.estimate();
    ++steps;
  }
  alloc_audit::armed = false;
  const std::size_t loop_m = alloc_audit::count_m, loop_n = alloc_audit::count_n,
                    loop_all = alloc_audit::count_all;
  report(10, verdict(setup_m == 9 && setup_n == 9 && loop_m == 0 && loop_n == 0 && steps == 49),
         "GPBiLQ storage audit (300x200 CSR, 50 its)",
         fmt("setup %.0f m-vectors + %.0f n-vectors; loop allocations: %.0f vectors, %.0f total",
             static_cast<double>(setup_m), static_cast<double>(setup_n),
             static_cast<double>(loop_m + loop_n), static_cast<double>(loop_all)));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf("%s\n", failures ? "acceptance FAILED" : "acceptance passed");
  return failures ? 1 : 0;
}
