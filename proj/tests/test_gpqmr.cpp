#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gpk/gpqmr.hpp"
#include "oracle_support.hpp"

using namespace gpk;
using namespace gpk::testing;

namespace {

PartitionedSystem seeded(std::uint64_t seed, std::size_t m = 6, std::size_t n = 6) {
  RandomSystemOptions o;
  o.m = m;
  o.n = n;
  o.seed = seed;
  return random_system(o);
}

}  // namespace

TEST_CASE("rotation kernel swap") {
  double r;
  const Givens g = make_givens(0.0, 1.0, r);
  CHECK(r == 1.0);
  CHECK(g.c == 0.0);
  CHECK(g.s == 1.0);
}

TEST_CASE("1x1 system") {
  const PartitionedSystem sys = one_by_one();
  QRTrace trace;
  GpqmrIteration it(sys, nullptr, &trace);
  CHECK(it.k() == 0);
  CHECK(it.x()[0] == 0.0);
  it.advance();
  CHECK(std::abs(trace.columns[0][4]) == doctest::Approx(std::sqrt(10.0)));
  CHECK(it.x()[0] == doctest::Approx(0.2));
  CHECK(it.y()[0] == doctest::Approx(0.4));
  CHECK(it.quasi_residual() == doctest::Approx(0.0));
  // f_1 = (q_1 / rho_1, 0)
  CHECK(it.direction_y(1)[0] == 0.0);
  CHECK(it.direction_x(1)[0] * trace.columns[0][4] == doctest::Approx(it.reduction().q_prev[0]));
}

TEST_CASE("QR factorization reproduces H_{k+1,k} and rotates the right-hand side") {
  const PartitionedSystem sys = seeded(11, 8, 7);
  ReductionHistory hist;
  QRTrace trace;
  GpqmrIteration it(sys, &hist, &trace);
  for (int s = 0; s < 6; ++s) {
    it.advance();
    const std::size_t k = it.k();
    const Eigen::MatrixXd H = projected(hist, sys.lambda, sys.mu, k);
    const Eigen::MatrixXd QT = it.assemble_QT();
    const Eigen::MatrixXd R = it.assemble_R();
    Eigen::MatrixXd Rpad = Eigen::MatrixXd::Zero(H.rows(), H.cols());
    Rpad.topRows(R.rows()) = R;
    CHECK((QT.transpose() * Rpad - H).norm() <= 1e-12 * H.norm());
    CHECK((QT * QT.transpose() - Eigen::MatrixXd::Identity(QT.rows(), QT.cols())).norm() <= 1e-12);
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
      for (Eigen::Index j = 0; j < R.cols(); ++j) {
        if (i > j || j - i > 4) CHECK(R(i, j) == 0.0);
      }
    }
    const Eigen::VectorXd rot = QT * projected_rhs(hist, H.rows());
    CHECK(rot(H.rows() - 2) == doctest::Approx(it.window().varpi_bar_odd()));
    CHECK(rot(H.rows() - 1) == doctest::Approx(it.window().varpi_bar_even()));
    CHECK(rot(H.rows() - 4) == doctest::Approx(it.window().varpi_odd()));
    CHECK(rot(H.rows() - 3) == doctest::Approx(it.window().varpi_even()));
  }
}

TEST_CASE("directions satisfy F_k R_k = W_k") {
  const PartitionedSystem sys = seeded(4, 7, 5);
  ReductionHistory hist;
  QRTrace trace;
  GpqmrIteration it(sys, &hist, &trace);
  std::vector<Eigen::VectorXd> cols;
  for (int s = 0; s < 4; ++s) {
    it.advance();
    const auto j = static_cast<std::ptrdiff_t>(2 * it.k());
    cols.push_back(stack(it.direction_x(j - 1), it.direction_y(j - 1)));
    cols.push_back(stack(it.direction_x(j), it.direction_y(j)));
  }
  Eigen::MatrixXd F(cols[0].size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) F.col(static_cast<Eigen::Index>(j)) = cols[j];
  const Eigen::MatrixXd W = hist.W(it.k());
  CHECK((F * it.assemble_R() - W).norm() <= 1e-10 * W.norm());
}

TEST_CASE("iterates match the dense least-squares oracle; quasi-residual is nonincreasing") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const PartitionedSystem sys = seeded(seed, 9, 8);
    ReductionHistory hist;
    GpqmrIteration it(sys, &hist);
    double prev = it.quasi_residual();
    for (std::size_t k = 1; k <= 7; ++k) {
      it.advance();
      CHECK(rel_diff(stack(it.x(), it.y()), qmr_oracle(hist, sys.lambda, sys.mu, k)) <= 1e-8);
      CHECK(it.quasi_residual() <= prev + 1e-12);
      prev = it.quasi_residual();
      // ||r_Q|| <= ||W_{k+1}|| * quasi
      const Eigen::MatrixXd W = hist.W(k + 1);
      const double wnorm = W.jacobiSvd().singularValues()(0);
      CHECK(residual_norm(sys, it.x(), it.y()) <= wnorm * it.quasi_residual() + 1e-9);
    }
  }
}

TEST_CASE("GPQMR solve") {
  SUBCASE("maxit = 0 gives the zero iterate") {
    SolveOptions opts;
    opts.maxit = 0;
    const SolveReport r = gpqmr_solve(seeded(2), opts);
    CHECK(r.termination == Termination::max_iterations);
    CHECK(r.iterations == 0);
    CHECK(norm2(r.x) == 0.0);
    CHECK(norm2(r.y) == 0.0);
  }
  SUBCASE("generic 6x6 system is solved by k = 6") {
    const PartitionedSystem sys = seeded(7);
    SolveOptions opts;
    opts.tol = 1e-10;
    opts.residual = ResidualPolicy::explicit_residual;
    const SolveReport r = gpqmr_solve(sys, opts);
    CHECK(r.termination == Termination::converged);
    CHECK(r.iterations <= 6);
    CHECK(residual_norm(sys, r.x, r.y) <= 1e-10);
  }
  SUBCASE("SQD coupling matches GPMR at small k") {
    RandomSystemOptions o;
    o.m = 10;
    o.n = 6;
    o.mu = -1.0;
    o.seed = 5;
    o.symmetric_coupling = true;
    const PartitionedSystem sys = random_system(o);
    for (std::size_t k = 1; k <= 5; ++k) {
      SolveOptions opts;
      opts.tol = 0.0;
      opts.maxit = k;
      const SolveReport q = gpqmr_solve(sys, opts);
      const SolveReport g = gpmr_solve(sys, opts);
      CHECK((stack(q.x, q.y) - stack(g.x, g.y)).norm() <= 1e-6);
    }
  }
}
