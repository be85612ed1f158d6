#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <variant>

#include "gpk/error.hpp"
#include "oracle_support.hpp"

using namespace gpk;
using namespace gpk::testing;

namespace {

PartitionedSystem scalar_system(double A, double B, Vector b, Vector c, Vector f) {
  Eigen::MatrixXd a(1, 1), bm(1, 1);
  a << A;
  bm << B;
  return PartitionedSystem::make(Operator::dense(a), Operator::dense(bm), 1.0, 1.0, std::move(b),
                                 std::move(c), std::move(f), std::nullopt);
}

ReductionHistory run(const PartitionedSystem& sys, std::size_t steps) {
  ReductionHistory h;
  auto init = reduction_init(sys, &h);
  auto& s = std::get<ReductionState>(init);
  for (std::size_t i = 0; i < steps; ++i) {
    const StepOutcome out = reduction_step(s, sys, &h);
    REQUIRE_FALSE(out.breakdown);
  }
  return h;
}

double max_abs(const Eigen::MatrixXd& M) { return M.cwiseAbs().maxCoeff(); }

// Projection residual of v onto the column span of M.
double outside_span(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) {
  const Eigen::VectorXd c = M.colPivHouseholderQr().solve(v);
  return (M * c - v).norm() / v.norm();
}

}  // namespace

TEST_CASE("initial scaling") {
  SUBCASE("f = b = [1]") {
    auto r = reduction_init(scalar_system(2, 3, {1.0}, {1.0}, {1.0}));
    auto& s = std::get<ReductionState>(r);
    CHECK(s.eta1 == 1.0);
    CHECK(s.beta1 == 1.0);
    CHECK(s.p_cur[0] == 1.0);
    CHECK(s.q_cur[0] == 1.0);
    CHECK(s.k == 1);
    CHECK(s.p_prev[0] == 0.0);
  }
  SUBCASE("f = b = [2]") {
    auto r = reduction_init(scalar_system(2, 3, {2.0}, {1.0}, {2.0}));
    auto& s = std::get<ReductionState>(r);
    CHECK(s.eta1 == doctest::Approx(2.0));
    CHECK(s.beta1 == doctest::Approx(2.0));
    CHECK(s.p_cur[0] == doctest::Approx(1.0));
    CHECK(s.q_cur[0] == doctest::Approx(1.0));
  }
  SUBCASE("negative product puts the sign on beta") {
    auto r = reduction_init(scalar_system(2, 3, {2.0}, {1.0}, {-8.0}));
    auto& s = std::get<ReductionState>(r);
    CHECK(s.eta1 == doctest::Approx(4.0));
    CHECK(s.beta1 == doctest::Approx(-4.0));
    CHECK(dot(s.p_cur, s.q_cur) == doctest::Approx(1.0));
  }
  SUBCASE("orthogonal shadow vector") {
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    const PartitionedSystem sys = PartitionedSystem::make(
        Operator::dense(I), Operator::dense(I), 1.0, 1.0, {0.0, 1.0}, {1.0, 0.0}, Vector{1.0, 0.0});
    auto r = reduction_init(sys);
    REQUIRE(std::holds_alternative<BreakdownReport>(r));
    const auto& b = std::get<BreakdownReport>(r);
    CHECK(b.kind == BreakdownKind::p_q);
    CHECK(b.iteration == 1);
    CHECK(b.magnitude >= 0.0);
  }
}

TEST_CASE("1x1 step ends in a lucky breakdown at k = 2") {
  const PartitionedSystem sys = scalar_system(2, 3, {1.0}, {1.0}, {1.0});
  auto r = reduction_init(sys);
  auto& s = std::get<ReductionState>(r);
  const StepOutcome out = reduction_step(s, sys);
  CHECK(out.coeffs.alpha == doctest::Approx(2.0));
  CHECK(out.coeffs.theta == doctest::Approx(3.0));
  CHECK(out.breakdown);
  CHECK(out.breakdown.lucky);
  CHECK(out.breakdown.iteration == 2);
  CHECK(out.coeffs.beta == 0.0);
  CHECK(out.coeffs.delta == 0.0);
}

TEST_CASE("four operator applications per step") {
  int calls = 0;
  auto counting = [&](const Operator& op) {
    return Operator(
        op.rows(), op.cols(),
        [&calls, op](std::span<const double> x, std::span<double> y, double a, double b) {
          ++calls;
          op.apply(x, y, a, b);
        },
        [&calls, op](std::span<const double> x, std::span<double> y, double a, double b) {
          ++calls;
          op.apply_transpose(x, y, a, b);
        });
  };
  RandomSystemOptions o;
  o.m = 6;
  o.n = 4;
  PartitionedSystem sys = random_system(o);
  sys.A = counting(sys.A);
  sys.B = counting(sys.B);
  auto r = reduction_init(sys);
  auto& s = std::get<ReductionState>(r);
  for (int i = 0; i < 3; ++i) {
    calls = 0;
    reduction_step(s, sys);
    CHECK(calls == 4);
  }
}

TEST_CASE("biorthogonality and the four matrix relations") {
  RandomSystemOptions o;
  o.m = 20;
  o.n = 20;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    o.seed = seed;
    const PartitionedSystem sys = random_system(o);
    const std::size_t k = 10;
    const ReductionHistory h = run(sys, k);
    const Eigen::MatrixXd A = sys.A.to_dense(), B = sys.B.to_dense();
    const Eigen::MatrixXd Pk = h.P(k), Qk = h.Q(k), Uk = h.U(k), Vk = h.V(k);
    const auto I = Eigen::MatrixXd::Identity(k, k);
    CHECK(max_abs(Pk.transpose() * Qk - I) <= 1e-8);
    CHECK(max_abs(Uk.transpose() * Vk - I) <= 1e-8);
    const Eigen::MatrixXd Skp1k = h.S(k + 1, k), Tkp1k = h.T(k + 1, k);
    const Eigen::MatrixXd Skkp1 = h.S(k, k + 1), Tkkp1 = h.T(k, k + 1);
    CHECK((A * Uk - h.Q(k + 1) * Skp1k).norm() <= 1e-10 * A.norm() * Uk.norm());
    CHECK((A.transpose() * Pk - h.V(k + 1) * Skkp1.transpose()).norm() <=
          1e-10 * A.norm() * Pk.norm());
    CHECK((B * Qk - h.U(k + 1) * Tkp1k).norm() <= 1e-10 * B.norm() * Qk.norm());
    CHECK((B.transpose() * Vk - h.P(k + 1) * Tkkp1.transpose()).norm() <=
          1e-10 * B.norm() * Vk.norm());
  }
}

TEST_CASE("tridiagonal matrices follow the stencil") {
  RandomSystemOptions o;
  o.m = 7;
  o.n = 5;
  const ReductionHistory h = run(random_system(o), 4);
  const Eigen::MatrixXd S = h.S(4, 4), T = h.T(4, 4);
  const CoefficientSequence& c = h.coefficients();
  CHECK(S(0, 0) == c.alpha[0]);
  CHECK(S(1, 0) == c.beta[1]);
  CHECK(S(0, 1) == c.gamma[1]);
  CHECK(T(2, 2) == c.theta[2]);
  CHECK(T(3, 2) == c.delta[3]);
  CHECK(T(2, 3) == c.eta[3]);
  CHECK(S(3, 0) == 0.0);
}

TEST_CASE("symmetric coupling with f = b, g = c keeps p = q and u = v") {
  RandomSystemOptions o;
  o.m = 15;
  o.n = 15;
  o.symmetric_coupling = true;
  o.seed = 4;
  const PartitionedSystem sys = random_system(o);
  auto r = reduction_init(sys);
  auto& s = std::get<ReductionState>(r);
  for (int k = 0; k < 8; ++k) {
    reduction_step(s, sys);
    Vector dp = s.p_cur, du = s.u_cur;
    axpy(-1.0, s.q_cur, dp);
    axpy(-1.0, s.v_cur, du);
    CHECK(norm2(dp) <= 1e-10);
    CHECK(norm2(du) <= 1e-10);
  }
}

TEST_CASE("projected identity K W_k = W_{k+1} H_{k+1,k}") {
  RandomSystemOptions o;
  o.m = 5;
  o.n = 5;
  o.seed = 8;
  const PartitionedSystem sys = random_system(o);
  for (std::size_t k = 1; k <= 4; ++k) {
    const ReductionHistory h = run(sys, k);
    const Eigen::MatrixXd K = assemble_dense(sys);
    const Eigen::MatrixXd H = projected(h, sys.lambda, sys.mu, k);
    CHECK((K * h.W(k) - h.W(k + 1) * H).norm() <= 1e-10 * K.norm());
    // full column rank of H_{k+1,k}; full row rank of H_{k-1,k}
    const Eigen::VectorXd sv = H.jacobiSvd().singularValues();
    CHECK(sv(sv.size() - 1) > 1e-10);
    if (k >= 2) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(H.topRows(static_cast<Eigen::Index>(2 * k - 2)));
      CHECK(lu.rank() == static_cast<Eigen::Index>(2 * k - 2));
    }
  }
}

TEST_CASE("build_projected_H stencil for k = 1") {
  CoefficientSequence c;
  c.alpha = {2.0};
  c.theta = {3.0};
  c.beta = {1.0, 0.0};
  c.delta = {1.0, 0.0};
  c.gamma = {1.0, 0.0};
  c.eta = {1.0, 0.0};
  Eigen::MatrixXd expect(4, 2);
  expect << 1, 2, 3, 1, 0, 0, 0, 0;
  CHECK(build_projected_H(c, 1.0, 1.0, 1) == expect);
}

TEST_CASE("basis vectors lie in the block Krylov spans") {
  RandomSystemOptions o;
  o.m = 16;
  o.n = 14;
  o.seed = 2;
  o.random_shadows = true;
  const PartitionedSystem sys = random_system(o);
  const ReductionHistory h = run(sys, 6);
  const Eigen::MatrixXd A = sys.A.to_dense(), B = sys.B.to_dense();
  const auto m = static_cast<Eigen::Index>(sys.m()), n = static_cast<Eigen::Index>(sys.n());
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(sys.b.data(), m);
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(sys.c.data(), n);
  // q_j in span{(AB)^i b, i < ceil(j/2)} + span{(AB)^i A c, i < floor(j/2)}
  for (std::size_t j = 1; j <= 6; ++j) {
    const std::size_t nb = (j + 1) / 2, nc = j / 2;
    Eigen::MatrixXd M(m, static_cast<Eigen::Index>(nb + nc));
    Eigen::VectorXd vb = b, vc = A * c;
    for (std::size_t i = 0; i < nb; ++i, vb = A * (B * vb)) M.col(static_cast<Eigen::Index>(i)) = vb;
    for (std::size_t i = 0; i < nc; ++i, vc = A * (B * vc)) {
      M.col(static_cast<Eigen::Index>(nb + i)) = vc;
    }
    CHECK(outside_span(M, h.Q(j).col(static_cast<Eigen::Index>(j - 1))) <= 1e-8);
  }
  // u_j likewise with (BA), c and B b
  for (std::size_t j = 1; j <= 6; ++j) {
    const std::size_t nc = (j + 1) / 2, nb = j / 2;
    Eigen::MatrixXd M(n, static_cast<Eigen::Index>(nb + nc));
    Eigen::VectorXd vc = c, vb = B * b;
    for (std::size_t i = 0; i < nc; ++i, vc = B * (A * vc)) M.col(static_cast<Eigen::Index>(i)) = vc;
    for (std::size_t i = 0; i < nb; ++i, vb = B * (A * vb)) {
      M.col(static_cast<Eigen::Index>(nc + i)) = vb;
    }
    CHECK(outside_span(M, h.U(j).col(static_cast<Eigen::Index>(j - 1))) <= 1e-8);
  }
}
