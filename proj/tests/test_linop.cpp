#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "gpk/error.hpp"
#include "oracle_support.hpp"

using namespace gpk;
using namespace gpk::testing;

TEST_CASE("apply_partitioned") {
  const PartitionedSystem one = one_by_one();
  auto [ox, oy] = apply_partitioned(one, Vector{1.0}, Vector{1.0});
  CHECK(ox[0] == 3.0);
  CHECK(oy[0] == 4.0);

  RandomSystemOptions o;
  o.m = 3;
  o.n = 2;
  o.lambda = 0.0;
  o.mu = 0.0;
  const PartitionedSystem zero = random_system(o);
  auto [zx, zy] = apply_partitioned(zero, Vector(3, 0.0), Vector(2, 0.0));
  CHECK(norm2(zx) == 0.0);
  CHECK(norm2(zy) == 0.0);

  o.lambda = 1.0;
  o.mu = -0.1;
  o.seed = 3;
  for (bool sparse : {false, true}) {
    o.sparse = sparse;
    const PartitionedSystem sys = random_system(o);
    const Vector x{0.5, -1.0, 2.0}, y{1.5, 0.25};
    auto [rx, ry] = apply_partitioned(sys, x, y);
    const Eigen::VectorXd expect = assemble_dense(sys) * stack(x, y);
    CHECK((stack(rx, ry) - expect).norm() <= 1e-12 * expect.norm());
  }
  CHECK_THROWS_AS(apply_partitioned(one, Vector{1.0, 2.0}, Vector{1.0}), DimensionError);
}

TEST_CASE("residual_norm") {
  const PartitionedSystem one = one_by_one();
  CHECK(residual_norm(one, Vector{0.0}, Vector{0.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(residual_norm(one, Vector{0.2}, Vector{0.4}) == doctest::Approx(0.0).epsilon(1e-15));
  RandomSystemOptions o;
  o.m = 4;
  o.n = 3;
  const PartitionedSystem sys = random_system(o);
  const Vector x{1, 2, 3, 4}, y{-1, 0, 1};
  const Eigen::VectorXd r = stack(sys.b, sys.c) - assemble_dense(sys) * stack(x, y);
  CHECK(residual_norm(sys, x, y) == doctest::Approx(r.norm()).epsilon(1e-12));
}

TEST_CASE("assemble_dense") {
  Eigen::MatrixXd expect(2, 2);
  expect << 1, 2, 3, 1;
  CHECK(assemble_dense(one_by_one()) == expect);
  RandomSystemOptions o;
  o.m = 3;
  o.n = 2;
  o.lambda = 0.0;
  o.mu = 0.0;
  const PartitionedSystem sys = random_system(o);
  const Eigen::MatrixXd K = assemble_dense(sys);
  CHECK(K.topLeftCorner(3, 3).isZero());
  CHECK(K.bottomRightCorner(2, 2).isZero());
  CHECK(K.topRightCorner(3, 2) == sys.A.to_dense());
  CHECK(K.bottomLeftCorner(2, 3) == sys.B.to_dense());
  CHECK_THROWS_AS(assemble_dense(sys, 4), SizeGuardError);
}

TEST_CASE("operators are adjoint") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  const Eigen::MatrixXd M = random_matrix(7, 5, 9);
  for (const Operator& op :
       {Operator::dense(M), Operator::sparse(SparseMatrix::from_dense(M))}) {
    Vector x(5), y(7);
    for (double& e : x) e = d(rng);
    for (double& e : y) e = d(rng);
    const double lhs = dot(y, op * x);
    const double rhs = dot(op.transpose_times(y), x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(op.transposed().rows() == 5);
    CHECK((op.to_dense() - M).norm() <= 1e-14);
  }
}

TEST_CASE("gemv semantics") {
  Eigen::MatrixXd M(2, 2);
  M << 1, 2, 3, 4;
  for (const Operator& op :
       {Operator::dense(M), Operator::sparse(SparseMatrix::from_dense(M))}) {
    Vector y{std::nan(""), 1.0};
    op.apply(Vector{1.0, 1.0}, y, 1.0, 0.0);
    CHECK(y[0] == 3.0);
    CHECK(y[1] == 7.0);
    op.apply(Vector{1.0, 0.0}, y, 2.0, -1.0);
    CHECK(y[0] == -1.0);
    CHECK(y[1] == -1.0);
  }
}

TEST_CASE("system validation") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Ones(2, 3);
  Eigen::MatrixXd B = Eigen::MatrixXd::Ones(3, 2);
  CHECK_THROWS_AS(PartitionedSystem::make(Operator::dense(A), Operator::dense(B), 1, 1,
                                          {0.0, 0.0}, {1.0, 1.0, 1.0}),
                  UsageError);
  CHECK_THROWS_AS(PartitionedSystem::make(Operator::dense(A), Operator::dense(A), 1, 1,
                                          {1.0, 0.0}, {1.0, 1.0, 1.0}),
                  DimensionError);
  const PartitionedSystem s = PartitionedSystem::make(Operator::dense(A), Operator::dense(B), 0,
                                                      0, {1.0, 0.0}, {1.0, 1.0, 1.0});
  CHECK(s.f == s.b);
  CHECK(s.g == s.c);
}

TEST_CASE("sparse matrix assembly sums duplicates and checks bounds") {
  SparseMatrix S(2, 2, {{0, 0, 1.0}, {1, 1, 2.0}, {0, 0, 3.0}});
  CHECK(S.nonzeros() == 2);
  CHECK(S.to_dense()(0, 0) == 4.0);
  CHECK_THROWS_AS(SparseMatrix(2, 2, {{2, 0, 1.0}}), DimensionError);
  const SparseMatrix T = S.transposed();
  CHECK(T.to_dense() == S.to_dense().transpose());
}
