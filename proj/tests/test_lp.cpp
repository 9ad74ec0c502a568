#include "cstree/lp.hpp"
#include "cstree/rng.hpp"

#include <doctest.h>

using namespace cstree;

TEST_CASE("simplex solves a tiny equality problem") {
  DenseMatrix A(1, 2);
  A << 1, 1;
  Vector b(1), c(2);
  b << 1;
  c << 1, 2;
  const LpResult r = solve_lp_standard(A, b, c);
  REQUIRE(r.status == LpResult::Status::optimal);
  CHECK(r.objective == doctest::Approx(1.0));
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(0.0));
}

TEST_CASE("simplex detects infeasibility") {
  DenseMatrix A(2, 1);
  A << 1, 1;
  Vector b(2), c(1);
  b << 1, 2;  // x = 1 and x = 2 simultaneously
  c << 1;
  CHECK(solve_lp_standard(A, b, c).status == LpResult::Status::infeasible);
}

TEST_CASE("simplex detects unboundedness") {
  DenseMatrix A(1, 2);
  A << 1, -1;
  Vector b(1), c(2);
  b << 0;
  c << -1, 0;  // minimize -x1 along the ray x1 = x2 -> -inf
  CHECK(solve_lp_standard(A, b, c).status == LpResult::Status::unbounded);
}

TEST_CASE("simplex handles negative right-hand sides") {
  DenseMatrix A(1, 2);
  A << -1, 1;
  Vector b(1), c(2);
  b << -2;  // row is scaled to x1 - x2 = 2
  c << 1, 1;
  const LpResult r = solve_lp_standard(A, b, c);
  REQUIRE(r.status == LpResult::Status::optimal);
  CHECK(r.objective == doctest::Approx(2.0));
  CHECK(r.x[0] == doctest::Approx(2.0));
}

TEST_CASE("l1 LP reproduces the known minimum for a flat constraint") {
  DenseMatrix A(1, 2);
  A << 1, 1;
  Vector b(1);
  b << 2;
  const LpResult r = l1_min_lp(A, b);
  REQUIRE(r.status == LpResult::Status::optimal);
  CHECK(r.objective == doctest::Approx(2.0));
  CHECK((A * r.x - b).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("l1 LP solutions are feasible and no denser than the raw system") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    DenseMatrix A(4, 9);
    for (Index j = 0; j < A.cols(); ++j)
      for (Index i = 0; i < A.rows(); ++i) A(i, j) = rng.normal();
    Vector x0 = Vector::Zero(9);
    x0[1] = 1.5;
    x0[6] = -0.75;
    const Vector b = A * x0;
    const LpResult r = l1_min_lp(A, b);
    REQUIRE(r.status == LpResult::Status::optimal);
    CHECK((A * r.x - b).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(r.objective <= x0.lpNorm<1>() + 1e-9);
  }
}

TEST_CASE("l1 LP is exact on identity systems") {
  DenseMatrix A = DenseMatrix::Identity(5, 5);
  Vector b(5);
  b << 1, -2, 0, 3, 0;
  const LpResult r = l1_min_lp(A, b);
  REQUIRE(r.status == LpResult::Status::optimal);
  CHECK((r.x - b).lpNorm<Eigen::Infinity>() < 1e-10);
}
