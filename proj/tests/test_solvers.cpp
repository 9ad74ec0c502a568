#include "cstree/solvers.hpp"

#include "cstree/core.hpp"
#include "cstree/lp.hpp"
#include "cstree/rng.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <numeric>

using namespace cstree;

namespace {

DenseMatrix random_gaussian(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  DenseMatrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = scale * rng.normal();
  return M;
}

// Independent least-squares feasibility oracle for one support.
bool support_feasible(const DenseMatrix& A, const Vector& b, const std::vector<Index>& supp,
                      double tol) {
  DenseMatrix sub(A.rows(), static_cast<Index>(supp.size()));
  for (std::size_t i = 0; i < supp.size(); ++i) sub.col(static_cast<Index>(i)) = A.col(supp[i]);
  Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(sub);
  const Vector c = cod.solve(b);
  return (sub * c - b).lpNorm<Eigen::Infinity>() <= tol;
}

}  // namespace

TEST_CASE("kernel basis of a wide row vector") {
  DenseMatrix A(1, 2);
  A << 1, 1;
  const DenseMatrix N = kernel_basis(A);
  REQUIRE(N.cols() == 1);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(std::abs(N(0, 0)) - inv_sqrt2) < 1e-12);
  CHECK(std::abs(N(0, 0) + N(1, 0)) < 1e-12);  // proportional to (1, -1)
}

TEST_CASE("kernel basis of the identity is empty") {
  CHECK(kernel_basis(DenseMatrix::Identity(3, 3)).cols() == 0);
}

TEST_CASE("kernel basis of a random full-rank wide matrix") {
  const DenseMatrix A = random_gaussian(4, 8, 21);
  const DenseMatrix N = kernel_basis(A);
  REQUIRE(N.cols() == 4);
  CHECK((A * N).norm() < 1e-9);
  CHECK((N.transpose() * N - DenseMatrix::Identity(4, 4)).norm() < 1e-12);
}

TEST_CASE("brute l0: identity system") {
  DenseMatrix A = DenseMatrix::Identity(2, 2);
  Vector b(2);
  b << 1, 0;
  const auto x = solve_l0_brute(A, b, 2, 1e-9);
  REQUIRE(x.has_value());
  CHECK(x->sparsity() == 1);
  CHECK(x->support == IndexSet{0});
  CHECK(x->values[0] == doctest::Approx(1.0));
}

TEST_CASE("brute l0 finds the single-column representation") {
  DenseMatrix A(2, 3);
  A << 1, 0, 1, 0, 1, 1;
  Vector b(2);
  b << 1, 1;
  const auto x = solve_l0_brute(A, b, 3, 1e-9);
  REQUIRE(x.has_value());
  CHECK(x->support == IndexSet{2});
  CHECK(x->values[0] == doctest::Approx(1.0));
}

TEST_CASE("brute l0: zero right-hand side gives the empty support") {
  DenseMatrix A = DenseMatrix::Identity(3, 3);
  const auto x = solve_l0_brute(A, Vector::Zero(3), 3, 1e-9);
  REQUIRE(x.has_value());
  CHECK(x->sparsity() == 0);
}

TEST_CASE("brute l0 reports 'no solution in budget' as empty optional") {
  DenseMatrix A = DenseMatrix::Identity(2, 2);
  Vector b(2);
  b << 1, 1;
  CHECK(!solve_l0_brute(A, b, 1, 1e-9).has_value());
}

TEST_CASE("brute l0 tie-break picks the lexicographically smallest support") {
  DenseMatrix A(1, 2);
  A << 1, 1;
  Vector b(1);
  b << 1;
  const auto x = solve_l0_brute(A, b, 2, 1e-9);
  REQUIRE(x.has_value());
  CHECK(x->support == IndexSet{0});
}

TEST_CASE("brute l0 enumeration budget error") {
  const DenseMatrix A = random_gaussian(4, 20, 33);
  Vector b = A * Vector::Ones(20);
  CHECK_THROWS_AS(solve_l0_brute(A, b, 4, 1e-9, 100), BudgetError);
}

TEST_CASE("brute l0 minimality certified by full enumeration") {
  Rng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix A = random_gaussian(5, 10, 100 + trial);
    Vector planted = Vector::Zero(10);
    planted[1] = 1.0 + rng.uniform01();
    planted[7] = -1.0 - rng.uniform01();
    const Vector b = A * planted;
    const auto x = solve_l0_brute(A, b, 5, 1e-8);
    REQUIRE(x.has_value());
    // Oracle: no support strictly smaller than the returned one is feasible.
    const Index k = x->sparsity();
    std::vector<Index> supp;
    const Index n = 10;
    for (Index size = 1; size < k; ++size) {
      supp.assign(size, 0);
      std::iota(supp.begin(), supp.end(), Index{0});
      while (true) {
        CHECK(!support_feasible(A, b, supp, 1e-8));
        Index pos = size - 1;
        while (pos >= 0 && supp[pos] == n - size + pos) --pos;
        if (pos < 0) break;
        ++supp[pos];
        for (Index i = pos + 1; i < size; ++i) supp[i] = supp[i - 1] + 1;
      }
    }
  }
}

TEST_CASE("l1 kernel descent: trivial kernel coordinate") {
  DenseMatrix A(2, 3);
  A << 1, 0, 0, 0, 1, 0;
  Vector b(2);
  b << 1, 2;
  const SparseVector x = solve_l1(A, b);
  Vector expected(3);
  expected << 1, 2, 0;
  CHECK((x.to_dense() - expected).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("l1 kernel descent achieves the LP optimum on the flat constraint") {
  DenseMatrix A(1, 2);
  A << 1, 1;
  Vector b(1);
  b << 2;
  const SparseVector x = solve_l1(A, b);
  CHECK(x.to_dense().lpNorm<1>() <= 2.0 + 1e-6);
  CHECK((A * x.to_dense() - b).lpNorm<Eigen::Infinity>() <= 1e-8 * 2.0);
}

TEST_CASE("l1 recovers 2-sparse vectors through gaussian measurements") {
  int hits = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    const DenseMatrix A = random_gaussian(20, 40, 900 + trial, 1.0 / std::sqrt(20.0));
    Rng rng(7000 + trial);
    Vector planted = Vector::Zero(40);
    const Index i = static_cast<Index>(rng.below(40));
    Index j = static_cast<Index>(rng.below(40));
    while (j == i) j = static_cast<Index>(rng.below(40));
    planted[i] = rng.rademacher() * (0.5 + 1.5 * rng.uniform01());
    planted[j] = rng.rademacher() * (0.5 + 1.5 * rng.uniform01());
    const Vector b = A * planted;

    const SparseVector x = solve_l1(A, b);
    const auto oracle = solve_l0_brute(A, b, 2, 1e-8);
    REQUIRE(oracle.has_value());
    if ((x.to_dense() - oracle->to_dense()).lpNorm<Eigen::Infinity>() <= 1e-4) ++hits;
  }
  CHECK(hits >= 18);  // desk-scale mirror of the 95/100 full experiment
}

TEST_CASE("l1 rejects infeasible systems") {
  DenseMatrix A(2, 1);
  A << 1, 1;
  Vector b(2);
  b << 1, 2;
  CHECK_THROWS_AS(solve_l1(A, b), InfeasibleError);
}

TEST_CASE("l1 certificate: kernel descent matches the LP value on small systems") {
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix A = random_gaussian(6, 14, 40 + trial);
    Rng rng(500 + trial);
    Vector x0 = Vector::Zero(14);
    for (int k = 0; k < 3; ++k)
      x0[static_cast<Index>(rng.below(14))] = rng.normal();
    const Vector b = A * x0;

    const SparseVector x = solve_l1(A, b);
    const LpResult lp = l1_min_lp(A, b);
    REQUIRE(lp.status == LpResult::Status::optimal);
    const double reference = lp.objective;
    CHECK(x.to_dense().lpNorm<1>() <= reference * (1.0 + 1e-4) + 1e-9);
  }
}

TEST_CASE("l1 with identity prior reduces to plain l1") {
  const DenseMatrix A = random_gaussian(5, 12, 77);
  Rng rng(78);
  Vector x0 = Vector::Zero(12);
  x0[2] = 1.2;
  x0[9] = -0.7;
  const Vector b = A * x0;
  const SparseVector plain = solve_l1(A, b);
  const PriorSolution prior = solve_l1_prior(A, DenseMatrix::Identity(12, 12), b);
  CHECK(std::abs(plain.to_dense().lpNorm<1>() - prior.x.to_dense().lpNorm<1>()) < 1e-6);
  CHECK(std::abs(prior.z.to_dense().lpNorm<1>() - prior.x.to_dense().lpNorm<1>()) < 1e-9);
}

TEST_CASE("l1 with prior recovers unit coefficients when A X acts as a near isometry") {
  for (int trial = 0; trial < 5; ++trial) {
    const DenseMatrix A = random_gaussian(10, 24, 300 + trial, 1.0 / std::sqrt(10.0));
    // Sparse prior columns keep A X well conditioned on sparse coefficients.
    BernoulliSubgaussianParams params;
    params.theta = 0.25;
    params.law = SubgaussianLaw::gaussian;
    const DenseMatrix X = sample_bernoulli_subgaussian(24, 8, params, 400 + trial);
    const Index k = static_cast<Index>(trial % 8);
    const Vector b = (A * X).col(k);

    const PriorSolution sol = solve_l1_prior(A, X, b);
    // Oracle: the brute-force l0 solution on A X is the unit vector e_k.
    const auto oracle = solve_l0_brute(A * X, b, 1, 1e-8);
    REQUIRE(oracle.has_value());
    REQUIRE(oracle->support == IndexSet{k});
    CHECK((sol.z.to_dense() - oracle->to_dense()).lpNorm<Eigen::Infinity>() < 1e-5);
  }
}

TEST_CASE("l1 with prior: zero right-hand side") {
  const DenseMatrix A = random_gaussian(4, 8, 11);
  const DenseMatrix X = random_gaussian(8, 6, 12);
  const PriorSolution sol = solve_l1_prior(A, X, Vector::Zero(4));
  CHECK(sol.z.sparsity() == 0);
  CHECK(sol.x.sparsity() == 0);
}

TEST_CASE("omp selects an exact column immediately") {
  const DenseMatrix A = random_gaussian(6, 10, 61);
  const DenseMatrix X = DenseMatrix::Identity(10, 10);
  const Vector b = (A * X).col(4);
  std::vector<double> trace;
  const PriorSolution sol = omp_prior(A, X, b, 5, 1e-10, kDefaultZeroTol, &trace);
  CHECK(sol.z.support == IndexSet{4});
  CHECK(trace.back() <= 1e-10);
  CHECK(trace.size() == 2);  // initial residual + one refit
}

TEST_CASE("omp: zero right-hand side gives an empty support") {
  const DenseMatrix A = random_gaussian(6, 10, 62);
  const PriorSolution sol = omp_prior(A, DenseMatrix::Identity(10, 10), Vector::Zero(6), 5, 1e-10);
  CHECK(sol.z.sparsity() == 0);
}

TEST_CASE("omp recovers 2-sparse coefficients on near-isometric products") {
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix A = random_gaussian(12, 30, 800 + trial, 1.0 / std::sqrt(12.0));
    BernoulliSubgaussianParams params;
    params.theta = 0.2;
    params.law = SubgaussianLaw::gaussian;
    const DenseMatrix X = sample_bernoulli_subgaussian(30, 10, params, 850 + trial);
    Rng rng(880 + trial);
    Vector z = Vector::Zero(10);
    const Index i = static_cast<Index>(rng.below(10));
    Index j = static_cast<Index>(rng.below(10));
    while (j == i) j = static_cast<Index>(rng.below(10));
    z[i] = 1.0 + rng.uniform01();
    z[j] = -1.0 - rng.uniform01();
    const Vector b = A * X * z;

    std::vector<double> trace;
    const PriorSolution sol = omp_prior(A, X, b, 2, 1e-8, kDefaultZeroTol, &trace);
    // Brute-force check on the product matrix.
    const auto oracle = solve_l0_brute(A * X, b, 2, 1e-8);
    REQUIRE(oracle.has_value());
    CHECK(sol.z.support == oracle->support);
    for (std::size_t s = 1; s < trace.size(); ++s) CHECK(trace[s] <= trace[s - 1] + 1e-12);
  }
}

TEST_CASE("solver options are validated") {
  SolverOptions opts;
  opts.max_iters = 0;
  CHECK_THROWS_AS(opts.validate(), ParameterError);
  opts = SolverOptions{};
  opts.step_size = -1.0;
  CHECK_THROWS_AS(opts.validate(), ParameterError);
}
