#include "cstree/core.hpp"
#include "cstree/matrix_io.hpp"
#include "cstree/rng.hpp"

#include <doctest.h>

#include <sstream>

using namespace cstree;

TEST_CASE("bernoulli-subgaussian sampler hits the requested density") {
  BernoulliSubgaussianParams params;
  params.theta = 0.01;
  params.law = SubgaussianLaw::rademacher;
  const DenseMatrix M = sample_bernoulli_subgaussian(1000, 1000, params, 1);
  const double fraction = static_cast<double>(sparsity(Vector::Map(M.data(), M.size()), 0.0)) /
                          static_cast<double>(M.size());
  // 6-sigma window around theta for a million Bernoulli draws.
  CHECK(fraction >= 0.007);
  CHECK(fraction <= 0.013);
}

TEST_CASE("theta = 1 with rademacher law fills the matrix with +-1") {
  BernoulliSubgaussianParams params;
  params.theta = 1.0;
  params.law = SubgaussianLaw::rademacher;
  const DenseMatrix M = sample_bernoulli_subgaussian(2, 2, params, 7);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) CHECK(std::abs(M(i, j)) == 1.0);
}

TEST_CASE("sampler is deterministic per seed") {
  BernoulliSubgaussianParams params;
  params.theta = 0.3;
  params.law = SubgaussianLaw::gaussian;
  const DenseMatrix a = sample_bernoulli_subgaussian(20, 30, params, 42);
  const DenseMatrix b = sample_bernoulli_subgaussian(20, 30, params, 42);
  const DenseMatrix c = sample_bernoulli_subgaussian(20, 30, params, 43);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("sampler rejects bad parameters") {
  BernoulliSubgaussianParams params;
  params.theta = 0.0;
  CHECK_THROWS_AS(sample_bernoulli_subgaussian(2, 2, params, 0), ParameterError);
  params.theta = 1.5;
  CHECK_THROWS_AS(sample_bernoulli_subgaussian(2, 2, params, 0), ParameterError);
  params.theta = 0.5;
  params.restricted = true;
  params.law = SubgaussianLaw::gaussian;
  params.nu2 = 2.0;  // not normalized: fails the restricted moment conditions
  CHECK_THROWS_AS(sample_bernoulli_subgaussian(2, 2, params, 0), ParameterError);
  params.nu2 = 1.0;
  CHECK_NOTHROW(sample_bernoulli_subgaussian(2, 2, params, 0));
}

TEST_CASE("training coefficients have expected column sparsity tbar/2") {
  const DenseMatrix Z = sample_training_coefficients(100, 4000, 8.0, 3);
  double mean = 0.0;
  for (Index l = 0; l < Z.cols(); ++l) mean += static_cast<double>(sparsity(Z.col(l), 0.0));
  mean /= static_cast<double>(Z.cols());
  CHECK(mean >= 3.0);  // binomial concentration around tbar/2 = 4
  CHECK(mean <= 5.0);
}

TEST_CASE("training coefficients: tbar = 2p forces a dense column") {
  const DenseMatrix Z = sample_training_coefficients(4, 1, 8.0, 0);
  CHECK(sparsity(Z.col(0), 0.0) == 4);
  CHECK_THROWS_AS(sample_training_coefficients(4, 1, 9.0, 0), ParameterError);
}

TEST_CASE("training coefficients warn when q is too small") {
  std::string warning;
  sample_training_coefficients(10, 100, 2.0, 0, &warning);
  CHECK(!warning.empty());
  sample_training_coefficients(10, 101, 2.0, 0, &warning);
  CHECK(warning.empty());
}

TEST_CASE("restricted rademacher entries have E|R| = 1 exactly") {
  BernoulliSubgaussianParams params;
  params.theta = 1.0;
  params.restricted = true;
  params.law = SubgaussianLaw::rademacher;
  const DenseMatrix M = sample_bernoulli_subgaussian(50, 50, params, 5);
  CHECK(M.cwiseAbs().mean() == 1.0);
}

TEST_CASE("stable rank") {
  CHECK(stable_rank(DenseMatrix::Identity(5, 5)) == doctest::Approx(5.0).epsilon(1e-12));

  Vector u(3), v(4);
  u << 1, -2, 0.5;
  v << 3, 1, 0, 2;
  const DenseMatrix outer = u * v.transpose();
  CHECK(stable_rank(outer) == doctest::Approx(1.0).epsilon(1e-12));

  DenseMatrix D = DenseMatrix::Zero(2, 2);
  D(0, 0) = 2;
  D(1, 1) = 1;
  CHECK(stable_rank(D) == doctest::Approx(1.25).epsilon(1e-12));

  CHECK_THROWS_AS(stable_rank(DenseMatrix::Zero(3, 3)), DomainError);
}

TEST_CASE("stable rank lies in [1, rank] for random matrices") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    DenseMatrix M(6, 8);
    for (Index j = 0; j < M.cols(); ++j)
      for (Index i = 0; i < M.rows(); ++i) M(i, j) = rng.normal();
    const double sr = stable_rank(M);
    CHECK(sr >= 1.0 - 1e-12);
    CHECK(sr <= 6.0 + 1e-12);
  }
}

TEST_CASE("sparsity counts strictly above the threshold") {
  Vector v(3);
  v << 1, 0, -2;
  CHECK(sparsity(v, 0.0) == 2);

  Vector w(2);
  w << 1e-8, 0;
  CHECK(sparsity(w, 1e-6) == 0);

  Vector u(3);
  u << 0.5, 0.5, 0.5;
  CHECK(sparsity(u, 0.5) == 0);  // boundary: strict inequality
}

TEST_CASE("sparse vector round trip is the identity") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Vector v(20);
    for (Index i = 0; i < v.size(); ++i)
      v[i] = rng.uniform01() < 0.4 ? rng.normal() : 0.0;
    const SparseVector sv = SparseVector::from_dense(v, 1e-6);
    const SparseVector back = SparseVector::from_dense(sv.to_dense(), 1e-6);
    CHECK(back.support == sv.support);
    CHECK(back.values == sv.values);
  }
}

TEST_CASE("sparse vector invariants are enforced") {
  SparseVector bad;
  bad.dim = 5;
  bad.support = {3, 1};
  bad.values = {1.0, 2.0};
  CHECK_THROWS_AS(bad.validate(), ParameterError);

  bad.support = {1, 7};
  CHECK_THROWS_AS(bad.validate(), ParameterError);

  bad.support = {1, 3};
  bad.values = {1.0, 1e-9};  // below the default zero_tol
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("problem instance validates the planted solution residual") {
  ProblemInstance inst;
  inst.A = DenseMatrix::Identity(3, 3);
  inst.b = Vector::Zero(3);
  inst.b << 1, 0, 2;
  SparseVector x;
  x.dim = 3;
  x.support = {0, 2};
  x.values = {1.0, 2.0};
  inst.known_solution = x;
  CHECK_NOTHROW(inst.validate());

  inst.known_solution->values[0] = 1.1;
  CHECK_THROWS_AS(inst.validate(), ParameterError);
}

TEST_CASE("stream splitting separates node and purpose streams") {
  Rng a = split_stream(7, 3, StreamPurpose::class_random);
  Rng b = split_stream(7, 3, StreamPurpose::coefficients);
  Rng c = split_stream(7, 4, StreamPurpose::class_random);
  Rng a2 = split_stream(7, 3, StreamPurpose::class_random);
  const std::uint64_t va = a.next_u64();
  CHECK(va != b.next_u64());
  CHECK(va != c.next_u64());
  CHECK(va == a2.next_u64());
}

TEST_CASE("matrix csv round trip is exact at 17 significant digits") {
  Rng rng(13);
  DenseMatrix M(7, 5);
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) M(i, j) = rng.normal() * std::pow(10.0, (int)(i - 3));
  M(0, 0) = 1.0 / 3.0;
  M(1, 1) = -0.0;
  M(2, 2) = 1e-300;

  std::stringstream ss;
  write_matrix_csv(ss, M);
  const DenseMatrix back = read_matrix_csv(ss);
  REQUIRE(back.rows() == M.rows());
  REQUIRE(back.cols() == M.cols());
  CHECK(back == M);  // bit-exact
}

TEST_CASE("matrix csv rejects malformed input") {
  std::stringstream missing("2,2\n1,2\n");
  CHECK_THROWS_AS(read_matrix_csv(missing), IoError);
  std::stringstream garbage("2,2\n1,2\n3,x\n");
  CHECK_THROWS_AS(read_matrix_csv(garbage), IoError);
  std::stringstream extra("1,2\n1,2,3\n");
  CHECK_THROWS_AS(read_matrix_csv(extra), IoError);
}
