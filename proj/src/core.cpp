#include "cstree/core.hpp"

namespace cstree {

namespace {

double draw(Rng& rng, const BernoulliSubgaussianParams& params) {
  const double nu = std::sqrt(params.nu2);
  switch (params.law) {
    case SubgaussianLaw::gaussian:
      return nu * rng.normal();
    case SubgaussianLaw::rademacher:
      return nu * rng.rademacher();
  }
  return 0.0;  // unreachable
}

}  // namespace

DenseMatrix sample_bernoulli_subgaussian(Index rows, Index cols,
                                         const BernoulliSubgaussianParams& params,
                                         std::uint64_t seed) {
  params.validate();
  if (rows <= 0 || cols <= 0) throw ParameterError("sample_bernoulli_subgaussian: empty shape");
  Rng rng(seed);
  DenseMatrix M = DenseMatrix::Zero(rows, cols);
  // Column-major fill so the draw order matches Eigen's storage order.
  for (Index k = 0; k < cols; ++k) {
    for (Index j = 0; j < rows; ++j) {
      if (rng.uniform01() < params.theta) M(j, k) = draw(rng, params);
    }
  }
  return M;
}

DenseMatrix sample_training_coefficients(Index p, Index q, double tbar, std::uint64_t seed,
                                         std::string* warning) {
  if (p <= 0 || q <= 0) throw ParameterError("sample_training_coefficients: empty shape");
  if (tbar > 2.0 * static_cast<double>(p))
    throw ParameterError("sample_training_coefficients: tbar > 2p gives rate above 1");
  if (!(tbar > 0.0)) throw ParameterError("sample_training_coefficients: tbar must be positive");
  BernoulliSubgaussianParams params;
  params.theta = tbar / (2.0 * static_cast<double>(p));
  params.restricted = true;
  params.law = SubgaussianLaw::rademacher;
  if (warning) {
    warning->clear();
    if (q <= p * p)
      *warning = "sample count q <= p^2; the factorization guarantee expects q > c p^2 log^2 p";
  }
  return sample_bernoulli_subgaussian(p, q, params, seed);
}

}  // namespace cstree
