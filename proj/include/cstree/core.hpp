#pragma once

#include "cstree/rng.hpp"
#include "cstree/types.hpp"

namespace cstree {

/// Samples a rows x cols Bernoulli-Subgaussian matrix: each entry is zero
/// with probability 1 - theta, otherwise drawn from the chosen subgaussian
/// law. Deterministic for a fixed seed.
DenseMatrix sample_bernoulli_subgaussian(Index rows, Index cols,
                                         const BernoulliSubgaussianParams& params,
                                         std::uint64_t seed);

/// Training coefficients Z in R^{p x q}: restricted Bernoulli-Subgaussian
/// with rate theta = tbar / (2p), so columns have expected sparsity tbar/2.
/// Emits a warning through `warning` (when non-null) if q <= p^2, which runs
/// against the sample-size requirement q > c p^2 log^2 p.
DenseMatrix sample_training_coefficients(Index p, Index q, double tbar, std::uint64_t seed,
                                         std::string* warning = nullptr);

}  // namespace cstree
