#pragma once

#include "cstree/types.hpp"

#include <cstdint>
#include <optional>

namespace cstree {

struct SolverOptions {
  int max_iters = 20000;
  double step_size = 1.0;     // initial step; halved on stall
  double grad_tol = 1e-10;
  double zero_tol = kDefaultZeroTol;

  void validate() const;
};

/// Orthonormal basis N of ker(A), via SVD; A*N vanishes to 1e-10 * ||A||.
/// A full-rank square or tall matrix yields a 0-column basis.
DenseMatrix kernel_basis(const DenseMatrix& A);

/// Exhaustive l0 minimization: scans supports of size 0, 1, 2, ... up to
/// max_support in lexicographic order and returns the first support whose
/// least-squares fit satisfies ||A x - b||_inf <= zero_tol. The scan order
/// makes the tie-break deterministic: lexicographically smallest support of
/// minimal size, and the minimum-norm fit on that support.
///
/// Returns std::nullopt when no support within the budget fits ("no solution
/// in budget"). Throws BudgetError if more than enumeration_budget supports
/// would have to be scanned.
std::optional<SparseVector> solve_l0_brute(const DenseMatrix& A, const Vector& b,
                                           Index max_support, double zero_tol,
                                           std::uint64_t enumeration_budget = 200'000'000ULL);

/// l1 minimization via subgradient descent in the kernel: parametrize
/// x = x0 + N v with x0 the least-norm particular solution, descend on
/// ||x0 + N v||_1, then refit on the detected support. The returned solution
/// satisfies ||A x - b||_inf <= 1e-8 * max(1, ||b||_inf); entries at or below
/// opts.zero_tol are exact zeros. Throws InfeasibleError when A x = b has no
/// solution.
SparseVector solve_l1(const DenseMatrix& A, const Vector& b, const SolverOptions& opts = {});

struct PriorSolution {
  SparseVector z;  // coefficients in the prior
  SparseVector x;  // X * z, in the ambient space
};

/// l1 with prior knowledge: min ||z||_1 s.t. (A X) z = b, same kernel-descent
/// algorithm applied to the product matrix. Also returns x = X z.
PriorSolution solve_l1_prior(const DenseMatrix& A, const DenseMatrix& X, const Vector& b,
                             const SolverOptions& opts = {});

/// Orthogonal matching pursuit on the product A X: greedy index selection by
/// |(A X)_{.j}' r|, support growth, least-squares refit. Ties break toward the
/// smallest index; a singular refit falls back to the minimum-norm solution.
/// Stops when ||r||_2 <= res_tol or after max_steps selections. The residual
/// norm after every refit lands in residual_trace (when non-null) and is
/// non-increasing.
PriorSolution omp_prior(const DenseMatrix& A, const DenseMatrix& X, const Vector& b,
                        Index max_steps, double res_tol, double zero_tol = kDefaultZeroTol,
                        std::vector<double>* residual_trace = nullptr);

}  // namespace cstree
