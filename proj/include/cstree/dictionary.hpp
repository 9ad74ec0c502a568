#pragma once

#include "cstree/types.hpp"

#include <cstdint>
#include <vector>

namespace cstree {

struct WhitenResult {
  DenseMatrix Yw;    // p x q, with Yw * Yw' = q * I
  DenseMatrix Winv;  // n x p, Winv * Yw reproduces Y on its rank-p subspace
};

/// Whitens Y against its top-p eigenspace: Yw = sqrt(q) * L^{-1/2} Q' Y for
/// the eigen-pairs (L, Q) of Y Y'. Throws RankError (with the measured rank)
/// when the numerical rank of Y is below p.
WhitenResult whiten(const DenseMatrix& Y, Index p, double rank_rel_tol = 1e-10);

/// Fixed-point l4-norm maximization over the orthogonal group:
///   U <- PolarFactor( (U Yw)^{o3} Yw' )
/// starting from a seeded random orthogonal matrix (or `init` when given).
/// Stops when ||U_{k+1} - U_k||_F <= tol or after `iters` rounds. The
/// per-sample objective ||U Yw||_4^4 / q is appended to `trace` (when
/// non-null) once per round and is non-decreasing along the iteration.
DenseMatrix l4_maximize(const DenseMatrix& Yw, int iters, double tol, std::uint64_t seed,
                        std::vector<double>* trace = nullptr, int* iterations_taken = nullptr,
                        const DenseMatrix* init = nullptr);

struct FactorizationOptions {
  int l4_iters = 500;
  double l4_tol = 1e-10;
  std::uint64_t seed = 0;
  double fit_tol = 1e-6;         // relative Frobenius reconstruction tolerance
  double rank_rel_tol = 1e-10;
};

struct FactorizationResult {
  DenseMatrix X_bar;  // n x p dictionary estimate
  DenseMatrix Z_bar;  // p x q sparse codes
  int iterations = 0;
  std::vector<double> objective_trace;
  double fit_relative = 0.0;  // ||Y - X_bar Z_bar||_F / ||Y||_F
};

/// Sparse factorization Y ~ X_bar * Z_bar: whiten, maximize the l4 norm over
/// the orthogonal group, then read off Z_bar = U Yw and X_bar = Winv U'.
FactorizationResult sparse_factor(const DenseMatrix& Y, Index p,
                                  const FactorizationOptions& opts = {});

/// Column-wise discretization to {-1, 0, 1}: normalize by the largest
/// absolute entry, then keep the sign of entries with magnitude >= threshold.
/// Zero columns pass through unchanged; `had_zero_column` reports them.
DenseMatrix scale_snap(const DenseMatrix& X_bar, double snap_threshold = 0.5,
                       bool* had_zero_column = nullptr);

/// Uniform scaling X_bar * sqrt(n) / ||A||_F (n = rows of X_bar), the
/// normalization under which A X_bar is expected to act as a near-isometry.
DenseMatrix scale_rip(const DenseMatrix& X_bar, const DenseMatrix& A);

struct SignedPermMatch {
  bool matched = false;
  std::vector<Index> permutation;  // column j of X_true matches column perm[j] of X_hat
  std::vector<int> signs;          // sign applied to the matched X_hat column
  double max_error = 0.0;          // worst per-pair inf-norm error after unit normalization
};

/// Greedy maximum-|cosine| assignment between the columns of X_hat and
/// X_true. Succeeds when every matched pair agrees entrywise to `tol` after
/// unit normalization and a sign flip. Greedy (not optimal) assignment; exact
/// enough when correlations are near-binary.
SignedPermMatch match_up_to_signed_permutation(const DenseMatrix& X_hat,
                                               const DenseMatrix& X_true, double tol);

}  // namespace cstree
