#pragma once

#include "cstree/types.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace cstree {

/// Exact restricted-isometry constant by support enumeration:
///   delta_t = max over |S| = t of max |sigma^2 - 1| over the eigenvalues of
///   (M_S)' M_S.
/// Eigenvalue interlacing makes size-t supports the worst case, so smaller
/// supports need not be scanned. Throws BudgetError when C(p, t) exceeds
/// support_budget.
double rip_constant_brute(const DenseMatrix& M, Index t,
                          std::uint64_t support_budget = 2'000'000ULL);

enum class NspMode { exact_small, monte_carlo };

struct NspCertificate {
  NspMode mode = NspMode::exact_small;
  bool holds = false;
  std::uint64_t cases_checked = 0;
  std::optional<Vector> violation;  // kernel vector with ||v_S||_1 >= ||v_Sc||_1
  std::string note;
};

/// Null space property of order t: ||v_S||_1 < ||v_Sc||_1 for every nonzero
/// kernel vector and every |S| <= t.
///
/// exact_small: for each support and sign pattern, solves the linear program
///   min ||v_Sc||_1  s.t.  v in ker(M), sigma' v_S = 1;
/// the property holds iff every optimum is > 1. Exact, but only feasible at
/// desk scale (kernel dimension <= 12, columns <= 20).
///
/// monte_carlo: samples random kernel directions; holds = true only means no
/// counterexample was found (the certificate note says so).
NspCertificate nsp_check(const DenseMatrix& M, Index t, NspMode mode,
                         std::uint64_t budget = 2'000'000ULL, std::uint64_t seed = 0,
                         int mc_samples = 2000);

/// Checks that the columns of A*S are linearly independent (SVD rank with
/// relative threshold 1e-10). Throws PartitionError if the columns of S do
/// not have disjoint supports.
bool check_split_independence(const DenseMatrix& A, const DenseMatrix& S);

/// Checks that every column of S is itself a global l0 minimizer of
/// A x = A S_col, by exhaustive search. Requires small dimensions.
bool check_split_global_optimality(const DenseMatrix& A, const DenseMatrix& S,
                                   std::uint64_t enumeration_budget = 50'000'000ULL,
                                   double zero_tol = 1e-9);

struct ExpectationTestResult {
  double empirical = 0.0;
  double expected = 0.0;
  double z_score = 0.0;
};

/// Monte Carlo check of E ||A R u||^2 = ||A||_F^2 ||u||^2 for an i.i.d.
/// mean-zero unit-variance R. The z-score is the deviation of the sample mean
/// in units of its standard error; an exactly matching zero-variance sample
/// reports z = 0.
ExpectationTestResult expectation_identity_test(const DenseMatrix& A, const Vector& u,
                                                int trials, std::uint64_t seed,
                                                SubgaussianLaw law = SubgaussianLaw::gaussian);

}  // namespace cstree
