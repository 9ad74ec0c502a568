#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cstree {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;
using Partition = std::vector<IndexSet>;

/// Default threshold for classifying numerical zeros. Gradient-descent
/// solvers leave residue around 1e-7, so anything below this is treated
/// as an exact zero.
inline constexpr double kDefaultZeroTol = 1e-6;

// ---------------------------------------------------------------------------
// Error taxonomy. All carry a human-readable message; some carry the
// measured quantity that triggered them.
// ---------------------------------------------------------------------------

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PartitionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankError : public std::runtime_error {
 public:
  RankError(const std::string& msg, Index measured)
      : std::runtime_error(msg + " (measured rank " + std::to_string(measured) + ")"),
        measured_rank(measured) {}
  Index measured_rank;
};

class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& msg, std::uint64_t required, std::uint64_t budget)
      : std::runtime_error(msg + " (required " + std::to_string(required) + ", budget " +
                           std::to_string(budget) + ")"),
        required(required),
        budget(budget) {}
  std::uint64_t required;
  std::uint64_t budget;
};

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientDataError : public std::runtime_error {
 public:
  InsufficientDataError(const std::string& msg, Index got, Index need)
      : std::runtime_error(msg + " (got " + std::to_string(got) + ", need " +
                           std::to_string(need) + ")"),
        got(got),
        need(need) {}
  Index got;
  Index need;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// SparseVector: index/value representation of a sparse solution.
// ---------------------------------------------------------------------------

/// Sparse vector as sorted (index, value) pairs over an ambient dimension.
/// Stored values always satisfy |value| > zero_tol; anything smaller is an
/// exact zero by convention. The strict inequality makes sparsity monotone
/// non-increasing in zero_tol.
struct SparseVector {
  Index dim = 0;
  IndexSet support;            // strictly increasing, all < dim
  std::vector<double> values;  // aligned with support
  double zero_tol = kDefaultZeroTol;

  Index sparsity() const { return static_cast<Index>(support.size()); }

  Vector to_dense() const;

  /// Builds a SparseVector keeping entries with |v_i| > zero_tol.
  static SparseVector from_dense(const Vector& v, double zero_tol = kDefaultZeroTol);

  /// Throws ParameterError if any structural invariant is violated.
  void validate() const;
};

/// Number of entries with |v_i| strictly greater than zero_tol.
Index sparsity(const Vector& v, double zero_tol = 0.0);

// ---------------------------------------------------------------------------
// Probability model parameters (Bernoulli-Subgaussian matrices).
// ---------------------------------------------------------------------------

enum class SubgaussianLaw { gaussian, rademacher };

std::string to_string(SubgaussianLaw law);
SubgaussianLaw subgaussian_law_from_string(const std::string& s);

/// Entrywise model M_jk = Omega_jk * R_jk with Omega ~ Bernoulli(theta) and
/// R subgaussian. The restricted variant additionally requires
/// P(R=0)=0, E|R| in [1/10, 1] and E R^2 <= 1; rademacher satisfies all of
/// them exactly, gaussian only with nu2 = 1 (E|R| = sqrt(2/pi) ~ 0.7979).
struct BernoulliSubgaussianParams {
  double theta = 1.0;       // Bernoulli rate, in (0, 1]
  double nu2 = 1.0;         // E R^2
  double psi2_bound = 1.0;  // bound on ||R||_psi2 / nu
  bool restricted = false;
  SubgaussianLaw law = SubgaussianLaw::rademacher;

  void validate() const;
};

// ---------------------------------------------------------------------------
// A single underdetermined problem, optionally with a planted solution.
// ---------------------------------------------------------------------------

struct ProblemInstance {
  DenseMatrix A;  // m x n
  Vector b;       // length m
  std::optional<SparseVector> known_solution;

  /// Checks dimensions and, when a solution is attached, the residual
  /// bound ||A x - b||_inf <= 1e-9 * max(1, ||b||_inf).
  void validate() const;
};

/// Stable rank ||M||_F^2 / sigma_max(M)^2. Throws DomainError on zero input.
double stable_rank(const DenseMatrix& M);

}  // namespace cstree
