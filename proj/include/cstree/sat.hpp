#pragma once

#include "cstree/types.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace cstree {

/// A literal is a signed 1-based variable index in files and a
/// (variable, polarity) pair internally: variable indices are 0-based,
/// negated = true means the literal is the variable's negation.
struct Literal {
  Index variable = 0;
  bool negated = false;
};

/// 1-in-3-SAT instance: clauses of exactly three literals; a satisfying
/// assignment makes exactly one literal per clause true.
struct SatInstance {
  Index n_vars = 0;
  std::vector<std::array<Literal, 3>> clauses;

  void validate() const;
};

/// Reduction to a sparse linear system: variables become the pair
/// (y_i, z_i) with y encoding x_i and z encoding its negation. Clause k
/// contributes the row [C_k' D_k'] with C_k marking positive and D_k
/// negated literals; below the clause rows sit the identity blocks [I I].
/// The right-hand side is the all-ones vector. The instance is 1-in-3
/// satisfiable iff the system has an n-sparse solution.
ProblemInstance reduce_1in3sat(const SatInstance& inst);

/// True iff every clause has exactly one true literal under `assignment`.
bool check_1in3_assignment(const SatInstance& inst, const std::vector<bool>& assignment);

/// Reads an assignment back out of a solution of the reduced system: valid
/// when x is n-sparse and each pair (y_i, z_i) is (1, 0) or (0, 1) up to
/// zero_tol. Returns std::nullopt otherwise.
std::optional<std::vector<bool>> solution_to_assignment(const SparseVector& x, Index n_vars,
                                                        double zero_tol = 1e-4);

/// Identity-block certificate: any solution satisfies
/// ||x||_0 >= ||b_lower||_0, so equality proves global l0 minimality.
bool is_global_l0_by_identity_block(const SparseVector& x, const Vector& b_lower,
                                    double zero_tol = 1e-4);

// Instance file format: DIMACS-like text. Header "p 1in3 <n_vars> <n_clauses>",
// then one clause per line as three signed 1-based integers terminated by 0.
// Lines starting with 'c' are comments.

void write_sat_instance(std::ostream& os, const SatInstance& inst);
void write_sat_instance(const std::filesystem::path& path, const SatInstance& inst);
SatInstance read_sat_instance(std::istream& is);
SatInstance read_sat_instance(const std::filesystem::path& path);

}  // namespace cstree
