#pragma once

#include "cstree/types.hpp"

namespace cstree {

/// Outcome of a linear program in standard form.
struct LpResult {
  enum class Status { optimal, infeasible, unbounded };
  Status status = Status::infeasible;
  double objective = 0.0;
  Vector x;  // primal solution when optimal
};

/// Solves  min c'x  s.t.  A x = b, x >= 0  with a dense two-phase simplex
/// using Bland's rule. Intended for the small certificate problems in this
/// project (tens of variables); not a general-purpose LP code.
LpResult solve_lp_standard(const DenseMatrix& A, const Vector& b, const Vector& c,
                           double tol = 1e-9);

/// min ||x||_1 s.t. A x = b, via the standard x = u - w splitting.
/// Used as an independent optimality certificate for the kernel-descent
/// solver on small instances.
LpResult l1_min_lp(const DenseMatrix& A, const Vector& b, double tol = 1e-9);

}  // namespace cstree
