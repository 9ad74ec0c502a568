#include "cstree/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cstree {

namespace {

// Dense simplex on the tableau [A | b] with explicit basis bookkeeping.
// Bland's rule on both the entering and leaving choice prevents cycling.
class SimplexTableau {
 public:
  SimplexTableau(DenseMatrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
    // Normalize to b >= 0 so the artificial basis is feasible.
    for (Index i = 0; i < b_.size(); ++i) {
      if (b_[i] < 0) {
        A_.row(i) *= -1.0;
        b_[i] *= -1.0;
      }
    }
  }

  Index rows() const { return A_.rows(); }
  Index cols() const { return A_.cols(); }

  void append_identity() {
    DenseMatrix ext(A_.rows(), A_.cols() + A_.rows());
    ext << A_, DenseMatrix::Identity(A_.rows(), A_.rows());
    A_ = std::move(ext);
  }

  void set_basis_to_artificials(Index n_original) {
    basis_.resize(rows());
    std::iota(basis_.begin(), basis_.end(), n_original);
  }

  // Price out the cost row for the current basis and run simplex iterations.
  // `active_cols` limits which columns may enter (phase 2 excludes
  // artificials). Returns false if unbounded.
  bool iterate(const Vector& cost, Index active_cols, double tol) {
    const Index m = rows();
    while (true) {
      // Simplex multipliers via the basic costs: y' = c_B' B^{-1}. We keep
      // the tableau in the basis frame (A_ holds B^{-1} A), so the reduced
      // cost of column j is c_j - c_B' A_col(j).
      Index entering = -1;
      for (Index j = 0; j < active_cols; ++j) {
        if (is_basic(j)) continue;
        double reduced = cost[j];
        for (Index i = 0; i < m; ++i) reduced -= cost[basis_[i]] * A_(i, j);
        if (reduced < -tol) {
          entering = j;  // Bland: smallest eligible index
          break;
        }
      }
      if (entering < 0) return true;  // optimal

      Index leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        const double a = A_(i, entering);
        if (a > tol) {
          const double ratio = b_[i] / a;
          if (ratio < best_ratio - tol ||
              (ratio < best_ratio + tol && (leaving < 0 || basis_[i] < basis_[leaving]))) {
            best_ratio = ratio;
            leaving = i;
          }
        }
      }
      if (leaving < 0) return false;  // unbounded direction
      pivot(leaving, entering);
    }
  }

  void pivot(Index row, Index col) {
    const double p = A_(row, col);
    A_.row(row) /= p;
    b_[row] /= p;
    for (Index i = 0; i < rows(); ++i) {
      if (i == row) continue;
      const double f = A_(i, col);
      if (f != 0.0) {
        A_.row(i) -= f * A_.row(row);
        b_[i] -= f * b_[row];
      }
    }
    basis_[row] = col;
  }

  bool is_basic(Index j) const {
    return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
  }

  // Pivot artificial variables out of the basis where possible; rows that
  // cannot be pivoted are redundant constraints with zero right-hand side.
  void drive_out_artificials(Index n_original, double tol) {
    for (Index i = 0; i < rows(); ++i) {
      if (basis_[i] < n_original) continue;
      Index col = -1;
      for (Index j = 0; j < n_original; ++j) {
        if (std::abs(A_(i, j)) > tol) {
          col = j;
          break;
        }
      }
      if (col >= 0) pivot(i, col);
      // else: redundant row; the artificial stays basic at value zero.
    }
  }

  Vector primal(Index n_original) const {
    Vector x = Vector::Zero(n_original);
    for (Index i = 0; i < rows(); ++i)
      if (basis_[i] < n_original) x[basis_[i]] = b_[i];
    return x;
  }

  double basic_cost(const Vector& cost) const {
    double v = 0.0;
    for (Index i = 0; i < rows(); ++i)
      if (basis_[i] < cost.size()) v += cost[basis_[i]] * b_[i];
    return v;
  }

 private:
  DenseMatrix A_;
  Vector b_;
  std::vector<Index> basis_;
};

}  // namespace

LpResult solve_lp_standard(const DenseMatrix& A, const Vector& b, const Vector& c, double tol) {
  if (A.rows() != b.size() || A.cols() != c.size())
    throw ParameterError("solve_lp_standard: inconsistent dimensions");
  const Index m = A.rows();
  const Index n = A.cols();

  SimplexTableau tab(A, b);
  tab.append_identity();
  tab.set_basis_to_artificials(n);

  // Phase 1: minimize the sum of artificials.
  Vector phase1_cost = Vector::Zero(n + m);
  phase1_cost.tail(m).setOnes();
  if (!tab.iterate(phase1_cost, n + m, tol))
    throw DomainError("solve_lp_standard: phase-1 unbounded (internal error)");

  LpResult result;
  if (tab.basic_cost(phase1_cost) > std::sqrt(tol)) {
    result.status = LpResult::Status::infeasible;
    return result;
  }
  tab.drive_out_artificials(n, tol);

  // Phase 2 on the original costs; artificial columns stay blocked.
  Vector phase2_cost(n + m);
  phase2_cost.head(n) = c;
  phase2_cost.tail(m).setZero();
  if (!tab.iterate(phase2_cost, n, tol)) {
    result.status = LpResult::Status::unbounded;
    return result;
  }

  result.status = LpResult::Status::optimal;
  result.x = tab.primal(n);
  result.objective = c.dot(result.x);
  return result;
}

LpResult l1_min_lp(const DenseMatrix& A, const Vector& b, double tol) {
  const Index n = A.cols();
  DenseMatrix Aeq(A.rows(), 2 * n);
  Aeq << A, -A;
  const Vector cost = Vector::Ones(2 * n);
  LpResult lp = solve_lp_standard(Aeq, b, cost, tol);
  if (lp.status == LpResult::Status::optimal) {
    Vector x = lp.x.head(n) - lp.x.tail(n);
    lp.x = std::move(x);
  }
  return lp;
}

}  // namespace cstree
