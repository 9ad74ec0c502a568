#include "cstree/solvers.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cstree {

void SolverOptions::validate() const {
  if (max_iters < 1) throw ParameterError("SolverOptions: max_iters must be >= 1");
  if (!(step_size > 0) || !std::isfinite(step_size))
    throw ParameterError("SolverOptions: step_size must be positive and finite");
  if (!(grad_tol > 0) || !std::isfinite(grad_tol))
    throw ParameterError("SolverOptions: grad_tol must be positive and finite");
  if (zero_tol < 0 || !std::isfinite(zero_tol))
    throw ParameterError("SolverOptions: zero_tol must be >= 0 and finite");
}

namespace {

constexpr double kRankRelTol = 1e-12;
constexpr double kFeasRelTol = 1e-8;

struct SvdParts {
  Index rank = 0;
  Vector particular;   // least-norm solution of A x = b
  DenseMatrix kernel;  // orthonormal basis of ker(A)
};

SvdParts decompose(const DenseMatrix& A, const Vector& b) {
  Eigen::JacobiSVD<DenseMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.size() ? sigma[0] : 0.0;
  const double thresh = smax * kRankRelTol;
  SvdParts parts;
  while (parts.rank < sigma.size() && sigma[parts.rank] > thresh) ++parts.rank;
  Vector coeffs = Vector::Zero(sigma.size());
  const Vector utb = svd.matrixU().transpose() * b;
  for (Index i = 0; i < parts.rank; ++i) coeffs[i] = utb[i] / sigma[i];
  parts.particular = svd.matrixV().leftCols(sigma.size()) * coeffs;
  parts.kernel = svd.matrixV().rightCols(A.cols() - parts.rank);
  return parts;
}

double feasibility_bound(const Vector& b) {
  return kFeasRelTol * std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

// In-place Cholesky solve of the k x k SPD system G c = h.
// Returns false on a non-positive pivot (rank-deficient support).
bool cholesky_solve(double* G, const double* h, int k, double* c) {
  // Factor G = L L' (lower triangle, column major in G).
  for (int j = 0; j < k; ++j) {
    double d = G[j * k + j];
    for (int t = 0; t < j; ++t) d -= G[j * k + t] * G[j * k + t];
    if (d <= 0.0) return false;
    const double ljj = std::sqrt(d);
    G[j * k + j] = ljj;
    for (int i = j + 1; i < k; ++i) {
      double s = G[i * k + j];
      for (int t = 0; t < j; ++t) s -= G[i * k + t] * G[j * k + t];
      G[i * k + j] = s / ljj;
    }
  }
  // Forward then backward substitution.
  for (int i = 0; i < k; ++i) {
    double s = h[i];
    for (int t = 0; t < i; ++t) s -= G[i * k + t] * c[t];
    c[i] = s / G[i * k + i];
  }
  for (int i = k - 1; i >= 0; --i) {
    double s = c[i];
    for (int t = i + 1; t < k; ++t) s -= G[t * k + i] * c[t];
    c[i] = s / G[i * k + i];
  }
  return true;
}

}  // namespace

DenseMatrix kernel_basis(const DenseMatrix& A) {
  Eigen::JacobiSVD<DenseMatrix> svd(A, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.size() ? sigma[0] : 0.0;
  const double thresh = smax * kRankRelTol;
  Index rank = 0;
  while (rank < sigma.size() && sigma[rank] > thresh) ++rank;
  return svd.matrixV().rightCols(A.cols() - rank);
}

std::optional<SparseVector> solve_l0_brute(const DenseMatrix& A, const Vector& b,
                                           Index max_support, double zero_tol,
                                           std::uint64_t enumeration_budget) {
  if (A.rows() != b.size()) throw ParameterError("solve_l0_brute: A rows != b length");
  if (max_support > A.cols()) max_support = A.cols();
  if (zero_tol < 0) throw ParameterError("solve_l0_brute: zero_tol must be >= 0");

  const Index n = A.cols();
  const Index m = A.rows();

  if (b.lpNorm<Eigen::Infinity>() <= zero_tol) {
    SparseVector zero;
    zero.dim = n;
    zero.zero_tol = zero_tol;
    return zero;
  }

  const DenseMatrix gram = A.transpose() * A;
  const Vector atb = A.transpose() * b;
  const double b2 = b.squaredNorm();
  // Any inf-feasible x has squared l2 residual at most m * zero_tol^2; the
  // slack absorbs round-off in the cheap residual formula.
  const double screen = static_cast<double>(m) * zero_tol * zero_tol + 1e-10 * b2 + 1e-300;

  std::vector<double> Gbuf, cbuf, hbuf;
  std::vector<Index> supp;
  Vector residual(m);
  std::uint64_t scanned = 0;

  for (Index k = 1; k <= max_support; ++k) {
    supp.resize(k);
    std::iota(supp.begin(), supp.end(), Index{0});
    Gbuf.resize(static_cast<std::size_t>(k) * k);
    cbuf.resize(k);
    hbuf.resize(k);

    while (true) {
      if (++scanned > enumeration_budget)
        throw BudgetError("solve_l0_brute: enumeration budget exceeded", scanned,
                          enumeration_budget);

      for (Index i = 0; i < k; ++i) {
        hbuf[i] = atb[supp[i]];
        for (Index j = 0; j < k; ++j) Gbuf[i * k + j] = gram(supp[i], supp[j]);
      }

      bool solved = cholesky_solve(Gbuf.data(), hbuf.data(), static_cast<int>(k), cbuf.data());
      if (!solved) {
        // Rank-deficient support: minimum-norm fit via a dense decomposition.
        DenseMatrix Asub(m, k);
        for (Index i = 0; i < k; ++i) Asub.col(i) = A.col(supp[i]);
        Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(Asub);
        Eigen::Map<Vector>(cbuf.data(), k) = cod.solve(b);
        solved = true;
      }

      double fit = 0.0;
      for (Index i = 0; i < k; ++i) fit += cbuf[i] * hbuf[i];
      if (b2 - fit <= screen) {
        residual = b;
        for (Index i = 0; i < k; ++i) residual -= cbuf[i] * A.col(supp[i]);
        if (residual.lpNorm<Eigen::Infinity>() <= zero_tol) {
          Vector x = Vector::Zero(n);
          for (Index i = 0; i < k; ++i) x[supp[i]] = cbuf[i];
          SparseVector sv = SparseVector::from_dense(x, zero_tol);
          // Clamping sub-threshold coefficients must not break feasibility.
          if ((A * sv.to_dense() - b).lpNorm<Eigen::Infinity>() <= zero_tol) return sv;
        }
      }

      // Next k-combination in lexicographic order.
      Index pos = k - 1;
      while (pos >= 0 && supp[pos] == n - k + pos) --pos;
      if (pos < 0) break;
      ++supp[pos];
      for (Index i = pos + 1; i < k; ++i) supp[i] = supp[i - 1] + 1;
    }
  }
  return std::nullopt;
}

namespace {

// Shared kernel-descent core: min ||x0 + N v||_1 by subgradient steps with a
// stall-halved step size, then a sparsifying least-squares polish.
SparseVector l1_kernel_descent(const DenseMatrix& A, const Vector& b, const SolverOptions& opts) {
  opts.validate();
  if (A.rows() != b.size()) throw ParameterError("solve_l1: A rows != b length");
  const Index n = A.cols();

  SvdParts parts = decompose(A, b);
  const double feas_tol = feasibility_bound(b);
  if ((A * parts.particular - b).lpNorm<Eigen::Infinity>() > feas_tol)
    throw InfeasibleError("solve_l1: system A x = b is infeasible");

  const DenseMatrix& N = parts.kernel;
  const Index d = N.cols();
  Vector x_best = parts.particular;
  double f_best = x_best.lpNorm<1>();

  if (d > 0) {
    Vector v = Vector::Zero(d);
    Vector v_best = v;
    Vector x = x_best;
    Vector sign(n);
    // The kernel basis is orthonormal, so the natural step scale is the
    // solution scale itself.
    double step = opts.step_size * std::max(1.0, x_best.lpNorm<Eigen::Infinity>());
    const double step_floor = 1e-14 * std::max(1.0, x_best.lpNorm<Eigen::Infinity>());
    int stall = 0;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
      for (Index i = 0; i < n; ++i) sign[i] = (x[i] > 0.0) ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
      Vector grad = N.transpose() * sign;
      const double gnorm = grad.norm();
      if (gnorm <= opts.grad_tol) break;
      v -= (step / gnorm) * grad;
      x = parts.particular + N * v;
      const double f = x.lpNorm<1>();
      if (f < f_best - 1e-12 * std::max(1.0, f_best)) {
        f_best = f;
        v_best = v;
        x_best = x;
        stall = 0;
      } else if (++stall >= 40) {
        step *= 0.5;
        stall = 0;
        v = v_best;  // restart from the incumbent at the finer scale
        x = x_best;
        if (step < step_floor) break;
      }
    }
  }

  // Polish: try prefix supports in decreasing-magnitude order and keep the
  // sparsest refit that stays feasible without increasing the l1 norm.
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index c) { return std::abs(x_best[a]) > std::abs(x_best[c]); });
  const double f_cap = f_best * (1.0 + 1e-9) + 1e-9;

  for (Index k = 1; k <= n; ++k) {
    if (k < n && std::abs(x_best[order[k - 1]]) == 0.0) continue;  // skip empty prefixes
    DenseMatrix Asub(A.rows(), k);
    for (Index i = 0; i < k; ++i) Asub.col(i) = A.col(order[i]);
    Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(Asub);
    const Vector c = cod.solve(b);
    if ((Asub * c - b).lpNorm<Eigen::Infinity>() > feas_tol) continue;
    Vector xc = Vector::Zero(n);
    for (Index i = 0; i < k; ++i) xc[order[i]] = c[i];
    if (xc.lpNorm<1>() > f_cap) continue;
    SparseVector sv = SparseVector::from_dense(xc, opts.zero_tol);
    if ((A * sv.to_dense() - b).lpNorm<Eigen::Infinity>() <= feas_tol) return sv;
  }

  // Full-support least-squares fallback; kept with a zero classification
  // threshold so clamping cannot perturb the residual.
  return SparseVector::from_dense(parts.particular, 0.0);
}

}  // namespace

SparseVector solve_l1(const DenseMatrix& A, const Vector& b, const SolverOptions& opts) {
  return l1_kernel_descent(A, b, opts);
}

PriorSolution solve_l1_prior(const DenseMatrix& A, const DenseMatrix& X, const Vector& b,
                             const SolverOptions& opts) {
  if (A.cols() != X.rows()) throw ParameterError("solve_l1_prior: A cols != X rows");
  PriorSolution out;
  out.z = l1_kernel_descent(A * X, b, opts);
  out.x = SparseVector::from_dense(X * out.z.to_dense(), opts.zero_tol);
  return out;
}

PriorSolution omp_prior(const DenseMatrix& A, const DenseMatrix& X, const Vector& b,
                        Index max_steps, double res_tol, double zero_tol,
                        std::vector<double>* residual_trace) {
  if (A.cols() != X.rows()) throw ParameterError("omp_prior: A cols != X rows");
  if (A.rows() != b.size()) throw ParameterError("omp_prior: A rows != b length");
  const DenseMatrix B = A * X;
  const Index p = B.cols();

  std::vector<Index> support;
  std::vector<char> in_support(p, 0);
  Vector r = b;
  Vector z_sub;
  if (residual_trace) {
    residual_trace->clear();
    residual_trace->push_back(r.norm());
  }

  for (Index step = 0; step < max_steps && r.norm() > res_tol; ++step) {
    const Vector corr = B.transpose() * r;
    Index best = -1;
    double best_abs = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double a = std::abs(corr[j]);
      if (a > best_abs) {  // strict: ties resolve to the smallest index
        best_abs = a;
        best = j;
      }
    }
    if (best < 0 || best_abs == 0.0 || in_support[best]) break;
    in_support[best] = 1;
    support.push_back(best);

    DenseMatrix Bsub(B.rows(), static_cast<Index>(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i) Bsub.col(i) = B.col(support[i]);
    Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(Bsub);
    z_sub = cod.solve(b);  // minimum-norm when the refit is singular
    r = b - Bsub * z_sub;
    if (residual_trace) residual_trace->push_back(r.norm());
  }

  Vector z = Vector::Zero(p);
  for (std::size_t i = 0; i < support.size(); ++i) z[support[i]] = z_sub.size() ? z_sub[i] : 0.0;
  PriorSolution out;
  out.z = SparseVector::from_dense(z, zero_tol);
  out.x = SparseVector::from_dense(X * z, zero_tol);
  return out;
}

}  // namespace cstree
