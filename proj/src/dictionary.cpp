#include "cstree/dictionary.hpp"

#include "cstree/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace cstree {

namespace {

// Polar factor of M: the orthogonal U V' from the SVD. Zero singular values
// are harmless because the SVD factors are orthogonal regardless.
DenseMatrix polar_factor(const DenseMatrix& M) {
  if (M.norm() == 0.0) throw DomainError("polar factor of the zero matrix is undefined");
  Eigen::JacobiSVD<DenseMatrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

DenseMatrix random_orthogonal(Index p, std::uint64_t seed) {
  Rng rng = split_stream(seed, 0, StreamPurpose::solver_init);
  DenseMatrix G(p, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < p; ++i) G(i, j) = rng.normal();
  Eigen::HouseholderQR<DenseMatrix> qr(G);
  DenseMatrix Q = qr.householderQ() * DenseMatrix::Identity(p, p);
  // Fix the sign convention so the result depends only on the seed.
  DenseMatrix R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  for (Index j = 0; j < p; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

double l4_objective(const DenseMatrix& UYw) {
  return UYw.array().square().square().sum() / static_cast<double>(UYw.cols());
}

}  // namespace

WhitenResult whiten(const DenseMatrix& Y, Index p, double rank_rel_tol) {
  if (p <= 0 || p > Y.rows()) throw ParameterError("whiten: p must lie in [1, rows]");
  const Index q = Y.cols();
  const DenseMatrix C = Y * Y.transpose();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(C);
  if (eig.info() != Eigen::Success) throw DomainError("whiten: eigendecomposition failed");

  // Eigen sorts ascending; view the spectrum in descending order.
  const Vector lambda = eig.eigenvalues().reverse();
  const DenseMatrix Q = eig.eigenvectors().rowwise().reverse();
  const double lead = std::max(lambda[0], 0.0);
  Index rank = 0;
  while (rank < lambda.size() && lambda[rank] > lead * rank_rel_tol && lambda[rank] > 0.0) ++rank;
  if (rank < p) throw RankError("whiten: input rank below requested dictionary size", rank);

  const double sq = std::sqrt(static_cast<double>(q));
  Vector inv_sqrt(p), sqrt_l(p);
  for (Index i = 0; i < p; ++i) {
    sqrt_l[i] = std::sqrt(lambda[i]);
    inv_sqrt[i] = 1.0 / sqrt_l[i];
  }
  WhitenResult out;
  out.Yw = sq * inv_sqrt.asDiagonal() * Q.leftCols(p).transpose() * Y;
  out.Winv = Q.leftCols(p) * sqrt_l.asDiagonal() / sq;
  return out;
}

DenseMatrix l4_maximize(const DenseMatrix& Yw, int iters, double tol, std::uint64_t seed,
                        std::vector<double>* trace, int* iterations_taken,
                        const DenseMatrix* init) {
  if (Yw.size() == 0) throw ParameterError("l4_maximize: empty input");
  if (Yw.norm() == 0.0) throw DomainError("l4_maximize: degenerate zero input");
  const Index p = Yw.rows();

  DenseMatrix U = init ? *init : random_orthogonal(p, seed);
  if (trace) trace->clear();
  int taken = 0;
  for (int k = 0; k < iters; ++k) {
    const DenseMatrix UYw = U * Yw;
    if (trace) trace->push_back(l4_objective(UYw));
    const DenseMatrix M = UYw.array().cube().matrix() * Yw.transpose();
    DenseMatrix U_next = polar_factor(M);
    const double delta = (U_next - U).norm();
    U = std::move(U_next);
    taken = k + 1;
    if (delta <= tol) break;
  }
  if (trace) trace->push_back(l4_objective(U * Yw));
  if (iterations_taken) *iterations_taken = taken;
  return U;
}

FactorizationResult sparse_factor(const DenseMatrix& Y, Index p, const FactorizationOptions& opts) {
  if (Y.cols() < p)
    throw RankError("sparse_factor: fewer samples than dictionary columns",
                    std::min(Y.cols(), Y.rows()));
  WhitenResult w = whiten(Y, p, opts.rank_rel_tol);

  FactorizationResult result;
  result.X_bar.resize(Y.rows(), p);
  const DenseMatrix U =
      l4_maximize(w.Yw, opts.l4_iters, opts.l4_tol, opts.seed, &result.objective_trace,
                  &result.iterations);
  result.Z_bar = U * w.Yw;
  result.X_bar = w.Winv * U.transpose();
  const double ynorm = Y.norm();
  result.fit_relative =
      ynorm > 0 ? (Y - result.X_bar * result.Z_bar).norm() / ynorm : 0.0;
  return result;
}

DenseMatrix scale_snap(const DenseMatrix& X_bar, double snap_threshold, bool* had_zero_column) {
  if (!X_bar.allFinite()) throw ParameterError("scale_snap: non-finite entries");
  if (had_zero_column) *had_zero_column = false;
  DenseMatrix out = DenseMatrix::Zero(X_bar.rows(), X_bar.cols());
  for (Index j = 0; j < X_bar.cols(); ++j) {
    const double peak = X_bar.col(j).cwiseAbs().maxCoeff();
    if (peak == 0.0) {
      if (had_zero_column) *had_zero_column = true;
      continue;
    }
    for (Index i = 0; i < X_bar.rows(); ++i) {
      const double e = X_bar(i, j) / peak;
      if (std::abs(e) >= snap_threshold) out(i, j) = e > 0 ? 1.0 : -1.0;
    }
  }
  return out;
}

DenseMatrix scale_rip(const DenseMatrix& X_bar, const DenseMatrix& A) {
  const double fro = A.norm();
  if (fro == 0.0) throw DomainError("scale_rip: zero matrix A");
  const double factor = std::sqrt(static_cast<double>(X_bar.rows())) / fro;
  return X_bar * factor;
}

SignedPermMatch match_up_to_signed_permutation(const DenseMatrix& X_hat,
                                               const DenseMatrix& X_true, double tol) {
  if (X_hat.rows() != X_true.rows() || X_hat.cols() != X_true.cols())
    throw ParameterError("match_up_to_signed_permutation: shape mismatch");
  const Index p = X_true.cols();

  auto normalized = [](const DenseMatrix& M) {
    DenseMatrix N = M;
    for (Index j = 0; j < N.cols(); ++j) {
      const double norm = N.col(j).norm();
      if (norm > 0) N.col(j) /= norm;
    }
    return N;
  };
  const DenseMatrix Hn = normalized(X_hat);
  const DenseMatrix Tn = normalized(X_true);
  DenseMatrix C = Hn.transpose() * Tn;  // C(i, j) = cos(hat_i, true_j)

  SignedPermMatch match;
  match.permutation.assign(p, -1);
  match.signs.assign(p, 1);
  std::vector<char> used_hat(p, 0), used_true(p, 0);

  for (Index step = 0; step < p; ++step) {
    Index bi = -1, bj = -1;
    double best = -1.0;
    for (Index i = 0; i < p; ++i) {
      if (used_hat[i]) continue;
      for (Index j = 0; j < p; ++j) {
        if (used_true[j]) continue;
        const double a = std::abs(C(i, j));
        if (a > best) {
          best = a;
          bi = i;
          bj = j;
        }
      }
    }
    used_hat[bi] = 1;
    used_true[bj] = 1;
    match.permutation[bj] = bi;
    match.signs[bj] = C(bi, bj) >= 0 ? 1 : -1;
  }

  match.max_error = 0.0;
  for (Index j = 0; j < p; ++j) {
    const Vector diff = Hn.col(match.permutation[j]) * static_cast<double>(match.signs[j]) -
                        Tn.col(j);
    match.max_error = std::max(match.max_error, diff.lpNorm<Eigen::Infinity>());
  }
  match.matched = match.max_error <= tol;
  return match;
}

}  // namespace cstree
