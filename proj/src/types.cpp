#include "cstree/types.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace cstree {

Vector SparseVector::to_dense() const {
  Vector v = Vector::Zero(dim);
  for (std::size_t i = 0; i < support.size(); ++i) v[support[i]] = values[i];
  return v;
}

SparseVector SparseVector::from_dense(const Vector& v, double zero_tol) {
  SparseVector out;
  out.dim = v.size();
  out.zero_tol = zero_tol;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > zero_tol) {
      out.support.push_back(i);
      out.values.push_back(v[i]);
    }
  }
  return out;
}

void SparseVector::validate() const {
  if (zero_tol < 0) throw ParameterError("SparseVector: zero_tol must be >= 0");
  if (support.size() != values.size())
    throw ParameterError("SparseVector: support/values length mismatch");
  Index prev = -1;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] <= prev) throw ParameterError("SparseVector: support not strictly increasing");
    if (support[i] >= dim) throw ParameterError("SparseVector: support index out of range");
    if (!(std::abs(values[i]) > zero_tol))
      throw ParameterError("SparseVector: stored value not above zero_tol");
    if (!std::isfinite(values[i])) throw ParameterError("SparseVector: non-finite value");
    prev = support[i];
  }
}

Index sparsity(const Vector& v, double zero_tol) {
  Index count = 0;
  for (Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > zero_tol) ++count;
  return count;
}

std::string to_string(SubgaussianLaw law) {
  return law == SubgaussianLaw::gaussian ? "gaussian" : "rademacher";
}

SubgaussianLaw subgaussian_law_from_string(const std::string& s) {
  if (s == "gaussian") return SubgaussianLaw::gaussian;
  if (s == "rademacher") return SubgaussianLaw::rademacher;
  throw ParameterError("unknown subgaussian law: " + s);
}

void BernoulliSubgaussianParams::validate() const {
  if (!(theta > 0.0) || theta > 1.0) throw ParameterError("theta must lie in (0, 1]");
  if (!(nu2 > 0.0) || !std::isfinite(nu2)) throw ParameterError("nu2 must be positive");
  if (!(psi2_bound > 0.0)) throw ParameterError("psi2_bound must be positive");
  if (restricted) {
    // Restricted model: P(R=0)=0, E|R| in [1/10, 1], E R^2 <= 1.
    // Rademacher qualifies unconditionally; gaussian only when normalized.
    if (law == SubgaussianLaw::gaussian && std::abs(nu2 - 1.0) > 1e-12)
      throw ParameterError("restricted gaussian requires nu2 = 1");
    if (nu2 > 1.0 + 1e-12) throw ParameterError("restricted model requires E R^2 <= 1");
  }
}

void ProblemInstance::validate() const {
  if (A.rows() != b.size()) throw ParameterError("ProblemInstance: A rows != b length");
  if (!A.allFinite() || !b.allFinite()) throw ParameterError("ProblemInstance: non-finite data");
  if (known_solution) {
    known_solution->validate();
    if (known_solution->dim != A.cols())
      throw ParameterError("ProblemInstance: solution dimension != A cols");
    const Vector r = A * known_solution->to_dense() - b;
    const double bound = 1e-9 * std::max(1.0, b.lpNorm<Eigen::Infinity>());
    if (r.lpNorm<Eigen::Infinity>() > bound)
      throw ParameterError("ProblemInstance: known_solution residual above tolerance");
  }
}

double stable_rank(const DenseMatrix& M) {
  const double fro2 = M.squaredNorm();
  if (fro2 == 0.0) throw DomainError("stable_rank: zero matrix");
  Eigen::JacobiSVD<DenseMatrix> svd(M);
  const double smax = svd.singularValues()[0];
  return fro2 / (smax * smax);
}

}  // namespace cstree
