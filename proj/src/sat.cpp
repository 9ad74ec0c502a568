#include "cstree/sat.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cstree {

void SatInstance::validate() const {
  if (n_vars < 0) throw ParameterError("SatInstance: negative variable count");
  for (const auto& clause : clauses)
    for (const auto& lit : clause)
      if (lit.variable < 0 || lit.variable >= n_vars)
        throw ParameterError("SatInstance: literal variable index out of range");
}

ProblemInstance reduce_1in3sat(const SatInstance& inst) {
  inst.validate();
  const Index n = inst.n_vars;
  const Index m = static_cast<Index>(inst.clauses.size());

  ProblemInstance out;
  out.A = DenseMatrix::Zero(m + n, 2 * n);
  for (Index k = 0; k < m; ++k) {
    for (const Literal& lit : inst.clauses[k]) {
      if (lit.negated)
        out.A(k, n + lit.variable) = 1.0;
      else
        out.A(k, lit.variable) = 1.0;
    }
  }
  for (Index i = 0; i < n; ++i) {
    out.A(m + i, i) = 1.0;
    out.A(m + i, n + i) = 1.0;
  }
  out.b = Vector::Ones(m + n);
  return out;
}

bool check_1in3_assignment(const SatInstance& inst, const std::vector<bool>& assignment) {
  if (static_cast<Index>(assignment.size()) != inst.n_vars)
    throw ParameterError("check_1in3_assignment: assignment length mismatch");
  for (const auto& clause : inst.clauses) {
    int true_count = 0;
    for (const Literal& lit : clause) {
      const bool value = assignment[lit.variable];
      if (lit.negated ? !value : value) ++true_count;
    }
    if (true_count != 1) return false;
  }
  return true;
}

std::optional<std::vector<bool>> solution_to_assignment(const SparseVector& x, Index n_vars,
                                                        double zero_tol) {
  if (x.dim != 2 * n_vars) throw ParameterError("solution_to_assignment: dimension != 2n");
  if (x.sparsity() != n_vars) return std::nullopt;
  const Vector dense = x.to_dense();
  std::vector<bool> assignment(n_vars);
  for (Index i = 0; i < n_vars; ++i) {
    const double y = dense[i];
    const double z = dense[n_vars + i];
    const bool y_one = std::abs(y - 1.0) <= zero_tol && std::abs(z) <= zero_tol;
    const bool z_one = std::abs(z - 1.0) <= zero_tol && std::abs(y) <= zero_tol;
    if (!y_one && !z_one) return std::nullopt;
    assignment[i] = y_one;
  }
  return assignment;
}

bool is_global_l0_by_identity_block(const SparseVector& x, const Vector& b_lower,
                                    double zero_tol) {
  return x.sparsity() == sparsity(b_lower, zero_tol);
}

void write_sat_instance(std::ostream& os, const SatInstance& inst) {
  inst.validate();
  os << "p 1in3 " << inst.n_vars << " " << inst.clauses.size() << "\n";
  for (const auto& clause : inst.clauses) {
    for (const Literal& lit : clause)
      os << (lit.negated ? -(lit.variable + 1) : (lit.variable + 1)) << " ";
    os << "0\n";
  }
}

void write_sat_instance(const std::filesystem::path& path, const SatInstance& inst) {
  std::ofstream os(path);
  if (!os) throw IoError("write_sat_instance: cannot open " + path.string());
  write_sat_instance(os, inst);
}

SatInstance read_sat_instance(std::istream& is) {
  SatInstance inst;
  std::string line;
  bool have_header = false;
  long declared_clauses = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ss(line);
    if (!have_header) {
      std::string p, kind;
      if (!(ss >> p >> kind >> inst.n_vars >> declared_clauses) || p != "p" || kind != "1in3")
        throw IoError("read_sat_instance: expected header 'p 1in3 <vars> <clauses>'");
      have_header = true;
      continue;
    }
    std::array<Literal, 3> clause;
    long lit = 0;
    for (int i = 0; i < 3; ++i) {
      if (!(ss >> lit) || lit == 0) throw IoError("read_sat_instance: clause needs 3 literals");
      clause[i].variable = std::labs(lit) - 1;
      clause[i].negated = lit < 0;
    }
    if (!(ss >> lit) || lit != 0)
      throw IoError("read_sat_instance: clause must be terminated by 0");
    inst.clauses.push_back(clause);
  }
  if (!have_header) throw IoError("read_sat_instance: missing header");
  if (static_cast<long>(inst.clauses.size()) != declared_clauses)
    throw IoError("read_sat_instance: clause count does not match header");
  inst.validate();
  return inst;
}

SatInstance read_sat_instance(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_sat_instance: cannot open " + path.string());
  return read_sat_instance(is);
}

}  // namespace cstree
