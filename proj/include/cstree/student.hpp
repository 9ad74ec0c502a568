#pragma once

#include "cstree/dictionary.hpp"
#include "cstree/solvers.hpp"
#include "cstree/teacher.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>

namespace cstree {

/// Residual filter sorting out wrong solutions before factorization:
/// accepts x iff ||A x - b||_inf <= tol * max(1, ||b||_inf).
bool grade(const DenseMatrix& A, const Vector& x, const Vector& b, double tol);

enum class ScaleMode { snap, rip };

ScaleMode scale_mode_from_string(const std::string& s);
std::string to_string(ScaleMode mode);

struct TrainOptions {
  ScaleMode scale = ScaleMode::snap;
  double grader_tol = 1e-4;
  double snap_threshold = 0.5;
  FactorizationOptions factor;
};

/// A solver takes (A, b) and either produces a candidate solution or gives
/// up on the sample.
using SolveFn = std::function<std::optional<SparseVector>(const DenseMatrix&, const Vector&)>;

struct NodeTrainingReport {
  int node_id = -1;
  Index q_attempted = 0;
  Index q_graded_ok = 0;
  double validate_fraction = 0.0;  // q_graded_ok / q_attempted
  DenseMatrix X_learned;
  bool matched = false;  // set by the harness when ground truth is available
  bool trained = false;
  std::string failure;
};

/// One learning episode: solve every sample, grade it, stack the survivors
/// (in sample order) as columns of Y, factorize, scale. Throws
/// InsufficientDataError when fewer graded-ok samples than p remain.
NodeTrainingReport train_node(const DenseMatrix& A, const TrainingSet& samples,
                              const SolveFn& solve, Index p, const TrainOptions& opts);

// ---------------------------------------------------------------------------
// Student-side tree view: everything the student is allowed to see. No
// X_true, no W, no teacher coefficients.
// ---------------------------------------------------------------------------

struct StudentNodeView {
  int id = -1;
  std::array<int, 2> children{-1, -1};
  int depth = 0;
  Index p = 0;        // number of columns to learn
  Index s_bound = 0;  // advertised column sparsity of the class
  TrainingSet samples;

  bool is_leaf() const { return children[0] < 0; }
};

struct StudentView {
  DenseMatrix A;
  int root_id = 0;
  Index t = 2;
  Index tbar = 1;
  std::string label;
  std::vector<StudentNodeView> nodes;  // id == position

  const StudentNodeView& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
  std::vector<int> post_order() const;
};

/// Strips a teacher tree down to the student view; teacher coefficients are
/// dropped from the attached samples.
StudentView make_student_view(const CurriculumTree& tree,
                              const std::map<int, TrainingSet>& samples);

struct TreeTrainConfig {
  SolverOptions l1;                 // internal-node solver options
  Index leaf_max_support = 0;       // 0 derives s_bound * tbar per leaf
  double leaf_zero_tol = 1e-9;      // residual tolerance of the leaf oracle
  std::uint64_t leaf_enumeration_budget = 200'000'000ULL;
  TrainOptions train;
  std::uint64_t master_seed = 0;  // factorization init streams split per node
};

/// Bottom-up training pass: leaves use the exhaustive l0 oracle, internal
/// nodes solve the l1-with-prior problem over the concatenation of the
/// learned child matrices. A failed child marks the parent untrainable; the
/// traversal continues on siblings.
std::map<int, NodeTrainingReport> tree_train(const StudentView& view,
                                             const TreeTrainConfig& cfg);

}  // namespace cstree
