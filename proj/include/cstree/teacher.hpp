#pragma once

#include "cstree/core.hpp"
#include "cstree/types.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cstree {

/// One problem class in a curriculum tree. The matrix X_true and the
/// isometry W are teacher-side ground truth; the student only ever sees the
/// derived training samples.
struct ClassNode {
  int id = -1;
  std::array<int, 2> children{-1, -1};
  IndexSet K_set;            // column indices into the leaf concatenation
  DenseMatrix X_true;        // n x |K_set|
  DenseMatrix W;             // p_total x |K_set| isometry, X_true = X_leaves * W
  Index s_col_bound = 0;     // max column sparsity of X_true (exact count)
  int depth = 0;             // distance from the root
  // Curriculum III: sample coefficients take at most one nonzero per group.
  std::vector<IndexSet> sample_column_groups;

  bool is_leaf() const { return children[0] < 0; }
};

struct CurriculumTree {
  std::vector<ClassNode> nodes;  // node id == position
  int root_id = 0;
  DenseMatrix A;
  Index t = 2;
  Index tbar = 1;
  Index gamma = 2;
  Partition partition_J;  // row blocks (support split of x)
  Partition partition_K;  // column blocks of the leaf concatenation
  Vector x_designated;    // teacher-side designated solution
  Index identity_block_rows = 0;  // trailing [I I] rows of A (SAT model class), 0 if none
  std::string label;
  std::vector<std::string> warnings;  // violated premises, reported not enforced

  const ClassNode& node(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
  /// Children-before-parent traversal order starting at the root.
  std::vector<int> post_order() const;
};

struct TrainingSet {
  int node_id = -1;
  DenseMatrix b_columns;  // m x q right-hand sides
  Index q = 0;
  std::uint64_t seed = 0;
  std::optional<DenseMatrix> z_true;  // p x q teacher-side coefficients

  /// Asserts each stored b equals A * X_true * z exactly (teacher data only).
  void validate_against(const DenseMatrix& A, const DenseMatrix& X_true) const;
};

/// Splits x into the columns of S: column l carries the entries of x on
/// block J_l. Requires disjoint blocks covering supp(x); S * 1 = x.
DenseMatrix split_support(const SparseVector& x, const Partition& partition_J);

/// SVD-based preconditioner: T = D U' with D^{-1} = diag(s_1..s_q, s_q...),
/// so that T M has orthonormal columns while kappa(T) = kappa(M). Throws
/// RankError when M is column rank deficient.
DenseMatrix orthogonalizing_preconditioner(const DenseMatrix& M);

struct ClassMatrixParts {
  DenseMatrix X;  // n x p, the class matrix S Z' + D R (I - Z Z')
  DenseMatrix Z;  // p x q unit-basis columns
  DenseMatrix T;  // m x m preconditioner for A S_normalized
  Vector D_diag;  // n, diagonal scaling (1 outside the J blocks)
};

/// Builds the class matrix around the designated solution x:
///   X = S Z' + D R (I - Z Z')
/// with S the support split, Z the unit-basis block selectors (first index of
/// each K block), T orthogonalizing A S_normalized, D_j = ||(T A)_J||_F^{-1}
/// on block J, and R block-random (mean 0, variance 1) on matched [J, K]
/// blocks. Satisfies X (Z 1) = x exactly.
ClassMatrixParts build_class_matrix(const DenseMatrix& A, const SparseVector& x,
                                    const Partition& partition_J, const Partition& partition_K,
                                    Index p, const BernoulliSubgaussianParams& params,
                                    std::uint64_t seed);

/// Balanced partition of `indices` into `blocks` contiguous chunks; the last
/// block absorbs the remainder.
Partition balanced_partition(const IndexSet& indices, Index blocks);

/// Binary learnable tree of depth L around x: leaves are the K-blocks of the
/// class matrix, internal nodes join children with the (1/sqrt 2)-scaled
/// stacked-identity isometry. Records t / tbar = 2.
CurriculumTree build_curriculum_tree(const DenseMatrix& A, const SparseVector& x, int L,
                                     Index per_leaf_p, Index t,
                                     const BernoulliSubgaussianParams& params,
                                     std::uint64_t seed);

enum class SatVariant { I, II, III };

SatVariant sat_variant_from_string(const std::string& s);
std::string to_string(SatVariant v);

/// Dimensions for the identity-block model class A = [[A11 A12], [I I]].
struct SatCurriculumDims {
  Index n = 32;                  // solution dimension (even)
  Index clause_rows = 8;         // rows above the identity blocks; m = clause_rows + n/2
  Index ones_per_clause_row = 3; // {0,1} entries per clause-like row
  int depth_L = 1;               // tree depth (variant III ignores this and trains one node)
  Index per_leaf_p = 12;         // columns per leaf block
  Index t = 2;
  Index tbar = 1;
  Index x_block_sparsity = 4;    // nonzeros of the deterministic column per block
  Index random_col_sparsity = 4; // nonzeros per random column (0 = dense block)
  Index blocks = 4;              // variant III: number of diagonal blocks
  Index cols_per_block = 4;      // variant III: columns per diagonal block

  void validate(SatVariant variant) const;
};

/// Curricula over the identity-block model class:
///  I   - leaf blocks span equal row ranges; deterministic column in {0,1},
///        remaining columns random +-1.
///  II  - rows come in (y_i, z_i) pairs; every column uses at most one side
///        of each pair, so each column is a global l0 minimizer.
///  III - one node, block-diagonal layout; training coefficients take at most
///        one nonzero per block column, so every sample is a global minimizer.
CurriculumTree build_sat_curriculum(SatVariant variant, const SatCurriculumDims& dims,
                                    std::uint64_t seed);

/// Draws q training pairs b_l = A X_true z_l for the node, with z per the
/// restricted Bernoulli-Subgaussian model at rate tbar / (2 p). Honors the
/// node's per-group sample constraint when present (Curriculum III).
TrainingSet emit_training_samples(const CurriculumTree& tree, int node_id, Index q,
                                  std::uint64_t seed);

/// Node-count bound ceil(gamma * s0^{log gamma / log(c t / tbar)}).
/// Requires c t / tbar > 1.
std::uint64_t tree_size_bound(Index s0, Index gamma, double c, Index t, Index tbar);

}  // namespace cstree
