#include "cstree/teacher.hpp"

#include "cstree/rng.hpp"
#include "cstree/verify.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cstree {

std::vector<int> CurriculumTree::post_order() const {
  std::vector<int> order;
  order.reserve(nodes.size());
  std::vector<int> stack{root_id};
  std::vector<int> visit;
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    visit.push_back(id);
    const ClassNode& nd = node(id);
    if (!nd.is_leaf()) {
      stack.push_back(nd.children[0]);
      stack.push_back(nd.children[1]);
    }
  }
  order.assign(visit.rbegin(), visit.rend());
  return order;
}

void TrainingSet::validate_against(const DenseMatrix& A, const DenseMatrix& X_true) const {
  if (!z_true) throw ParameterError("TrainingSet: no teacher coefficients attached");
  const DenseMatrix B = A * X_true;
  for (Index l = 0; l < q; ++l) {
    const Vector expected = B * z_true->col(l);
    if (expected != b_columns.col(l))
      throw ConstructionError("TrainingSet: stored b differs from A X z on sample " +
                              std::to_string(l));
  }
}

DenseMatrix split_support(const SparseVector& x, const Partition& partition_J) {
  x.validate();
  const Index n = x.dim;
  std::vector<int> owner(n, -1);
  for (std::size_t l = 0; l < partition_J.size(); ++l) {
    for (Index j : partition_J[l]) {
      if (j < 0 || j >= n) throw PartitionError("split_support: block index out of range");
      if (owner[j] >= 0) throw PartitionError("split_support: overlapping blocks");
      owner[j] = static_cast<int>(l);
    }
  }
  for (Index j : x.support)
    if (owner[j] < 0)
      throw PartitionError("split_support: support index " + std::to_string(j) +
                           " not covered by any block");

  DenseMatrix S = DenseMatrix::Zero(n, static_cast<Index>(partition_J.size()));
  const Vector dense = x.to_dense();
  for (std::size_t l = 0; l < partition_J.size(); ++l)
    for (Index j : partition_J[l]) S(j, static_cast<Index>(l)) = dense[j];
  return S;
}

DenseMatrix orthogonalizing_preconditioner(const DenseMatrix& M) {
  const Index m = M.rows();
  const Index q = M.cols();
  if (m < q) throw ParameterError("orthogonalizing_preconditioner: needs rows >= cols");
  Eigen::JacobiSVD<DenseMatrix> svd(M, Eigen::ComputeFullU);
  const Vector& sigma = svd.singularValues();
  Index rank = 0;
  const double thresh = (sigma.size() ? sigma[0] : 0.0) * 1e-10;
  while (rank < sigma.size() && sigma[rank] > thresh) ++rank;
  if (rank < q) throw RankError("orthogonalizing_preconditioner: rank-deficient input", rank);

  // D^{-1} = diag(s_1..s_q, s, ..., s); the completion value s may sit
  // anywhere in [s_q, s_1], the smallest retained value keeps kappa(T) =
  // kappa(M).
  Vector dinv(m);
  for (Index i = 0; i < q; ++i) dinv[i] = sigma[i];
  for (Index i = q; i < m; ++i) dinv[i] = sigma[q - 1];
  return dinv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

Partition balanced_partition(const IndexSet& indices, Index blocks) {
  if (blocks < 1) throw PartitionError("balanced_partition: need at least one block");
  if (static_cast<Index>(indices.size()) < blocks)
    throw PartitionError("balanced_partition: fewer indices than blocks");
  const Index base = static_cast<Index>(indices.size()) / blocks;
  Partition out(blocks);
  std::size_t pos = 0;
  for (Index l = 0; l < blocks; ++l) {
    // Last block absorbs the remainder.
    const std::size_t take =
        (l + 1 == blocks) ? indices.size() - pos : static_cast<std::size_t>(base);
    out[l].assign(indices.begin() + pos, indices.begin() + pos + take);
    pos += take;
  }
  return out;
}

namespace {

void validate_k_partition(const Partition& partition_K, Index p) {
  std::vector<char> seen(p, 0);
  Index total = 0;
  for (const IndexSet& K : partition_K) {
    if (K.empty()) throw PartitionError("column partition has an empty block");
    for (Index k : K) {
      if (k < 0 || k >= p) throw PartitionError("column partition index out of range");
      if (seen[k]) throw PartitionError("column partition blocks overlap");
      seen[k] = 1;
      ++total;
    }
  }
  if (total != p) throw PartitionError("column partition does not cover [p]");
}

int find_dependent_block(const DenseMatrix& A, const DenseMatrix& S) {
  // First column whose addition does not increase the rank of A S.
  for (Index j = 1; j <= S.cols(); ++j) {
    Eigen::JacobiSVD<DenseMatrix> svd(A * S.leftCols(j));
    const Vector& sigma = svd.singularValues();
    const double thresh = sigma[0] * 1e-10;
    Index rank = 0;
    while (rank < sigma.size() && sigma[rank] > thresh) ++rank;
    if (rank < j) return static_cast<int>(j - 1);
  }
  return -1;
}

}  // namespace

ClassMatrixParts build_class_matrix(const DenseMatrix& A, const SparseVector& x,
                                    const Partition& partition_J, const Partition& partition_K,
                                    Index p, const BernoulliSubgaussianParams& params,
                                    std::uint64_t seed) {
  params.validate();
  if (partition_J.size() != partition_K.size())
    throw PartitionError("build_class_matrix: J and K block counts differ");
  validate_k_partition(partition_K, p);
  const Index n = x.dim;
  if (A.cols() != n) throw ParameterError("build_class_matrix: A cols != dim(x)");
  const Index q = static_cast<Index>(partition_J.size());

  DenseMatrix S = split_support(x, partition_J);
  DenseMatrix S_norm = S;
  for (Index l = 0; l < q; ++l) {
    const double norm = S.col(l).norm();
    if (norm == 0.0)
      throw ConstructionError("build_class_matrix: block " + std::to_string(l) +
                              " carries no part of x");
    S_norm.col(l) /= norm;
  }
  if (!check_split_independence(A, S))
    throw ConstructionError("build_class_matrix: A S rank-deficient at block " +
                            std::to_string(find_dependent_block(A, S)));

  ClassMatrixParts parts;
  parts.T = orthogonalizing_preconditioner(A * S_norm);
  const DenseMatrix TA = parts.T * A;

  parts.D_diag = Vector::Ones(n);
  for (Index l = 0; l < q; ++l) {
    double fro2 = 0.0;
    for (Index j : partition_J[l]) fro2 += TA.col(j).squaredNorm();
    const double scale = 1.0 / std::sqrt(fro2);
    for (Index j : partition_J[l]) parts.D_diag[j] = scale;
  }

  parts.Z = DenseMatrix::Zero(p, q);
  for (Index l = 0; l < q; ++l) parts.Z(partition_K[l].front(), l) = 1.0;

  // Block random part: i.i.d. mean-zero unit-variance entries on each
  // matched [J, K] block, zero elsewhere.
  Rng rng = split_stream(seed, 0, StreamPurpose::class_random);
  DenseMatrix R = DenseMatrix::Zero(n, p);
  for (Index l = 0; l < q; ++l)
    for (Index k : partition_K[l])
      for (Index j : partition_J[l])
        R(j, k) = params.law == SubgaussianLaw::gaussian ? rng.normal() : rng.rademacher();

  const DenseMatrix projector =
      DenseMatrix::Identity(p, p) - parts.Z * parts.Z.transpose();
  parts.X = S * parts.Z.transpose() + parts.D_diag.asDiagonal() * (R * projector);
  return parts;
}

namespace {

Index max_column_sparsity(const DenseMatrix& X) {
  Index best = 0;
  for (Index j = 0; j < X.cols(); ++j) best = std::max(best, sparsity(X.col(j), 0.0));
  return best;
}

struct TreeBuilder {
  const DenseMatrix* X = nullptr;
  const Partition* partition_K = nullptr;
  Index p_total = 0;
  std::vector<ClassNode> nodes;

  int build(Index leaf_lo, Index leaf_hi, int depth) {
    ClassNode node;
    node.depth = depth;
    if (leaf_hi - leaf_lo == 1) {
      const IndexSet& K = (*partition_K)[leaf_lo];
      node.K_set = K;
      node.X_true.resize(X->rows(), static_cast<Index>(K.size()));
      node.W = DenseMatrix::Zero(p_total, static_cast<Index>(K.size()));
      for (std::size_t i = 0; i < K.size(); ++i) {
        node.X_true.col(static_cast<Index>(i)) = X->col(K[i]);
        node.W(K[i], static_cast<Index>(i)) = 1.0;
      }
    } else {
      const Index mid = leaf_lo + (leaf_hi - leaf_lo) / 2;
      const int left = build(leaf_lo, mid, depth + 1);
      const int right = build(mid, leaf_hi, depth + 1);
      const ClassNode& a = nodes[left];
      const ClassNode& b = nodes[right];
      if (a.X_true.cols() != b.X_true.cols())
        throw ConstructionError("tree join requires equally sized children");
      // X_i = [X_left X_right] * (1/sqrt 2) [I; I]
      const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
      node.children = {left, right};
      node.X_true = inv_sqrt2 * (a.X_true + b.X_true);
      node.W = inv_sqrt2 * (a.W + b.W);
      node.K_set = a.K_set;
      node.K_set.insert(node.K_set.end(), b.K_set.begin(), b.K_set.end());
      std::sort(node.K_set.begin(), node.K_set.end());
    }
    node.s_col_bound = max_column_sparsity(node.X_true);
    node.id = static_cast<int>(nodes.size());
    nodes.push_back(std::move(node));
    return nodes.back().id;
  }
};

// Fixes depths after recursion: TreeBuilder assigns them top-down from the
// root call, which already matches "distance from root".
CurriculumTree assemble_binary_tree(DenseMatrix A, const DenseMatrix& X, Partition partition_J,
                                    Partition partition_K, int L, Index t, Index tbar,
                                    Vector x_designated) {
  TreeBuilder builder;
  builder.X = &X;
  builder.partition_K = &partition_K;
  builder.p_total = X.cols();

  CurriculumTree tree;
  tree.root_id = builder.build(0, static_cast<Index>(partition_K.size()), 0);
  tree.nodes = std::move(builder.nodes);
  tree.A = std::move(A);
  tree.t = t;
  tree.tbar = tbar;
  tree.gamma = 2;
  tree.partition_J = std::move(partition_J);
  tree.partition_K = std::move(partition_K);
  tree.x_designated = std::move(x_designated);
  return tree;
}

}  // namespace

CurriculumTree build_curriculum_tree(const DenseMatrix& A, const SparseVector& x, int L,
                                     Index per_leaf_p, Index t,
                                     const BernoulliSubgaussianParams& params,
                                     std::uint64_t seed) {
  if (L < 0) throw ParameterError("build_curriculum_tree: depth must be >= 0");
  if (t < 2 || t % 2 != 0)
    throw ParameterError("build_curriculum_tree: t must be even and >= 2 (t / tbar = 2)");
  if (per_leaf_p < 1) throw ParameterError("build_curriculum_tree: per_leaf_p must be >= 1");
  const Index q = Index{1} << L;
  x.validate();

  const Partition partition_J = balanced_partition(x.support, q);
  const Index p_total = per_leaf_p * q;
  Partition partition_K(q);
  for (Index l = 0; l < q; ++l) {
    partition_K[l].resize(per_leaf_p);
    std::iota(partition_K[l].begin(), partition_K[l].end(), l * per_leaf_p);
  }

  ClassMatrixParts parts =
      build_class_matrix(A, x, partition_J, partition_K, p_total, params, seed);

  CurriculumTree tree = assemble_binary_tree(A, parts.X, partition_J, partition_K, L, t, t / 2,
                                             x.to_dense());
  tree.label = "generic";

  // Stable-rank premise: min_J ||A_J||_F^2 / ||A_J||^2 >= t kappa(AS) (L + log(p/t)).
  // Desk-scale dimensions rarely meet it; report, never enforce.
  double min_stable = std::numeric_limits<double>::infinity();
  for (const IndexSet& J : tree.partition_J) {
    DenseMatrix AJ(A.rows(), static_cast<Index>(J.size()));
    for (std::size_t i = 0; i < J.size(); ++i) AJ.col(static_cast<Index>(i)) = A.col(J[i]);
    min_stable = std::min(min_stable, stable_rank(AJ));
  }
  Eigen::JacobiSVD<DenseMatrix> svd(A * split_support(x, tree.partition_J));
  const double kappa =
      svd.singularValues()[0] / svd.singularValues()[svd.singularValues().size() - 1];
  const double required =
      static_cast<double>(t) * kappa *
      (L + std::log(std::max(1.0, static_cast<double>(p_total) / static_cast<double>(t))));
  if (min_stable < required) {
    tree.warnings.push_back(
        "stable-rank premise not met: min_J sr(A_J) = " + std::to_string(min_stable) +
        " < " + std::to_string(required) + " = t kappa(AS) (L + log(p/t))");
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Curricula over the identity-block model class.
// ---------------------------------------------------------------------------

SatVariant sat_variant_from_string(const std::string& s) {
  if (s == "I" || s == "i" || s == "1") return SatVariant::I;
  if (s == "II" || s == "ii" || s == "2") return SatVariant::II;
  if (s == "III" || s == "iii" || s == "3") return SatVariant::III;
  throw ParameterError("unknown curriculum variant: " + s);
}

std::string to_string(SatVariant v) {
  switch (v) {
    case SatVariant::I: return "I";
    case SatVariant::II: return "II";
    case SatVariant::III: return "III";
  }
  return "?";
}

void SatCurriculumDims::validate(SatVariant variant) const {
  if (n < 2 || n % 2 != 0) throw ParameterError("sat curriculum: n must be even and >= 2");
  if (clause_rows < 0) throw ParameterError("sat curriculum: clause_rows must be >= 0");
  if (ones_per_clause_row < 1 || ones_per_clause_row > n)
    throw ParameterError("sat curriculum: ones_per_clause_row out of range");
  if (t < 1 || tbar < 1 || t < tbar) throw ParameterError("sat curriculum: need t >= tbar >= 1");
  if (x_block_sparsity < 1) throw ParameterError("sat curriculum: x_block_sparsity must be >= 1");
  if (variant == SatVariant::III) {
    if (blocks < 1 || cols_per_block < 1)
      throw ParameterError("sat curriculum III: blocks and cols_per_block must be >= 1");
    if (blocks > n / 2) throw ParameterError("sat curriculum III: more blocks than row pairs");
  } else {
    if (depth_L < 0) throw ParameterError("sat curriculum: depth must be >= 0");
    if (per_leaf_p < 1) throw ParameterError("sat curriculum: per_leaf_p must be >= 1");
    const Index leaves = Index{1} << depth_L;
    const Index rows_per_leaf = (variant == SatVariant::I) ? n / leaves : (n / 2) / leaves;
    if (variant == SatVariant::I && per_leaf_p > rows_per_leaf)
      throw ParameterError("sat curriculum I: per_leaf_p exceeds rows per leaf block");
    if (variant == SatVariant::II && per_leaf_p > 2 * rows_per_leaf)
      throw ParameterError("sat curriculum II: per_leaf_p exceeds rows per leaf block");
    if (rows_per_leaf < 1) throw ParameterError("sat curriculum: more leaves than rows");
  }
}

namespace {

DenseMatrix sample_identity_block_matrix(const SatCurriculumDims& dims, Rng& rng) {
  const Index half = dims.n / 2;
  const Index m = dims.clause_rows + half;
  DenseMatrix A = DenseMatrix::Zero(m, dims.n);
  std::vector<Index> cols(dims.n);
  std::iota(cols.begin(), cols.end(), Index{0});
  for (Index r = 0; r < dims.clause_rows; ++r) {
    // Clause-like row: ones_per_clause_row distinct {0,1} entries.
    for (Index i = 0; i < dims.ones_per_clause_row; ++i) {
      const Index j = i + static_cast<Index>(rng.below(dims.n - i));
      std::swap(cols[i], cols[j]);
      A(r, cols[i]) = 1.0;
    }
  }
  for (Index i = 0; i < half; ++i) {
    A(dims.clause_rows + i, i) = 1.0;
    A(dims.clause_rows + i, half + i) = 1.0;
  }
  return A;
}

IndexSet sample_subset(Rng& rng, const IndexSet& from, Index count) {
  IndexSet pool = from;
  count = std::min<Index>(count, static_cast<Index>(pool.size()));
  for (Index i = 0; i < count; ++i) {
    const Index j = i + static_cast<Index>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

CurriculumTree build_sat_curriculum(SatVariant variant, const SatCurriculumDims& dims,
                                    std::uint64_t seed) {
  dims.validate(variant);
  const Index half = dims.n / 2;

  Rng matrix_rng = split_stream(seed, 0, StreamPurpose::matrix);
  DenseMatrix A = sample_identity_block_matrix(dims, matrix_rng);
  Rng x_rng = split_stream(seed, 0, StreamPurpose::designated);
  Rng r_rng = split_stream(seed, 0, StreamPurpose::class_random);

  Vector x = Vector::Zero(dims.n);
  CurriculumTree tree;

  if (variant == SatVariant::I) {
    const Index leaves = Index{1} << dims.depth_L;
    IndexSet all_rows(dims.n);
    std::iota(all_rows.begin(), all_rows.end(), Index{0});
    const Partition partition_J = balanced_partition(all_rows, leaves);

    const Index p_total = dims.per_leaf_p * leaves;
    Partition partition_K(leaves);
    DenseMatrix X = DenseMatrix::Zero(dims.n, p_total);
    for (Index l = 0; l < leaves; ++l) {
      partition_K[l].resize(dims.per_leaf_p);
      std::iota(partition_K[l].begin(), partition_K[l].end(), l * dims.per_leaf_p);

      const IndexSet x_rows = sample_subset(x_rng, partition_J[l], dims.x_block_sparsity);
      for (Index j : x_rows) x[j] = 1.0;  // deterministic column entries in {0, 1}
      for (Index j : x_rows) X(j, partition_K[l].front()) = 1.0;

      for (Index c = 1; c < dims.per_leaf_p; ++c) {
        const Index nnz = dims.random_col_sparsity == 0
                              ? static_cast<Index>(partition_J[l].size())
                              : dims.random_col_sparsity;
        const IndexSet rows = sample_subset(r_rng, partition_J[l], nnz);
        for (Index j : rows) X(j, partition_K[l][c]) = r_rng.rademacher();
      }
    }
    tree = assemble_binary_tree(std::move(A), X, partition_J, partition_K, dims.depth_L, dims.t,
                                dims.tbar, x);
  } else if (variant == SatVariant::II) {
    const Index leaves = Index{1} << dims.depth_L;
    IndexSet all_pairs(half);
    std::iota(all_pairs.begin(), all_pairs.end(), Index{0});
    const Partition pair_blocks = balanced_partition(all_pairs, leaves);

    Partition partition_J(leaves);
    for (Index l = 0; l < leaves; ++l) {
      for (Index i : pair_blocks[l]) partition_J[l].push_back(i);
      for (Index i : pair_blocks[l]) partition_J[l].push_back(half + i);
      std::sort(partition_J[l].begin(), partition_J[l].end());
    }

    const Index p_total = dims.per_leaf_p * leaves;
    Partition partition_K(leaves);
    DenseMatrix X = DenseMatrix::Zero(dims.n, p_total);
    for (Index l = 0; l < leaves; ++l) {
      partition_K[l].resize(dims.per_leaf_p);
      std::iota(partition_K[l].begin(), partition_K[l].end(), l * dims.per_leaf_p);

      // Deterministic column: one side of each chosen pair, value 1.
      const IndexSet x_pairs = sample_subset(x_rng, pair_blocks[l], dims.x_block_sparsity);
      for (Index i : x_pairs) {
        const Index row = (x_rng.next_u64() & 1ULL) ? i : half + i;
        x[row] = 1.0;
        X(row, partition_K[l].front()) = 1.0;
      }
      // Random columns obey the same pairing rule with +-1 values.
      for (Index c = 1; c < dims.per_leaf_p; ++c) {
        const Index nnz = dims.random_col_sparsity == 0
                              ? static_cast<Index>(pair_blocks[l].size())
                              : dims.random_col_sparsity;
        const IndexSet pairs = sample_subset(r_rng, pair_blocks[l], nnz);
        for (Index i : pairs) {
          const Index row = (r_rng.next_u64() & 1ULL) ? i : half + i;
          X(row, partition_K[l][c]) = r_rng.rademacher();
        }
      }
    }
    tree = assemble_binary_tree(std::move(A), X, partition_J, partition_K, dims.depth_L, dims.t,
                                dims.tbar, x);
  } else {
    // Variant III: a single node with block-diagonal structure and a
    // one-nonzero-per-block sampling constraint.
    IndexSet all_pairs(half);
    std::iota(all_pairs.begin(), all_pairs.end(), Index{0});
    const Partition pair_blocks = balanced_partition(all_pairs, dims.blocks);

    const Index p_total = dims.blocks * dims.cols_per_block;
    Partition partition_K(dims.blocks);
    Partition partition_J(dims.blocks);
    DenseMatrix X = DenseMatrix::Zero(dims.n, p_total);
    for (Index b = 0; b < dims.blocks; ++b) {
      partition_K[b].resize(dims.cols_per_block);
      std::iota(partition_K[b].begin(), partition_K[b].end(), b * dims.cols_per_block);
      for (Index i : pair_blocks[b]) partition_J[b].push_back(i);
      for (Index i : pair_blocks[b]) partition_J[b].push_back(half + i);
      std::sort(partition_J[b].begin(), partition_J[b].end());

      const IndexSet x_pairs = sample_subset(x_rng, pair_blocks[b], dims.x_block_sparsity);
      for (Index i : x_pairs) {
        const Index row = (x_rng.next_u64() & 1ULL) ? i : half + i;
        x[row] = 1.0;
        X(row, partition_K[b].front()) = 1.0;
      }
      for (Index c = 1; c < dims.cols_per_block; ++c) {
        const Index nnz = dims.random_col_sparsity == 0
                              ? static_cast<Index>(pair_blocks[b].size())
                              : dims.random_col_sparsity;
        const IndexSet pairs = sample_subset(r_rng, pair_blocks[b], nnz);
        for (Index i : pairs) {
          const Index row = (r_rng.next_u64() & 1ULL) ? i : half + i;
          X(row, partition_K[b][c]) = r_rng.rademacher();
        }
      }
    }

    ClassNode node;
    node.id = 0;
    node.X_true = X;
    node.W = DenseMatrix::Identity(p_total, p_total);
    node.K_set.resize(p_total);
    std::iota(node.K_set.begin(), node.K_set.end(), Index{0});
    node.s_col_bound = max_column_sparsity(X);
    node.depth = 0;
    node.sample_column_groups = partition_K;

    tree.nodes.push_back(std::move(node));
    tree.root_id = 0;
    tree.A = std::move(A);
    tree.t = dims.t;
    tree.tbar = dims.tbar;
    tree.gamma = 2;
    tree.partition_J = partition_J;
    tree.partition_K = partition_K;
    tree.x_designated = x;
  }

  tree.identity_block_rows = half;
  tree.label = to_string(variant);
  return tree;
}

TrainingSet emit_training_samples(const CurriculumTree& tree, int node_id, Index q,
                                  std::uint64_t seed) {
  const ClassNode& node = tree.node(node_id);
  const Index p = node.X_true.cols();
  const double theta = static_cast<double>(tree.tbar) / (2.0 * static_cast<double>(p));

  DenseMatrix Z;
  if (node.sample_column_groups.empty()) {
    Z = sample_training_coefficients(
        p, q, static_cast<double>(tree.tbar),
        derive_stream_seed(seed, static_cast<std::uint64_t>(node_id), StreamPurpose::coefficients));
  } else {
    // Curriculum III: at most one nonzero per column group, keeping the
    // expected total sparsity at tbar / 2.
    Rng rng = split_stream(seed, static_cast<std::uint64_t>(node_id), StreamPurpose::coefficients);
    Z = DenseMatrix::Zero(p, q);
    for (Index l = 0; l < q; ++l) {
      for (const IndexSet& group : node.sample_column_groups) {
        const double p_group = std::min(1.0, theta * static_cast<double>(group.size()));
        if (rng.uniform01() < p_group) {
          const Index pick = group[rng.below(group.size())];
          Z(pick, l) = rng.rademacher();
        }
      }
    }
  }

  TrainingSet set;
  set.node_id = node_id;
  set.q = q;
  set.seed = seed;
  const DenseMatrix B = tree.A * node.X_true;
  set.b_columns.resize(tree.A.rows(), q);
  for (Index l = 0; l < q; ++l) set.b_columns.col(l) = B * Z.col(l);
  set.z_true = std::move(Z);
  return set;
}

std::uint64_t tree_size_bound(Index s0, Index gamma, double c, Index t, Index tbar) {
  if (s0 < 1 || gamma < 1 || t < 1 || tbar < 1)
    throw ParameterError("tree_size_bound: counts must be positive");
  const double ratio = c * static_cast<double>(t) / static_cast<double>(tbar);
  if (!(ratio > 1.0)) throw DomainError("tree_size_bound: requires c t / tbar > 1");
  const double exponent = std::log(static_cast<double>(gamma)) / std::log(ratio);
  const double value = static_cast<double>(gamma) * std::pow(static_cast<double>(s0), exponent);
  if (!(value < 9.2e18)) throw DomainError("tree_size_bound: bound exceeds 2^63");
  // Guard against round-off pushing an exact integer over the ceiling.
  return static_cast<std::uint64_t>(std::ceil(value * (1.0 - 1e-12)));
}

}  // namespace cstree
