#include "cstree/student.hpp"

#include "cstree/rng.hpp"

#include <cmath>

namespace cstree {

bool grade(const DenseMatrix& A, const Vector& x, const Vector& b, double tol) {
  if (A.cols() != x.size() || A.rows() != b.size())
    throw ParameterError("grade: inconsistent dimensions");
  const double bound = tol * std::max(1.0, b.lpNorm<Eigen::Infinity>());
  return (A * x - b).lpNorm<Eigen::Infinity>() <= bound;
}

ScaleMode scale_mode_from_string(const std::string& s) {
  if (s == "snap") return ScaleMode::snap;
  if (s == "rip") return ScaleMode::rip;
  throw ParameterError("unknown scale mode: " + s);
}

std::string to_string(ScaleMode mode) { return mode == ScaleMode::snap ? "snap" : "rip"; }

NodeTrainingReport train_node(const DenseMatrix& A, const TrainingSet& samples,
                              const SolveFn& solve, Index p, const TrainOptions& opts) {
  NodeTrainingReport report;
  report.node_id = samples.node_id;
  report.q_attempted = samples.q;

  // Survivors keep their original sample order so the factorization input is
  // deterministic. Duplicate solutions are kept as-is.
  std::vector<Index> keep;
  std::vector<Vector> solutions;
  keep.reserve(samples.q);
  for (Index l = 0; l < samples.q; ++l) {
    const Vector b = samples.b_columns.col(l);
    std::optional<SparseVector> candidate;
    try {
      candidate = solve(A, b);
    } catch (const InfeasibleError&) {
      candidate.reset();
    }
    if (!candidate) continue;
    const Vector x = candidate->to_dense();
    if (!grade(A, x, b, opts.grader_tol)) continue;
    keep.push_back(l);
    solutions.push_back(x);
  }

  report.q_graded_ok = static_cast<Index>(keep.size());
  report.validate_fraction =
      samples.q > 0 ? static_cast<double>(report.q_graded_ok) / static_cast<double>(samples.q)
                    : 0.0;
  if (report.q_graded_ok < p)
    throw InsufficientDataError("train_node: fewer graded-ok samples than dictionary columns",
                                report.q_graded_ok, p);

  DenseMatrix Y(A.cols(), report.q_graded_ok);
  for (Index i = 0; i < report.q_graded_ok; ++i) Y.col(i) = solutions[i];

  const FactorizationResult factor = sparse_factor(Y, p, opts.factor);
  report.X_learned = opts.scale == ScaleMode::snap
                         ? scale_snap(factor.X_bar, opts.snap_threshold)
                         : scale_rip(factor.X_bar, A);
  report.trained = true;
  return report;
}

std::vector<int> StudentView::post_order() const {
  std::vector<int> visit{root_id};
  for (std::size_t i = 0; i < visit.size(); ++i) {
    const StudentNodeView& nd = node(visit[i]);
    if (!nd.is_leaf()) {
      visit.push_back(nd.children[0]);
      visit.push_back(nd.children[1]);
    }
  }
  return std::vector<int>(visit.rbegin(), visit.rend());
}

StudentView make_student_view(const CurriculumTree& tree,
                              const std::map<int, TrainingSet>& samples) {
  StudentView view;
  view.A = tree.A;
  view.root_id = tree.root_id;
  view.t = tree.t;
  view.tbar = tree.tbar;
  view.label = tree.label;
  view.nodes.resize(tree.nodes.size());
  for (const ClassNode& node : tree.nodes) {
    StudentNodeView& sv = view.nodes.at(static_cast<std::size_t>(node.id));
    sv.id = node.id;
    sv.children = node.children;
    sv.depth = node.depth;
    sv.p = node.X_true.cols();
    sv.s_bound = node.s_col_bound;
    const auto it = samples.find(node.id);
    if (it != samples.end()) {
      sv.samples = it->second;
      sv.samples.z_true.reset();  // information boundary: no teacher coefficients
    } else {
      sv.samples.node_id = node.id;
      sv.samples.q = 0;
    }
  }
  return view;
}

std::map<int, NodeTrainingReport> tree_train(const StudentView& view,
                                             const TreeTrainConfig& cfg) {
  std::map<int, NodeTrainingReport> reports;

  for (const int id : view.post_order()) {
    const StudentNodeView& node = view.node(id);
    NodeTrainingReport report;
    report.node_id = id;

    SolveFn solve;
    DenseMatrix prior;  // keeps the concatenation alive for the closure
    if (node.is_leaf()) {
      const Index budget =
          cfg.leaf_max_support > 0 ? cfg.leaf_max_support : node.s_bound * view.tbar;
      solve = [&cfg, budget](const DenseMatrix& A, const Vector& b) {
        return solve_l0_brute(A, b, budget, cfg.leaf_zero_tol, cfg.leaf_enumeration_budget);
      };
    } else {
      bool children_ok = true;
      for (const int child : node.children) {
        if (!reports.at(child).trained) {
          report.failure = "child " + std::to_string(child) + " failed: " +
                           (reports.at(child).failure.empty() ? "untrained"
                                                              : reports.at(child).failure);
          children_ok = false;
        }
      }
      if (!children_ok) {
        report.q_attempted = node.samples.q;
        reports.emplace(id, std::move(report));
        continue;
      }
      const DenseMatrix& left = reports.at(node.children[0]).X_learned;
      const DenseMatrix& right = reports.at(node.children[1]).X_learned;
      prior.resize(view.A.cols(), left.cols() + right.cols());
      prior << left, right;
      const SolverOptions l1_opts = cfg.l1;
      const DenseMatrix* prior_ptr = &prior;
      solve = [l1_opts, prior_ptr](const DenseMatrix& A,
                                   const Vector& b) -> std::optional<SparseVector> {
        PriorSolution ps = solve_l1_prior(A, *prior_ptr, b, l1_opts);
        return ps.x;
      };
    }

    TrainOptions node_train = cfg.train;
    node_train.factor.seed =
        derive_stream_seed(cfg.master_seed, static_cast<std::uint64_t>(id),
                           StreamPurpose::solver_init);
    try {
      report = train_node(view.A, node.samples, solve, node.p, node_train);
      report.node_id = id;
    } catch (const InsufficientDataError& e) {
      report.failure = e.what();
      report.q_attempted = node.samples.q;
      report.q_graded_ok = e.got;
      report.validate_fraction =
          node.samples.q > 0 ? static_cast<double>(e.got) / static_cast<double>(node.samples.q)
                             : 0.0;
    } catch (const RankError& e) {
      report.failure = e.what();
      report.q_attempted = node.samples.q;
    }
    reports.emplace(id, std::move(report));
  }
  return reports;
}

}  // namespace cstree
