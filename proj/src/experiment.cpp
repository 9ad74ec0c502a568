#include "cstree/experiment.hpp"

#include "cstree/core.hpp"
#include "cstree/rng.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>

namespace cstree {

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ParameterError("experiment: seeds must be nonempty");
  if (q_samples < 1) throw ParameterError("experiment: q_samples must be >= 1");
  solver.validate();
  if (curriculum == "generic") {
    if (generic.t < 2 || generic.t % 2 != 0)
      throw ParameterError("experiment: generic t must be even and >= 2");
    if (generic.s0 < (Index{1} << generic.depth_L))
      throw ParameterError("experiment: s0 must cover one support index per leaf");
  } else {
    sat.validate(sat_variant_from_string(curriculum));
  }
  if (!(grader_tol > 0)) throw ParameterError("experiment: grader_tol must be positive");
}

namespace {

Json sat_dims_to_json(const SatCurriculumDims& d) {
  Json j;
  j["n"] = d.n;
  j["clause_rows"] = d.clause_rows;
  j["ones_per_clause_row"] = d.ones_per_clause_row;
  j["depth_L"] = d.depth_L;
  j["per_leaf_p"] = d.per_leaf_p;
  j["t"] = d.t;
  j["tbar"] = d.tbar;
  j["x_block_sparsity"] = d.x_block_sparsity;
  j["random_col_sparsity"] = d.random_col_sparsity;
  j["blocks"] = d.blocks;
  j["cols_per_block"] = d.cols_per_block;
  return j;
}

SatCurriculumDims sat_dims_from_json(const Json& j) {
  SatCurriculumDims d;
  d.n = j.value("n", d.n);
  d.clause_rows = j.value("clause_rows", d.clause_rows);
  d.ones_per_clause_row = j.value("ones_per_clause_row", d.ones_per_clause_row);
  d.depth_L = j.value("depth_L", d.depth_L);
  d.per_leaf_p = j.value("per_leaf_p", d.per_leaf_p);
  d.t = j.value("t", d.t);
  d.tbar = j.value("tbar", d.tbar);
  d.x_block_sparsity = j.value("x_block_sparsity", d.x_block_sparsity);
  d.random_col_sparsity = j.value("random_col_sparsity", d.random_col_sparsity);
  d.blocks = j.value("blocks", d.blocks);
  d.cols_per_block = j.value("cols_per_block", d.cols_per_block);
  return d;
}

Json generic_dims_to_json(const GenericCurriculumDims& d) {
  Json j;
  j["m"] = d.m;
  j["n"] = d.n;
  j["s0"] = d.s0;
  j["depth_L"] = d.depth_L;
  j["per_leaf_p"] = d.per_leaf_p;
  j["t"] = d.t;
  j["law"] = to_string(d.law);
  return j;
}

GenericCurriculumDims generic_dims_from_json(const Json& j) {
  GenericCurriculumDims d;
  d.m = j.value("m", d.m);
  d.n = j.value("n", d.n);
  d.s0 = j.value("s0", d.s0);
  d.depth_L = j.value("depth_L", d.depth_L);
  d.per_leaf_p = j.value("per_leaf_p", d.per_leaf_p);
  d.t = j.value("t", d.t);
  if (j.contains("law")) d.law = subgaussian_law_from_string(j.at("law").get<std::string>());
  return d;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  ExperimentConfig cfg;
  cfg.label = j.value("label", cfg.label);
  cfg.curriculum = j.value("curriculum", cfg.curriculum);
  if (j.contains("sat")) cfg.sat = sat_dims_from_json(j.at("sat"));
  if (j.contains("generic")) cfg.generic = generic_dims_from_json(j.at("generic"));
  cfg.q_samples = j.value("q_samples", cfg.q_samples);
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.grader_tol = j.value("grader_tol", cfg.grader_tol);
  if (j.contains("scale")) cfg.scale = scale_mode_from_string(j.at("scale").get<std::string>());
  cfg.snap_threshold = j.value("snap_threshold", cfg.snap_threshold);
  cfg.match_tol = j.value("match_tol", cfg.match_tol);
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    cfg.solver.max_iters = s.value("max_iters", cfg.solver.max_iters);
    cfg.solver.step_size = s.value("step_size", cfg.solver.step_size);
    cfg.solver.grad_tol = s.value("grad_tol", cfg.solver.grad_tol);
    cfg.solver.zero_tol = s.value("zero_tol", cfg.solver.zero_tol);
  }
  cfg.leaf_max_support = j.value("leaf_max_support", cfg.leaf_max_support);
  cfg.leaf_zero_tol = j.value("leaf_zero_tol", cfg.leaf_zero_tol);
  cfg.leaf_enumeration_budget = j.value("leaf_enumeration_budget", cfg.leaf_enumeration_budget);
  if (j.contains("factor")) {
    const Json& f = j.at("factor");
    cfg.factor.l4_iters = f.value("l4_iters", cfg.factor.l4_iters);
    cfg.factor.l4_tol = f.value("l4_tol", cfg.factor.l4_tol);
    cfg.factor.fit_tol = f.value("fit_tol", cfg.factor.fit_tol);
    cfg.factor.rank_rel_tol = f.value("rank_rel_tol", cfg.factor.rank_rel_tol);
  }
  cfg.validate();
  return cfg;
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["label"] = label;
  j["curriculum"] = curriculum;
  if (curriculum == "generic")
    j["generic"] = generic_dims_to_json(generic);
  else
    j["sat"] = sat_dims_to_json(sat);
  j["q_samples"] = q_samples;
  j["seeds"] = seeds;
  j["grader_tol"] = grader_tol;
  j["scale"] = to_string(scale);
  j["snap_threshold"] = snap_threshold;
  j["match_tol"] = match_tol;
  j["solver"] = Json{{"max_iters", solver.max_iters},
                     {"step_size", solver.step_size},
                     {"grad_tol", solver.grad_tol},
                     {"zero_tol", solver.zero_tol}};
  j["leaf_max_support"] = leaf_max_support;
  j["leaf_zero_tol"] = leaf_zero_tol;
  j["leaf_enumeration_budget"] = leaf_enumeration_budget;
  j["factor"] = Json{{"l4_iters", factor.l4_iters},
                     {"l4_tol", factor.l4_tol},
                     {"fit_tol", factor.fit_tol},
                     {"rank_rel_tol", factor.rank_rel_tol}};
  return j;
}

std::pair<CurriculumTree, std::map<int, TrainingSet>> build_experiment_tree(
    const ExperimentConfig& cfg, std::uint64_t seed) {
  CurriculumTree tree;
  if (cfg.curriculum == "generic") {
    const GenericCurriculumDims& g = cfg.generic;
    BernoulliSubgaussianParams a_params;
    a_params.theta = 1.0;
    a_params.law = SubgaussianLaw::gaussian;
    DenseMatrix A = sample_bernoulli_subgaussian(
                        g.m, g.n, a_params, derive_stream_seed(seed, 0, StreamPurpose::matrix)) /
                    std::sqrt(static_cast<double>(g.m));

    Rng rng = split_stream(seed, 0, StreamPurpose::designated);
    Vector x = Vector::Zero(g.n);
    std::vector<Index> idx(g.n);
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = 0; i < g.s0; ++i) {
      const Index j = i + static_cast<Index>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
      // Magnitudes in [0.5, 2] keep entries well away from the zero threshold.
      x[idx[i]] = (rng.rademacher()) * (0.5 + 1.5 * rng.uniform01());
    }
    BernoulliSubgaussianParams r_params;
    r_params.law = g.law;
    tree = build_curriculum_tree(A, SparseVector::from_dense(x), g.depth_L, g.per_leaf_p, g.t,
                                 r_params, seed);
  } else {
    tree = build_sat_curriculum(sat_variant_from_string(cfg.curriculum), cfg.sat, seed);
  }
  tree.label = cfg.label;

  std::map<int, TrainingSet> samples;
  for (const ClassNode& node : tree.nodes)
    samples[node.id] = emit_training_samples(tree, node.id, cfg.q_samples, seed);
  return {std::move(tree), std::move(samples)};
}

namespace {

Index svd_rank(const DenseMatrix& M) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<DenseMatrix> svd(M);
  const Vector& sigma = svd.singularValues();
  const double thresh = sigma[0] * 1e-10;
  Index rank = 0;
  while (rank < sigma.size() && sigma[rank] > thresh) ++rank;
  return rank;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

struct NodeObservation {
  int depth = 0;
  double p_child = 0.0;
  double rank = 0.0;
  double validate_fraction = 0.0;
  bool trained = false;
  bool matched = false;
};

}  // namespace

bool ExperimentReport::all_seeds_ok() const {
  for (const SeedRecord& r : seed_records)
    if (!r.ok) return false;
  return true;
}

bool ExperimentReport::any_seed_ok() const {
  for (const SeedRecord& r : seed_records)
    if (r.ok) return true;
  return false;
}

Json ExperimentReport::to_json() const {
  Json j;
  j["format"] = "cstree-experiment-report";
  j["version"] = 1;
  j["config"] = config_echo;
  Json rows_json = Json::array();
  for (const DepthRow& row : rows) {
    Json rj;
    rj["depth"] = row.depth;
    rj["m"] = row.m;
    rj["n"] = row.n;
    rj["p_child"] = row.p_child;
    rj["rank_AX_child"] = row.rank_mean;
    rj["q_samples"] = row.q_samples;
    rj["validate_fraction"] = row.validate_fraction;
    rj["recovered_tally"] = std::to_string(row.recovered) + "/" + std::to_string(row.total);
    rj["recovered"] = row.recovered;
    rj["total"] = row.total;
    rows_json.push_back(std::move(rj));
  }
  j["depth_rows"] = std::move(rows_json);
  Json seeds_json = Json::array();
  for (const SeedRecord& rec : seed_records) {
    Json sj;
    sj["seed"] = rec.seed;
    sj["ok"] = rec.ok;
    if (!rec.error.empty()) sj["error"] = rec.error;
    Json nodes = Json::array();
    for (const auto& [id, report] : rec.reports) {
      Json nj;
      nj["node_id"] = id;
      nj["trained"] = report.trained;
      nj["q_attempted"] = report.q_attempted;
      nj["q_graded_ok"] = report.q_graded_ok;
      nj["validate_fraction"] = report.validate_fraction;
      nj["matched"] = report.matched;
      if (!report.failure.empty()) nj["failure"] = report.failure;
      nodes.push_back(std::move(nj));
    }
    sj["nodes"] = std::move(nodes);
    seeds_json.push_back(std::move(sj));
  }
  j["seed_runs"] = std::move(seeds_json);
  j["metadata"] = Json{{"timestamp", timestamp}, {"wall_time_s", wall_time_s}};
  return j;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  ExperimentReport out;
  out.config_echo = cfg.to_json();
  std::vector<NodeObservation> observations;
  Index m_dim = 0, n_dim = 0;

  for (const std::uint64_t seed : cfg.seeds) {
    SeedRecord record;
    record.seed = seed;
    try {
      auto [tree, samples] = build_experiment_tree(cfg, seed);
      m_dim = tree.A.rows();
      n_dim = tree.A.cols();
      const StudentView view = make_student_view(tree, samples);

      TreeTrainConfig ttcfg;
      ttcfg.l1 = cfg.solver;
      ttcfg.leaf_max_support = cfg.leaf_max_support;
      ttcfg.leaf_zero_tol = cfg.leaf_zero_tol;
      ttcfg.leaf_enumeration_budget = cfg.leaf_enumeration_budget;
      ttcfg.train.scale = cfg.scale;
      ttcfg.train.grader_tol = cfg.grader_tol;
      ttcfg.train.snap_threshold = cfg.snap_threshold;
      ttcfg.train.factor = cfg.factor;
      ttcfg.master_seed = seed;

      auto reports = tree_train(view, ttcfg);

      for (auto& [id, report] : reports) {
        const ClassNode& node = tree.node(id);
        if (report.trained) {
          const DenseMatrix target = cfg.scale == ScaleMode::snap
                                         ? scale_snap(node.X_true, cfg.snap_threshold)
                                         : node.X_true;
          report.matched =
              match_up_to_signed_permutation(report.X_learned, target, cfg.match_tol).matched;
        }

        NodeObservation obs;
        obs.depth = node.depth;
        obs.trained = report.trained;
        obs.matched = report.matched;
        obs.validate_fraction = report.validate_fraction;
        // Teacher-side prior context: the concatenated child matrices for
        // internal nodes, the node's own class matrix at the leaves.
        if (node.is_leaf()) {
          obs.p_child = static_cast<double>(node.X_true.cols());
          obs.rank = static_cast<double>(svd_rank(tree.A * node.X_true));
        } else {
          const DenseMatrix& l = tree.node(node.children[0]).X_true;
          const DenseMatrix& r = tree.node(node.children[1]).X_true;
          DenseMatrix child(l.rows(), l.cols() + r.cols());
          child << l, r;
          obs.p_child = static_cast<double>(child.cols());
          obs.rank = static_cast<double>(svd_rank(tree.A * child));
        }
        observations.push_back(obs);
      }
      record.ok = true;
      record.reports = std::move(reports);
    } catch (const std::exception& e) {
      record.ok = false;
      record.error = e.what();
    }
    out.seed_records.push_back(std::move(record));
  }

  int max_depth = -1;
  for (const NodeObservation& obs : observations) max_depth = std::max(max_depth, obs.depth);
  for (int d = 0; d <= max_depth; ++d) {
    DepthRow row;
    row.depth = d;
    row.m = m_dim;
    row.n = n_dim;
    row.q_samples = cfg.q_samples;
    int count = 0;
    for (const NodeObservation& obs : observations) {
      if (obs.depth != d) continue;
      ++count;
      row.p_child += obs.p_child;
      row.rank_mean += obs.rank;
      row.validate_fraction += obs.validate_fraction;
      row.total += 1;
      row.recovered += obs.matched ? 1 : 0;
    }
    if (count > 0) {
      row.p_child /= count;
      row.rank_mean /= count;
      row.validate_fraction /= count;
    }
    out.rows.push_back(row);
  }

  out.timestamp = utc_timestamp();
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace cstree
