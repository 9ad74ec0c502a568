// Command-line front end: curriculum generation, student training,
// property verification, SAT reductions and Table-style experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 partial failure
// (some seeds failed), 4 hard failure.

#include "cstree/experiment.hpp"
#include "cstree/matrix_io.hpp"
#include "cstree/sat.hpp"
#include "cstree/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace cstree;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;
constexpr int kExitHard = 4;

Json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path);
  Json j;
  is >> j;
  return j;
}

ExperimentConfig load_experiment_config(const std::string& path, std::int64_t seed_override) {
  ExperimentConfig cfg = ExperimentConfig::from_json(load_json_file(path));
  if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
  return cfg;
}

int cmd_gen_tree(const std::string& config_path, std::int64_t seed_override,
                 const std::string& out_dir) {
  const ExperimentConfig cfg = load_experiment_config(config_path, seed_override);
  const std::uint64_t seed = cfg.seeds.front();
  auto [tree, samples] = build_experiment_tree(cfg, seed);
  write_tree_bundle(out_dir, tree, samples);
  for (const std::string& w : tree.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << (fs::path(out_dir) / "tree.teacher.json").string() << " and "
            << (fs::path(out_dir) / "tree.student.json").string() << " (" << tree.nodes.size()
            << " nodes, seed " << seed << ")\n";
  return kExitOk;
}

int cmd_gen_samples(const std::string& tree_dir, std::int64_t seed_override, Index q_override) {
  std::map<int, TrainingSet> samples;
  CurriculumTree tree = read_teacher_tree(fs::path(tree_dir) / "tree.teacher.json", &samples);
  for (const ClassNode& node : tree.nodes) {
    const auto it = samples.find(node.id);
    const std::uint64_t seed = seed_override >= 0 ? static_cast<std::uint64_t>(seed_override)
                               : it != samples.end() ? it->second.seed
                                                     : 0;
    const Index q = q_override > 0 ? q_override : it != samples.end() ? it->second.q : 0;
    if (q <= 0) continue;
    samples[node.id] = emit_training_samples(tree, node.id, q, seed);
  }
  write_tree_bundle(tree_dir, tree, samples);
  std::cout << "regenerated samples for " << samples.size() << " nodes in " << tree_dir << "\n";
  return kExitOk;
}

int cmd_train(const std::string& tree_dir, const std::string& config_path,
              std::int64_t seed_override, const std::string& out_path) {
  const ExperimentConfig cfg = load_experiment_config(config_path, seed_override);
  const StudentView view = read_student_view(fs::path(tree_dir) / "tree.student.json");

  TreeTrainConfig ttcfg;
  ttcfg.l1 = cfg.solver;
  ttcfg.leaf_max_support = cfg.leaf_max_support;
  ttcfg.leaf_zero_tol = cfg.leaf_zero_tol;
  ttcfg.leaf_enumeration_budget = cfg.leaf_enumeration_budget;
  ttcfg.train.scale = cfg.scale;
  ttcfg.train.grader_tol = cfg.grader_tol;
  ttcfg.train.snap_threshold = cfg.snap_threshold;
  ttcfg.train.factor = cfg.factor;
  ttcfg.master_seed = cfg.seeds.front();

  const auto t0 = std::chrono::steady_clock::now();
  const auto reports = tree_train(view, ttcfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json run_info;
  run_info["tree"] = tree_dir;
  run_info["seed"] = ttcfg.master_seed;
  run_info["grader_tol"] = cfg.grader_tol;
  run_info["scale"] = to_string(cfg.scale);
  run_info["solver"] = cfg.to_json()["solver"];
  Json metadata;
  metadata["wall_time_s"] = wall;

  const Json report = report_to_json(reports, run_info, metadata);
  write_report(out_path, report);
  bool any_failed = false, any_ok = false;
  for (const auto& [id, r] : reports) (r.trained ? any_ok : any_failed) = true;
  std::cout << "trained " << reports.size() << " nodes -> " << out_path << "\n";
  if (!any_ok) return kExitHard;
  return any_failed ? kExitPartial : kExitOk;
}

int cmd_verify(const std::string& config_path, const std::string& out_path) {
  const Json cfg = load_json_file(config_path);
  const fs::path base = fs::path(config_path).parent_path();
  Json result;

  const DenseMatrix M = read_matrix_csv(base / cfg.at("matrix").get<std::string>());
  result["matrix"] = cfg.at("matrix");
  result["rows"] = M.rows();
  result["cols"] = M.cols();
  result["stable_rank"] = stable_rank(M);

  if (cfg.contains("rip_t")) {
    const Index t = cfg.at("rip_t").get<Index>();
    result["rip"] = Json{{"t", t}, {"delta", rip_constant_brute(M, t)}};
  }
  if (cfg.contains("nsp_t")) {
    const Index t = cfg.at("nsp_t").get<Index>();
    const NspMode mode = cfg.value("nsp_mode", std::string("exact_small")) == "monte_carlo"
                             ? NspMode::monte_carlo
                             : NspMode::exact_small;
    const NspCertificate cert = nsp_check(M, t, mode, 2'000'000ULL, cfg.value("seed", 0));
    result["nsp"] = Json{{"t", t},
                         {"mode", mode == NspMode::exact_small ? "exact_small" : "monte_carlo"},
                         {"holds", cert.holds},
                         {"cases_checked", cert.cases_checked},
                         {"note", cert.note}};
  }
  if (cfg.contains("split_S")) {
    const DenseMatrix S = read_matrix_csv(base / cfg.at("split_S").get<std::string>());
    result["split"] = Json{{"independent", check_split_independence(M, S)},
                           {"globally_optimal", check_split_global_optimality(M, S)}};
  }
  if (cfg.contains("expectation_u")) {
    const auto u_vals = cfg.at("expectation_u").get<std::vector<double>>();
    Vector u(static_cast<Index>(u_vals.size()));
    for (Index i = 0; i < u.size(); ++i) u[i] = u_vals[i];
    const auto r = expectation_identity_test(M, u, cfg.value("trials", 100000), cfg.value("seed", 0));
    result["expectation"] =
        Json{{"empirical", r.empirical}, {"expected", r.expected}, {"z_score", r.z_score}};
  }

  if (out_path.empty()) {
    std::cout << result.dump(2) << "\n";
  } else {
    write_report(out_path, result);
    std::cout << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_sat_reduce(const std::string& in_path, const std::string& out_dir) {
  const SatInstance inst = read_sat_instance(in_path);
  const ProblemInstance problem = reduce_1in3sat(inst);
  fs::create_directories(out_dir);
  write_matrix_csv(fs::path(out_dir) / "A.csv", problem.A);
  DenseMatrix b(problem.b.size(), 1);
  b.col(0) = problem.b;
  write_matrix_csv(fs::path(out_dir) / "b.csv", b);
  std::cout << "reduced " << inst.clauses.size() << " clauses over " << inst.n_vars
            << " variables -> " << out_dir << " (A is " << problem.A.rows() << "x"
            << problem.A.cols() << ")\n";
  return kExitOk;
}

int cmd_sat_solve(const std::string& in_path, Index max_support) {
  const SatInstance inst = read_sat_instance(in_path);
  const ProblemInstance problem = reduce_1in3sat(inst);
  const Index budget = max_support > 0 ? max_support : inst.n_vars;
  const auto solution = solve_l0_brute(problem.A, problem.b, budget, 1e-9);
  if (!solution) {
    std::cout << "UNSAT (no " << budget << "-sparse solution)\n";
    return kExitOk;
  }
  const auto assignment = solution_to_assignment(*solution, inst.n_vars);
  if (!assignment) {
    std::cout << "UNSAT (sparsest solution is not an assignment)\n";
    return kExitOk;
  }
  std::cout << "SAT";
  for (Index i = 0; i < inst.n_vars; ++i)
    std::cout << " " << ((*assignment)[static_cast<std::size_t>(i)] ? i + 1 : -(i + 1));
  std::cout << "\n";
  return kExitOk;
}

int cmd_experiment(const std::string& config_path, std::int64_t seed_override,
                   const std::string& out_dir, const std::string& format) {
  const ExperimentConfig cfg = load_experiment_config(config_path, seed_override);
  const ExperimentReport report = run_experiment(cfg);

  fs::create_directories(out_dir);
  write_report(fs::path(out_dir) / "report.json", report.to_json());
  if (format == "csv") {
    std::ofstream csv(fs::path(out_dir) / "report.csv");
    csv << "depth,m,n,p_child,rank_AX_child,q_samples,validate_fraction,recovered,total\n";
    for (const DepthRow& row : report.rows)
      csv << row.depth << "," << row.m << "," << row.n << "," << format_double(row.p_child)
          << "," << format_double(row.rank_mean) << "," << row.q_samples << ","
          << format_double(row.validate_fraction) << "," << row.recovered << "," << row.total
          << "\n";
  }

  for (const DepthRow& row : report.rows)
    std::cout << "depth " << row.depth << ": p_child " << row.p_child << ", rank "
              << row.rank_mean << ", validate " << row.validate_fraction << ", recovered "
              << row.recovered << "/" << row.total << "\n";
  for (const SeedRecord& rec : report.seed_records)
    if (!rec.ok) std::cerr << "seed " << rec.seed << " failed: " << rec.error << "\n";

  if (!report.any_seed_ok()) return kExitHard;
  return report.all_seeds_ok() ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curriculum learning for sparse solutions of underdetermined linear systems"};
  app.require_subcommand(1);

  std::string config_path, out_path = "report.json", out_dir = "out", in_path, tree_dir;
  std::string format = "json";
  std::int64_t seed_override = -1;
  Index q_override = 0, max_support = 0;
  std::int64_t s0 = 0, gamma = 2, t = 2, tbar = 1;
  double c = 1.0;

  auto* gen_tree = app.add_subcommand("gen-tree", "Build a curriculum tree bundle (teacher)");
  gen_tree->add_option("--config", config_path)->required();
  gen_tree->add_option("--seed", seed_override);
  gen_tree->add_option("--out", out_dir)->required();

  auto* gen_samples = app.add_subcommand("gen-samples", "Regenerate training samples in a bundle");
  gen_samples->add_option("--tree", tree_dir)->required();
  gen_samples->add_option("--seed", seed_override);
  gen_samples->add_option("--q", q_override);

  auto* train = app.add_subcommand("train", "Train the student on a tree bundle");
  train->add_option("--tree", tree_dir)->required();
  train->add_option("--config", config_path)->required();
  train->add_option("--seed", seed_override);
  train->add_option("--out", out_path);

  auto* verify = app.add_subcommand("verify", "Run property verifiers on a matrix");
  verify->add_option("--config", config_path)->required();
  verify->add_option("--out", out_path)->default_val("");

  auto* sat_reduce = app.add_subcommand("sat-reduce", "Reduce a 1-in-3-SAT instance");
  sat_reduce->add_option("--in", in_path)->required();
  sat_reduce->add_option("--out", out_dir)->required();

  auto* sat_solve = app.add_subcommand("sat-solve", "Solve a 1-in-3-SAT instance exactly");
  sat_solve->add_option("--in", in_path)->required();
  sat_solve->add_option("--max-support", max_support);

  auto* experiment = app.add_subcommand("experiment", "Run a seeded multi-run experiment");
  experiment->add_option("--config", config_path)->required();
  experiment->add_option("--seed", seed_override);
  experiment->add_option("--out", out_dir);
  experiment->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* bound = app.add_subcommand("bound", "Evaluate the tree node-count bound");
  bound->add_option("--s0", s0)->required();
  bound->add_option("--gamma", gamma);
  bound->add_option("--c", c);
  bound->add_option("--t", t);
  bound->add_option("--tbar", tbar);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_tree->parsed()) return cmd_gen_tree(config_path, seed_override, out_dir);
    if (gen_samples->parsed()) return cmd_gen_samples(tree_dir, seed_override, q_override);
    if (train->parsed()) return cmd_train(tree_dir, config_path, seed_override, out_path);
    if (verify->parsed()) return cmd_verify(config_path, out_path);
    if (sat_reduce->parsed()) return cmd_sat_reduce(in_path, out_dir);
    if (sat_solve->parsed()) return cmd_sat_solve(in_path, max_support);
    if (experiment->parsed()) return cmd_experiment(config_path, seed_override, out_dir, format);
    if (bound->parsed()) {
      std::cout << tree_size_bound(s0, gamma, c, t, tbar) << "\n";
      return kExitOk;
    }
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PartitionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitHard;
  }
  return kExitConfig;
}
