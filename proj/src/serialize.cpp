#include "cstree/serialize.hpp"

#include "cstree/matrix_io.hpp"

#include <fstream>

namespace cstree {

namespace {

Json index_set_to_json(const IndexSet& set) {
  Json arr = Json::array();
  for (Index i : set) arr.push_back(i);
  return arr;
}

IndexSet index_set_from_json(const Json& arr) {
  IndexSet out;
  for (const auto& v : arr) out.push_back(v.get<Index>());
  return out;
}

Json partition_to_json(const Partition& partition) {
  Json arr = Json::array();
  for (const IndexSet& set : partition) arr.push_back(index_set_to_json(set));
  return arr;
}

Partition partition_from_json(const Json& arr) {
  Partition out;
  for (const auto& set : arr) out.push_back(index_set_from_json(set));
  return out;
}

std::string node_file(int id, const char* what) {
  return "node_" + std::to_string(id) + "_" + what + ".csv";
}

Json node_common_json(const ClassNode& node, const TrainingSet* samples) {
  Json j;
  j["id"] = node.id;
  if (node.is_leaf())
    j["children"] = Json::array();
  else
    j["children"] = Json::array({node.children[0], node.children[1]});
  j["depth"] = node.depth;
  j["p"] = node.X_true.cols();
  j["s"] = node.s_col_bound;
  j["K_set"] = index_set_to_json(node.K_set);
  if (!node.sample_column_groups.empty())
    j["sample_column_groups"] = partition_to_json(node.sample_column_groups);
  if (samples) {
    Json s;
    s["q"] = samples->q;
    s["seed"] = samples->seed;
    s["b"] = node_file(node.id, "b");
    j["samples"] = s;
  }
  return j;
}

}  // namespace

void write_tree_bundle(const std::filesystem::path& dir, const CurriculumTree& tree,
                       const std::map<int, TrainingSet>& samples) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "A.csv", tree.A);

  Json teacher, student;
  for (Json* j : {&teacher, &student}) {
    (*j)["format"] = "cstree-tree";
    (*j)["version"] = 1;
    (*j)["label"] = tree.label;
    (*j)["root_id"] = tree.root_id;
    (*j)["t"] = tree.t;
    (*j)["tbar"] = tree.tbar;
    (*j)["gamma"] = tree.gamma;
    (*j)["identity_block_rows"] = tree.identity_block_rows;
    (*j)["A"] = "A.csv";
  }
  teacher["kind"] = "teacher";
  student["kind"] = "student";
  teacher["partition_J"] = partition_to_json(tree.partition_J);
  teacher["partition_K"] = partition_to_json(tree.partition_K);
  teacher["warnings"] = tree.warnings;

  {
    DenseMatrix x(tree.x_designated.size(), 1);
    x.col(0) = tree.x_designated;
    write_matrix_csv(dir / "x_designated.csv", x);
    teacher["x_designated"] = "x_designated.csv";
  }

  Json teacher_nodes = Json::array();
  Json student_nodes = Json::array();
  for (const ClassNode& node : tree.nodes) {
    const auto it = samples.find(node.id);
    const TrainingSet* set = it == samples.end() ? nullptr : &it->second;

    write_matrix_csv(dir / node_file(node.id, "X"), node.X_true);
    write_matrix_csv(dir / node_file(node.id, "W"), node.W);
    if (set) {
      write_matrix_csv(dir / node_file(node.id, "b"), set->b_columns);
      if (set->z_true) write_matrix_csv(dir / node_file(node.id, "z"), *set->z_true);
    }

    Json tj = node_common_json(node, set);
    tj["X_true"] = node_file(node.id, "X");
    tj["W"] = node_file(node.id, "W");
    if (set && set->z_true) tj["samples"]["z_true"] = node_file(node.id, "z");
    teacher_nodes.push_back(std::move(tj));

    student_nodes.push_back(node_common_json(node, set));
  }
  teacher["nodes"] = std::move(teacher_nodes);
  student["nodes"] = std::move(student_nodes);

  std::ofstream(dir / "tree.teacher.json") << teacher.dump(2) << "\n";
  std::ofstream(dir / "tree.student.json") << student.dump(2) << "\n";
}

namespace {

Json load_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  Json j;
  is >> j;
  return j;
}

}  // namespace

CurriculumTree read_teacher_tree(const std::filesystem::path& teacher_json,
                                 std::map<int, TrainingSet>* samples) {
  const auto dir = teacher_json.parent_path();
  const Json j = load_json(teacher_json);
  if (j.value("format", "") != "cstree-tree" || j.value("kind", "") != "teacher")
    throw IoError("read_teacher_tree: not a teacher tree manifest");

  CurriculumTree tree;
  tree.label = j.value("label", "");
  tree.root_id = j.at("root_id").get<int>();
  tree.t = j.at("t").get<Index>();
  tree.tbar = j.at("tbar").get<Index>();
  tree.gamma = j.at("gamma").get<Index>();
  tree.identity_block_rows = j.value("identity_block_rows", Index{0});
  tree.A = read_matrix_csv(dir / j.at("A").get<std::string>());
  tree.partition_J = partition_from_json(j.at("partition_J"));
  tree.partition_K = partition_from_json(j.at("partition_K"));
  if (j.contains("warnings")) tree.warnings = j.at("warnings").get<std::vector<std::string>>();
  tree.x_designated = read_matrix_csv(dir / j.at("x_designated").get<std::string>()).col(0);

  tree.nodes.resize(j.at("nodes").size());
  for (const auto& nj : j.at("nodes")) {
    ClassNode node;
    node.id = nj.at("id").get<int>();
    const auto& ch = nj.at("children");
    if (!ch.empty()) node.children = {ch[0].get<int>(), ch[1].get<int>()};
    node.depth = nj.at("depth").get<int>();
    node.s_col_bound = nj.at("s").get<Index>();
    node.K_set = index_set_from_json(nj.at("K_set"));
    if (nj.contains("sample_column_groups"))
      node.sample_column_groups = partition_from_json(nj.at("sample_column_groups"));
    node.X_true = read_matrix_csv(dir / nj.at("X_true").get<std::string>());
    node.W = read_matrix_csv(dir / nj.at("W").get<std::string>());

    if (samples && nj.contains("samples")) {
      TrainingSet set;
      set.node_id = node.id;
      set.q = nj.at("samples").at("q").get<Index>();
      set.seed = nj.at("samples").at("seed").get<std::uint64_t>();
      set.b_columns = read_matrix_csv(dir / nj.at("samples").at("b").get<std::string>());
      if (nj.at("samples").contains("z_true"))
        set.z_true = read_matrix_csv(dir / nj.at("samples").at("z_true").get<std::string>());
      (*samples)[node.id] = std::move(set);
    }
    tree.nodes.at(static_cast<std::size_t>(node.id)) = std::move(node);
  }
  return tree;
}

StudentView read_student_view(const std::filesystem::path& student_json) {
  const auto dir = student_json.parent_path();
  const Json j = load_json(student_json);
  if (j.value("format", "") != "cstree-tree" || j.value("kind", "") != "student")
    throw IoError("read_student_view: not a student tree manifest");

  StudentView view;
  view.label = j.value("label", "");
  view.root_id = j.at("root_id").get<int>();
  view.t = j.at("t").get<Index>();
  view.tbar = j.at("tbar").get<Index>();
  view.A = read_matrix_csv(dir / j.at("A").get<std::string>());

  view.nodes.resize(j.at("nodes").size());
  for (const auto& nj : j.at("nodes")) {
    StudentNodeView node;
    node.id = nj.at("id").get<int>();
    const auto& ch = nj.at("children");
    if (!ch.empty()) node.children = {ch[0].get<int>(), ch[1].get<int>()};
    node.depth = nj.at("depth").get<int>();
    node.p = nj.at("p").get<Index>();
    node.s_bound = nj.at("s").get<Index>();
    node.samples.node_id = node.id;
    if (nj.contains("samples")) {
      node.samples.q = nj.at("samples").at("q").get<Index>();
      node.samples.seed = nj.at("samples").at("seed").get<std::uint64_t>();
      node.samples.b_columns = read_matrix_csv(dir / nj.at("samples").at("b").get<std::string>());
    }
    view.nodes.at(static_cast<std::size_t>(node.id)) = std::move(node);
  }
  return view;
}

Json report_to_json(const std::map<int, NodeTrainingReport>& reports, const Json& run_info,
                    const Json& metadata) {
  Json j;
  j["format"] = "cstree-report";
  j["version"] = 1;
  j["run"] = run_info;
  Json nodes = Json::array();
  for (const auto& [id, report] : reports) {
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
  j["nodes"] = std::move(nodes);
  j["metadata"] = metadata;
  return j;
}

std::string canonical_report_string(const Json& report) {
  Json copy = report;
  copy.erase("metadata");
  return copy.dump();
}

void write_report(const std::filesystem::path& path, const Json& report) {
  std::ofstream os(path);
  if (!os) throw IoError("write_report: cannot open " + path.string());
  os << report.dump(2) << "\n";
}

}  // namespace cstree
