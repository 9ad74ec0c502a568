#pragma once

#include "cstree/student.hpp"
#include "cstree/teacher.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>

namespace cstree {

using Json = nlohmann::ordered_json;

/// Writes the two-file tree bundle into `dir`:
///   tree.teacher.json - full node graph with X_true, W and teacher
///                       coefficients (file pointers to CSV matrices);
///   tree.student.json - A and per-node sample references plus class
///                       metadata only.
/// Matrices land next to the manifests as CSV files.
void write_tree_bundle(const std::filesystem::path& dir, const CurriculumTree& tree,
                       const std::map<int, TrainingSet>& samples);

/// Reads a full teacher bundle back; sample sets are returned through
/// `samples` when non-null.
CurriculumTree read_teacher_tree(const std::filesystem::path& teacher_json,
                                 std::map<int, TrainingSet>* samples = nullptr);

/// Reads the student view of a bundle. The view never contains X_true or
/// teacher coefficients, regardless of what else sits in the directory.
StudentView read_student_view(const std::filesystem::path& student_json);

/// Report serialization. The metadata block (timestamps, wall time) is
/// excluded from the canonical form used for reproducibility comparisons.
Json report_to_json(const std::map<int, NodeTrainingReport>& reports, const Json& run_info,
                    const Json& metadata);

/// Canonical dump with the metadata block stripped; equal configs and seeds
/// must produce byte-identical canonical reports.
std::string canonical_report_string(const Json& report);

void write_report(const std::filesystem::path& path, const Json& report);

}  // namespace cstree
