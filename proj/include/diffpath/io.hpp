#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "diffpath/covariance.hpp"

namespace diffpath {

// CSV with a header row of variable names and one sample per row. Throws
// InputError for unreadable files, ragged rows and non-numeric cells.
Dataset read_dataset_csv(const std::filesystem::path& path, const std::string& source_id);

std::string matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& names);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct ManifestEntry {
  std::filesystem::path path;
  std::string source_id;
  std::string group;
};

struct Manifest {
  std::vector<ManifestEntry> datasets;
  // Group labels in order of first appearance.
  std::vector<std::string> groups;
};

// {"datasets": [{"path": ..., "source_id": ..., "group": ...}, ...]}.
// Relative paths are resolved against the manifest's directory.
Manifest read_manifest(const std::filesystem::path& path);
nlohmann::json manifest_json(const Manifest& manifest);

// The two collections named by a manifest with exactly two groups.
std::pair<DatasetCollection, DatasetCollection> load_groups(const Manifest& manifest);

}  // namespace diffpath
