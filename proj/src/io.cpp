#include "diffpath/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace diffpath {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

Dataset read_dataset_csv(const std::filesystem::path& path, const std::string& source_id) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataset '" + path.string() + "' is empty");
  Dataset ds;
  ds.source_id = source_id;
  ds.column_names = split_row(line);
  const std::size_t d = ds.column_names.size();
  if (d == 0) throw InputError("dataset '" + path.string() + "' has no columns");

  std::vector<double> values;
  Index rows = 0;
  Index line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_row(line);
    if (cells.size() != d) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(d) +
                       " fields, found " + std::to_string(cells.size()));
    }
    for (const auto& cell : cells) {
      char* end = nullptr;
      errno = 0;
      const double value = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(value)) {
        throw InputError(path.string() + ":" + std::to_string(line_no) + ": bad numeric value '" + cell + "'");
      }
      values.push_back(value);
    }
    ++rows;
  }
  ds.samples = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, static_cast<Index>(d));
  return ds;
}

std::string matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& names) {
  std::ostringstream out;
  for (Index c = 0; c < m.cols(); ++c) {
    if (c) out << ',';
    out << (static_cast<std::size_t>(c) < names.size() ? names[static_cast<std::size_t>(c)] : "X" + std::to_string(c + 1));
  }
  out << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << fmt(m(r, c));
    }
    out << '\n';
  }
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("datasets") || !doc["datasets"].is_array()) {
    throw InputError("manifest must be an object with a 'datasets' array");
  }
  Manifest manifest;
  const auto base = path.parent_path();
  for (const auto& item : doc["datasets"]) {
    if (!item.is_object() || !item.contains("path") || !item.contains("group") || !item["path"].is_string() ||
        !item["group"].is_string()) {
      throw InputError("manifest entries need string 'path' and 'group' fields");
    }
    ManifestEntry entry;
    entry.path = item["path"].get<std::string>();
    if (entry.path.is_relative()) entry.path = base / entry.path;
    entry.group = item["group"].get<std::string>();
    entry.source_id = item.value("source_id", entry.path.stem().string());
    if (std::find(manifest.groups.begin(), manifest.groups.end(), entry.group) == manifest.groups.end()) {
      manifest.groups.push_back(entry.group);
    }
    manifest.datasets.push_back(std::move(entry));
  }
  return manifest;
}

nlohmann::json manifest_json(const Manifest& manifest) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& e : manifest.datasets) {
    items.push_back({{"path", e.path.string()}, {"source_id", e.source_id}, {"group", e.group}});
  }
  return {{"datasets", items}};
}

std::pair<DatasetCollection, DatasetCollection> load_groups(const Manifest& manifest) {
  if (manifest.groups.size() != 2) {
    throw InputError("manifest must name exactly two groups, found " + std::to_string(manifest.groups.size()));
  }
  std::vector<Dataset> a, b;
  for (const auto& entry : manifest.datasets) {
    Dataset ds = read_dataset_csv(entry.path, entry.source_id);
    (entry.group == manifest.groups[0] ? a : b).push_back(std::move(ds));
  }
  const Index d = a.front().dim();
  for (const auto* group : {&a, &b}) {
    for (const auto& ds : *group) {
      if (ds.dim() != d) {
        throw DimensionMismatch("dataset '" + ds.source_id + "' has " + std::to_string(ds.dim()) +
                                " columns, expected " + std::to_string(d));
      }
    }
  }
  return {DatasetCollection(std::move(a)), DatasetCollection(std::move(b))};
}

}  // namespace diffpath
