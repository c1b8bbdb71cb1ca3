#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "levelset/dbscan.hpp"
#include "levelset/geometry.hpp"
#include "levelset/synthdata.hpp"

namespace levelset {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
/// Strict full-string parse of a finite value; throws ParseError.
double parse_double(std::string_view s);

/// Header x0,...,x{D-1}, one point per row.
void write_points_csv(std::ostream& os, const PointCloud& cloud);
PointCloud read_points_csv(std::istream& is);

struct LabelsFile {
  std::vector<std::int32_t> labels;
  std::vector<std::uint8_t> core;
};

/// Header point_id,label,is_core; noise is -1.
void write_labels_csv(std::ostream& os, const Clustering& clustering);
LabelsFile read_labels_csv(std::istream& is);

struct TruthFile {
  double lambda = 0.0;
  std::vector<TruthComponent> components;
  double resolution = 0.0;
  std::optional<DensitySpec> spec;
  std::uint64_t seed = 0;
};

nlohmann::json truth_to_json(const SyntheticDataset& ds);
TruthFile truth_from_json(const nlohmann::json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
nlohmann::json read_json_file(const std::string& path);

/// JSON text with two-space indent and a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace levelset
