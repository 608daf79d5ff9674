#pragma once

#include "netscope/analysis.hpp"
#include "netscope/cluster.hpp"
#include "netscope/distmat.hpp"
#include "netscope/probes.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace netscope {

/// "%.17g": round-trips every finite double.
std::string format_double(double v);

/// Header row of layer names, then L rows of L values.
void write_matrix_csv(const std::filesystem::path& path, const DistanceMatrix& dm);
DistanceMatrix read_matrix_csv(const std::filesystem::path& path);

/// Self-contained SVG: one rect per cell, 9-stop viridis ramp linear in value,
/// layer labels on both axes and a color bar annotated with min/max.
std::string render_heatmap_svg(const Matrix& values, const std::vector<std::string>& names,
                               const std::string& title);
void write_heatmap_svg(const std::filesystem::path& path, const Matrix& values,
                       const std::vector<std::string>& names, const std::string& title);

/// Hex color of the ramp at t in [0, 1].
std::string ramp_color(double t);

nlohmann::json partition_json(const Partition& p);
Partition partition_from_json(const nlohmann::json& j);

void write_probe_csv(const std::filesystem::path& path, const ProbeReport& r);
nlohmann::json probe_json(const ProbeReport& r);

void write_profile_csv(const std::filesystem::path& path, const LayerProfile& p);
void write_histogram_csvs(const std::filesystem::path& dir, const HistogramSet& h);
void write_jaccard_csv(const std::filesystem::path& path, const JaccardTable& t);
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryPoint>& pts);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace netscope
