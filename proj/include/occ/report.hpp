// Deterministic emission of experiment outputs: report.json, one CSV per
// table, per-replicate simulation CSVs, a run manifest, and a minimal SVG
// line chart.  Identical inputs produce byte-identical files.
#pragma once

#include "occ/experiments.hpp"
#include "occ/simulator.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace occ {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kManifestSchemaVersion = 1;

// report.json plus <id>_<table>.csv for every table.
void write_report(const ExperimentReport& rep, const std::filesystem::path& dir);

// Per-replicate rows in the documented schema:
// replicate, grid_value, j, K_j, K_j_star, balls, overflow_count.
void write_paths_csv(const std::vector<ReplicatePath>& paths, unsigned j_max,
                     const std::filesystem::path& file);

// manifest.json: schema version, tool version, and the resolved invocation.
void write_manifest(const std::string& resolved_config_json,
                    const std::filesystem::path& dir);

// Line chart of one x column against one or more y columns of a table; only
// data already present in the CSVs, log-x when requested.
void write_svg_chart(const Table& table, const std::string& x_column,
                     const std::vector<std::string>& y_columns, bool log_x,
                     const std::string& title, const std::filesystem::path& file);

// Shortest-round-trip, locale-independent formatting used by every writer.
std::string format_number(double v);

} // namespace occ
