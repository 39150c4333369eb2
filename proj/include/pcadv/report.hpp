#pragma once

// Report files: CSV and JSON tables and the alpha-sweep SVG plot.

#include "pcadv/evaluate.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace pcadv::report {

enum class Format { csv, json };
Format parse_format(const std::string& s);

/// Column order of the CSV table.
std::vector<std::string> csv_columns();

nlohmann::json to_json(const eval::EvalReport& report);
eval::EvalReport report_from_json(const nlohmann::json& doc);

void write_csv(const eval::EvalReport& report, const std::filesystem::path& path);
void write_json(const eval::EvalReport& report, const std::filesystem::path& path);
eval::EvalReport read_json(const std::filesystem::path& path);

struct SweepPoint {
  double alpha = 0.0;
  double asr = 0.0;
  double mean_l2 = 0.0;
  double mean_chamfer = 0.0;
  int seeds = 1;
};

nlohmann::json sweep_to_json(const std::vector<SweepPoint>& sweep);
std::vector<SweepPoint> sweep_from_json(const nlohmann::json& doc);

/// Success rate and both distances against log10(alpha), two panels. Every
/// marker carries its value in a data-value attribute.
void write_sweep_svg(const std::vector<SweepPoint>& sweep, const std::filesystem::path& path);

/// Writes <stem>.csv and/or <stem>.json into `dir`, plus <stem>_sweep.svg
/// when `sweep` is non-empty. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const eval::EvalReport& report,
                                               const std::vector<Format>& formats,
                                               const std::filesystem::path& dir,
                                               const std::string& stem,
                                               const std::vector<SweepPoint>& sweep = {});

}  // namespace pcadv::report
