#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "condbohm/experiments.hpp"

namespace condbohm {

using Json = nlohmann::ordered_json;

Json to_json(const EquivarianceReport& report);
Json to_json(const ClassicalityMetrics& metrics);
Json to_json(const ClassicalityReport& report);
Json to_json(const ComparisonReport& report);
Json to_json(const ResidualReport& report);

/// Writes the report's JSON and CSV files into `dir` (created if needed) and
/// returns the file names relative to `dir` in write order.
///   equivariance   equivariance.json, equivariance.csv (model, t, tv)
///   classicality   classicality.json, classicality.csv (model, t, ratio, v2_spread, gamma_flatness)
///   comparison     comparison.json, comparison_long.csv (model, lambda, t, metric, value)
///                  and sweep_<model>.csv per model (start, t, r_cond_schrod, deviation)
///   residuals      residuals.json, residuals.csv
std::vector<std::filesystem::path> write_report(const EquivarianceReport& report, const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_report(const ClassicalityReport& report, const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_report(const ComparisonReport& report, const std::filesystem::path& dir);
std::vector<std::filesystem::path> write_report(const ResidualReport& report, const std::filesystem::path& dir);

/// JSON text with two-space indentation and a trailing newline.
std::string dump(const Json& j);

}  // namespace condbohm
