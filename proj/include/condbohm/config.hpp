#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "condbohm/experiments.hpp"

namespace condbohm {

inline constexpr const char* kVersion = "0.1.0";

/// Sectioned key = value text:
///
///   [run]      scenario, velocity_models, lambda_sweep, n_ensemble, t_final, dt,
///              dt_slice, seed, reseeds, checkpoints, bins, n_starts, starts,
///              stream_width, output
///   [grid]     n1, n2, extent
///   [physics]  m1, m2, omega, k, epsilon
///
/// '#' starts a comment, as does ';' at the start of a line. Values may be
/// double-quoted. Lists are comma separated; `starts` is "x1 x2; x1 x2; ...".
/// Physics defaults follow the scenario. Throws Error(config) with the line number on malformed text and
/// naming the key for unknown or invalid keys.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Canonical text of a config; parse_config_text(config_text(c)) reproduces c.
std::string config_text(const ExperimentConfig& config);

/// "N1xN2" as used by --grid.
std::pair<int, int> parse_grid_size(std::string_view text);

}  // namespace condbohm
