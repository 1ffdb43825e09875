#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "condbohm/conditional.hpp"
#include "condbohm/scenarios.hpp"
#include "condbohm/velocity.hpp"

namespace condbohm {

/// A velocity law by name: "bohmian", "scaling:<lambda>", "stream" or
/// "stream:<lambda>". Stream models use the default stream function.
struct ModelSpec {
  VelocityKind kind = VelocityKind::bohmian;
  double lambda = 0.0;

  std::string label() const;
  bool operator==(const ModelSpec&) const = default;
};

/// Throws Error(config) on an unknown name or a malformed lambda.
ModelSpec parse_model_spec(std::string_view text);

VelocityModel make_velocity_model(const ModelSpec& spec, const ComplexField2D& psi, Masses masses,
                                  double stream_width);

struct ExperimentConfig {
  ScenarioName scenario = ScenarioName::vortex_oscillator;
  ScenarioParams params = default_params(ScenarioName::vortex_oscillator);
  std::vector<ModelSpec> velocity_models{ModelSpec{}};
  /// Scaling-family sweep for the comparison; 0 (the Bohmian baseline) is always run.
  std::vector<double> lambda_sweep{0.0, -0.01, 0.01, -0.25, 0.25, -0.5, 0.5, -1.0, 2.0};
  std::size_t n_ensemble = 10000;
  double t_final = 2.0 * std::numbers::pi;
  double dt = 1e-3;
  double dt_slice = 0.02;
  std::uint64_t seed = 1;
  /// Bootstrap draws at t = 0 for the equivariance bound.
  int reseeds = 20;
  /// Equivariance checkpoints after t = 0, evenly spaced up to t_final.
  int checkpoints = 4;
  /// Histogram bins per axis over the support box.
  int bins = 24;
  /// Trajectory starts for the comparison, drawn from |psi|^2 when `starts` is empty.
  std::size_t n_starts = 4;
  std::vector<Point2> starts;
  double stream_width = 0.5;
  std::filesystem::path output_dir = "out";
};

/// Throws Error(config) naming the offending field.
void validate(const ExperimentConfig& config);

/// Start used by single-trajectory experiments: the first explicit start or
/// the scenario default.
Point2 primary_start(const ExperimentConfig& config, const Scenario& scenario);

/// |psi|^2 integrated into bins over the box enclosing |psi|^2 > floor max|psi|^2
/// (the full ring on periodic axes the support wraps around).
struct BinnedDensity {
  explicit BinnedDensity(Grid2D g) : grid(std::move(g)) {}

  double lo1 = 0.0, hi1 = 0.0, lo2 = 0.0, hi2 = 0.0;
  int bins1 = 0, bins2 = 0;
  bool wrap2 = false;
  bool wrap1 = false;
  Grid2D grid;
  std::vector<double> p;  // row-major, sums to 1

  /// Bin index, or -1 outside the box.
  long bin_of(Point2 x) const noexcept;
};

BinnedDensity binned_density(const ComplexField2D& psi, int bins, double floor_relative = 1e-8);

/// Total-variation distance between the empirical histogram of `points` and
/// the target; points outside the box count against it in full.
double tv_distance(const BinnedDensity& target, std::span<const Point2> points);

struct EquivarianceSeries {
  std::string model;
  std::vector<double> times;
  std::vector<double> tv;
  std::size_t truncated = 0;  // members stopped at a node or box edge
  bool pass = false;          // tv(t_final) <= d0 + 3 sigma
};

struct EquivarianceReport {
  std::string scenario;
  std::size_t n_ensemble = 0;
  int bins = 0;
  std::vector<double> bootstrap;  // t = 0 distances over the reseeds
  double d0 = 0.0;
  double sigma = 0.0;
  double bound = 0.0;
  std::vector<EquivarianceSeries> models;

  bool all_pass() const;
};

EquivarianceReport run_equivariance(const ExperimentConfig& config, const Scenario& scenario);

/// Classical-limit diagnostics along one trajectory.
///   ratio           min over t of L2 P2 / hbar, with L2^-2 the |psi_c|^2-weighted
///                   mean of (d2 ln R)^2 + |d2^2 R / R| (capped at the axis-2 length)
///   v2_spread       max over t of (max - min of v2c over trusted x1) / |u2t|
///   gamma_flatness  max over t of the spread of (d2 v2)_c
///   trajectory_gap  sup |X2(t) - X2cl(t)|, X2cl from Hamilton's equations
///                   started at X(0) with P = m u(0)
inline constexpr double kClassicalRatio = 10.0;

struct ClassicalityMetrics {
  std::string model;
  Point2 start;
  std::vector<double> times;
  std::vector<double> ratio_t;
  std::vector<double> v2_spread_t;
  std::vector<double> flatness_t;
  double ratio = 0.0;
  double v2_spread = 0.0;
  double gamma_flatness = 0.0;
  double trajectory_gap = 0.0;
  bool singular = false;   // |u2t| below the velocity floor somewhere
  bool truncated = false;  // trajectory stopped early; metrics cover the recorded span
  bool classical = false;  // ratio >= kClassicalRatio and not singular
};

ClassicalityMetrics classicality_metrics(const ConditionalSeries& series, const Trajectory& trajectory,
                                         const PotentialSpec& potential, double dt);

struct ClassicalityReport {
  std::string scenario;
  std::vector<ClassicalityMetrics> models;
};

ClassicalityReport run_classicality(const ExperimentConfig& config, const Scenario& scenario);

/// One (model, start) job of the comparison.
struct ComparisonRun {
  std::string model;
  double lambda = 0.0;
  bool scaling = true;
  Point2 start;
  std::vector<double> times;
  std::vector<double> r_cond_schrod;
  std::vector<double> deviation;  // ||psi~_c - psi_ref||_2
  double r_max = 0.0;
  double deviation_final = 0.0;
  double deviation_sup = 0.0;
  bool ok = true;  // false when the trajectory stopped before t_final
  ClassicalityMetrics classicality;
};

/// Start-averaged metrics of one model and their ratios to the Bohmian baseline.
struct ComparisonEntry {
  std::string model;
  double lambda = 0.0;
  bool scaling = true;
  double r_max = 0.0;
  double deviation_final = 0.0;
  double deviation_sup = 0.0;
  double ratio_final = 0.0;
  double ratio_sup = 0.0;
  double ratio_residual = 0.0;
  bool finite = true;
};

struct ComparisonReport {
  std::string scenario;
  std::vector<Point2> starts;
  std::vector<ComparisonRun> runs;
  std::vector<ComparisonEntry> entries;  // entries[0] is the baseline
  /// Scaling entries grouped by |lambda| (signs averaged) are non-decreasing.
  bool monotone_final = false;
  bool monotone_sup = false;
  bool monotone_residual = false;

  const ComparisonEntry& entry(std::string_view model) const;
};

ComparisonReport run_velocity_comparison(const ExperimentConfig& config, const Scenario& scenario);

/// True when `value` averaged within groups of equal |lambda| never decreases
/// as |lambda| grows. Only scaling entries take part.
bool monotone_in_abs_lambda(const std::vector<ComparisonEntry>& entries, double ComparisonEntry::*value);

struct ResidualReport {
  std::string scenario;
  std::string model;
  Point2 start;
  std::vector<double> times;
  std::vector<double> r_cond_schrod;
  std::vector<double> r_pseudo;  // NaN where Gamma is singular
  std::vector<double> gamma_t;
  std::vector<double> N;
  std::vector<std::uint8_t> singular;
  std::vector<std::uint8_t> node_dominated;
  double r_pseudo_rms = 0.0;
  double r_pseudo_rms_half = 0.0;  // same run at half resolution in x and t_slice
  double r_exact_order = 0.0;      // log2 of the rms ratio
  /// The same identity with the Gamma term dropped, at both resolutions.
  std::vector<double> r_no_gamma;
  double r_no_gamma_rms = 0.0;
  double r_no_gamma_rms_half = 0.0;
  double r_no_gamma_order = 0.0;
  ClassicalityMetrics classicality;
};

/// Residuals for the first configured model. The half-resolution rerun
/// rebuilds the scenario on an (n1/2, n2/2) grid with twice the slice cadence.
ResidualReport run_residuals(const ExperimentConfig& config, const Scenario& scenario, const Scenario& half);
ResidualReport run_residuals(const ExperimentConfig& config, const Scenario& scenario);

/// Root mean square over the finite entries; NaN when there are none.
double rms_finite(std::span<const double> v);

}  // namespace condbohm
