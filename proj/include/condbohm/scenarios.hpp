#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "condbohm/eigensolver.hpp"

namespace condbohm {

enum class ScenarioName { vortex_oscillator, ring_planewave_env, frozen_ground, coupled_environment };

/// Physical and grid parameters. Box axes span [-extent, extent]; ring axes
/// span [0, 2 pi).
struct ScenarioParams {
  int n1 = 256;
  int n2 = 256;
  double extent = 8.0;
  double m1 = 1.0;
  double m2 = 1.0;
  double omega = 1.0;
  double k = 0.0;
  double epsilon = 0.0;
};

struct Scenario {
  ScenarioName name;
  ScenarioParams params;
  PotentialSpec potential;
  Grid2D grid;
  Eigenstate state;
  Point2 default_start;
  /// ||H psi - E psi|| / ||psi|| on the scenario grid.
  double residual = 0.0;
};

ScenarioParams default_params(ScenarioName name);
ScenarioName parse_scenario_name(std::string_view name);
std::string to_string(ScenarioName name);
std::vector<ScenarioName> all_scenarios();
std::string describe(ScenarioName name);

/// Closed-form library built from exact eigenvectors of the discrete 1D
/// operators, so the 2D residual sits at round-off.
///
///  vortex_oscillator   (phi0(x1) phi1(x2) + i phi1(x1) phi0(x2)) / sqrt(2); a
///                      discrete analogue of (x2 + i x1) exp(-m w r^2 / 2 hbar).
///  ring_planewave_env  phi0(x1) exp(i k x2) / sqrt(2 pi) on box x ring.
///  frozen_ground       phi0(x1) phi0(x2), real, no flow.
Scenario analytic_scenario(ScenarioName name, const ScenarioParams& params);
Scenario analytic_scenario(ScenarioName name);

/// Heavy environment on a ring coupled to a harmonic subsystem:
/// V = m1 w^2 x1^2 / 2 + epsilon x1 cos(x2). Solved numerically near
/// E1 + (discrete) hbar^2 k^2 / 2 m2; the traveling state is the projection of
/// phi0(x1) exp(i k x2) onto the degenerate eigenspace with the largest overlap.
Scenario coupled_environment_scenario(const ScenarioParams& params, const EigenSolveOptions& options = {});

/// Any scenario by name (numerical for coupled_environment).
Scenario build_scenario(ScenarioName name, const ScenarioParams& params);

}  // namespace condbohm
