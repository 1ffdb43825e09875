#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "condbohm/velocity.hpp"

namespace condbohm {

/// Per-sample flags, OR-ed together.
enum TrajectoryFlag : std::uint8_t {
  kFlagRefined = 1,      // step subdivided on the way to this sample
  kFlagNodeCapture = 2,  // integration stopped: next step entered the node mask
  kFlagLeftDomain = 4,   // integration stopped: next step left a box axis
};

/// Time series of positions. Velocities are the right-hand side evaluated at
/// each sample (dX/dt for quantum runs, P/m for classical ones) and back the
/// cubic Hermite interpolation in position_at. Periodic coordinates are stored
/// unwrapped.
struct Trajectory {
  std::vector<double> times;
  std::vector<Point2> positions;
  std::vector<Point2> velocities;
  std::vector<Point2> momenta;  // empty unless classical
  std::vector<std::uint8_t> flags;
  std::string model;

  std::size_t size() const noexcept { return times.size(); }
  bool has_momenta() const noexcept { return !momenta.empty(); }
  bool truncated() const noexcept { return !flags.empty() && (flags.back() & (kFlagNodeCapture | kFlagLeftDomain)); }
  bool node_captured() const noexcept { return !flags.empty() && (flags.back() & kFlagNodeCapture); }
  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }

  /// Cubic Hermite interpolation; throws Error(out_of_domain) outside the recording.
  Point2 position_at(double t) const;
  Point2 velocity_at(double t) const;

  void write_csv(std::ostream& os) const;
};

/// Velocity evaluator for autonomous flows.
using VelocityEvaluator = std::function<VelocitySample(Point2)>;

VelocityEvaluator evaluator(const VelocityField& field);

struct IntegratorOptions {
  double dt = 1e-3;
  /// Accepted local error of a refined step (step doubling).
  double tol_step = 1e-9;
  int max_halvings = 12;
  /// Refinement also triggers when |u| dt exceeds this fraction of a cell.
  double cfl_refine = 0.25;
  /// Cell size used by the CFL trigger; 0 disables it.
  double cell = 0.0;
  /// Keep every n-th step in the output (the final point is always kept).
  int record_stride = 1;
};

/// Fixed-step RK4 with step-doubling refinement near nodes (|psi| below
/// kNearNodeRelative max|psi|) or when the CFL trigger fires. A step that
/// cannot be completed truncates the trajectory with kFlagNodeCapture or
/// kFlagLeftDomain; the last recorded point is always a valid position.
Trajectory integrate_trajectory(const VelocityEvaluator& velocity, Point2 x0, double t0, double t1,
                                const IntegratorOptions& options);

/// Convenience overload for a precomputed field (cell size from its grid).
Trajectory integrate_trajectory(const VelocityField& field, Point2 x0, double t0, double t1,
                                IntegratorOptions options = {});

/// Endpoint only, for ensembles. Returns the flags of the run.
std::uint8_t propagate_point(const VelocityField& field, Point2& x, double t0, double t1,
                             IntegratorOptions options = {});

/// Hamilton's equations dX/dt = P/m, dP/dt = -grad V with RK4.
Trajectory classical_trajectory(const PotentialSpec& pot, Point2 x0, Point2 p0, double t0, double t1, double dt,
                                int record_stride = 1);

/// Particle 1 under the conditional Hamiltonian p1^2/2m1 + V(x1, X2(t)),
/// with X2(t) taken from a recorded trajectory by Hermite interpolation.
/// The returned trajectory stores (X1, X2(t)) and (P1, m2 dX2/dt).
Trajectory conditional_classical_trajectory(const PotentialSpec& pot, const Trajectory& recorded, double x1_0,
                                            double p1_0, double t0, double t1, double dt, int record_stride = 1);

/// Uniformly spaced output times t0, t0 + dt, ..., landing exactly on t1.
std::vector<double> time_grid(double t0, double t1, double dt);

}  // namespace condbohm
