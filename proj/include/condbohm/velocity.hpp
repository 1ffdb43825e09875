#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "condbohm/field.hpp"
#include "condbohm/interpolate.hpp"
#include "condbohm/polar.hpp"
#include "condbohm/potential.hpp"

namespace condbohm {

enum class VelocityKind { bohmian, stream, scaling };

/// Velocity law u = v + j/|psi|^2.
///   bohmian  j = 0
///   stream   j = lambda (d2 g, -d1 g), divergence-free for any g
///   scaling  j = lambda |psi|^2 v, i.e. u = (1 + lambda) v; only valid for stationary |psi|^2
class VelocityModel {
 public:
  static VelocityModel bohmian() { return VelocityModel(VelocityKind::bohmian, 0.0, nullptr); }
  static VelocityModel scaling(double lambda) { return VelocityModel(VelocityKind::scaling, lambda, nullptr); }
  static VelocityModel stream(std::shared_ptr<const RealField2D> g, double lambda = 1.0);

  VelocityKind kind() const noexcept { return kind_; }
  double lambda() const noexcept { return lambda_; }
  const std::shared_ptr<const RealField2D>& stream_function() const noexcept { return g_; }
  std::string label() const;

 private:
  VelocityModel(VelocityKind kind, double lambda, std::shared_ptr<const RealField2D> g)
      : kind_(kind), lambda_(lambda), g_(std::move(g)) {}

  VelocityKind kind_;
  double lambda_;
  std::shared_ptr<const RealField2D> g_;
};

struct Velocity {
  double u1 = 0.0;
  double u2 = 0.0;
};

enum class SampleStatus : std::uint8_t { ok, node, outside };

struct VelocitySample {
  Velocity u;
  double density = 0.0;
  SampleStatus status = SampleStatus::ok;
  bool near_node = false;
};

/// Amplitude below which integrators switch on step refinement, relative to max|psi|.
inline constexpr double kNearNodeRelative = 1e-2;

/// Velocity evaluator over an immutable wave function. Precomputes psi and its
/// stencil gradients (plus the stream current) interleaved per grid point so
/// one bicubic weight set serves every component.
class VelocityField {
 public:
  VelocityField(const ComplexField2D& psi, Masses masses, VelocityModel model = VelocityModel::bohmian(),
                double eps_node_relative = kNodeThresholdRelative);

  /// Never throws; reports nodes and out-of-domain points through status.
  VelocitySample sample(Point2 p) const noexcept;
  /// Throws Error(node_proximity) or Error(out_of_domain).
  Velocity operator()(Point2 p) const;

  const Grid2D& grid() const noexcept { return grid_; }
  const VelocityModel& model() const noexcept { return model_; }
  const Masses& masses() const noexcept { return masses_; }
  double eps_node() const noexcept { return eps_node_; }

 private:
  static constexpr int kStride = 8;

  template <int C>
  void accumulate(const AxisWeights& w1, const AxisWeights& w2, double* acc) const noexcept;
  VelocitySample finish(const double* acc) const noexcept;

  Grid2D grid_;
  Masses masses_;
  VelocityModel model_;
  std::vector<double> packed_;  // psi, d1 psi, d2 psi (re, im), j1, j2
  double eps_node_;
  double near_node_;
};

Velocity bohmian_velocity(const ComplexField2D& psi, Masses masses, Point2 point);
Velocity modified_velocity(const ComplexField2D& psi, const VelocityModel& model, Masses masses, Point2 point);

/// Bohmian velocity components on every grid point; zero on masked nodes.
std::pair<RealField2D, RealField2D> bohmian_velocity_field(const ComplexField2D& psi, Masses masses,
                                                           double eps_node_relative = kNodeThresholdRelative);

/// Probability current (hbar/m_a) Im(conj(psi) d_a psi) with the central
/// stencil, which stays second order through nodes.
std::pair<RealField2D, RealField2D> probability_current(const ComplexField2D& psi, Masses masses);

/// Discrete L2 norm of d1 j1 + d2 j2 for the model's extra current j.
/// Rejects the Bohmian model (j = 0 by definition).
double check_divergence_free(const VelocityModel& model, const ComplexField2D& psi, Masses masses);

/// g = A exp(-d^2 / 2 w^2) around `center` (minimum-image distance on periodic
/// axes), with A chosen so max|j/|psi|^2| equals max|v| over points with
/// |psi| > 1e-3 max|psi|.
RealField2D default_stream_function(const ComplexField2D& psi, Masses masses, double width = 0.5,
                                    Point2 center = {0.0, 0.0});

}  // namespace condbohm
