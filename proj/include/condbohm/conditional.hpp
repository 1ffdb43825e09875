#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "condbohm/potential.hpp"
#include "condbohm/stencil.hpp"
#include "condbohm/trajectory.hpp"

namespace condbohm {

/// Everything precomputed once per eigenstate for slicing along x2 = X2(t).
class ConditionalContext {
 public:
  ConditionalContext(ComplexField2D psi, PotentialSpec potential, double energy,
                     double eps_node_relative = kNodeThresholdRelative);

  const ComplexField2D& psi() const noexcept { return psi_; }
  const Grid2D& grid() const noexcept { return psi_.grid(); }
  const PotentialSpec& potential() const noexcept { return potential_; }
  const Masses& masses() const noexcept { return potential_.masses(); }
  double energy() const noexcept { return energy_; }
  double eps_node() const noexcept { return eps_node_; }

  const RealField2D& d2R() const noexcept { return d2R_; }
  const RealField2D& dlnR2() const noexcept { return dlnR2_; }
  const RealField2D& v2() const noexcept { return v2_; }
  const RealField2D& d2v2() const noexcept { return d2v2_; }
  const MaskField2D& mask() const noexcept { return mask_; }

 private:
  ComplexField2D psi_;
  PotentialSpec potential_;
  double energy_;
  double eps_node_;
  RealField2D d2R_;    // d2^2 R
  RealField2D dlnR2_;  // d2 R / R
  RealField2D v2_;     // Bohmian v2
  RealField2D d2v2_;   // d2 v2
  MaskField2D mask_;   // node mask dilated by the x2 derivative stencils
};

/// The conditional wave function and its companions on the axis-1 grid at one time.
struct ConditionalSlice {
  double t = 0.0;
  Point2 X;           // (X1(t), X2(t)); X2 unwrapped
  double u2t = 0.0;   // dX2/dt of the actual trajectory
  std::vector<cplx> psi_c;
  std::vector<double> R_c, S_c, V_c, Q1c, Q2c, v1c, v2c, d2v2_c;
  std::vector<double> dlnR2_c;  // (d2 R / R)_c
  std::vector<double> curv2_c;  // (d2^2 R / R)_c
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> trusted;
  bool node_dominated = false;
};

/// psi_c(x1) = psi(x1, X2(t)) with polar parts and slice quantities. X and
/// u2t come from the trajectory (Hermite interpolation between records).
ConditionalSlice conditional_slice(const ConditionalContext& ctx, const Trajectory& trajectory, double t);

/// Slices at uniformly spaced times (the slice cadence).
struct ConditionalSeries {
  std::vector<ConditionalSlice> slices;
  std::vector<double> times;
  double dt_slice = 0.0;
  Grid1D axis1;
  double axis2_length = 0.0;
  Masses masses;
  double energy = 0.0;
  /// Velocity floor for the v2t singularity: 1e-6 (axis-2 length / total time).
  double eps_v = 0.0;

  std::size_t size() const noexcept { return slices.size(); }
};

/// Throws Error(validation) for fewer than 3 slices or a trajectory that ends early.
ConditionalSeries conditional_series(const ConditionalContext& ctx, const Trajectory& trajectory, double t0,
                                     double t1, double dt_slice);

/// -(hbar^2 / 2m) (d^2 R) / R along one axis; masked where R < eps, and where
/// a stencil neighbour is masked.
struct QuantumPotential {
  RealField2D Q;
  MaskField2D mask;
};
QuantumPotential quantum_potential(const RealField2D& R, double mass, Axis axis, double eps);
std::vector<double> quantum_potential_1d(std::span<const double> R, const Grid1D& g, double mass,
                                         std::vector<std::uint8_t>& mask, double eps);

/// d/dt log psi on every axis-1 point of slice k by the log-ratio stencil in
/// time (central inside, one-sided second order at the ends).
std::vector<cplx> time_log_derivative(const std::vector<std::vector<cplx>>& rows, std::size_t k, double dt);
std::vector<cplx> time_log_derivative(const ConditionalSeries& series, std::size_t k);

/// Sign of the first term of the exact Gamma. `derived` follows from the
/// continuity equation along the trajectory; `literal` flips it.
enum class GammaSign { derived, literal };

struct GammaResult {
  std::vector<double> exact;  // Gamma(x1, t), 0 where untrusted
  double gamma_t = 0.0;       // -<(d2 v2)_c>, |psi_c|^2-weighted over trusted x1
  double flatness = 0.0;      // max - min of (d2 v2)_c over trusted x1
  bool singular = false;      // |u2t| < eps_v; exact Gamma undefined
};

GammaResult gamma_field(const ConditionalSeries& series, std::size_t k, GammaSign sign = GammaSign::derived);

struct GammaProfile {
  std::vector<double> times;
  std::vector<double> gamma_t;
  std::vector<double> flatness;
  std::vector<double> N;
  std::vector<std::uint8_t> singular;
};

GammaProfile gamma_profile(const ConditionalSeries& series, std::optional<double> N0 = std::nullopt);

/// N(t) = N0 exp(-int_0^t Gamma) with trapezoid quadrature.
std::vector<double> normalization_N(const std::vector<double>& times, const std::vector<double>& gamma_t, double N0);

/// Default N0: integral of R_c^2 over x1 at the first slice.
double default_N0(const ConditionalSeries& series);

/// classical: f-dot from the classical-regime conditional Hamilton-Jacobi form
///   -d_t S_c - (d1 S_c)^2 / 2m1 - V_c - Q1c
/// exact: additionally subtracts Q2c and (m2/2)(v2c - u2t)^2, which makes the
///   pointwise estimate x1-independent for any trajectory.
enum class GaugeForm { classical, exact };

struct GaugeFit {
  std::vector<double> fdot;
  std::vector<double> f;       // f(0) = 0
  std::vector<double> spread;  // max - min of the pointwise estimate over trusted x1
};

/// Estimates are |psi_c|^2-weighted averages over trusted points.
GaugeFit fit_gauge(const ConditionalSeries& series, GaugeForm form = GaugeForm::classical);

/// psi~_c = psi_c exp(i f / hbar) / sqrt(N).
std::vector<std::vector<cplx>> tilde_wavefunction(const ConditionalSeries& series, const std::vector<double>& N,
                                                  const std::vector<double>& f);

/// Per-time relative residual of i hbar d_t psi~ = [-(hbar^2/2m1) d1^2 + V_c] psi~
/// over trusted points, normalized by ||(hbar^2/2m1) d1^2 psi~||. `tilde` may be
/// any slice-aligned rows (e.g. a reference propagation).
std::vector<double> cond_schrodinger_residual(const ConditionalSeries& series,
                                              const std::vector<std::vector<cplx>>& tilde);

struct PseudoOptions {
  bool include_gamma = true;
  /// Adds (m2/2)(v2c - u2t)^2 to U. Without it the identity is not exact.
  bool kinetic_correction = true;
  /// Residual of the equation for psi_c exp(i f / hbar) with f-dot dropped.
  bool absorb_gauge = false;
  GammaSign gamma_sign = GammaSign::derived;
};

struct PseudoResidual {
  std::vector<double> r;  // NaN where Gamma is singular
  bool singular = false;
};

PseudoResidual pseudo_schrodinger_residual(const ConditionalSeries& series, const PseudoOptions& options = {});

struct ContinuityReport {
  double stationary_abs = 0.0;  // ||d1 j1 + d2 j2|| over the full grid
  double stationary_rel = 0.0;  // divided by ||d1 j1|| + ||d2 j2||
  std::vector<double> along_slice;   // non-conserving form, per time
  std::vector<double> normalized;    // d_t rho_c + d1(rho_c v1c), rho_c = R_c^2 / N
  std::vector<double> gamma_term;    // ||rho_c (d2 v2)_c||, the source N(t) removes
};

ContinuityReport continuity_residuals(const ConditionalContext& ctx, const ConditionalSeries& series);

/// Implicit midpoint (Crank-Nicolson) propagation of
///   i hbar d_t psi = [-(hbar^2/2m) d^2 + V(x, t)] psi
/// on a box axis (zero beyond the ends) or a periodic axis. Returns psi at
/// every output time; substeps of at most dt in between.
std::vector<std::vector<cplx>> propagate_reference(const Grid1D& axis, double mass, std::vector<cplx> psi0,
                                                   const std::function<double(double x, double t)>& potential,
                                                   const std::vector<double>& times, double dt);

/// Trapezoid-weighted L2 norm of a - b on an axis.
double l2_distance(const std::vector<cplx>& a, const std::vector<cplx>& b, const Grid1D& axis);

}  // namespace condbohm
