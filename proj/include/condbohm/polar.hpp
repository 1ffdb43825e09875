#pragma once

#include <optional>
#include <span>
#include <utility>

#include "condbohm/field.hpp"

namespace condbohm {

/// psi = R exp(iS/hbar) with a node mask where R < eps_node.
struct PolarField {
  RealField2D R;
  RealField2D S;
  MaskField2D node_mask;
  double eps_node = 0.0;

  const Grid2D& grid() const noexcept { return R.grid(); }
  ComplexField2D recompose() const;
};

/// Default node threshold: 1e-6 of the maximum amplitude.
inline constexpr double kNodeThresholdRelative = 1e-6;

/// R = |psi|; S unwrapped by breadth-first propagation from the point of
/// maximal |psi| across non-masked neighbours (periodic wrap allowed). Every
/// connected non-masked component gets its own root. Masked points carry S = 0.
PolarField polar_decompose(const ComplexField2D& psi, std::optional<double> eps_node = std::nullopt);

/// Sum of phase differences around a closed loop of grid points, each
/// difference wrapped into (-pi*hbar, pi*hbar]. Integer multiple of 2*pi*hbar.
double phase_circulation(const PolarField& polar, std::span<const std::pair<int, int>> loop);

/// Phase difference arg(b conj(a)) in (-pi, pi], times hbar.
double wrapped_phase_difference(const cplx& a, const cplx& b);

}  // namespace condbohm
