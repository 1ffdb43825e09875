#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "condbohm/field.hpp"

namespace condbohm {

struct Masses {
  double m1 = 1.0;
  double m2 = 1.0;

  double operator[](int axis) const noexcept { return axis == 1 ? m1 : m2; }
};

/// V = m1 w1^2 x1^2 / 2 + m2 w2^2 x2^2 / 2 + coupling * x1 * x2
struct Harmonic2D {
  double omega1 = 1.0;
  double omega2 = 1.0;
  double coupling = 0.0;
};

/// V = 0 (intended for a periodic x2 axis).
struct RingFree {};

struct Tabulated1D {
  Grid1D grid;
  std::vector<double> values;
};

/// V = V1(x1) + epsilon * x1 * cos(x2). V1 is m1 w1^2 x1^2 / 2 unless a table is given.
struct RingPlusLocal {
  double omega1 = 1.0;
  std::optional<Tabulated1D> local;
  double epsilon = 0.0;
};

/// Tabulated V(x1, x2); gradients come from interpolated stencil derivatives.
struct CustomPotential {
  std::shared_ptr<const RealField2D> values;
  std::shared_ptr<const RealField2D> d1;
  std::shared_ptr<const RealField2D> d2;
};

class PotentialSpec {
 public:
  using Kind = std::variant<Harmonic2D, RingFree, RingPlusLocal, CustomPotential>;

  PotentialSpec(Kind kind, Masses masses);

  double value(double x1, double x2) const;
  std::array<double, 2> gradient(double x1, double x2) const;
  RealField2D sample(const Grid2D& grid) const;

  const Kind& kind() const noexcept { return kind_; }
  const Masses& masses() const noexcept { return masses_; }
  std::string name() const;

 private:
  Kind kind_;
  Masses masses_;
};

PotentialSpec custom_potential(const RealField2D& values, Masses masses);

/// Classical Hamiltonian p1^2/2m1 + p2^2/2m2 + V.
double classical_energy(const PotentialSpec& pot, double x1, double x2, double p1, double p2);

}  // namespace condbohm
