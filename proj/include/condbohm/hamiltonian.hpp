#pragma once

#include <Eigen/SparseCore>
#include <span>
#include <vector>

#include "condbohm/field.hpp"
#include "condbohm/potential.hpp"

namespace condbohm {

/// -(hbar^2/2m1) d1^2 - (hbar^2/2m2) d2^2 + V on a Grid2D.
///
/// The kinetic stencils are the three-point second differences with zero
/// values beyond box ends, so the operator is symmetric in the trapezoid inner
/// product for fields vanishing at box edges (and always on periodic axes).
class Hamiltonian {
 public:
  Hamiltonian(PotentialSpec potential, Grid2D grid);

  ComplexField2D apply(const ComplexField2D& psi) const;

  /// Row-major (axis 2 fastest) sparse matrix of the same operator.
  Eigen::SparseMatrix<double> matrix() const;

  double expectation(const ComplexField2D& psi) const;
  /// ||H psi - E psi|| / ||psi||
  double relative_residual(const ComplexField2D& psi, double energy) const;

  const Grid2D& grid() const noexcept { return grid_; }
  const PotentialSpec& potential_spec() const noexcept { return potential_; }
  const RealField2D& potential() const noexcept { return v_; }
  const Masses& masses() const noexcept { return potential_.masses(); }

 private:
  PotentialSpec potential_;
  Grid2D grid_;
  RealField2D v_;
};

Hamiltonian assemble_hamiltonian(const PotentialSpec& potential, const Grid2D& grid);

/// Lowest `count` eigenpairs of the 1D operator -(hbar^2/2m) d^2 + V on a box
/// grid (zero beyond the ends). States are real, normalized with trapezoid
/// weights, and signed so that sum_i x_i^n phi_n(x_i) > 0.
struct Eigenpairs1D {
  std::vector<double> energies;
  std::vector<std::vector<double>> states;
};

Eigenpairs1D tridiagonal_eigenpairs(const Grid1D& grid, double mass, std::span<const double> potential, int count);

}  // namespace condbohm
