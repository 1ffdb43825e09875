#include "condbohm/hamiltonian.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "condbohm/stencil.hpp"

namespace condbohm {

Hamiltonian::Hamiltonian(PotentialSpec potential, Grid2D grid)
    : potential_(std::move(potential)), grid_(std::move(grid)), v_(potential_.sample(grid_)) {
  if (!all_finite(v_)) throw Error(ErrorKind::validation, "potential is not finite on the grid");
}

ComplexField2D Hamiltonian::apply(const ComplexField2D& psi) const {
  if (!(psi.grid() == grid_)) throw Error(ErrorKind::validation, "field grid does not match Hamiltonian grid");
  const auto& m = masses();
  const ComplexField2D d11 = dirichlet_laplacian(psi, Axis::x1);
  const ComplexField2D d22 = dirichlet_laplacian(psi, Axis::x2);
  ComplexField2D out(grid_);
  const double c1 = -hbar * hbar / (2.0 * m.m1);
  const double c2 = -hbar * hbar / (2.0 * m.m2);
  for (std::size_t k = 0; k < out.values().size(); ++k) {
    out.values()[k] = c1 * d11.values()[k] + c2 * d22.values()[k] + v_.values()[k] * psi.values()[k];
  }
  return out;
}

Eigen::SparseMatrix<double> Hamiltonian::matrix() const {
  const int n1 = grid_.axis1.size();
  const int n2 = grid_.axis2.size();
  const auto& m = masses();
  const double c1 = hbar * hbar / (2.0 * m.m1 * grid_.axis1.spacing() * grid_.axis1.spacing());
  const double c2 = hbar * hbar / (2.0 * m.m2 * grid_.axis2.spacing() * grid_.axis2.spacing());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(grid_.size() * 5);
  auto idx = [n2](int i, int j) { return i * n2 + j; };
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const int k = idx(i, j);
      trip.emplace_back(k, k, 2.0 * c1 + 2.0 * c2 + v_(i, j));
      for (int d : {-1, 1}) {
        int ni = i + d;
        if (ni < 0 || ni >= n1) {
          if (grid_.axis1.periodic()) {
            ni = (ni + n1) % n1;
            trip.emplace_back(k, idx(ni, j), -c1);
          }
        } else {
          trip.emplace_back(k, idx(ni, j), -c1);
        }
        int nj = j + d;
        if (nj < 0 || nj >= n2) {
          if (grid_.axis2.periodic()) {
            nj = (nj + n2) % n2;
            trip.emplace_back(k, idx(i, nj), -c2);
          }
        } else {
          trip.emplace_back(k, idx(i, nj), -c2);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> h(static_cast<Eigen::Index>(grid_.size()), static_cast<Eigen::Index>(grid_.size()));
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

double Hamiltonian::expectation(const ComplexField2D& psi) const {
  return inner_product(psi, apply(psi)).real() / norm2_integral(psi);
}

double Hamiltonian::relative_residual(const ComplexField2D& psi, double energy) const {
  ComplexField2D r = apply(psi);
  for (std::size_t k = 0; k < r.values().size(); ++k) r.values()[k] -= energy * psi.values()[k];
  return l2_norm(r) / l2_norm(psi);
}

Hamiltonian assemble_hamiltonian(const PotentialSpec& potential, const Grid2D& grid) {
  return Hamiltonian(potential, grid);
}

cplx inner_product(const ComplexField2D& a, const ComplexField2D& b) {
  if (!(a.grid() == b.grid())) throw Error(ErrorKind::validation, "inner product of fields on different grids");
  const auto& g = a.grid();
  cplx sum = 0.0;
  for (int i = 0; i < a.n1(); ++i) {
    cplx row = 0.0;
    for (int j = 0; j < a.n2(); ++j) row += g.axis2.weight(j) * std::conj(a(i, j)) * b(i, j);
    sum += g.axis1.weight(i) * row;
  }
  return sum;
}

Eigenpairs1D tridiagonal_eigenpairs(const Grid1D& grid, double mass, std::span<const double> potential, int count) {
  if (grid.periodic()) throw Error(ErrorKind::validation, "tridiagonal_eigenpairs requires a box grid");
  const int n = grid.size();
  if (static_cast<int>(potential.size()) != n) throw Error(ErrorKind::validation, "potential size mismatch");
  if (count < 1 || count > n) throw Error(ErrorKind::validation, "invalid eigenpair count");
  const double c = hbar * hbar / (2.0 * mass * grid.spacing() * grid.spacing());
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(n - 1);
  for (int i = 0; i < n; ++i) diag[i] = 2.0 * c + potential[static_cast<std::size_t>(i)];
  sub.setConstant(-c);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::convergence, "tridiagonal eigensolve failed");

  Eigenpairs1D out;
  const double center = 0.5 * (grid.x_min() + grid.x_max());
  for (int k = 0; k < count; ++k) {
    std::vector<double> phi(static_cast<std::size_t>(n));
    double norm = 0.0;
    double moment = 0.0;
    for (int i = 0; i < n; ++i) {
      phi[i] = es.eigenvectors()(i, k);
      norm += grid.weight(i) * phi[i] * phi[i];
      moment += std::pow(grid.x(i) - center, k) * phi[i];
    }
    const double scale = (moment < 0 ? -1.0 : 1.0) / std::sqrt(norm);
    for (double& v : phi) v *= scale;
    out.energies.push_back(es.eigenvalues()[k]);
    out.states.push_back(std::move(phi));
  }
  return out;
}

}  // namespace condbohm
