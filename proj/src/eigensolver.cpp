#include "condbohm/eigensolver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace condbohm {

namespace {

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
  return q;
}

double lower_spectrum_bound(const Eigen::SparseMatrix<double>& h) {
  // Every eigenvalue exceeds min(diagonal - sum of off-diagonal magnitudes).
  Eigen::VectorXd offsum = Eigen::VectorXd::Zero(h.rows());
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(h.rows());
  for (int k = 0; k < h.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(h, k); it; ++it) {
      if (it.row() == it.col()) {
        diag[it.row()] += it.value();
      } else {
        offsum[it.row()] += std::abs(it.value());
      }
    }
  }
  return (diag - offsum).minCoeff();
}

}  // namespace

std::vector<Eigenstate> solve_eigenstate(const Hamiltonian& h, EigenTarget target, const EigenSolveOptions& options) {
  if (options.k_subspace < 1) throw Error(ErrorKind::validation, "k_subspace must be >= 1");
  if (!target.lowest && !std::isfinite(target.energy)) throw Error(ErrorKind::validation, "target energy not finite");

  const Eigen::SparseMatrix<double> hm = h.matrix();
  const Eigen::Index n = hm.rows();
  const Eigen::Index block = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(options.k_subspace + options.guard_vectors));

  // The Gershgorin bound lies below the spectrum, so shift-invert there picks the lowest states.
  double sigma = target.lowest ? lower_spectrum_bound(hm) - 1e-3 : target.energy;

  Eigen::SparseMatrix<double> shifted = hm;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  for (int attempt = 0;; ++attempt) {
    shifted = hm;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
    shifted.makeCompressed();
    lu.compute(shifted);
    if (lu.info() == Eigen::Success) break;
    if (attempt > 3) throw Error(ErrorKind::convergence, "shift-invert factorization failed");
    sigma += 1e-7 * std::max(1.0, std::abs(sigma));
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd q(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) q(i, j) = normal(rng);
  }
  q = orthonormalize(q);

  Eigen::VectorXd theta;
  std::vector<Eigen::Index> order;
  const auto wanted = static_cast<Eigen::Index>(options.k_subspace);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Eigen::MatrixXd y = lu.solve(q);
    q = orthonormalize(y);
    const Eigen::MatrixXd hq = hm * q;
    const Eigen::MatrixXd proj = q.transpose() * hq;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (proj + proj.transpose()));
    theta = es.eigenvalues();
    q = q * es.eigenvectors();
    const Eigen::MatrixXd hq_rot = hq * es.eigenvectors();

    order.resize(static_cast<std::size_t>(block));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(theta[a] - sigma) < std::abs(theta[b] - sigma);
    });

    bool converged = true;
    for (Eigen::Index w = 0; w < wanted; ++w) {
      const Eigen::Index c = order[static_cast<std::size_t>(w)];
      const double res = (hq_rot.col(c) - theta[c] * q.col(c)).norm();
      if (res > options.tolerance * std::max(1.0, std::abs(theta[c]))) {
        converged = false;
        break;
      }
    }
    if (converged) {
      std::vector<Eigen::Index> picked(order.begin(), order.begin() + wanted);
      std::sort(picked.begin(), picked.end(), [&](Eigen::Index a, Eigen::Index b) { return theta[a] < theta[b]; });
      std::vector<Eigenstate> states;
      for (Eigen::Index c : picked) {
        ComplexField2D psi(h.grid());
        for (Eigen::Index i = 0; i < n; ++i) psi.values()[static_cast<std::size_t>(i)] = q(i, c);
        const double norm = l2_norm(psi);
        for (auto& v : psi.values()) v /= norm;
        states.push_back(Eigenstate{theta[c], std::move(psi), std::nullopt});
      }
      // Group near-equal energies.
      int tag = 0;
      for (std::size_t a = 0; a < states.size();) {
        std::size_t b = a + 1;
        while (b < states.size() &&
               states[b].energy - states[b - 1].energy < options.tol_degeneracy * std::abs(states[b].energy)) {
          ++b;
        }
        if (b - a > 1) {
          const std::string label = "deg" + std::to_string(tag++);
          for (std::size_t c = a; c < b; ++c) states[c].degeneracy_tag = label;
        }
        a = b;
      }
      return states;
    }
  }
  std::ostringstream os;
  os << "eigensolver did not converge in " << options.max_iterations << " iterations (shift " << sigma << ")";
  throw Error(ErrorKind::convergence, os.str());
}

}  // namespace condbohm
