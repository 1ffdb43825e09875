#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "condbohm/hamiltonian.hpp"

namespace condbohm {

struct Eigenstate {
  double energy = 0.0;
  ComplexField2D psi;
  std::optional<std::string> degeneracy_tag;
};

/// Either "states nearest this energy" or "lowest states".
struct EigenTarget {
  bool lowest = true;
  double energy = 0.0;

  static EigenTarget lowest_states() { return {true, 0.0}; }
  static EigenTarget near(double e) { return {false, e}; }
};

struct EigenSolveOptions {
  std::size_t k_subspace = 1;
  std::size_t guard_vectors = 6;
  int max_iterations = 400;
  /// Converged when ||H x - E x|| <= tolerance * max(1, |E|) for unit x.
  double tolerance = 1e-10;
  /// States closer than this times |E| share a degeneracy tag.
  double tol_degeneracy = 1e-6;
  std::uint64_t seed = 1;
};

/// Shift-invert block iteration (sparse LU of H - sigma) with Rayleigh-Ritz
/// and full reorthogonalization each sweep. Returns the k_subspace states
/// nearest the target, sorted by energy, each normalized to ||psi|| = 1.
/// Throws Error(convergence) when max_iterations is exhausted.
std::vector<Eigenstate> solve_eigenstate(const Hamiltonian& h, EigenTarget target, const EigenSolveOptions& options = {});

}  // namespace condbohm
