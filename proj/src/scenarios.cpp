#include "condbohm/scenarios.hpp"

#include <cmath>
#include <numbers>

namespace condbohm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Grid1D box_axis(const ScenarioParams& p, int n) {
  if (!(p.extent > 0.0)) throw Error(ErrorKind::validation, "scenario extent must be positive");
  return make_grid(-p.extent, p.extent, n, Boundary::box);
}

Grid1D ring_axis(int n) { return make_grid(0.0, kTwoPi, n, Boundary::periodic); }

std::vector<double> harmonic_table(const Grid1D& g, double m, double omega) {
  std::vector<double> v(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) v[i] = 0.5 * m * omega * omega * g.x(i) * g.x(i);
  return v;
}

/// Discrete plane-wave kinetic energy of exp(i k x) on a periodic grid.
double ring_kinetic(const Grid1D& g, double k, double mass) {
  const double h = g.spacing();
  return hbar * hbar * (1.0 - std::cos(k * h)) / (mass * h * h);
}

void check_ring_wavenumber(double k) {
  if (std::abs(k - std::round(k)) > 1e-12) {
    throw Error(ErrorKind::validation, "ring wavenumber must be an integer on a 2 pi ring");
  }
}

Scenario finish(ScenarioName name, const ScenarioParams& p, PotentialSpec pot, Grid2D grid, ComplexField2D psi,
                double energy, Point2 start) {
  const Hamiltonian h(pot, grid);
  const double res = h.relative_residual(psi, energy);
  return Scenario{name, p, std::move(pot), std::move(grid), Eigenstate{energy, std::move(psi), std::nullopt}, start,
                  res};
}

}  // namespace

ScenarioParams default_params(ScenarioName name) {
  ScenarioParams p;
  switch (name) {
    case ScenarioName::vortex_oscillator:
    case ScenarioName::frozen_ground:
      break;
    case ScenarioName::ring_planewave_env:
      p.m2 = 10.0;
      p.k = 8.0;
      break;
    case ScenarioName::coupled_environment:
      p.m2 = 50.0;
      p.k = 20.0;
      p.epsilon = 0.1;
      break;
  }
  return p;
}

std::string to_string(ScenarioName name) {
  switch (name) {
    case ScenarioName::vortex_oscillator: return "vortex_oscillator";
    case ScenarioName::ring_planewave_env: return "ring_planewave_env";
    case ScenarioName::frozen_ground: return "frozen_ground";
    case ScenarioName::coupled_environment: return "coupled_environment";
  }
  return "unknown";
}

ScenarioName parse_scenario_name(std::string_view name) {
  for (ScenarioName s : all_scenarios()) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorKind::validation, "unknown scenario '" + std::string(name) + "'");
}

std::vector<ScenarioName> all_scenarios() {
  return {ScenarioName::vortex_oscillator, ScenarioName::ring_planewave_env, ScenarioName::frozen_ground,
          ScenarioName::coupled_environment};
}

std::string describe(ScenarioName name) {
  switch (name) {
    case ScenarioName::vortex_oscillator:
      return "isotropic 2D oscillator, degenerate superposition |0,1> + i|1,0>, E = 2 hbar w (params: m1=m2, omega)";
    case ScenarioName::ring_planewave_env:
      return "harmonic x1 times plane wave exp(i k x2) on a ring, environment speed hbar k / m2 (params: omega, m2, k)";
    case ScenarioName::frozen_ground:
      return "real ground state of the 2D oscillator, zero flow (params: omega, m1, m2)";
    case ScenarioName::coupled_environment:
      return "numerical eigenstate of m1 w^2 x1^2/2 + epsilon x1 cos(x2) on box x ring (params: m2, k, epsilon)";
  }
  return {};
}

Scenario analytic_scenario(ScenarioName name) { return analytic_scenario(name, default_params(name)); }

Scenario analytic_scenario(ScenarioName name, const ScenarioParams& p) {
  const Masses masses{p.m1, p.m2};
  switch (name) {
    case ScenarioName::vortex_oscillator: {
      if (p.n1 != p.n2) throw Error(ErrorKind::validation, "vortex_oscillator needs identical axes (n1 == n2)");
      if (std::abs(p.m1 - p.m2) > 0.0) throw Error(ErrorKind::validation, "vortex_oscillator needs m1 == m2");
      const Grid1D ax = box_axis(p, p.n1);
      const auto eig = tridiagonal_eigenpairs(ax, p.m1, harmonic_table(ax, p.m1, p.omega), 2);
      const auto& f0 = eig.states[0];
      const auto& f1 = eig.states[1];
      Grid2D grid{ax, ax};
      ComplexField2D psi(grid);
      const double s = 1.0 / std::sqrt(2.0);
      for (int i = 0; i < ax.size(); ++i) {
        for (int j = 0; j < ax.size(); ++j) psi(i, j) = s * cplx(f0[i] * f1[j], f1[i] * f0[j]);
      }
      PotentialSpec pot(Harmonic2D{p.omega, p.omega, 0.0}, masses);
      const double r0 = 2.0;
      const double angle = 80.0 * std::numbers::pi / 180.0;
      return finish(name, p, std::move(pot), grid, std::move(psi), eig.energies[0] + eig.energies[1],
                    Point2{r0 * std::cos(angle), r0 * std::sin(angle)});
    }
    case ScenarioName::ring_planewave_env: {
      check_ring_wavenumber(p.k);
      const Grid1D a1 = box_axis(p, p.n1);
      const Grid1D a2 = ring_axis(p.n2);
      const auto eig = tridiagonal_eigenpairs(a1, p.m1, harmonic_table(a1, p.m1, p.omega), 1);
      Grid2D grid{a1, a2};
      ComplexField2D psi(grid);
      const double s = 1.0 / std::sqrt(a2.length());
      for (int i = 0; i < a1.size(); ++i) {
        for (int j = 0; j < a2.size(); ++j) psi(i, j) = eig.states[0][i] * s * std::polar(1.0, p.k * a2.x(j));
      }
      PotentialSpec pot(RingPlusLocal{p.omega, std::nullopt, 0.0}, masses);
      const double e = eig.energies[0] + ring_kinetic(a2, p.k, p.m2);
      return finish(name, p, std::move(pot), grid, std::move(psi), e, Point2{0.0, 1.0});
    }
    case ScenarioName::frozen_ground: {
      const Grid1D ax = box_axis(p, p.n1);
      const Grid1D ay = box_axis(p, p.n2);
      const auto e1 = tridiagonal_eigenpairs(ax, p.m1, harmonic_table(ax, p.m1, p.omega), 1);
      const auto e2 = tridiagonal_eigenpairs(ay, p.m2, harmonic_table(ay, p.m2, p.omega), 1);
      Grid2D grid{ax, ay};
      ComplexField2D psi(grid);
      for (int i = 0; i < ax.size(); ++i) {
        for (int j = 0; j < ay.size(); ++j) psi(i, j) = e1.states[0][i] * e2.states[0][j];
      }
      PotentialSpec pot(Harmonic2D{p.omega, p.omega, 0.0}, masses);
      return finish(name, p, std::move(pot), grid, std::move(psi), e1.energies[0] + e2.energies[0],
                    Point2{0.5, 0.5});
    }
    case ScenarioName::coupled_environment:
      break;
  }
  throw Error(ErrorKind::validation, "'" + to_string(name) + "' is not an analytic scenario");
}

Scenario coupled_environment_scenario(const ScenarioParams& p, const EigenSolveOptions& options) {
  check_ring_wavenumber(p.k);
  const Masses masses{p.m1, p.m2};
  const Grid1D a1 = box_axis(p, p.n1);
  const Grid1D a2 = ring_axis(p.n2);
  Grid2D grid{a1, a2};
  PotentialSpec pot(RingPlusLocal{p.omega, std::nullopt, p.epsilon}, masses);
  const Hamiltonian h(pot, grid);

  const auto sub = tridiagonal_eigenpairs(a1, p.m1, harmonic_table(a1, p.m1, p.omega), 1);
  const double target = sub.energies[0] + ring_kinetic(a2, p.k, p.m2);

  EigenSolveOptions opts = options;
  opts.k_subspace = std::max<std::size_t>(opts.k_subspace, 8);
  const auto states = solve_eigenstate(h, EigenTarget::near(target), opts);

  ComplexField2D trial(grid);
  for (int i = 0; i < a1.size(); ++i) {
    for (int j = 0; j < a2.size(); ++j) trial(i, j) = sub.states[0][i] * std::polar(1.0, p.k * a2.x(j));
  }
  std::size_t best = 0;
  double best_overlap = -1.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const double ov = std::abs(inner_product(states[s].psi, trial));
    if (ov > best_overlap) {
      best_overlap = ov;
      best = s;
    }
  }
  // Projection of the trial state onto the eigenspace of the best match.
  ComplexField2D psi(grid, cplx(0.0));
  double energy = 0.0;
  int members = 0;
  for (const auto& st : states) {
    const bool same = st.degeneracy_tag ? st.degeneracy_tag == states[best].degeneracy_tag : &st == &states[best];
    if (!same) continue;
    const cplx c = inner_product(st.psi, trial);
    for (std::size_t k = 0; k < psi.values().size(); ++k) psi.values()[k] += c * st.psi.values()[k];
    energy += st.energy;
    ++members;
  }
  energy /= members;
  const double norm = l2_norm(psi);
  for (auto& v : psi.values()) v /= norm;
  // Fix the global phase so psi(x1 = 0, x2 = 0) is real positive.
  const int i0 = a1.size() / 2;
  const cplx ref = psi(i0, 0);
  const cplx rot = std::abs(ref) > 0 ? std::conj(ref) / std::abs(ref) : cplx(1.0);
  for (auto& v : psi.values()) v *= rot;

  Scenario sc = finish(ScenarioName::coupled_environment, p, std::move(pot), grid, std::move(psi), energy,
                       Point2{0.3, 0.5});
  sc.state.degeneracy_tag = states[best].degeneracy_tag;
  return sc;
}

Scenario build_scenario(ScenarioName name, const ScenarioParams& params) {
  if (name == ScenarioName::coupled_environment) return coupled_environment_scenario(params);
  return analytic_scenario(name, params);
}

}  // namespace condbohm
