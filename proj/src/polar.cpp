#include "condbohm/polar.hpp"

#include <cmath>
#include <algorithm>
#include <deque>
#include <numbers>

namespace condbohm {

ComplexField2D PolarField::recompose() const {
  ComplexField2D out(R.grid());
  for (std::size_t k = 0; k < out.values().size(); ++k) {
    out.values()[k] = std::polar(R.values()[k], S.values()[k] / hbar);
  }
  return out;
}

double wrapped_phase_difference(const cplx& a, const cplx& b) { return hbar * std::arg(b * std::conj(a)); }

PolarField polar_decompose(const ComplexField2D& psi, std::optional<double> eps_node) {
  const Grid2D& g = psi.grid();
  if (!all_finite(psi)) throw Error(ErrorKind::validation, "polar_decompose: non-finite field");
  const double max_r = max_abs(psi);
  const double eps = eps_node.value_or(kNodeThresholdRelative * max_r);

  PolarField out{RealField2D(g), RealField2D(g), MaskField2D(g, 0), eps};
  const int n1 = psi.n1();
  const int n2 = psi.n2();
  std::size_t unmasked = 0;
  for (std::size_t k = 0; k < psi.values().size(); ++k) {
    const double r = std::abs(psi.values()[k]);
    out.R.values()[k] = r;
    const bool masked = !(r >= eps) || r == 0.0;
    out.node_mask.values()[k] = masked ? 1 : 0;
    if (!masked) ++unmasked;
  }
  if (unmasked == 0) throw Error(ErrorKind::validation, "polar_decompose: every point is masked");

  MaskField2D visited(g, 0);
  std::deque<std::pair<int, int>> queue;
  auto neighbour = [&](int i, int j, int di, int dj, int& ni, int& nj) {
    ni = i + di;
    nj = j + dj;
    if (ni < 0 || ni >= n1) {
      if (!g.axis1.periodic()) return false;
      ni = (ni + n1) % n1;
    }
    if (nj < 0 || nj >= n2) {
      if (!g.axis2.periodic()) return false;
      nj = (nj + n2) % n2;
    }
    return true;
  };
  constexpr int kDirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

  // Component roots are taken in order of decreasing amplitude.
  std::vector<std::size_t> order;
  order.reserve(unmasked);
  for (std::size_t k = 0; k < psi.values().size(); ++k) {
    if (!out.node_mask.values()[k]) order.push_back(k);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out.R.values()[a] > out.R.values()[b]; });

  for (const std::size_t root : order) {
    const int ri = static_cast<int>(root / static_cast<std::size_t>(n2));
    const int rj = static_cast<int>(root % static_cast<std::size_t>(n2));
    if (visited(ri, rj)) continue;
    visited(ri, rj) = 1;
    out.S(ri, rj) = hbar * std::arg(psi(ri, rj));
    queue.emplace_back(ri, rj);
    while (!queue.empty()) {
      auto [i, j] = queue.front();
      queue.pop_front();
      for (const auto& d : kDirs) {
        int ni = 0;
        int nj = 0;
        if (!neighbour(i, j, d[0], d[1], ni, nj)) continue;
        if (out.node_mask(ni, nj) || visited(ni, nj)) continue;
        visited(ni, nj) = 1;
        out.S(ni, nj) = out.S(i, j) + wrapped_phase_difference(psi(i, j), psi(ni, nj));
        queue.emplace_back(ni, nj);
      }
    }
  }
  return out;
}

double phase_circulation(const PolarField& polar, std::span<const std::pair<int, int>> loop) {
  if (loop.size() < 2) return 0.0;
  const double two_pi_hbar = 2.0 * std::numbers::pi * hbar;
  double sum = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const auto [i0, j0] = loop[k];
    const auto [i1, j1] = loop[(k + 1) % loop.size()];
    double d = polar.S(i1, j1) - polar.S(i0, j0);
    d -= two_pi_hbar * std::round(d / two_pi_hbar);
    sum += d;
  }
  return sum;
}

}  // namespace condbohm
