#pragma once

#include <array>
#include <span>
#include <vector>

#include "condbohm/field.hpp"

namespace condbohm {

/// Interpolation weights along one axis: Catmull-Rom cubic (4 taps) in the
/// interior, linear (2 taps) within one cell of a box edge. At grid points the
/// weights collapse to a single unit tap.
struct AxisWeights {
  std::array<int, 4> index{};
  std::array<double, 4> weight{};
  std::array<double, 4> dweight{};  // d/dx of the weights
  int taps = 0;
};

/// Throws Error(out_of_domain) for points outside a box axis.
AxisWeights axis_weights(const Grid1D& g, double x);

/// Same weights without derivatives; returns false outside a box axis.
bool value_weights(const Grid1D& g, double x, AxisWeights& w) noexcept;

template <typename T>
T interpolate(const Field2D<T>& f, const AxisWeights& w1, const AxisWeights& w2) {
  T acc{};
  for (int a = 0; a < w1.taps; ++a) {
    T row{};
    const T* base = &f(w1.index[a], 0);
    for (int b = 0; b < w2.taps; ++b) row += w2.weight[b] * base[w2.index[b]];
    acc += w1.weight[a] * row;
  }
  return acc;
}

template <typename T>
T interpolate(const Field2D<T>& f, Point2 p) {
  return interpolate(f, axis_weights(f.grid().axis1, p.x1), axis_weights(f.grid().axis2, p.x2));
}

/// Values along axis 1 (at every axis-1 grid point) at x2.
template <typename T>
std::vector<T> interpolate_row(const Field2D<T>& f, double x2) {
  const AxisWeights w = axis_weights(f.grid().axis2, x2);
  std::vector<T> out(static_cast<std::size_t>(f.n1()));
  for (int i = 0; i < f.n1(); ++i) {
    const T* base = &f(i, 0);
    T acc{};
    for (int b = 0; b < w.taps; ++b) acc += w.weight[b] * base[w.index[b]];
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

template <typename T>
T interpolate_1d(std::span<const T> v, const Grid1D& g, double x) {
  const AxisWeights w = axis_weights(g, x);
  T acc{};
  for (int b = 0; b < w.taps; ++b) acc += w.weight[b] * v[static_cast<std::size_t>(w.index[b])];
  return acc;
}

/// Derivative of the 1D interpolant.
template <typename T>
T interpolate_derivative_1d(std::span<const T> v, const Grid1D& g, double x) {
  const AxisWeights w = axis_weights(g, x);
  T acc{};
  for (int b = 0; b < w.taps; ++b) acc += w.dweight[b] * v[static_cast<std::size_t>(w.index[b])];
  return acc;
}

}  // namespace condbohm
