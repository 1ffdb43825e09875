#pragma once

#include <span>
#include <vector>

#include "condbohm/field.hpp"

namespace condbohm {

enum class Axis { x1 = 1, x2 = 2 };

/// First derivative, second-order central stencil. Periodic grids wrap; box
/// grids use the three-point one-sided second-order stencil at the two ends.
template <typename T>
void derivative_1d(std::span<const T> f, const Grid1D& g, std::span<T> out) {
  const int n = g.size();
  const double inv2h = 1.0 / (2.0 * g.spacing());
  for (int i = 1; i < n - 1; ++i) out[i] = (f[i + 1] - f[i - 1]) * inv2h;
  if (g.periodic()) {
    out[0] = (f[1] - f[n - 1]) * inv2h;
    out[n - 1] = (f[0] - f[n - 2]) * inv2h;
  } else {
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2h;
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv2h;
  }
}

/// Second derivative, three-point stencil. Box ends use the four-point
/// one-sided second-order stencil.
template <typename T>
void second_derivative_1d(std::span<const T> f, const Grid1D& g, std::span<T> out) {
  const int n = g.size();
  const double invh2 = 1.0 / (g.spacing() * g.spacing());
  for (int i = 1; i < n - 1; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * invh2;
  if (g.periodic()) {
    out[0] = (f[1] - 2.0 * f[0] + f[n - 1]) * invh2;
    out[n - 1] = (f[0] - 2.0 * f[n - 1] + f[n - 2]) * invh2;
  } else {
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * invh2;
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * invh2;
  }
}

/// Three-point second difference with zero values assumed beyond box ends.
/// This is the symmetric operator used for Hamiltonians.
template <typename T>
void dirichlet_second_difference(std::span<const T> f, const Grid1D& g, std::span<T> out) {
  const int n = g.size();
  const double invh2 = 1.0 / (g.spacing() * g.spacing());
  for (int i = 1; i < n - 1; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * invh2;
  if (g.periodic()) {
    out[0] = (f[1] - 2.0 * f[0] + f[n - 1]) * invh2;
    out[n - 1] = (f[0] - 2.0 * f[n - 1] + f[n - 2]) * invh2;
  } else {
    out[0] = (f[1] - 2.0 * f[0]) * invh2;
    out[n - 1] = (f[n - 2] - 2.0 * f[n - 1]) * invh2;
  }
}

/// First derivative of a complex field as psi * log(psi[i+1] / psi[i-1]) / 2h.
/// Same order as the central stencil but exact for exp(a x) with complex a, so
/// plane-wave phases carry no dispersion error. Falls back to the central
/// stencil at box ends and where the amplitude changes by more than a factor
/// of two across the stencil or any value vanishes (the neighbourhood of nodes).
inline void log_derivative_1d(std::span<const cplx> f, const Grid1D& g, std::span<cplx> out) {
  derivative_1d<cplx>(f, g, out);
  const int n = g.size();
  const double inv2h = 1.0 / (2.0 * g.spacing());
  for (int i = 0; i < n; ++i) {
    int lo = i - 1;
    int hi = i + 1;
    if (g.periodic()) {
      lo = (lo + n) % n;
      hi = hi % n;
    } else if (lo < 0 || hi >= n) {
      continue;
    }
    const double a_lo = std::abs(f[lo]);
    const double a_hi = std::abs(f[hi]);
    const double a_mid = std::abs(f[i]);
    if (a_lo == 0.0 || a_hi == 0.0 || a_mid == 0.0) continue;
    if (a_hi > 2.0 * a_lo || a_lo > 2.0 * a_hi) continue;
    out[i] = f[i] * std::log(f[hi] / f[lo]) * inv2h;
  }
}

template <typename T>
std::vector<T> derivative_1d(std::span<const T> f, const Grid1D& g) {
  std::vector<T> out(f.size());
  derivative_1d<T>(f, g, out);
  return out;
}

template <typename T>
std::vector<T> second_derivative_1d(std::span<const T> f, const Grid1D& g) {
  std::vector<T> out(f.size());
  second_derivative_1d<T>(f, g, out);
  return out;
}

namespace detail {

template <typename T, typename Op>
Field2D<T> apply_along_axis(const Field2D<T>& f, Axis axis, Op op) {
  Field2D<T> out(f.grid());
  const int n1 = f.n1();
  const int n2 = f.n2();
  if (axis == Axis::x2) {
    for (int i = 0; i < n1; ++i) {
      std::span<const T> in(&f(i, 0), static_cast<std::size_t>(n2));
      std::span<T> dst(&out(i, 0), static_cast<std::size_t>(n2));
      op(in, f.grid().axis2, dst);
    }
  } else {
    std::vector<T> line(static_cast<std::size_t>(n1));
    std::vector<T> res(static_cast<std::size_t>(n1));
    for (int j = 0; j < n2; ++j) {
      for (int i = 0; i < n1; ++i) line[i] = f(i, j);
      op(std::span<const T>(line), f.grid().axis1, std::span<T>(res));
      for (int i = 0; i < n1; ++i) out(i, j) = res[i];
    }
  }
  return out;
}

}  // namespace detail

template <typename T>
Field2D<T> gradient(const Field2D<T>& f, Axis axis) {
  return detail::apply_along_axis(f, axis, [](std::span<const T> in, const Grid1D& g, std::span<T> out) {
    derivative_1d<T>(in, g, out);
  });
}

inline ComplexField2D log_gradient(const ComplexField2D& f, Axis axis) {
  return detail::apply_along_axis(f, axis, [](std::span<const cplx> in, const Grid1D& g, std::span<cplx> out) {
    log_derivative_1d(in, g, out);
  });
}

/// Second derivative along one axis.
template <typename T>
Field2D<T> laplacian(const Field2D<T>& f, Axis axis) {
  return detail::apply_along_axis(f, axis, [](std::span<const T> in, const Grid1D& g, std::span<T> out) {
    second_derivative_1d<T>(in, g, out);
  });
}

template <typename T>
Field2D<T> dirichlet_laplacian(const Field2D<T>& f, Axis axis) {
  return detail::apply_along_axis(f, axis, [](std::span<const T> in, const Grid1D& g, std::span<T> out) {
    dirichlet_second_difference<T>(in, g, out);
  });
}

}  // namespace condbohm
