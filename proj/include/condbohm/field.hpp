#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "condbohm/error.hpp"
#include "condbohm/grid.hpp"

namespace condbohm {

using cplx = std::complex<double>;

/// Samples on a Grid2D, stored row-major with axis 2 contiguous.
template <typename T>
class Field2D {
 public:
  using value_type = T;

  explicit Field2D(Grid2D grid, T fill = T{}) : grid_(std::move(grid)), data_(grid_.size(), fill) {}

  Field2D(Grid2D grid, std::vector<T> values) : grid_(std::move(grid)), data_(std::move(values)) {
    if (data_.size() != grid_.size()) {
      throw Error(ErrorKind::validation, "field value count does not match grid");
    }
  }

  template <typename F>
  static Field2D from_function(const Grid2D& grid, F&& f) {
    Field2D out(grid);
    for (int i = 0; i < grid.axis1.size(); ++i) {
      for (int j = 0; j < grid.axis2.size(); ++j) out(i, j) = f(grid.axis1.x(i), grid.axis2.x(j));
    }
    return out;
  }

  const Grid2D& grid() const noexcept { return grid_; }
  int n1() const noexcept { return grid_.axis1.size(); }
  int n2() const noexcept { return grid_.axis2.size(); }

  std::size_t index(int i1, int i2) const noexcept {
    return static_cast<std::size_t>(i1) * static_cast<std::size_t>(n2()) + static_cast<std::size_t>(i2);
  }

  T& operator()(int i1, int i2) noexcept { return data_[index(i1, i2)]; }
  const T& operator()(int i1, int i2) const noexcept { return data_[index(i1, i2)]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  template <typename F>
  auto map(F&& f) const {
    using U = decltype(f(std::declval<const T&>()));
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(), f);
    return Field2D<U>(grid_, std::move(out));
  }

 private:
  Grid2D grid_;
  std::vector<T> data_;
};

using RealField2D = Field2D<double>;
using ComplexField2D = Field2D<cplx>;
using MaskField2D = Field2D<std::uint8_t>;

inline double magnitude2(double v) { return v * v; }
inline double magnitude2(const cplx& v) { return std::norm(v); }

/// Trapezoid/periodic-rule quadrature of |f|^2.
template <typename T>
double norm2_integral(const Field2D<T>& f) {
  const auto& g = f.grid();
  double sum = 0.0;
  for (int i = 0; i < f.n1(); ++i) {
    double row = 0.0;
    for (int j = 0; j < f.n2(); ++j) row += g.axis2.weight(j) * magnitude2(f(i, j));
    sum += g.axis1.weight(i) * row;
  }
  return sum;
}

template <typename T>
double l2_norm(const Field2D<T>& f) {
  return std::sqrt(norm2_integral(f));
}

/// <a, b> with trapezoid weights, conjugate-linear in a.
cplx inner_product(const ComplexField2D& a, const ComplexField2D& b);

template <typename T>
double max_abs(const Field2D<T>& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

template <typename T>
bool all_finite(const Field2D<T>& f) {
  for (const auto& v : f.values()) {
    if constexpr (std::is_same_v<T, cplx>) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    } else {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

/// Quadrature of |v|^2 along a 1D grid.
template <typename T>
double norm2_integral_1d(std::span<const T> v, const Grid1D& g) {
  double s = 0.0;
  for (int i = 0; i < g.size(); ++i) s += g.weight(i) * magnitude2(v[static_cast<std::size_t>(i)]);
  return s;
}

}  // namespace condbohm
