#pragma once

#include <cstddef>
#include <string>

namespace condbohm {

/// Natural units. Kept named so formulas read with their physical factors.
inline constexpr double hbar = 1.0;

enum class Boundary { periodic, box };

struct Point2 {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Uniform 1D grid.
///
/// Periodic grids hold n points on [x_min, x_max) with spacing L/n. Box grids
/// hold n points on [x_min, x_max] including both ends, spacing L/(n-1); field
/// operators that need values beyond the ends treat them as zero (Dirichlet).
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, int n, Boundary boundary);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  int size() const noexcept { return n_; }
  Boundary boundary() const noexcept { return boundary_; }
  bool periodic() const noexcept { return boundary_ == Boundary::periodic; }
  double spacing() const noexcept { return dx_; }
  double length() const noexcept { return x_max_ - x_min_; }
  double x(int i) const noexcept { return x_min_ + i * dx_; }

  /// Trapezoid weight (periodic rule on periodic grids).
  double weight(int i) const noexcept {
    if (!periodic() && (i == 0 || i == n_ - 1)) return 0.5 * dx_;
    return dx_;
  }

  /// Maps a periodic coordinate into [x_min, x_max); identity on box grids.
  double wrap(double x) const noexcept;

  bool contains(double x) const noexcept;

  bool operator==(const Grid1D&) const = default;

 private:
  double x_min_;
  double x_max_;
  int n_;
  Boundary boundary_;
  double dx_;
};

/// Validating factory: rejects n < 8, non-finite or empty domains, odd periodic n.
Grid1D make_grid(double x_min, double x_max, int n, Boundary boundary);

struct Grid2D {
  Grid1D axis1;
  Grid1D axis2;

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(axis1.size()) * static_cast<std::size_t>(axis2.size());
  }
  bool contains(Point2 p) const noexcept { return axis1.contains(p.x1) && axis2.contains(p.x2); }
  double cell_area() const noexcept { return axis1.spacing() * axis2.spacing(); }
  bool operator==(const Grid2D&) const = default;
};

std::string to_string(Boundary b);

}  // namespace condbohm
