#include "condbohm/grid.hpp"

#include <cmath>

#include "condbohm/error.hpp"

namespace condbohm {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::validation: return "validation";
    case ErrorKind::node_proximity: return "node_proximity";
    case ErrorKind::out_of_domain: return "out_of_domain";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Grid1D::Grid1D(double x_min, double x_max, int n, Boundary boundary)
    : x_min_(x_min), x_max_(x_max), n_(n), boundary_(boundary), dx_(0.0) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw Error(ErrorKind::validation, "grid bounds must be finite");
  }
  if (!(x_max > x_min)) throw Error(ErrorKind::validation, "grid requires x_max > x_min");
  if (n < 8) throw Error(ErrorKind::validation, "grid requires at least 8 points");
  if (boundary == Boundary::periodic && n % 2 != 0) {
    throw Error(ErrorKind::validation, "periodic grid requires an even number of points");
  }
  dx_ = boundary == Boundary::periodic ? (x_max - x_min) / n : (x_max - x_min) / (n - 1);
}

double Grid1D::wrap(double x) const noexcept {
  if (!periodic()) return x;
  const double L = length();
  double r = std::fmod(x - x_min_, L);
  if (r < 0) r += L;
  if (r >= L) r = 0.0;
  return x_min_ + r;
}

bool Grid1D::contains(double x) const noexcept {
  if (!std::isfinite(x)) return false;
  if (periodic()) return true;
  return x >= x_min_ && x <= x_max_;
}

Grid1D make_grid(double x_min, double x_max, int n, Boundary boundary) {
  return Grid1D(x_min, x_max, n, boundary);
}

std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "box"; }

}  // namespace condbohm
