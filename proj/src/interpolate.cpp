#include "condbohm/interpolate.hpp"

#include <cmath>
#include <sstream>

namespace condbohm {

namespace {

constexpr double kSnap = 1e-10;

template <bool Derivative>
void cubic(double t, double h, AxisWeights& w) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  w.weight = {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), 0.5 * (-3.0 * t3 + 4.0 * t2 + t),
              0.5 * (t3 - t2)};
  if constexpr (Derivative) {
    w.dweight = {0.5 * (-3.0 * t2 + 4.0 * t - 1.0) / h, 0.5 * (9.0 * t2 - 10.0 * t) / h,
                 0.5 * (-9.0 * t2 + 8.0 * t + 1.0) / h, 0.5 * (3.0 * t2 - 2.0 * t) / h};
  }
  w.taps = 4;
}

template <bool Derivative>
bool fill_weights(const Grid1D& g, double x, AxisWeights& w) noexcept {
  if (!g.contains(x)) return false;
  const int n = g.size();
  const double h = g.spacing();
  double u = (g.wrap(x) - g.x_min()) / h;
  const double nearest = std::nearbyint(u);
  if (std::abs(u - nearest) < kSnap) u = nearest;
  int i0 = static_cast<int>(std::floor(u));
  double t = u - i0;
  if (g.periodic()) {
    i0 = ((i0 % n) + n) % n;
  } else if (i0 >= n - 1) {
    i0 = n - 2;
    t = 1.0;
  }

  const bool cubic_ok = g.periodic() || (i0 - 1 >= 0 && i0 + 2 <= n - 1);
  if (cubic_ok) {
    cubic<Derivative>(t, h, w);
    for (int a = 0; a < 4; ++a) {
      int idx = i0 - 1 + a;
      if (g.periodic()) {
        if (idx < 0) idx += n;
        if (idx >= n) idx -= n;
      }
      w.index[a] = idx;
    }
  } else {
    w.taps = 2;
    w.index = {i0, i0 + 1, 0, 0};
    w.weight = {1.0 - t, t, 0.0, 0.0};
    if constexpr (Derivative) w.dweight = {-1.0 / h, 1.0 / h, 0.0, 0.0};
  }
  // Collapse to a single tap at grid points so samples are reproduced exactly.
  if (t == 0.0 || t == 1.0) {
    const int hit = (t == 0.0) ? (w.taps == 4 ? 1 : 0) : (w.taps == 4 ? 2 : 1);
    for (int a = 0; a < w.taps; ++a) w.weight[a] = (a == hit) ? 1.0 : 0.0;
  }
  return true;
}

}  // namespace

AxisWeights axis_weights(const Grid1D& g, double x) {
  AxisWeights w;
  if (!fill_weights<true>(g, x, w)) {
    std::ostringstream os;
    os << "point " << x << " outside box axis [" << g.x_min() << ", " << g.x_max() << "]";
    throw Error(ErrorKind::out_of_domain, os.str());
  }
  return w;
}

bool value_weights(const Grid1D& g, double x, AxisWeights& w) noexcept { return fill_weights<false>(g, x, w); }

}  // namespace condbohm
