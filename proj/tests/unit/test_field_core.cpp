#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "condbohm/field.hpp"
#include "condbohm/grid.hpp"
#include "condbohm/interpolate.hpp"
#include "condbohm/polar.hpp"
#include "condbohm/stencil.hpp"

using namespace condbohm;

namespace {

constexpr double kPi = std::numbers::pi;

Grid1D ring(int n) { return make_grid(0.0, 2.0 * kPi, n, Boundary::periodic); }

std::vector<double> sample(const Grid1D& g, double (*f)(double)) {
  std::vector<double> v(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) v[i] = f(g.x(i));
  return v;
}

double max_error_derivative(int n, int k) {
  const Grid1D g = ring(n);
  std::vector<double> f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f[i] = std::sin(k * g.x(i));
  const auto d = derivative_1d<double>(f, g);
  double err = 0.0;
  for (int i = 0; i < n; ++i) err = std::max(err, std::abs(d[i] - k * std::cos(k * g.x(i))));
  return err;
}

double max_error_second(int n, int k) {
  const Grid1D g = ring(n);
  std::vector<double> f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f[i] = std::sin(k * g.x(i));
  const auto d = second_derivative_1d<double>(f, g);
  double err = 0.0;
  for (int i = 0; i < n; ++i) err = std::max(err, std::abs(d[i] + k * k * std::sin(k * g.x(i))));
  return err;
}

ComplexField2D vortex(int n, double extent) {
  const Grid1D ax = make_grid(-extent, extent, n, Boundary::box);
  return ComplexField2D::from_function(Grid2D{ax, ax}, [](double x1, double x2) {
    return cplx(x2, x1) * std::exp(-0.5 * (x1 * x1 + x2 * x2));
  });
}

}  // namespace

TEST_CASE("grid spacing") {
  CHECK(make_grid(0.0, 2.0 * kPi, 64, Boundary::periodic).spacing() == doctest::Approx(2.0 * kPi / 64).epsilon(1e-15));
  CHECK(make_grid(-10.0, 10.0, 257, Boundary::box).spacing() == doctest::Approx(20.0 / 256).epsilon(1e-15));
}

TEST_CASE("grid rejects degenerate input") {
  CHECK_THROWS_AS(make_grid(0.0, 0.0, 64, Boundary::periodic), Error);
  CHECK_THROWS_AS(make_grid(1.0, 0.0, 64, Boundary::box), Error);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 63, Boundary::periodic), Error);
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 4, Boundary::box), Error);
  CHECK_THROWS_AS(make_grid(0.0, std::nan(""), 64, Boundary::box), Error);
}

TEST_CASE("periodic wrap maps into the half-open domain") {
  const Grid1D g = ring(64);
  CHECK(g.wrap(2.0 * kPi) == doctest::Approx(0.0));
  CHECK(g.wrap(-0.5) == doctest::Approx(2.0 * kPi - 0.5));
  CHECK(g.wrap(13.0 * kPi + 0.25) == doctest::Approx(kPi + 0.25));
  const Grid1D b = make_grid(-1.0, 1.0, 33, Boundary::box);
  CHECK(b.wrap(3.0) == 3.0);
  CHECK_FALSE(b.contains(1.5));
}

TEST_CASE("trapezoid norm of a Gaussian") {
  const Grid1D ax = make_grid(-8.0, 8.0, 257, Boundary::box);
  const auto f = RealField2D::from_function(Grid2D{ax, ax}, [](double x1, double x2) {
    return std::exp(-0.5 * (x1 * x1 + x2 * x2));
  });
  CHECK(norm2_integral(f) == doctest::Approx(kPi).epsilon(1e-10));
  CHECK(all_finite(f));
}

TEST_CASE("first derivative: constants, lines and second-order convergence") {
  const Grid1D box = make_grid(-2.0, 3.0, 41, Boundary::box);
  const auto c = derivative_1d<double>(sample(box, [](double) { return 4.2; }), box);
  for (double v : c) CHECK(std::abs(v) < 1e-12);
  const auto l = derivative_1d<double>(sample(box, [](double x) { return x; }), box);
  for (double v : l) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  const auto q = derivative_1d<double>(sample(box, [](double x) { return x * x; }), box);
  for (int i = 0; i < box.size(); ++i) CHECK(q[i] == doctest::Approx(2.0 * box.x(i)).scale(1.0).epsilon(1e-12));

  for (int n : {32, 64, 128}) {
    const double ratio = max_error_derivative(n, 3) / max_error_derivative(2 * n, 3);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("second derivative: lines vanish and sin converges at second order") {
  const Grid1D box = make_grid(-2.0, 3.0, 41, Boundary::box);
  const auto l = second_derivative_1d<double>(sample(box, [](double x) { return 2.0 * x - 1.0; }), box);
  for (double v : l) CHECK(std::abs(v) < 1e-9);
  const auto c = second_derivative_1d<double>(sample(box, [](double) { return -3.0; }), box);
  for (double v : c) CHECK(std::abs(v) < 1e-9);
  for (int n : {32, 64, 128}) {
    const double ratio = max_error_second(n, 2) / max_error_second(2 * n, 2);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("log-ratio derivative is exact for plane waves") {
  const Grid1D g = ring(64);
  std::vector<cplx> f(64);
  for (int i = 0; i < 64; ++i) f[i] = std::polar(1.0, 7.0 * g.x(i));
  std::vector<cplx> d(64);
  log_derivative_1d(f, g, d);
  for (int i = 0; i < 64; ++i) {
    CHECK(std::abs(d[i] - cplx(0.0, 7.0) * f[i]) < 1e-12);
  }
}

TEST_CASE("2D gradient and laplacian act along the requested axis") {
  const Grid1D a1 = make_grid(-1.0, 1.0, 21, Boundary::box);
  const Grid1D a2 = ring(32);
  const auto f = RealField2D::from_function(Grid2D{a1, a2}, [](double x1, double x2) { return x1 * std::cos(x2); });
  const auto g1 = gradient(f, Axis::x1);
  const auto l1 = laplacian(f, Axis::x1);
  for (int i = 0; i < a1.size(); ++i) {
    for (int j = 0; j < a2.size(); ++j) {
      CHECK(g1(i, j) == doctest::Approx(std::cos(a2.x(j))).scale(1.0).epsilon(1e-12));
      CHECK(std::abs(l1(i, j)) < 1e-9);
    }
  }
}

TEST_CASE("polar decomposition of a real positive Gaussian") {
  const Grid1D ax = make_grid(-3.0, 3.0, 65, Boundary::box);
  const auto psi = ComplexField2D::from_function(Grid2D{ax, ax}, [](double x1, double x2) {
    return cplx(std::exp(-0.5 * (x1 * x1 + x2 * x2)), 0.0);
  });
  const PolarField p = polar_decompose(psi);
  for (double s : p.S.values()) CHECK(s == 0.0);
  for (auto m : p.node_mask.values()) CHECK(m == 0);
}

TEST_CASE("polar decomposition of a ring plane wave") {
  const Grid1D a1 = make_grid(-1.0, 1.0, 17, Boundary::box);
  const Grid1D a2 = ring(64);
  const double k = 5.0;
  const auto psi = ComplexField2D::from_function(Grid2D{a1, a2}, [k](double, double x2) { return std::polar(1.0, k * x2); });
  const PolarField p = polar_decompose(psi);
  for (int i = 0; i < a1.size(); ++i) {
    // Oracle: pointwise atan2, compared modulo 2 pi hbar since a winding phase
    // cannot be single valued on the ring.
    const double offset = p.S(i, 0) - hbar * std::atan2(psi(i, 0).imag(), psi(i, 0).real());
    int cuts = 0;
    for (int j = 0; j < a2.size(); ++j) {
      const double a = std::atan2(psi(i, j).imag(), psi(i, j).real());
      const double d = std::remainder(p.S(i, j) - offset - hbar * a, 2.0 * kPi * hbar);
      CHECK(p.R(i, j) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(std::abs(d) < 1e-12);
      CHECK(std::abs(std::remainder(p.S(i, j) - hbar * k * a2.x(j) - p.S(i, 0), 2.0 * kPi * hbar)) < 1e-10);
      const double step = p.S(i, (j + 1) % a2.size()) - p.S(i, j);
      if (std::abs(step - hbar * k * a2.spacing()) > 1e-10) ++cuts;
    }
    CHECK(cuts <= 1);
  }
}

TEST_CASE("vortex circulation and recomposition") {
  const ComplexField2D psi = vortex(64, 4.0);
  const PolarField p = polar_decompose(psi);
  const double mx = max_abs(psi);

  const ComplexField2D back = p.recompose();
  for (int i = 0; i < psi.n1(); ++i) {
    for (int j = 0; j < psi.n2(); ++j) {
      if (p.node_mask(i, j)) continue;
      CHECK(std::abs(back(i, j) - psi(i, j)) / mx < 1e-12);
    }
  }

  // Closed square loops of half-width w centred between the middle grid points.
  auto loop = [](int lo, int hi) {
    std::vector<std::pair<int, int>> l;
    for (int j = lo; j < hi; ++j) l.emplace_back(lo, j);
    for (int i = lo; i < hi; ++i) l.emplace_back(i, hi);
    for (int j = hi; j > lo; --j) l.emplace_back(hi, j);
    for (int i = hi; i > lo; --i) l.emplace_back(i, lo);
    return l;
  };
  for (int w : {1, 5, 12}) {
    const auto l = loop(32 - w, 31 + w);
    CHECK(std::abs(phase_circulation(p, l)) == doctest::Approx(2.0 * kPi * hbar).epsilon(1e-12));
  }
  // A loop away from the node encloses no circulation.
  CHECK(std::abs(phase_circulation(p, loop(40, 50))) < 1e-12);

  // Adjacent unmasked points differ by less than pi hbar, except across the
  // branch cut the spanning tree necessarily leaves around the node.
  int large = 0;
  int pairs = 0;
  for (int i = 0; i < psi.n1(); ++i) {
    for (int j = 0; j + 1 < psi.n2(); ++j) {
      if (p.node_mask(i, j) || p.node_mask(i, j + 1)) continue;
      ++pairs;
      if (std::abs(p.S(i, j + 1) - p.S(i, j)) >= kPi * hbar) ++large;
    }
  }
  CHECK(large < pairs / 50);
}

TEST_CASE("circulation is quantized for random grid loops") {
  const ComplexField2D psi = vortex(48, 4.0);
  const PolarField p = polar_decompose(psi);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(2, 45);
  for (int trial = 0; trial < 50; ++trial) {
    int a = pick(rng), b = pick(rng), c = pick(rng), d = pick(rng);
    if (a == b || c == d) continue;
    if (a > b) std::swap(a, b);
    if (c > d) std::swap(c, d);
    std::vector<std::pair<int, int>> l;
    for (int j = c; j < d; ++j) l.emplace_back(a, j);
    for (int i = a; i < b; ++i) l.emplace_back(i, d);
    for (int j = d; j > c; --j) l.emplace_back(b, j);
    for (int i = b; i > a; --i) l.emplace_back(i, c);
    const double q = phase_circulation(p, l) / (2.0 * kPi * hbar);
    CHECK(std::abs(q - std::round(q)) < 1e-10);
  }
}

TEST_CASE("interpolation reproduces samples and bilinear data") {
  const Grid1D a1 = make_grid(-2.0, 2.0, 33, Boundary::box);
  const Grid1D a2 = ring(32);
  const auto f = RealField2D::from_function(Grid2D{a1, a2}, [](double x1, double x2) {
    return std::sin(3.0 * x1) * std::exp(std::cos(x2));
  });
  for (int i = 0; i < a1.size(); i += 3) {
    for (int j = 0; j < a2.size(); j += 5) CHECK(interpolate(f, Point2{a1.x(i), a2.x(j)}) == f(i, j));
  }

  const Grid1D b2 = make_grid(-3.0, 1.0, 17, Boundary::box);
  auto bilinear = [](double x1, double x2) { return 0.5 - 1.5 * x1 + 2.0 * x2 + 0.75 * x1 * x2; };
  const auto g = RealField2D::from_function(Grid2D{a1, b2}, bilinear);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u1(-2.0, 2.0), u2(-3.0, 1.0);
  for (int n = 0; n < 200; ++n) {
    const Point2 p{u1(rng), u2(rng)};
    CHECK(interpolate(g, p) == doctest::Approx(bilinear(p.x1, p.x2)).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("interpolation of a smooth field converges at third order") {
  auto err = [](int n) {
    const Grid1D a = ring(n);
    const auto f = RealField2D::from_function(Grid2D{a, a}, [](double x1, double x2) { return std::sin(x1) * std::cos(x2); });
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    double e = 0.0;
    for (int k = 0; k < 400; ++k) {
      const Point2 p{u(rng), u(rng)};
      e = std::max(e, std::abs(interpolate(f, p) - std::sin(p.x1) * std::cos(p.x2)));
    }
    return e;
  };
  const double e1 = err(32), e2 = err(64), e3 = err(128);
  CHECK(e1 / e2 > 6.0);
  CHECK(e2 / e3 > 6.0);
}

TEST_CASE("interpolation outside a box axis is an out-of-domain error") {
  const Grid1D a = make_grid(-1.0, 1.0, 9, Boundary::box);
  const RealField2D f(Grid2D{a, a}, 1.0);
  try {
    (void)interpolate(f, Point2{1.5, 0.0});
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::out_of_domain);
  }
}

TEST_CASE("field construction validates the sample count") {
  const Grid1D a = make_grid(-1.0, 1.0, 9, Boundary::box);
  CHECK_THROWS_AS(RealField2D(Grid2D{a, a}, std::vector<double>(10)), Error);
}
