#include "condbohm/potential.hpp"

#include <cmath>

#include "condbohm/interpolate.hpp"
#include "condbohm/stencil.hpp"

namespace condbohm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

PotentialSpec::PotentialSpec(Kind kind, Masses masses) : kind_(std::move(kind)), masses_(masses) {
  if (!(masses_.m1 > 0.0) || !(masses_.m2 > 0.0)) {
    throw Error(ErrorKind::validation, "masses must be positive");
  }
  if (const auto* t = std::get_if<RingPlusLocal>(&kind_); t && t->local) {
    for (double v : t->local->values) {
      if (!std::isfinite(v)) throw Error(ErrorKind::validation, "tabulated potential is not finite");
    }
    if (static_cast<int>(t->local->values.size()) != t->local->grid.size()) {
      throw Error(ErrorKind::validation, "tabulated potential size does not match its grid");
    }
  }
  if (const auto* c = std::get_if<CustomPotential>(&kind_)) {
    if (!c->values || !c->d1 || !c->d2) throw Error(ErrorKind::validation, "custom potential is incomplete");
    if (!all_finite(*c->values)) throw Error(ErrorKind::validation, "tabulated potential is not finite");
  }
}

double PotentialSpec::value(double x1, double x2) const {
  return std::visit(
      overloaded{
          [&](const Harmonic2D& h) {
            return 0.5 * masses_.m1 * h.omega1 * h.omega1 * x1 * x1 +
                   0.5 * masses_.m2 * h.omega2 * h.omega2 * x2 * x2 + h.coupling * x1 * x2;
          },
          [](const RingFree&) { return 0.0; },
          [&](const RingPlusLocal& r) {
            const double local = r.local ? interpolate_1d<double>(r.local->values, r.local->grid, x1)
                                         : 0.5 * masses_.m1 * r.omega1 * r.omega1 * x1 * x1;
            return local + r.epsilon * x1 * std::cos(x2);
          },
          [&](const CustomPotential& c) { return interpolate(*c.values, Point2{x1, x2}); },
      },
      kind_);
}

std::array<double, 2> PotentialSpec::gradient(double x1, double x2) const {
  return std::visit(
      overloaded{
          [&](const Harmonic2D& h) {
            return std::array<double, 2>{masses_.m1 * h.omega1 * h.omega1 * x1 + h.coupling * x2,
                                         masses_.m2 * h.omega2 * h.omega2 * x2 + h.coupling * x1};
          },
          [](const RingFree&) { return std::array<double, 2>{0.0, 0.0}; },
          [&](const RingPlusLocal& r) {
            const double local = r.local ? interpolate_derivative_1d<double>(r.local->values, r.local->grid, x1)
                                         : masses_.m1 * r.omega1 * r.omega1 * x1;
            return std::array<double, 2>{local + r.epsilon * std::cos(x2), -r.epsilon * x1 * std::sin(x2)};
          },
          [&](const CustomPotential& c) {
            const Point2 p{x1, x2};
            return std::array<double, 2>{interpolate(*c.d1, p), interpolate(*c.d2, p)};
          },
      },
      kind_);
}

RealField2D PotentialSpec::sample(const Grid2D& grid) const {
  if (const auto* c = std::get_if<CustomPotential>(&kind_)) {
    if (c->values->grid() == grid) return *c->values;
  }
  return RealField2D::from_function(grid, [this](double x1, double x2) { return value(x1, x2); });
}

std::string PotentialSpec::name() const {
  return std::visit(overloaded{
                        [](const Harmonic2D&) { return std::string("harmonic2d"); },
                        [](const RingFree&) { return std::string("ring_free"); },
                        [](const RingPlusLocal&) { return std::string("ring_plus_local"); },
                        [](const CustomPotential&) { return std::string("custom"); },
                    },
                    kind_);
}

PotentialSpec custom_potential(const RealField2D& values, Masses masses) {
  CustomPotential c{std::make_shared<const RealField2D>(values),
                    std::make_shared<const RealField2D>(gradient(values, Axis::x1)),
                    std::make_shared<const RealField2D>(gradient(values, Axis::x2))};
  return PotentialSpec(std::move(c), masses);
}

double classical_energy(const PotentialSpec& pot, double x1, double x2, double p1, double p2) {
  const auto& m = pot.masses();
  return p1 * p1 / (2.0 * m.m1) + p2 * p2 / (2.0 * m.m2) + pot.value(x1, x2);
}

}  // namespace condbohm
