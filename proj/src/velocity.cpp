#include "condbohm/velocity.hpp"

#include <cmath>
#include <sstream>

#include "condbohm/interpolate.hpp"
#include "condbohm/stencil.hpp"

namespace condbohm {

VelocityModel VelocityModel::stream(std::shared_ptr<const RealField2D> g, double lambda) {
  if (!g) throw Error(ErrorKind::validation, "stream model needs a stream function");
  return VelocityModel(VelocityKind::stream, lambda, std::move(g));
}

std::string VelocityModel::label() const {
  std::ostringstream os;
  switch (kind_) {
    case VelocityKind::bohmian: return "bohmian";
    case VelocityKind::scaling: os << "scaling(" << lambda_ << ")"; return os.str();
    case VelocityKind::stream: os << "stream(" << lambda_ << ")"; return os.str();
  }
  return "unknown";
}

VelocityField::VelocityField(const ComplexField2D& psi, Masses masses, VelocityModel model, double eps_node_relative)
    : grid_(psi.grid()), masses_(masses), model_(std::move(model)), packed_(psi.values().size() * kStride, 0.0) {
  if (model_.kind() == VelocityKind::stream && !(model_.stream_function()->grid() == grid_)) {
    throw Error(ErrorKind::validation, "stream function grid does not match the wave function grid");
  }
  const ComplexField2D d1 = log_gradient(psi, Axis::x1);
  const ComplexField2D d2 = log_gradient(psi, Axis::x2);
  std::vector<double> j1;
  std::vector<double> j2;
  if (model_.kind() == VelocityKind::stream) {
    const RealField2D& g = *model_.stream_function();
    const RealField2D g1 = gradient(g, Axis::x1);
    const RealField2D g2 = gradient(g, Axis::x2);
    j1.assign(g2.values().begin(), g2.values().end());
    j2.resize(g1.values().size());
    for (std::size_t k = 0; k < j2.size(); ++k) j2[k] = -g1.values()[k];
  }
  for (std::size_t k = 0; k < psi.values().size(); ++k) {
    double* p = &packed_[k * kStride];
    p[0] = psi.values()[k].real();
    p[1] = psi.values()[k].imag();
    p[2] = d1.values()[k].real();
    p[3] = d1.values()[k].imag();
    p[4] = d2.values()[k].real();
    p[5] = d2.values()[k].imag();
    if (!j1.empty()) {
      p[6] = model_.lambda() * j1[k];
      p[7] = model_.lambda() * j2[k];
    }
  }
  const double mx = max_abs(psi);
  eps_node_ = eps_node_relative * mx;
  near_node_ = kNearNodeRelative * mx;
}

VelocitySample VelocityField::sample(Point2 p) const noexcept {
  VelocitySample out;
  AxisWeights w1;
  AxisWeights w2;
  if (!value_weights(grid_.axis1, p.x1, w1) || !value_weights(grid_.axis2, p.x2, w2)) {
    out.status = SampleStatus::outside;
    return out;
  }
  double acc[kStride] = {0, 0, 0, 0, 0, 0, 0, 0};
  if (model_.kind() == VelocityKind::stream) {
    accumulate<kStride>(w1, w2, acc);
  } else {
    accumulate<6>(w1, w2, acc);
  }
  return finish(acc);
}

template <int C>
void VelocityField::accumulate(const AxisWeights& w1, const AxisWeights& w2, double* acc) const noexcept {
  const std::size_t row_stride = static_cast<std::size_t>(grid_.axis2.size()) * kStride;
  auto tap_loop = [&](int taps1, int taps2) {
    for (int a = 0; a < taps1; ++a) {
      double row[C] = {};
      const double* base = &packed_[static_cast<std::size_t>(w1.index[a]) * row_stride];
      for (int b = 0; b < taps2; ++b) {
        const double* q = base + static_cast<std::size_t>(w2.index[b]) * kStride;
        const double wb = w2.weight[b];
        for (int c = 0; c < C; ++c) row[c] += wb * q[c];
      }
      const double wa = w1.weight[a];
      for (int c = 0; c < C; ++c) acc[c] += wa * row[c];
    }
  };
  // Constant trip counts in the common interior case let the loops unroll.
  if (w1.taps == 4 && w2.taps == 4) {
    tap_loop(4, 4);
  } else {
    tap_loop(w1.taps, w2.taps);
  }
}

VelocitySample VelocityField::finish(const double* acc) const noexcept {
  VelocitySample out;
  const double dens = acc[0] * acc[0] + acc[1] * acc[1];
  out.density = dens;
  if (!(dens >= eps_node_ * eps_node_) || dens == 0.0) {
    out.status = SampleStatus::node;
    return out;
  }
  out.near_node = dens < near_node_ * near_node_;
  // Im(conj(psi) d psi) / |psi|^2
  const double im1 = acc[0] * acc[3] - acc[1] * acc[2];
  const double im2 = acc[0] * acc[5] - acc[1] * acc[4];
  double u1 = hbar * im1 / (masses_.m1 * dens);
  double u2 = hbar * im2 / (masses_.m2 * dens);
  switch (model_.kind()) {
    case VelocityKind::bohmian: break;
    case VelocityKind::scaling:
      u1 *= 1.0 + model_.lambda();
      u2 *= 1.0 + model_.lambda();
      break;
    case VelocityKind::stream:
      u1 += acc[6] / dens;
      u2 += acc[7] / dens;
      break;
  }
  out.u = {u1, u2};
  return out;
}

Velocity VelocityField::operator()(Point2 p) const {
  const VelocitySample s = sample(p);
  if (s.status == SampleStatus::outside) {
    std::ostringstream os;
    os << "velocity requested outside the domain at (" << p.x1 << ", " << p.x2 << ")";
    throw Error(ErrorKind::out_of_domain, os.str());
  }
  if (s.status == SampleStatus::node) {
    std::ostringstream os;
    os << "velocity undefined at node (" << p.x1 << ", " << p.x2 << "): |psi| below " << eps_node_;
    throw Error(ErrorKind::node_proximity, os.str());
  }
  return s.u;
}

Velocity bohmian_velocity(const ComplexField2D& psi, Masses masses, Point2 point) {
  return VelocityField(psi, masses)(point);
}

Velocity modified_velocity(const ComplexField2D& psi, const VelocityModel& model, Masses masses, Point2 point) {
  return VelocityField(psi, masses, model)(point);
}

namespace {

std::pair<RealField2D, RealField2D> current_from(const ComplexField2D& psi, const ComplexField2D& d1,
                                                 const ComplexField2D& d2, Masses masses) {
  RealField2D j1(psi.grid());
  RealField2D j2(psi.grid());
  for (std::size_t k = 0; k < psi.values().size(); ++k) {
    const cplx c = std::conj(psi.values()[k]);
    j1.values()[k] = hbar * (c * d1.values()[k]).imag() / masses.m1;
    j2.values()[k] = hbar * (c * d2.values()[k]).imag() / masses.m2;
  }
  return {std::move(j1), std::move(j2)};
}

}  // namespace

std::pair<RealField2D, RealField2D> probability_current(const ComplexField2D& psi, Masses masses) {
  return current_from(psi, gradient(psi, Axis::x1), gradient(psi, Axis::x2), masses);
}

std::pair<RealField2D, RealField2D> bohmian_velocity_field(const ComplexField2D& psi, Masses masses,
                                                           double eps_node_relative) {
  auto [v1, v2] = current_from(psi, log_gradient(psi, Axis::x1), log_gradient(psi, Axis::x2), masses);
  const double eps = eps_node_relative * max_abs(psi);
  for (std::size_t k = 0; k < psi.values().size(); ++k) {
    const double d = std::norm(psi.values()[k]);
    if (std::sqrt(d) < eps || d == 0.0) {
      v1.values()[k] = 0.0;
      v2.values()[k] = 0.0;
    } else {
      v1.values()[k] /= d;
      v2.values()[k] /= d;
    }
  }
  return {std::move(v1), std::move(v2)};
}

double check_divergence_free(const VelocityModel& model, const ComplexField2D& psi, Masses masses) {
  RealField2D j1(psi.grid());
  RealField2D j2(psi.grid());
  switch (model.kind()) {
    case VelocityKind::bohmian:
      throw Error(ErrorKind::validation, "divergence check is defined for non-Bohmian models only");
    case VelocityKind::stream: {
      const RealField2D& g = *model.stream_function();
      j1 = gradient(g, Axis::x2);
      j2 = gradient(g, Axis::x1);
      for (auto& v : j2.values()) v = -v;
      break;
    }
    case VelocityKind::scaling: {
      auto cur = probability_current(psi, masses);
      j1 = std::move(cur.first);
      j2 = std::move(cur.second);
      break;
    }
  }
  const RealField2D div1 = gradient(j1, Axis::x1);
  const RealField2D div2 = gradient(j2, Axis::x2);
  RealField2D div(psi.grid());
  for (std::size_t k = 0; k < div.values().size(); ++k) {
    div.values()[k] = model.lambda() * (div1.values()[k] + div2.values()[k]);
  }
  return l2_norm(div);
}

RealField2D default_stream_function(const ComplexField2D& psi, Masses masses, double width, Point2 center) {
  if (!(width > 0.0)) throw Error(ErrorKind::validation, "stream width must be positive");
  const Grid2D& g = psi.grid();
  auto separation = [](const Grid1D& ax, double x, double c) {
    double d = x - c;
    if (ax.periodic()) d -= ax.length() * std::round(d / ax.length());
    return d;
  };
  RealField2D shape = RealField2D::from_function(g, [&](double x1, double x2) {
    const double d1 = separation(g.axis1, x1, center.x1);
    const double d2 = separation(g.axis2, x2, center.x2);
    return std::exp(-(d1 * d1 + d2 * d2) / (2.0 * width * width));
  });
  const RealField2D s1 = gradient(shape, Axis::x1);
  const RealField2D s2 = gradient(shape, Axis::x2);
  const auto [v1, v2] = bohmian_velocity_field(psi, masses);
  const double floor = 1e-3 * max_abs(psi);
  double max_v = 0.0;
  double max_j = 0.0;
  for (std::size_t k = 0; k < psi.values().size(); ++k) {
    const double a = std::abs(psi.values()[k]);
    if (a <= floor) continue;
    max_v = std::max(max_v, std::hypot(v1.values()[k], v2.values()[k]));
    max_j = std::max(max_j, std::hypot(s1.values()[k], s2.values()[k]) / (a * a));
  }
  // With no flow at all the current is scaled to unit speed.
  const double target = max_v > 0.0 ? max_v : 1.0;
  const double amp = max_j > 0.0 ? target / max_j : 0.0;
  for (auto& v : shape.values()) v *= amp;
  return shape;
}

}  // namespace condbohm
