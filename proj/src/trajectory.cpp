#include "condbohm/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>

#include "condbohm/io.hpp"

namespace condbohm {

namespace {

struct Hermite {
  double h00, h10, h01, h11;
  double d00, d10, d01, d11;
};

Hermite hermite(double s, double h) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return {2 * s3 - 3 * s2 + 1,
          (s3 - 2 * s2 + s) * h,
          -2 * s3 + 3 * s2,
          (s3 - s2) * h,
          (6 * s2 - 6 * s) / h,
          3 * s2 - 4 * s + 1,
          (-6 * s2 + 6 * s) / h,
          3 * s2 - 2 * s};
}

std::size_t locate(const std::vector<double>& times, double t) {
  if (times.size() < 2 || t < times.front() || t > times.back()) {
    std::ostringstream os;
    os << "time " << t << " outside the recorded range";
    if (!times.empty()) os << " [" << times.front() << ", " << times.back() << "]";
    throw Error(ErrorKind::out_of_domain, os.str());
  }
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t k = static_cast<std::size_t>(it - times.begin());
  if (k == 0) k = 1;
  if (k >= times.size()) k = times.size() - 1;
  return k - 1;
}

Point2 axpy(Point2 p, double h, Velocity u) { return {p.x1 + h * u.u1, p.x2 + h * u.u2}; }

double speed(Velocity u) { return std::hypot(u.u1, u.u2); }

/// RK4 over an autonomous field with step-doubling refinement.
class Stepper {
 public:
  Stepper(const VelocityEvaluator& f, const IntegratorOptions& o) : f_(f), o_(o) {}

  /// Advances (t, p, u) by h; on failure leaves them at the last good state.
  SampleStatus advance(double& t, Point2& p, Velocity& u, double h, int depth, std::uint8_t& flags) const {
    Point2 full;
    bool near = false;
    double vmax = speed(u);
    SampleStatus st = rk4(p, u, h, full, near, vmax);
    VelocitySample end;
    if (st == SampleStatus::ok) {
      end = f_(full);
      st = end.status;
      near = near || end.near_node;
    }
    const bool cfl = o_.cell > 0.0 && vmax * h > o_.cfl_refine * o_.cell;
    if (st == SampleStatus::ok && !near && !cfl) {
      t += h;
      p = full;
      u = end.u;
      return st;
    }
    if (depth >= o_.max_halvings) {
      if (st != SampleStatus::ok) return st;
      flags |= kFlagRefined;
      t += h;
      p = full;
      u = end.u;
      return st;
    }
    flags |= kFlagRefined;
    if (st == SampleStatus::ok) {
      // Step doubling: two half steps against the full step.
      Point2 a;
      Point2 b;
      bool n2 = false;
      double v2 = 0.0;
      if (rk4(p, u, 0.5 * h, a, n2, v2) == SampleStatus::ok) {
        const VelocitySample mid = f_(a);
        if (mid.status == SampleStatus::ok && rk4(a, mid.u, 0.5 * h, b, n2, v2) == SampleStatus::ok) {
          const double err = std::hypot(b.x1 - full.x1, b.x2 - full.x2) / 15.0;
          if (err <= o_.tol_step) {
            const VelocitySample fin = f_(b);
            if (fin.status == SampleStatus::ok) {
              t += h;
              p = b;
              u = fin.u;
              return SampleStatus::ok;
            }
          }
        }
      }
    }
    const SampleStatus first = advance(t, p, u, 0.5 * h, depth + 1, flags);
    if (first != SampleStatus::ok) return first;
    return advance(t, p, u, 0.5 * h, depth + 1, flags);
  }

 private:
  SampleStatus rk4(Point2 p, Velocity k1, double h, Point2& out, bool& near, double& vmax) const {
    Velocity k[3];
    VelocitySample s = f_(axpy(p, 0.5 * h, k1));
    if (s.status != SampleStatus::ok) return s.status;
    k[0] = s.u;
    near = near || s.near_node;
    vmax = std::max(vmax, speed(s.u));
    s = f_(axpy(p, 0.5 * h, k[0]));
    if (s.status != SampleStatus::ok) return s.status;
    k[1] = s.u;
    near = near || s.near_node;
    vmax = std::max(vmax, speed(s.u));
    s = f_(axpy(p, h, k[1]));
    if (s.status != SampleStatus::ok) return s.status;
    k[2] = s.u;
    near = near || s.near_node;
    vmax = std::max(vmax, speed(s.u));
    out.x1 = p.x1 + h / 6.0 * (k1.u1 + 2.0 * k[0].u1 + 2.0 * k[1].u1 + k[2].u1);
    out.x2 = p.x2 + h / 6.0 * (k1.u2 + 2.0 * k[0].u2 + 2.0 * k[1].u2 + k[2].u2);
    return SampleStatus::ok;
  }

  const VelocityEvaluator& f_;
  const IntegratorOptions& o_;
};

std::uint8_t failure_flag(SampleStatus s) {
  return s == SampleStatus::outside ? kFlagLeftDomain : kFlagNodeCapture;
}

void check_span(double t0, double t1, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::validation, "time step must be positive");
  if (!(t1 >= t0) || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw Error(ErrorKind::validation, "time span must be finite with t1 >= t0");
  }
}

VelocitySample start_sample(const VelocityEvaluator& f, Point2 x0) {
  const VelocitySample s = f(x0);
  if (s.status == SampleStatus::outside) throw Error(ErrorKind::out_of_domain, "trajectory starts outside the domain");
  if (s.status == SampleStatus::node) throw Error(ErrorKind::node_proximity, "trajectory starts inside the node mask");
  return s;
}

template <typename Record>
std::uint8_t run(const VelocityEvaluator& f, Point2& x, double t0, double t1, const IntegratorOptions& o,
                 Record&& record) {
  check_span(t0, t1, o.dt);
  Velocity u = start_sample(f, x).u;
  record(t0, x, u, std::uint8_t{0}, true);
  const std::vector<double> ts = time_grid(t0, t1, o.dt);
  const Stepper stepper(f, o);
  const int stride = std::max(1, o.record_stride);
  for (std::size_t k = 1; k < ts.size(); ++k) {
    std::uint8_t flags = 0;
    double t = ts[k - 1];
    const SampleStatus st = stepper.advance(t, x, u, ts[k] - ts[k - 1], 0, flags);
    if (st != SampleStatus::ok) {
      flags |= failure_flag(st);
      record(t, x, u, flags, true);
      return flags;
    }
    const bool last = k + 1 == ts.size();
    record(ts[k], x, u, flags, last || k % static_cast<std::size_t>(stride) == 0);
  }
  return 0;
}

}  // namespace

std::vector<double> time_grid(double t0, double t1, double dt) {
  check_span(t0, t1, dt);
  const double span = t1 - t0;
  const auto steps = static_cast<std::size_t>(std::max(0.0, std::ceil(span / dt - 1e-9)));
  std::vector<double> ts(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) ts[k] = steps == 0 ? t0 : t0 + span * static_cast<double>(k) / steps;
  if (steps > 0) ts.back() = t1;
  return ts;
}

Point2 Trajectory::position_at(double t) const {
  const std::size_t k = locate(times, t);
  const double h = times[k + 1] - times[k];
  const Hermite c = hermite((t - times[k]) / h, h);
  const Point2& a = positions[k];
  const Point2& b = positions[k + 1];
  const Point2& va = velocities[k];
  const Point2& vb = velocities[k + 1];
  return {c.h00 * a.x1 + c.h10 * va.x1 + c.h01 * b.x1 + c.h11 * vb.x1,
          c.h00 * a.x2 + c.h10 * va.x2 + c.h01 * b.x2 + c.h11 * vb.x2};
}

Point2 Trajectory::velocity_at(double t) const {
  const std::size_t k = locate(times, t);
  const double h = times[k + 1] - times[k];
  const Hermite c = hermite((t - times[k]) / h, h);
  const Point2& a = positions[k];
  const Point2& b = positions[k + 1];
  const Point2& va = velocities[k];
  const Point2& vb = velocities[k + 1];
  return {c.d00 * a.x1 + c.d10 * va.x1 + c.d01 * b.x1 + c.d11 * vb.x1,
          c.d00 * a.x2 + c.d10 * va.x2 + c.d01 * b.x2 + c.d11 * vb.x2};
}

void Trajectory::write_csv(std::ostream& os) const {
  std::vector<std::string> header = {"t", "X1", "X2"};
  if (has_momenta()) {
    header.emplace_back("P1");
    header.emplace_back("P2");
  }
  header.emplace_back("flags");
  CsvWriter w(os, header);
  for (std::size_t k = 0; k < times.size(); ++k) {
    w.field(times[k]).field(positions[k].x1).field(positions[k].x2);
    if (has_momenta()) w.field(momenta[k].x1).field(momenta[k].x2);
    w.field(static_cast<long long>(flags[k]));
    w.end_row();
  }
}

VelocityEvaluator evaluator(const VelocityField& field) {
  return [&field](Point2 p) { return field.sample(p); };
}

Trajectory integrate_trajectory(const VelocityEvaluator& velocity, Point2 x0, double t0, double t1,
                                const IntegratorOptions& options) {
  Trajectory tr;
  tr.model = "custom";
  std::uint8_t pending = 0;
  run(velocity, x0, t0, t1, options, [&](double t, Point2 p, Velocity u, std::uint8_t flags, bool keep) {
    pending |= flags;
    if (!keep) return;
    tr.times.push_back(t);
    tr.positions.push_back(p);
    tr.velocities.push_back({u.u1, u.u2});
    tr.flags.push_back(pending);
    pending = 0;
  });
  // A truncation can land on the time of the previous record (zero progress).
  if (tr.times.size() >= 2 && tr.times.back() <= tr.times[tr.times.size() - 2]) {
    const std::uint8_t f = tr.flags.back();
    tr.times.pop_back();
    tr.positions.pop_back();
    tr.velocities.pop_back();
    tr.flags.pop_back();
    tr.flags.back() |= f;
  }
  return tr;
}

Trajectory integrate_trajectory(const VelocityField& field, Point2 x0, double t0, double t1,
                                IntegratorOptions options) {
  if (options.cell == 0.0) options.cell = std::min(field.grid().axis1.spacing(), field.grid().axis2.spacing());
  Trajectory tr = integrate_trajectory(evaluator(field), x0, t0, t1, options);
  tr.model = field.model().label();
  return tr;
}

std::uint8_t propagate_point(const VelocityField& field, Point2& x, double t0, double t1, IntegratorOptions options) {
  if (options.cell == 0.0) options.cell = std::min(field.grid().axis1.spacing(), field.grid().axis2.spacing());
  const VelocityEvaluator f = evaluator(field);
  std::uint8_t all = 0;
  const std::uint8_t fail = run(f, x, t0, t1, options, [&](double, Point2, Velocity, std::uint8_t flags, bool) {
    all |= flags;
  });
  return all | fail;
}

Trajectory classical_trajectory(const PotentialSpec& pot, Point2 x0, Point2 p0, double t0, double t1, double dt,
                                int record_stride) {
  check_span(t0, t1, dt);
  const Masses m = pot.masses();
  using State = std::array<double, 4>;
  auto rhs = [&](const State& s) {
    const auto g = pot.gradient(s[0], s[1]);
    return State{s[2] / m.m1, s[3] / m.m2, -g[0], -g[1]};
  };
  State s{x0.x1, x0.x2, p0.x1, p0.x2};
  for (double v : s) {
    if (!std::isfinite(v)) throw Error(ErrorKind::validation, "classical initial data must be finite");
  }
  Trajectory tr;
  tr.model = "classical";
  auto push = [&](double t) {
    tr.times.push_back(t);
    tr.positions.push_back({s[0], s[1]});
    tr.velocities.push_back({s[2] / m.m1, s[3] / m.m2});
    tr.momenta.push_back({s[2], s[3]});
    tr.flags.push_back(0);
  };
  push(t0);
  const std::vector<double> ts = time_grid(t0, t1, dt);
  const int stride = std::max(1, record_stride);
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double h = ts[k] - ts[k - 1];
    const State k1 = rhs(s);
    State a;
    for (int i = 0; i < 4; ++i) a[i] = s[i] + 0.5 * h * k1[i];
    const State k2 = rhs(a);
    for (int i = 0; i < 4; ++i) a[i] = s[i] + 0.5 * h * k2[i];
    const State k3 = rhs(a);
    for (int i = 0; i < 4; ++i) a[i] = s[i] + h * k3[i];
    const State k4 = rhs(a);
    for (int i = 0; i < 4; ++i) s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (k + 1 == ts.size() || k % static_cast<std::size_t>(stride) == 0) push(ts[k]);
  }
  return tr;
}

Trajectory conditional_classical_trajectory(const PotentialSpec& pot, const Trajectory& recorded, double x1_0,
                                            double p1_0, double t0, double t1, double dt, int record_stride) {
  check_span(t0, t1, dt);
  if (recorded.size() < 2 || t0 < recorded.t_begin() || t1 > recorded.t_end()) {
    throw Error(ErrorKind::validation, "conditional integration span exceeds the recorded environment trajectory");
  }
  const Masses m = pot.masses();
  auto force = [&](double x1, double t) { return -pot.gradient(x1, recorded.position_at(t).x2)[0]; };
  double x = x1_0;
  double p = p1_0;
  Trajectory tr;
  tr.model = "conditional_classical";
  auto push = [&](double t) {
    const Point2 env = recorded.position_at(t);
    const Point2 env_v = recorded.velocity_at(t);
    tr.times.push_back(t);
    tr.positions.push_back({x, env.x2});
    tr.velocities.push_back({p / m.m1, env_v.x2});
    tr.momenta.push_back({p, m.m2 * env_v.x2});
    tr.flags.push_back(0);
  };
  push(t0);
  const std::vector<double> ts = time_grid(t0, t1, dt);
  const int stride = std::max(1, record_stride);
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double t = ts[k - 1];
    const double h = ts[k] - t;
    const double kx1 = p / m.m1;
    const double kp1 = force(x, t);
    const double kx2 = (p + 0.5 * h * kp1) / m.m1;
    const double kp2 = force(x + 0.5 * h * kx1, t + 0.5 * h);
    const double kx3 = (p + 0.5 * h * kp2) / m.m1;
    const double kp3 = force(x + 0.5 * h * kx2, t + 0.5 * h);
    const double kx4 = (p + h * kp3) / m.m1;
    const double kp4 = force(x + h * kx3, ts[k]);
    x += h / 6.0 * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
    p += h / 6.0 * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4);
    if (k + 1 == ts.size() || k % static_cast<std::size_t>(stride) == 0) push(ts[k]);
  }
  return tr;
}

}  // namespace condbohm
