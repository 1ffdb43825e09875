#include "condbohm/conditional.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "condbohm/interpolate.hpp"

namespace condbohm {

namespace {

constexpr double kTrustFloor = 1e-3;
constexpr int kEdgeCells = 2;
constexpr double kNodeDominated = 0.2;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Marks every point within `reach` cells of a masked point along axis 2.
MaskField2D dilate_axis2(const MaskField2D& m, int reach) {
  MaskField2D out(m.grid(), 0);
  const int n1 = m.n1();
  const int n2 = m.n2();
  const bool periodic = m.grid().axis2.periodic();
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      if (!m(i, j)) continue;
      for (int d = -reach; d <= reach; ++d) {
        int jj = j + d;
        if (periodic) {
          jj = ((jj % n2) + n2) % n2;
        } else if (jj < 0 || jj >= n2) {
          continue;
        }
        out(i, jj) = 1;
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> dilate_1d(const std::vector<std::uint8_t>& m, int reach, bool periodic) {
  const int n = static_cast<int>(m.size());
  std::vector<std::uint8_t> out(m.size(), 0);
  for (int i = 0; i < n; ++i) {
    if (!m[i]) continue;
    for (int d = -reach; d <= reach; ++d) {
      int k = i + d;
      if (periodic) {
        k = ((k % n) + n) % n;
      } else if (k < 0 || k >= n) {
        continue;
      }
      out[k] = 1;
    }
  }
  return out;
}

/// 1D phase unwrapping outward from the largest amplitude.
std::vector<double> unwrap_phase(const std::vector<cplx>& row, const std::vector<std::uint8_t>& mask) {
  const int n = static_cast<int>(row.size());
  std::vector<double> S(row.size(), 0.0);
  int root = 0;
  for (int i = 1; i < n; ++i) {
    if (std::abs(row[i]) > std::abs(row[root])) root = i;
  }
  S[root] = hbar * std::arg(row[root]);
  for (int i = root + 1; i < n; ++i) {
    S[i] = mask[i] ? S[i - 1] : S[i - 1] + wrapped_phase_difference(row[i - 1], row[i]);
  }
  for (int i = root - 1; i >= 0; --i) {
    S[i] = mask[i] ? S[i + 1] : S[i + 1] + wrapped_phase_difference(row[i + 1], row[i]);
  }
  for (int i = 0; i < n; ++i) {
    if (mask[i]) S[i] = 0.0;
  }
  return S;
}

cplx log_ratio(const cplx& a, const cplx& b) {
  if (a == cplx(0.0) || b == cplx(0.0)) return cplx(0.0);
  return std::log(a / b);
}

/// Trapezoid weights restricted to trusted points.
double trusted_norm(const std::vector<cplx>& v, const ConditionalSlice& s, const Grid1D& g) {
  double sum = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    if (s.trusted[i]) sum += g.weight(i) * std::norm(v[i]);
  }
  return std::sqrt(sum);
}

double trusted_norm(const std::vector<double>& v, const ConditionalSlice& s, const Grid1D& g) {
  double sum = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    if (s.trusted[i]) sum += g.weight(i) * v[i] * v[i];
  }
  return std::sqrt(sum);
}

/// |psi_c|^2-weighted mean and max - min spread over trusted points.
std::pair<double, double> weighted_mean_spread(const std::vector<double>& est, const ConditionalSlice& s,
                                               const Grid1D& g) {
  double num = 0.0;
  double den = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < g.size(); ++i) {
    if (!s.trusted[i]) continue;
    const double w = g.weight(i) * s.R_c[i] * s.R_c[i];
    num += w * est[i];
    den += w;
    lo = std::min(lo, est[i]);
    hi = std::max(hi, est[i]);
  }
  if (den == 0.0) return {kNaN, kNaN};
  return {num / den, hi - lo};
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& times, const std::vector<double>& y) {
  std::vector<double> out(times.size(), 0.0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    out[k] = out[k - 1] + 0.5 * (times[k] - times[k - 1]) * (y[k] + y[k - 1]);
  }
  return out;
}

/// Pointwise f-dot estimate with the chosen terms in U.
std::vector<double> gauge_estimate(const ConditionalSeries& series, std::size_t k, bool with_q2, bool with_kinetic) {
  const ConditionalSlice& s = series.slices[k];
  const std::vector<cplx> D = time_log_derivative(series, k);
  const double m1 = series.masses.m1;
  const double m2 = series.masses.m2;
  std::vector<double> est(s.psi_c.size(), 0.0);
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double dtS = hbar * D[i].imag();
    const double p1 = m1 * s.v1c[i];
    double e = -dtS - p1 * p1 / (2.0 * m1) - s.V_c[i] - s.Q1c[i];
    if (with_q2) e -= s.Q2c[i];
    if (with_kinetic) e -= 0.5 * m2 * (s.v2c[i] - s.u2t) * (s.v2c[i] - s.u2t);
    est[i] = e;
  }
  return est;
}

std::vector<double> fitted_fdot(const ConditionalSeries& series, bool with_q2, bool with_kinetic) {
  std::vector<double> fdot(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    fdot[k] = weighted_mean_spread(gauge_estimate(series, k, with_q2, with_kinetic), series.slices[k], series.axis1)
                  .first;
  }
  return fdot;
}

void thomas(std::vector<cplx>& a, std::vector<cplx>& b, std::vector<cplx>& c, std::vector<cplx>& d) {
  // a: sub, b: diag, c: super; solution left in d.
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) {
    const cplx w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  d[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

}  // namespace

ConditionalContext::ConditionalContext(ComplexField2D psi, PotentialSpec potential, double energy,
                                       double eps_node_relative)
    : psi_(std::move(psi)),
      potential_(std::move(potential)),
      energy_(energy),
      eps_node_(eps_node_relative * max_abs(psi_)),
      d2R_(psi_.grid()),
      dlnR2_(psi_.grid()),
      v2_(psi_.grid()),
      d2v2_(psi_.grid()),
      mask_(psi_.grid(), 0) {
  if (!all_finite(psi_)) throw Error(ErrorKind::validation, "conditional context: non-finite wave function");
  const RealField2D R = psi_.map([](const cplx& v) { return std::abs(v); });
  MaskField2D raw(psi_.grid(), 0);
  for (std::size_t k = 0; k < R.values().size(); ++k) raw.values()[k] = R.values()[k] < eps_node_ ? 1 : 0;
  d2R_ = laplacian(R, Axis::x2);
  const RealField2D dR = gradient(R, Axis::x2);
  const ComplexField2D D2 = log_gradient(psi_, Axis::x2);
  const double m2 = potential_.masses().m2;
  for (std::size_t k = 0; k < R.values().size(); ++k) {
    if (raw.values()[k]) continue;
    dlnR2_.values()[k] = dR.values()[k] / R.values()[k];
    v2_.values()[k] = hbar * (D2.values()[k] / psi_.values()[k]).imag() / m2;
  }
  d2v2_ = gradient(v2_, Axis::x2);
  // v2 reads psi two cells out (log stencil) and d2 v2 one more.
  mask_ = dilate_axis2(raw, 3);
}

ConditionalSlice conditional_slice(const ConditionalContext& ctx, const Trajectory& trajectory, double t) {
  const Grid2D& g = ctx.grid();
  const Grid1D& ax1 = g.axis1;
  const int n1 = ax1.size();
  ConditionalSlice s;
  s.t = t;
  s.X = trajectory.position_at(t);
  s.u2t = trajectory.velocity_at(t).x2;
  const AxisWeights w = axis_weights(g.axis2, s.X.x2);

  const std::size_t n = static_cast<std::size_t>(n1);
  s.psi_c.assign(n, cplx(0.0));
  std::vector<double> d2R(n, 0.0);
  s.dlnR2_c.assign(n, 0.0);
  s.v2c.assign(n, 0.0);
  s.d2v2_c.assign(n, 0.0);
  std::vector<std::uint8_t> raw(n, 0);
  // Tap offsets x2_j - X2 (minimum image on a ring) for carrier removal.
  const Grid1D& ax2 = g.axis2;
  const double x2w = ax2.wrap(s.X.x2);
  std::array<double, 4> offset{};
  for (int q = 0; q < w.taps; ++q) {
    double d = ax2.x(w.index[q]) - x2w;
    if (ax2.periodic()) d -= ax2.length() * std::round(d / ax2.length());
    offset[q] = d;
  }
  const double m2 = ctx.masses().m2;
  for (int i = 0; i < n1; ++i) {
    double kappa = 0.0;
    for (int q = 0; q < w.taps; ++q) kappa += w.weight[q] * ctx.v2()(i, w.index[q]);
    kappa *= m2 / hbar;
    cplx p(0.0);
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    std::uint8_t m = 0;
    for (int q = 0; q < w.taps; ++q) {
      const int j = w.index[q];
      const double wt = w.weight[q];
      // Interpolating psi exp(-i kappa (x2 - X2)) keeps a local plane wave exact.
      p += wt * ctx.psi()(i, j) * std::polar(1.0, -kappa * offset[q]);
      a += wt * ctx.d2R()(i, j);
      b += wt * ctx.dlnR2()(i, j);
      c += wt * ctx.v2()(i, j);
      d += wt * ctx.d2v2()(i, j);
      m |= ctx.mask()(i, j);
    }
    s.psi_c[i] = p;
    d2R[i] = a;
    s.dlnR2_c[i] = b;
    s.v2c[i] = c;
    s.d2v2_c[i] = d;
    raw[i] = m || std::abs(p) < ctx.eps_node() ? 1 : 0;
  }
  s.mask = dilate_1d(raw, 1, ax1.periodic());

  s.R_c.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.R_c[i] = std::abs(s.psi_c[i]);
  s.S_c = unwrap_phase(s.psi_c, s.mask);

  const Masses m = ctx.masses();
  s.V_c.resize(n);
  for (int i = 0; i < n1; ++i) s.V_c[i] = ctx.potential().value(ax1.x(i), s.X.x2);

  std::vector<std::uint8_t> qmask = raw;
  s.Q1c = quantum_potential_1d(s.R_c, ax1, m.m1, qmask, ctx.eps_node());
  s.Q2c.assign(n, 0.0);
  s.curv2_c.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (s.mask[i]) continue;
    s.curv2_c[i] = d2R[i] / s.R_c[i];
    s.Q2c[i] = -hbar * hbar / (2.0 * m.m2) * s.curv2_c[i];
  }

  std::vector<cplx> d1(n);
  log_derivative_1d(s.psi_c, ax1, d1);
  s.v1c.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.mask[i]) s.v1c[i] = hbar * (d1[i] / s.psi_c[i]).imag() / m.m1;
  }

  double rmax = 0.0;
  for (double r : s.R_c) rmax = std::max(rmax, r);
  const double floor = kTrustFloor * rmax;
  s.trusted.assign(n, 0);
  int first = -1;
  int last = -1;
  for (int i = 0; i < n1; ++i) {
    if (s.R_c[i] > floor) {
      if (first < 0) first = i;
      last = i;
    }
    const bool edge = !ax1.periodic() && (i < kEdgeCells || i > n1 - 1 - kEdgeCells);
    s.trusted[i] = !s.mask[i] && !edge && s.R_c[i] > floor ? 1 : 0;
  }
  if (first >= 0) {
    int masked = 0;
    for (int i = first; i <= last; ++i) masked += s.mask[i];
    s.node_dominated = masked > kNodeDominated * (last - first + 1);
  } else {
    s.node_dominated = true;
  }
  return s;
}

ConditionalSeries conditional_series(const ConditionalContext& ctx, const Trajectory& trajectory, double t0,
                                     double t1, double dt_slice) {
  const std::vector<double> times = time_grid(t0, t1, dt_slice);
  if (times.size() < 3) throw Error(ErrorKind::validation, "conditional series needs at least 3 slices");
  if (trajectory.size() < 2 || t0 < trajectory.t_begin() || t1 > trajectory.t_end()) {
    std::ostringstream os;
    os << "trajectory covers [" << (trajectory.size() ? trajectory.t_begin() : 0.0) << ", "
       << (trajectory.size() ? trajectory.t_end() : 0.0) << "], slices need [" << t0 << ", " << t1 << "]";
    if (trajectory.truncated()) os << " (trajectory was truncated)";
    throw Error(ErrorKind::validation, os.str());
  }
  ConditionalSeries series{{}, times, times[1] - times[0], ctx.grid().axis1, ctx.grid().axis2.length(), ctx.masses(),
                           ctx.energy(), 0.0};
  series.eps_v = 1e-6 * ctx.grid().axis2.length() / (t1 - t0);
  series.slices.reserve(times.size());
  for (double t : times) series.slices.push_back(conditional_slice(ctx, trajectory, t));
  return series;
}

QuantumPotential quantum_potential(const RealField2D& R, double mass, Axis axis, double eps) {
  const RealField2D lap = laplacian(R, axis);
  QuantumPotential out{RealField2D(R.grid()), MaskField2D(R.grid(), 0)};
  MaskField2D raw(R.grid(), 0);
  for (std::size_t k = 0; k < raw.values().size(); ++k) raw.values()[k] = R.values()[k] < eps ? 1 : 0;
  const Grid1D& ax = axis == Axis::x1 ? R.grid().axis1 : R.grid().axis2;
  const int n1 = R.n1();
  const int n2 = R.n2();
  const int n = ax.size();
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const int c = axis == Axis::x1 ? i : j;
      bool masked = raw(i, j);
      for (int d = -1; d <= 1 && !masked; d += 2) {
        int k = c + d;
        if (ax.periodic()) k = (k + n) % n;
        if (k < 0 || k >= n) continue;
        masked = axis == Axis::x1 ? raw(k, j) : raw(i, k);
      }
      out.mask(i, j) = masked ? 1 : 0;
      if (!masked) out.Q(i, j) = -hbar * hbar / (2.0 * mass) * lap(i, j) / R(i, j);
    }
  }
  return out;
}

std::vector<double> quantum_potential_1d(std::span<const double> R, const Grid1D& g, double mass,
                                         std::vector<std::uint8_t>& mask, double eps) {
  const std::size_t n = R.size();
  std::vector<double> lap(n);
  second_derivative_1d<double>(R, g, lap);
  std::vector<std::uint8_t> raw(n, 0);
  for (std::size_t i = 0; i < n; ++i) raw[i] = (mask.size() == n && mask[i]) || R[i] < eps ? 1 : 0;
  mask = dilate_1d(raw, 1, g.periodic());
  std::vector<double> Q(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) Q[i] = -hbar * hbar / (2.0 * mass) * lap[i] / R[i];
  }
  return Q;
}

std::vector<cplx> time_log_derivative(const std::vector<std::vector<cplx>>& rows, std::size_t k, double dt) {
  const std::size_t K = rows.size();
  if (K < 3) throw Error(ErrorKind::validation, "time derivative needs at least 3 slices");
  const std::size_t n = rows[k].size();
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (k == 0) {
      const cplx a = log_ratio(rows[1][i], rows[0][i]);
      const cplx b = log_ratio(rows[2][i], rows[0][i]);
      out[i] = (4.0 * a - b) / (2.0 * dt);
    } else if (k == K - 1) {
      const cplx a = log_ratio(rows[K - 1][i], rows[K - 2][i]);
      const cplx b = log_ratio(rows[K - 1][i], rows[K - 3][i]);
      out[i] = (4.0 * a - b) / (2.0 * dt);
    } else {
      out[i] = log_ratio(rows[k + 1][i], rows[k - 1][i]) / (2.0 * dt);
    }
  }
  return out;
}

std::vector<cplx> time_log_derivative(const ConditionalSeries& series, std::size_t k) {
  const std::size_t K = series.size();
  if (K < 3) throw Error(ErrorKind::validation, "time derivative needs at least 3 slices");
  // Only the three rows the stencil touches are gathered.
  std::size_t lo = k == 0 ? 0 : (k == K - 1 ? K - 3 : k - 1);
  std::vector<std::vector<cplx>> rows = {series.slices[lo].psi_c, series.slices[lo + 1].psi_c,
                                         series.slices[lo + 2].psi_c};
  const std::size_t local = k == 0 ? 0 : (k == K - 1 ? 2 : 1);
  return time_log_derivative(rows, local, series.dt_slice);
}

GammaResult gamma_field(const ConditionalSeries& series, std::size_t k, GammaSign sign) {
  const ConditionalSlice& s = series.slices[k];
  const Grid1D& g = series.axis1;
  GammaResult out;
  out.exact.assign(s.psi_c.size(), 0.0);
  out.singular = !(std::abs(s.u2t) >= series.eps_v);
  const auto [mean, spread] = weighted_mean_spread(s.d2v2_c, s, g);
  out.gamma_t = -mean;
  out.flatness = spread;
  if (out.singular) return out;
  const std::vector<cplx> D = time_log_derivative(series, k);
  const double sgn = sign == GammaSign::derived ? 1.0 : -1.0;
  for (int i = 0; i < g.size(); ++i) {
    if (!s.trusted[i]) continue;
    const double dlnR2dt = 2.0 * D[i].real();
    out.exact[i] = sgn * (1.0 - s.v2c[i] / s.u2t) * dlnR2dt - s.d2v2_c[i];
  }
  return out;
}

std::vector<double> normalization_N(const std::vector<double>& times, const std::vector<double>& gamma_t, double N0) {
  if (!(N0 > 0.0)) throw Error(ErrorKind::validation, "N(0) must be positive");
  if (times.size() != gamma_t.size()) throw Error(ErrorKind::validation, "Gamma series length mismatch");
  const std::vector<double> integral = cumulative_trapezoid(times, gamma_t);
  std::vector<double> N(times.size());
  for (std::size_t k = 0; k < N.size(); ++k) N[k] = N0 * std::exp(-integral[k]);
  return N;
}

double default_N0(const ConditionalSeries& series) {
  const auto& s = series.slices.front();
  return norm2_integral_1d<cplx>(s.psi_c, series.axis1);
}

GammaProfile gamma_profile(const ConditionalSeries& series, std::optional<double> N0) {
  GammaProfile p;
  p.times = series.times;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const GammaResult g = gamma_field(series, k);
    p.gamma_t.push_back(g.gamma_t);
    p.flatness.push_back(g.flatness);
    p.singular.push_back(g.singular ? 1 : 0);
  }
  p.N = normalization_N(p.times, p.gamma_t, N0.value_or(default_N0(series)));
  return p;
}

GaugeFit fit_gauge(const ConditionalSeries& series, GaugeForm form) {
  if (series.size() < 3) throw Error(ErrorKind::validation, "fit_gauge needs at least 3 slices");
  const bool exact = form == GaugeForm::exact;
  GaugeFit fit;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto [mean, spread] =
        weighted_mean_spread(gauge_estimate(series, k, exact, exact), series.slices[k], series.axis1);
    fit.fdot.push_back(mean);
    fit.spread.push_back(spread);
  }
  fit.f = cumulative_trapezoid(series.times, fit.fdot);
  return fit;
}

std::vector<std::vector<cplx>> tilde_wavefunction(const ConditionalSeries& series, const std::vector<double>& N,
                                                  const std::vector<double>& f) {
  if (N.size() != series.size() || f.size() != series.size()) {
    throw Error(ErrorKind::validation, "N and f must have one entry per slice");
  }
  std::vector<std::vector<cplx>> out(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (!(N[k] > 0.0)) throw Error(ErrorKind::validation, "N(t) must be positive");
    const cplx factor = std::polar(1.0 / std::sqrt(N[k]), f[k] / hbar);
    out[k] = series.slices[k].psi_c;
    for (auto& v : out[k]) v *= factor;
  }
  return out;
}

std::vector<double> cond_schrodinger_residual(const ConditionalSeries& series,
                                              const std::vector<std::vector<cplx>>& tilde) {
  if (tilde.size() != series.size()) throw Error(ErrorKind::validation, "tilde rows must match the slices");
  const Grid1D& g = series.axis1;
  const double kin = hbar * hbar / (2.0 * series.masses.m1);
  std::vector<double> r(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series.slices[k];
    const auto& psi = tilde[k];
    const std::vector<cplx> D = time_log_derivative(tilde, k, series.dt_slice);
    std::vector<cplx> lap(psi.size());
    second_derivative_1d<cplx>(psi, g, lap);
    std::vector<cplx> res(psi.size());
    std::vector<cplx> scale(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
      scale[i] = kin * lap[i];
      res[i] = -kin * lap[i] + s.V_c[i] * psi[i] - cplx(0.0, hbar) * psi[i] * D[i];
    }
    const double den = trusted_norm(scale, s, g);
    r[k] = den > 0.0 ? trusted_norm(res, s, g) / den : kNaN;
  }
  return r;
}

PseudoResidual pseudo_schrodinger_residual(const ConditionalSeries& series, const PseudoOptions& options) {
  const Grid1D& g = series.axis1;
  const double kin = hbar * hbar / (2.0 * series.masses.m1);
  const double m2 = series.masses.m2;
  const std::vector<double> fdot = fitted_fdot(series, true, options.kinetic_correction);

  std::vector<std::vector<cplx>> rows;
  if (options.absorb_gauge) {
    const std::vector<double> f = cumulative_trapezoid(series.times, fdot);
    rows = tilde_wavefunction(series, std::vector<double>(series.size(), 1.0), f);
  }

  PseudoResidual out;
  out.r.assign(series.size(), kNaN);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series.slices[k];
    GammaResult gam;
    if (options.include_gamma) {
      gam = gamma_field(series, k, options.gamma_sign);
      if (gam.singular) {
        out.singular = true;
        continue;
      }
    } else {
      gam.exact.assign(s.psi_c.size(), 0.0);
    }
    const std::vector<cplx>& psi = options.absorb_gauge ? rows[k] : s.psi_c;
    const std::vector<cplx> D =
        options.absorb_gauge ? time_log_derivative(rows, k, series.dt_slice) : time_log_derivative(series, k);
    const double h = options.absorb_gauge ? 0.0 : fdot[k];
    std::vector<cplx> lap(psi.size());
    second_derivative_1d<cplx>(psi, g, lap);
    std::vector<cplx> res(psi.size());
    std::vector<cplx> scale(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
      double U = s.V_c[i] + s.Q2c[i];
      if (options.kinetic_correction) U += 0.5 * m2 * (s.v2c[i] - s.u2t) * (s.v2c[i] - s.u2t);
      const cplx op = U + h + cplx(0.0, 0.5 * hbar * gam.exact[i]);
      scale[i] = kin * lap[i];
      res[i] = -kin * lap[i] + op * psi[i] - cplx(0.0, hbar) * psi[i] * D[i];
    }
    const double den = trusted_norm(scale, s, g);
    out.r[k] = den > 0.0 ? trusted_norm(res, s, g) / den : kNaN;
  }
  return out;
}

ContinuityReport continuity_residuals(const ConditionalContext& ctx, const ConditionalSeries& series) {
  ContinuityReport rep;
  const auto [j1, j2] = probability_current(ctx.psi(), ctx.masses());
  const RealField2D a = gradient(j1, Axis::x1);
  const RealField2D b = gradient(j2, Axis::x2);
  RealField2D div(ctx.grid());
  for (std::size_t k = 0; k < div.values().size(); ++k) div.values()[k] = a.values()[k] + b.values()[k];
  rep.stationary_abs = l2_norm(div);
  const double scale = l2_norm(a) + l2_norm(b);
  rep.stationary_rel = scale > 0.0 ? rep.stationary_abs / scale : 0.0;

  const Grid1D& g = series.axis1;
  const GammaProfile prof = gamma_profile(series);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series.slices[k];
    const std::vector<cplx> D = time_log_derivative(series, k);
    const std::size_t n = s.psi_c.size();
    std::vector<double> R2(n), flux(n), dflux(n), rho(n), rflux(n), drflux(n);
    for (std::size_t i = 0; i < n; ++i) {
      R2[i] = s.R_c[i] * s.R_c[i];
      flux[i] = R2[i] * s.v1c[i];
      rho[i] = R2[i] / prof.N[k];
      rflux[i] = rho[i] * s.v1c[i];
    }
    derivative_1d<double>(flux, g, dflux);
    derivative_1d<double>(rflux, g, drflux);
    std::vector<double> along(n, 0.0), norm(n, 0.0), source(n, 0.0);
    const bool singular = !(std::abs(s.u2t) >= series.eps_v);
    for (std::size_t i = 0; i < n; ++i) {
      const double dlnR2dt = 2.0 * D[i].real();
      if (!singular) along[i] = s.v2c[i] / s.u2t * R2[i] * dlnR2dt + dflux[i] + R2[i] * s.d2v2_c[i];
      // d_t rho = rho (d_t ln R^2 - N'/N) with N'/N = -Gamma_t
      norm[i] = rho[i] * (dlnR2dt + prof.gamma_t[k]) + drflux[i];
      source[i] = rho[i] * s.d2v2_c[i];
    }
    rep.along_slice.push_back(singular ? kNaN : trusted_norm(along, s, g));
    rep.normalized.push_back(trusted_norm(norm, s, g));
    rep.gamma_term.push_back(trusted_norm(source, s, g));
  }
  return rep;
}

std::vector<std::vector<cplx>> propagate_reference(const Grid1D& axis, double mass, std::vector<cplx> psi0,
                                                   const std::function<double(double, double)>& potential,
                                                   const std::vector<double>& times, double dt) {
  const int n = axis.size();
  if (static_cast<int>(psi0.size()) != n) throw Error(ErrorKind::validation, "reference state size mismatch");
  if (!(dt > 0.0)) throw Error(ErrorKind::validation, "reference time step must be positive");
  if (times.empty()) return {};
  const double h = axis.spacing();
  const double kin = hbar * hbar / (2.0 * mass * h * h);
  std::vector<std::vector<cplx>> out;
  out.reserve(times.size());
  out.push_back(psi0);
  std::vector<cplx> psi = std::move(psi0);
  std::vector<double> V(static_cast<std::size_t>(n));
  std::vector<cplx> sub(n), diag(n), sup(n), rhs(n);
  const auto nn = static_cast<std::size_t>(n);

  auto step = [&](double t, double tau) {
    const double tm = t + 0.5 * tau;
    for (int i = 0; i < n; ++i) V[i] = potential(axis.x(i), tm);
    const cplx alpha(0.0, 0.5 * tau / hbar);
    // H psi_i = -kin (psi_{i+1} + psi_{i-1}) + (2 kin + V_i) psi_i
    for (std::size_t i = 0; i < nn; ++i) {
      const cplx left = i > 0 ? psi[i - 1] : (axis.periodic() ? psi[nn - 1] : cplx(0.0));
      const cplx right = i + 1 < nn ? psi[i + 1] : (axis.periodic() ? psi[0] : cplx(0.0));
      const cplx Hpsi = -kin * (left + right) + (2.0 * kin + V[i]) * psi[i];
      rhs[i] = psi[i] - alpha * Hpsi;
      sub[i] = -alpha * kin;
      sup[i] = -alpha * kin;
      diag[i] = 1.0 + alpha * (2.0 * kin + V[i]);
    }
    if (!axis.periodic()) {
      thomas(sub, diag, sup, rhs);
      psi = rhs;
      return;
    }
    // Cyclic system by Sherman-Morrison: A = T + u v^T with corner entries c = -alpha kin.
    const cplx corner = -alpha * kin;
    const cplx gamma = -diag[0];
    std::vector<cplx> d2 = diag;
    d2[0] -= gamma;
    d2[nn - 1] -= corner * corner / gamma;
    std::vector<cplx> u(nn, cplx(0.0));
    u[0] = gamma;
    u[nn - 1] = corner;
    std::vector<cplx> s1 = sub, p1 = sup, dd = d2, y = rhs;
    thomas(s1, dd, p1, y);
    std::vector<cplx> s2 = sub, p2 = sup, dz = d2, z = u;
    thomas(s2, dz, p2, z);
    const cplx fact_v_last = corner / gamma;
    const cplx num = y[0] + fact_v_last * y[nn - 1];
    const cplx den = 1.0 + z[0] + fact_v_last * z[nn - 1];
    for (std::size_t i = 0; i < nn; ++i) psi[i] = y[i] - num / den * z[i];
  };

  for (std::size_t k = 1; k < times.size(); ++k) {
    const double span = times[k] - times[k - 1];
    const int sub_steps = std::max(1, static_cast<int>(std::ceil(span / dt - 1e-9)));
    const double tau = span / sub_steps;
    for (int s = 0; s < sub_steps; ++s) step(times[k - 1] + s * tau, tau);
    out.push_back(psi);
  }
  return out;
}

double l2_distance(const std::vector<cplx>& a, const std::vector<cplx>& b, const Grid1D& axis) {
  if (a.size() != b.size() || static_cast<int>(a.size()) != axis.size()) {
    throw Error(ErrorKind::validation, "l2_distance: size mismatch");
  }
  double s = 0.0;
  for (int i = 0; i < axis.size(); ++i) s += axis.weight(i) * std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace condbohm
