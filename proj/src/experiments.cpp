#include "condbohm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "condbohm/io.hpp"
#include "condbohm/sampling.hpp"

namespace condbohm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Independent random streams derived from the run seed.
constexpr std::uint64_t kBootstrapStream = 0x100000000ULL;
constexpr std::uint64_t kStartStream = 0x200000000ULL;

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. Each
/// index writes only its own slot, so results do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double parse_real(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::config, "invalid number '" + std::string(s) + "' in " + std::string(what));
  }
  return v;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double denom = v.size() > 1 ? static_cast<double>(v.size() - 1) : 1.0;
  return {mean, std::sqrt(var / denom)};
}

double finite_max(const std::vector<double>& v) {
  double m = kNaN;
  for (double x : v) {
    if (std::isfinite(x) && !(x <= m)) m = x;
  }
  return m;
}

double finite_min(const std::vector<double>& v) {
  double m = kNaN;
  for (double x : v) {
    if (std::isfinite(x) && !(x >= m)) m = x;
  }
  return m;
}

/// Index range [lo, hi] of grid points whose |psi|^2 exceeds the floor,
/// projected on one axis; `wraps` when the support covers a periodic axis.
std::pair<double, double> support_extent(const ComplexField2D& psi, double floor, Axis axis, bool& wraps) {
  const Grid2D& g = psi.grid();
  const Grid1D& ax = axis == Axis::x1 ? g.axis1 : g.axis2;
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(ax.size()), 0);
  for (int i = 0; i < psi.n1(); ++i) {
    for (int j = 0; j < psi.n2(); ++j) {
      if (std::norm(psi(i, j)) > floor) hit[static_cast<std::size_t>(axis == Axis::x1 ? i : j)] = 1;
    }
  }
  int lo = ax.size();
  int hi = -1;
  for (int i = 0; i < ax.size(); ++i) {
    if (!hit[static_cast<std::size_t>(i)]) continue;
    lo = std::min(lo, i);
    hi = std::max(hi, i);
  }
  if (hi < 0) throw Error(ErrorKind::validation, "empty support");
  wraps = false;
  if (ax.periodic()) {
    // Any gap in a periodic support would need a wrapped box; use the full ring.
    wraps = true;
    return {ax.x_min(), ax.x_max()};
  }
  const double h = ax.spacing();
  return {std::max(ax.x_min(), ax.x(lo) - 0.5 * h), std::min(ax.x_max(), ax.x(hi) + 0.5 * h)};
}

Trajectory classical_partner(const PotentialSpec& pot, const Trajectory& traj, double dt) {
  const Masses& m = pot.masses();
  const Point2 x0 = traj.positions.front();
  const Point2 u0 = traj.velocities.front();
  return classical_trajectory(pot, x0, {m.m1 * u0.x1, m.m2 * u0.x2}, traj.t_begin(), traj.t_end(), dt);
}

}  // namespace

std::string ModelSpec::label() const {
  switch (kind) {
    case VelocityKind::bohmian: return "bohmian";
    case VelocityKind::scaling: return "scaling:" + format_double(lambda);
    case VelocityKind::stream: return lambda == 1.0 ? std::string("stream") : "stream:" + format_double(lambda);
  }
  return "unknown";
}

ModelSpec parse_model_spec(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const bool has_arg = colon != std::string_view::npos;
  const std::string_view arg = has_arg ? text.substr(colon + 1) : std::string_view{};
  if (name == "bohmian" && !has_arg) return {VelocityKind::bohmian, 0.0};
  if (name == "scaling") {
    if (!has_arg) throw Error(ErrorKind::config, "velocity model 'scaling' needs a lambda, e.g. scaling:-1");
    const double lam = parse_real(arg, "velocity model");
    if (lam == 0.0) return {VelocityKind::bohmian, 0.0};
    return {VelocityKind::scaling, lam};
  }
  if (name == "stream") return {VelocityKind::stream, has_arg ? parse_real(arg, "velocity model") : 1.0};
  throw Error(ErrorKind::config, "unknown velocity model '" + std::string(text) + "'");
}

VelocityModel make_velocity_model(const ModelSpec& spec, const ComplexField2D& psi, Masses masses,
                                  double stream_width) {
  switch (spec.kind) {
    case VelocityKind::bohmian: return VelocityModel::bohmian();
    case VelocityKind::scaling: return VelocityModel::scaling(spec.lambda);
    case VelocityKind::stream:
      return VelocityModel::stream(
          std::make_shared<const RealField2D>(default_stream_function(psi, masses, stream_width)), spec.lambda);
  }
  throw Error(ErrorKind::config, "unknown velocity model kind");
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw Error(ErrorKind::config, "invalid '" + key + "': " + why);
  };
  if (!(c.t_final > 0.0) || !std::isfinite(c.t_final)) fail("t_final", "must be positive");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) fail("dt", "must be positive");
  if (!(c.dt_slice >= c.dt) || !std::isfinite(c.dt_slice)) fail("dt_slice", "must be at least dt");
  if (c.t_final < 2.0 * c.dt_slice) fail("t_final", "needs at least three slices");
  if (c.n_ensemble < 1) fail("n_ensemble", "must be at least 1");
  if (c.reseeds < 2) fail("reseeds", "must be at least 2");
  if (c.checkpoints < 1) fail("checkpoints", "must be at least 1");
  if (c.bins < 2) fail("bins", "must be at least 2");
  if (c.n_starts < 1 && c.starts.empty()) fail("n_starts", "must be at least 1");
  if (!(c.stream_width > 0.0)) fail("stream_width", "must be positive");
  if (c.velocity_models.empty()) fail("velocity_models", "must name at least one model");
  if (c.params.n1 < 8 || c.params.n2 < 8) fail("grid", "needs at least 8 points per axis");
  if (c.params.n2 % 2 != 0 &&
      (c.scenario == ScenarioName::ring_planewave_env || c.scenario == ScenarioName::coupled_environment)) {
    fail("grid", "periodic axis needs an even point count");
  }
  if (!(c.params.m1 > 0.0) || !(c.params.m2 > 0.0)) fail("m1/m2", "masses must be positive");
  if (!(c.params.extent > 0.0)) fail("extent", "must be positive");
  for (double lam : c.lambda_sweep) {
    if (!std::isfinite(lam)) fail("lambda_sweep", "entries must be finite");
  }
}

Point2 primary_start(const ExperimentConfig& config, const Scenario& scenario) {
  return config.starts.empty() ? scenario.default_start : config.starts.front();
}

long BinnedDensity::bin_of(Point2 x) const noexcept {
  double a = x.x1;
  double b = x.x2;
  if (wrap1) a = grid.axis1.wrap(a);
  if (wrap2) b = grid.axis2.wrap(b);
  if (!(a >= lo1 && a <= hi1 && b >= lo2 && b <= hi2)) return -1;
  const int i = std::min(bins1 - 1, static_cast<int>((a - lo1) / (hi1 - lo1) * bins1));
  const int j = std::min(bins2 - 1, static_cast<int>((b - lo2) / (hi2 - lo2) * bins2));
  return static_cast<long>(i) * bins2 + j;
}

BinnedDensity binned_density(const ComplexField2D& psi, int bins, double floor_relative) {
  if (bins < 2) throw Error(ErrorKind::validation, "need at least 2 bins per axis");
  const double peak = max_abs(psi);
  const double floor = floor_relative * peak * peak;
  BinnedDensity out(psi.grid());
  std::tie(out.lo1, out.hi1) = support_extent(psi, floor, Axis::x1, out.wrap1);
  std::tie(out.lo2, out.hi2) = support_extent(psi, floor, Axis::x2, out.wrap2);
  out.bins1 = bins;
  out.bins2 = bins;
  out.p.assign(static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins), 0.0);
  const Grid2D& g = psi.grid();
  double total = 0.0;
  for (int i = 0; i < psi.n1(); ++i) {
    for (int j = 0; j < psi.n2(); ++j) {
      const double w = g.axis1.weight(i) * g.axis2.weight(j) * std::norm(psi(i, j));
      const long b = out.bin_of({g.axis1.x(i), g.axis2.x(j)});
      total += w;
      if (b >= 0) out.p[static_cast<std::size_t>(b)] += w;
    }
  }
  for (double& v : out.p) v /= total;
  return out;
}

double tv_distance(const BinnedDensity& target, std::span<const Point2> points) {
  if (points.empty()) throw Error(ErrorKind::validation, "tv_distance needs at least one point");
  std::vector<double> counts(target.p.size(), 0.0);
  double outside = 0.0;
  for (const Point2& x : points) {
    const long b = target.bin_of(x);
    if (b < 0) {
      outside += 1.0;
    } else {
      counts[static_cast<std::size_t>(b)] += 1.0;
    }
  }
  const double n = static_cast<double>(points.size());
  double sum = outside / n;
  for (std::size_t k = 0; k < counts.size(); ++k) sum += std::abs(counts[k] / n - target.p[k]);
  return 0.5 * sum;
}

bool EquivarianceReport::all_pass() const {
  return std::all_of(models.begin(), models.end(), [](const EquivarianceSeries& s) { return s.pass; });
}

EquivarianceReport run_equivariance(const ExperimentConfig& config, const Scenario& scenario) {
  validate(config);
  const ComplexField2D& psi = scenario.state.psi;
  const Masses masses = scenario.potential.masses();
  EquivarianceReport report;
  report.scenario = to_string(scenario.name);
  report.n_ensemble = config.n_ensemble;
  report.bins = config.bins;
  const BinnedDensity target = binned_density(psi, config.bins);

  report.bootstrap.assign(static_cast<std::size_t>(config.reseeds), 0.0);
  for (int r = 0; r < config.reseeds; ++r) {
    const auto pts = sample_ensemble(psi, config.n_ensemble,
                                     member_seed(config.seed, kBootstrapStream + static_cast<std::uint64_t>(r)));
    report.bootstrap[static_cast<std::size_t>(r)] = tv_distance(target, pts);
  }
  std::tie(report.d0, report.sigma) = mean_std(report.bootstrap);
  report.bound = report.d0 + 3.0 * report.sigma;

  std::vector<double> times{0.0};
  for (int k = 1; k <= config.checkpoints; ++k) times.push_back(config.t_final * k / config.checkpoints);

  const std::vector<Point2> initial = sample_ensemble(psi, config.n_ensemble, config.seed);
  const double d_initial = tv_distance(target, initial);
  IntegratorOptions opts;
  opts.dt = config.dt;
  for (const ModelSpec& spec : config.velocity_models) {
    const VelocityField field(psi, masses, make_velocity_model(spec, psi, masses, config.stream_width));
    EquivarianceSeries series;
    series.model = spec.label();
    series.times = times;
    series.tv.push_back(d_initial);
    std::vector<Point2> pts = initial;
    std::vector<std::uint8_t> flags(pts.size(), 0);
    for (std::size_t k = 1; k < times.size(); ++k) {
      parallel_for(pts.size(), [&](std::size_t m) {
        if (flags[m] & (kFlagNodeCapture | kFlagLeftDomain)) return;
        flags[m] |= propagate_point(field, pts[m], times[k - 1], times[k], opts);
      });
      series.tv.push_back(tv_distance(target, pts));
    }
    series.truncated = static_cast<std::size_t>(std::count_if(
        flags.begin(), flags.end(), [](std::uint8_t f) { return (f & (kFlagNodeCapture | kFlagLeftDomain)) != 0; }));
    series.pass = series.tv.back() <= report.bound;
    report.models.push_back(std::move(series));
  }
  return report;
}

ClassicalityMetrics classicality_metrics(const ConditionalSeries& series, const Trajectory& trajectory,
                                         const PotentialSpec& potential, double dt) {
  ClassicalityMetrics out;
  out.model = trajectory.model;
  out.start = trajectory.positions.front();
  out.truncated = trajectory.truncated();
  out.times = series.times;
  const Grid1D& ax1 = series.axis1;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const ConditionalSlice& s = series.slices[k];
    double num = 0.0;
    double den = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < ax1.size(); ++i) {
      const auto ii = static_cast<std::size_t>(i);
      if (!s.trusted[ii]) continue;
      const double w = ax1.weight(i) * s.R_c[ii] * s.R_c[ii];
      num += w * (s.dlnR2_c[ii] * s.dlnR2_c[ii] + std::abs(s.curv2_c[ii]));
      den += w;
      lo = std::min(lo, s.v2c[ii]);
      hi = std::max(hi, s.v2c[ii]);
    }
    const double P2 = series.masses.m2 * std::abs(s.u2t);
    const bool moving = std::abs(s.u2t) >= series.eps_v;
    if (!moving) out.singular = true;
    if (den > 0.0) {
      const double inv2 = num / den;
      const double L2 = inv2 > 0.0 ? std::min(1.0 / std::sqrt(inv2), series.axis2_length)
                                   : series.axis2_length;
      out.ratio_t.push_back(L2 * P2 / hbar);
      out.v2_spread_t.push_back(moving ? (hi - lo) / std::abs(s.u2t) : kNaN);
    } else {
      out.ratio_t.push_back(kNaN);
      out.v2_spread_t.push_back(kNaN);
    }
    out.flatness_t.push_back(gamma_field(series, k).flatness);
  }
  out.ratio = finite_min(out.ratio_t);
  out.v2_spread = finite_max(out.v2_spread_t);
  out.gamma_flatness = finite_max(out.flatness_t);

  const Trajectory cl = classical_partner(potential, trajectory, dt);
  double gap = 0.0;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const double t = trajectory.times[k];
    gap = std::max(gap, std::abs(trajectory.positions[k].x2 - cl.position_at(t).x2));
  }
  out.trajectory_gap = gap;
  out.classical = !out.singular && std::isfinite(out.ratio) && out.ratio >= kClassicalRatio;
  return out;
}

ClassicalityReport run_classicality(const ExperimentConfig& config, const Scenario& scenario) {
  validate(config);
  ClassicalityReport report;
  report.scenario = to_string(scenario.name);
  const ComplexField2D& psi = scenario.state.psi;
  const Masses masses = scenario.potential.masses();
  const ConditionalContext ctx(psi, scenario.potential, scenario.state.energy);
  const Point2 x0 = primary_start(config, scenario);
  report.models.resize(config.velocity_models.size());
  parallel_for(config.velocity_models.size(), [&](std::size_t m) {
    const ModelSpec& spec = config.velocity_models[m];
    const VelocityField field(psi, masses, make_velocity_model(spec, psi, masses, config.stream_width));
    IntegratorOptions opts;
    opts.dt = config.dt;
    Trajectory traj = integrate_trajectory(field, x0, 0.0, config.t_final, opts);
    traj.model = spec.label();
    const double t_end = std::min(config.t_final, traj.t_end());
    if (t_end < 2.0 * config.dt_slice) {
      ClassicalityMetrics bad;
      bad.model = spec.label();
      bad.start = x0;
      bad.truncated = true;
      bad.ratio = bad.v2_spread = bad.gamma_flatness = bad.trajectory_gap = kNaN;
      report.models[m] = std::move(bad);
      return;
    }
    const ConditionalSeries series = conditional_series(ctx, traj, 0.0, t_end, config.dt_slice);
    report.models[m] = classicality_metrics(series, traj, scenario.potential, config.dt);
  });
  return report;
}

const ComparisonEntry& ComparisonReport::entry(std::string_view model) const {
  for (const ComparisonEntry& e : entries) {
    if (e.model == model) return e;
  }
  throw Error(ErrorKind::validation, "no comparison entry for model '" + std::string(model) + "'");
}

bool monotone_in_abs_lambda(const std::vector<ComparisonEntry>& entries, double ComparisonEntry::*value) {
  std::map<double, std::pair<double, int>> groups;
  for (const ComparisonEntry& e : entries) {
    if (!e.scaling) continue;
    if (!e.finite || !std::isfinite(e.*value)) return false;
    auto& g = groups[std::abs(e.lambda)];
    g.first += e.*value;
    g.second += 1;
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& [lam, g] : groups) {
    const double mean = g.first / g.second;
    if (mean < prev) return false;
    prev = mean;
  }
  return true;
}

ComparisonReport run_velocity_comparison(const ExperimentConfig& config, const Scenario& scenario) {
  validate(config);
  const ComplexField2D& psi = scenario.state.psi;
  const PotentialSpec& pot = scenario.potential;
  const Masses masses = pot.masses();
  ComparisonReport report;
  report.scenario = to_string(scenario.name);
  report.starts = config.starts.empty()
                      ? sample_ensemble(psi, config.n_starts, member_seed(config.seed, kStartStream))
                      : config.starts;

  // Baseline first, then the sweep in configured order, then stream models.
  std::vector<ModelSpec> models{ModelSpec{}};
  for (double lam : config.lambda_sweep) {
    const ModelSpec m = lam == 0.0 ? ModelSpec{} : ModelSpec{VelocityKind::scaling, lam};
    if (std::find(models.begin(), models.end(), m) == models.end()) models.push_back(m);
  }
  for (const ModelSpec& m : config.velocity_models) {
    if (m.kind == VelocityKind::stream && std::find(models.begin(), models.end(), m) == models.end()) {
      models.push_back(m);
    }
  }

  const ConditionalContext ctx(psi, pot, scenario.state.energy);
  const VelocityField bohmian(psi, masses);
  std::vector<VelocityField> fields;
  fields.reserve(models.size());
  for (const ModelSpec& m : models) fields.emplace_back(psi, masses, make_velocity_model(m, psi, masses, config.stream_width));

  IntegratorOptions opts;
  opts.dt = config.dt;
  const std::size_t n_starts = report.starts.size();
  const std::size_t n_models = models.size();

  std::vector<ComparisonRun> runs(n_starts * n_models);

  parallel_for(n_starts * n_models, [&](std::size_t job) {
    const std::size_t s = job / n_models;
    const std::size_t m = job % n_models;
    const Point2 x0 = report.starts[s];
    ComparisonRun& run = runs[job];
    run.model = models[m].label();
    run.lambda = models[m].lambda;
    run.scaling = models[m].kind != VelocityKind::stream;
    run.start = x0;
    Trajectory traj = integrate_trajectory(fields[m], x0, 0.0, config.t_final, opts);
    traj.model = run.model;
    if (traj.t_end() < config.t_final) {
      run.ok = false;
      run.r_max = run.deviation_final = run.deviation_sup = kNaN;
      return;
    }
    const ConditionalSeries series = conditional_series(ctx, traj, 0.0, config.t_final, config.dt_slice);
    const GaugeFit gauge = fit_gauge(series);
    const GammaProfile gamma = gamma_profile(series);
    const auto tilde = tilde_wavefunction(series, gamma.N, gauge.f);
    run.times = series.times;
    run.r_cond_schrod = cond_schrodinger_residual(series, tilde);
    run.r_max = finite_max(run.r_cond_schrod);
    run.classicality = classicality_metrics(series, traj, pot, config.dt);
    // Every model shares the t = 0 slice, so the reference depends only on the start.
    const Velocity v0 = bohmian(x0);
    const Trajectory xref = classical_trajectory(pot, x0, {masses.m1 * v0.u1, masses.m2 * v0.u2}, 0.0,
                                                 config.t_final, config.dt);
    const auto ref = propagate_reference(
        series.axis1, masses.m1, tilde.front(),
        [&](double x, double t) { return pot.value(x, xref.position_at(t).x2); }, series.times, config.dt);
    run.deviation.resize(ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) run.deviation[k] = l2_distance(tilde[k], ref[k], series.axis1);
    run.deviation_final = run.deviation.back();
    run.deviation_sup = finite_max(run.deviation);
  });
  report.runs = std::move(runs);

  for (std::size_t m = 0; m < n_models; ++m) {
    ComparisonEntry e;
    e.model = models[m].label();
    e.lambda = models[m].lambda;
    e.scaling = models[m].kind != VelocityKind::stream;
    double r = 0.0, df = 0.0, ds = 0.0;
    for (std::size_t s = 0; s < n_starts; ++s) {
      const ComparisonRun& run = report.runs[s * n_models + m];
      if (!run.ok) e.finite = false;
      r += run.r_max;
      df += run.deviation_final;
      ds += run.deviation_sup;
    }
    const double n = static_cast<double>(n_starts);
    e.r_max = r / n;
    e.deviation_final = df / n;
    e.deviation_sup = ds / n;
    report.entries.push_back(e);
  }
  const ComparisonEntry base = report.entries.front();
  for (ComparisonEntry& e : report.entries) {
    e.ratio_final = e.deviation_final / base.deviation_final;
    e.ratio_sup = e.deviation_sup / base.deviation_sup;
    e.ratio_residual = e.r_max / base.r_max;
    if (!std::isfinite(e.ratio_final) || !std::isfinite(e.ratio_sup) || !std::isfinite(e.ratio_residual)) {
      e.finite = false;
    }
  }
  report.monotone_final = monotone_in_abs_lambda(report.entries, &ComparisonEntry::ratio_final);
  report.monotone_sup = monotone_in_abs_lambda(report.entries, &ComparisonEntry::ratio_sup);
  report.monotone_residual = monotone_in_abs_lambda(report.entries, &ComparisonEntry::ratio_residual);
  return report;
}

double rms_finite(std::span<const double> v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (!std::isfinite(x)) continue;
    s += x * x;
    ++n;
  }
  return n ? std::sqrt(s / static_cast<double>(n)) : kNaN;
}

namespace {

struct ResidualRun {
  ConditionalSeries series;
  std::vector<double> r_cond;
  std::vector<double> r_pseudo;
  std::vector<double> r_no_gamma;
  GammaProfile gamma;
  Trajectory trajectory;
};

ResidualRun residual_run(const ExperimentConfig& config, const Scenario& scenario, double dt_slice) {
  const ComplexField2D& psi = scenario.state.psi;
  const Masses masses = scenario.potential.masses();
  const ModelSpec& spec = config.velocity_models.front();
  const VelocityField field(psi, masses, make_velocity_model(spec, psi, masses, config.stream_width));
  IntegratorOptions opts;
  opts.dt = config.dt;
  Trajectory traj = integrate_trajectory(field, primary_start(config, scenario), 0.0, config.t_final, opts);
  traj.model = spec.label();
  const ConditionalContext ctx(psi, scenario.potential, scenario.state.energy);
  ConditionalSeries series = conditional_series(ctx, traj, 0.0, config.t_final, dt_slice);
  const GaugeFit gauge = fit_gauge(series);
  GammaProfile gamma = gamma_profile(series);
  std::vector<double> r_cond = cond_schrodinger_residual(series, tilde_wavefunction(series, gamma.N, gauge.f));
  std::vector<double> r_pseudo = pseudo_schrodinger_residual(series).r;
  PseudoOptions ablation;
  ablation.include_gamma = false;
  std::vector<double> r_no_gamma = pseudo_schrodinger_residual(series, ablation).r;
  return {std::move(series), std::move(r_cond), std::move(r_pseudo), std::move(r_no_gamma), std::move(gamma),
          std::move(traj)};
}

}  // namespace

ResidualReport run_residuals(const ExperimentConfig& config, const Scenario& scenario, const Scenario& half) {
  validate(config);
  const ResidualRun full = residual_run(config, scenario, config.dt_slice);
  const ResidualRun coarse = residual_run(config, half, 2.0 * config.dt_slice);
  ResidualReport report;
  report.scenario = to_string(scenario.name);
  report.model = config.velocity_models.front().label();
  report.start = primary_start(config, scenario);
  report.times = full.series.times;
  report.r_cond_schrod = full.r_cond;
  report.r_pseudo = full.r_pseudo;
  report.gamma_t = full.gamma.gamma_t;
  report.N = full.gamma.N;
  report.singular = full.gamma.singular;
  for (const ConditionalSlice& s : full.series.slices) report.node_dominated.push_back(s.node_dominated ? 1 : 0);
  report.r_pseudo_rms = rms_finite(full.r_pseudo);
  report.r_pseudo_rms_half = rms_finite(coarse.r_pseudo);
  report.r_exact_order = std::log2(report.r_pseudo_rms_half / report.r_pseudo_rms);
  report.r_no_gamma = full.r_no_gamma;
  report.r_no_gamma_rms = rms_finite(full.r_no_gamma);
  report.r_no_gamma_rms_half = rms_finite(coarse.r_no_gamma);
  report.r_no_gamma_order = std::log2(report.r_no_gamma_rms_half / report.r_no_gamma_rms);
  report.classicality = classicality_metrics(full.series, full.trajectory, scenario.potential, config.dt);
  return report;
}

ResidualReport run_residuals(const ExperimentConfig& config, const Scenario& scenario) {
  ScenarioParams p = scenario.params;
  if (p.n1 % 2 != 0 || p.n2 % 2 != 0 || p.n1 < 32 || p.n2 < 32) {
    throw Error(ErrorKind::config, "residual order needs even grid sizes of at least 32");
  }
  p.n1 /= 2;
  p.n2 /= 2;
  return run_residuals(config, scenario, build_scenario(scenario.name, p));
}

}  // namespace condbohm
