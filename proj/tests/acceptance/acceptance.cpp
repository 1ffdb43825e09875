// Desk-scale acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "condbohm/conditional.hpp"
#include "condbohm/config.hpp"
#include "condbohm/experiments.hpp"
#include "condbohm/scenarios.hpp"
#include "condbohm/trajectory.hpp"
#include "condbohm/velocity.hpp"
#include "manifest.hpp"

using namespace condbohm;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

ExperimentConfig shipped(const std::string& name) { return parse_config(fs::path(CONDBOHM_CONFIG_DIR) / name); }

Scenario scenario_for(const ExperimentConfig& c) { return build_scenario(c.scenario, c.params); }

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Outcome eigenstate_fidelity() {
  Outcome o;
  for (ScenarioName n :
       {ScenarioName::vortex_oscillator, ScenarioName::ring_planewave_env, ScenarioName::frozen_ground}) {
    const Scenario sc = analytic_scenario(n);
    o.detail << " " << to_string(n) << " residual " << num(sc.residual) << ";";
    o.require(sc.residual < 1e-8, to_string(n) + " residual");
  }
  const Scenario coupled = build_scenario(ScenarioName::coupled_environment,
                                          default_params(ScenarioName::coupled_environment));
  o.detail << " coupled_environment residual " << num(coupled.residual) << ";";
  o.require(coupled.residual < 1e-6, "numerical residual");

  std::vector<double> errors;
  for (int n : {64, 128, 256}) {
    ScenarioParams p = default_params(ScenarioName::vortex_oscillator);
    p.n1 = n;
    p.n2 = n;
    const Scenario sc = analytic_scenario(ScenarioName::vortex_oscillator, p);
    errors.push_back(std::abs(sc.state.energy - 2.0 * hbar * p.omega) / (2.0 * hbar * p.omega));
  }
  o.detail << " vortex |E - 2 hbar w| / 2 hbar w = " << num(errors[0]) << ", " << num(errors[1]) << ", "
           << num(errors[2]) << " (64, 128, 256)";
  o.require(errors[2] < 1e-3, "vortex energy on the default grid");
  o.require(errors[0] / errors[1] > 3.5 && errors[1] / errors[2] > 3.5, "4x per refinement");
  return o;
}

Outcome equivariance() {
  Outcome o;
  const ExperimentConfig c = shipped("vortex_equivariance.ini");
  const EquivarianceReport r = run_equivariance(c, scenario_for(c));
  o.detail << " n = " << r.n_ensemble << ", bound d0 + 3 sigma = " << num(r.d0) << " + 3*" << num(r.sigma) << " = "
           << num(r.bound) << ";";
  for (const EquivarianceSeries& s : r.models) {
    o.detail << " " << s.model << " " << num(s.tv.back()) << ";";
    o.require(s.pass, s.model);
  }
  o.require(r.models.size() == 5, "five models");
  return o;
}

Outcome pseudo_identity() {
  Outcome o;
  const ExperimentConfig c = shipped("vortex_residuals.ini");
  const ResidualReport r = run_residuals(c, scenario_for(c));
  o.detail << " rms residual " << num(r.r_pseudo_rms_half) << " -> " << num(r.r_pseudo_rms) << ", order "
           << num(r.r_exact_order) << "; without Gamma " << num(r.r_no_gamma_rms_half) << " -> "
           << num(r.r_no_gamma_rms) << ", order " << num(r.r_no_gamma_order);
  o.require(r.r_exact_order >= 1.8, "order >= 1.8");
  o.require(r.r_no_gamma_order < 0.5 && r.r_no_gamma_rms > 10.0 * r.r_pseudo_rms, "Gamma ablation plateaus");
  return o;
}

Outcome conditional_schrodinger(const ComparisonReport& r) {
  Outcome o;
  double r_max = 0.0;
  double dev = 0.0;
  std::size_t runs = 0;
  for (const ComparisonRun& run : r.runs) {
    if (run.model != "bohmian") continue;
    ++runs;
    o.require(run.ok, "trajectory reached t = 2 pi");
    r_max = std::max(r_max, run.r_max);
    dev = std::max(dev, run.deviation_final);
  }
  o.detail << " " << runs << " starts; max_t r(t) = " << num(r_max) << ", deviation(2 pi) = " << num(dev)
           << " (worst start)";
  o.require(runs > 0, "bohmian runs");
  o.require(r_max < 1e-2, "r(t) < 1e-2");
  o.require(dev < 5e-2, "deviation < 5e-2");
  return o;
}

Outcome velocity_discrimination(const ComparisonReport& r) {
  Outcome o;
  const ComparisonEntry& frozen = r.entry("scaling:-1");
  const ComparisonEntry& minus = r.entry("scaling:-0.01");
  const ComparisonEntry& plus = r.entry("scaling:0.01");
  o.detail << " ratio(2 pi): lambda=-1 " << num(frozen.ratio_final) << ", lambda=-0.01 " << num(minus.ratio_final)
           << ", lambda=+0.01 " << num(plus.ratio_final) << ";";
  o.require(frozen.ratio_final >= 10.0, "lambda = -1 ratio >= 10");
  o.require(minus.ratio_final <= 1.5 && plus.ratio_final <= 1.5, "lambda = +-0.01 ratio <= 1.5");
  // The environment lives on a ring, so the deviation at one instant revisits small values
  // once X2 - X2ref wraps; monotonicity is judged on the sup over time and on the residual.
  o.detail << " monotone in |lambda|: sup-over-time " << (r.monotone_sup ? "yes" : "no") << ", residual "
           << (r.monotone_residual ? "yes" : "no") << ", t = 2 pi only " << (r.monotone_final ? "yes" : "no");
  o.require(r.monotone_sup, "sup-over-time ratio monotone");
  o.require(r.monotone_residual, "residual ratio monotone");
  return o;
}

Outcome classical_limit() {
  Outcome o;
  const ExperimentConfig c = shipped("ring_classicality.ini");
  const ClassicalityReport ring = run_classicality(c, scenario_for(c));
  const ClassicalityMetrics& b = ring.models.front();
  o.detail << " ring: v2 spread " << num(b.v2_spread) << ", Gamma flatness " << num(b.gamma_flatness) << ", gap "
           << num(b.trajectory_gap) << ", ratio " << num(b.ratio) << ";";
  o.require(b.model == "bohmian", "bohmian first");
  o.require(b.v2_spread < 1e-8 && b.gamma_flatness < 1e-8, "floors");
  o.require(b.trajectory_gap < 1e-6, "X2 gap");
  o.require(b.times.back() >= kTwoPi - 1e-9, "t = 2 pi");

  ExperimentConfig v;
  v.scenario = ScenarioName::vortex_oscillator;
  v.params = default_params(v.scenario);
  v.t_final = kTwoPi;
  const ClassicalityMetrics m = run_classicality(v, scenario_for(v)).models.front();
  o.detail << " vortex ratio " << num(m.ratio) << (m.classical ? " classical" : " non-classical");
  o.require(m.ratio < kClassicalRatio && !m.classical, "vortex non-classical");
  return o;
}

Outcome conditional_classical() {
  Outcome o;
  const PotentialSpec pot(Harmonic2D{1.0, 1.3, 0.4}, Masses{1.0, 2.0});
  const double dt = 1e-3;
  const Trajectory full = classical_trajectory(pot, {0.7, -0.4}, {0.2, 0.5}, 0.0, kTwoPi, dt);
  const Trajectory cond = conditional_classical_trajectory(pot, full, 0.7, 0.2, 0.0, kTwoPi, dt);
  double gap = 0.0;
  for (std::size_t k = 0; k < full.size(); ++k) gap = std::max(gap, std::abs(cond.positions[k].x1 - full.positions[k].x1));
  o.detail << " coupled oscillator, dt = 1e-3: sup |X1_cond - X1_full| = " << num(gap);
  o.require(cond.size() == full.size(), "aligned records");
  o.require(gap < 1e-5, "sup-norm < 1e-5");
  return o;
}

Outcome trivial_suite() {
  Outcome o;
  const Scenario sc = analytic_scenario(ScenarioName::frozen_ground);
  const auto [v1, v2] = bohmian_velocity_field(sc.state.psi, sc.potential.masses());
  const double vmax = std::max(max_abs(v1), max_abs(v2));
  o.require(vmax == 0.0, "v = 0");

  const VelocityField field(sc.state.psi, sc.potential.masses());
  const Point2 start{0.5, 0.5};
  const Trajectory tr = integrate_trajectory(field, start, 0.0, kTwoPi);
  double moved = 0.0;
  for (const Point2& p : tr.positions) moved = std::max(moved, std::hypot(p.x1 - start.x1, p.x2 - start.x2));
  o.require(moved == 0.0, "static trajectory");

  const ConditionalContext ctx(sc.state.psi, sc.potential, sc.state.energy);
  const ConditionalSeries series = conditional_series(ctx, tr, 0.0, kTwoPi, 0.1);
  double drift = 0.0;
  for (const ConditionalSlice& s : series.slices) {
    for (std::size_t i = 0; i < s.psi_c.size(); ++i) drift = std::max(drift, std::abs(s.psi_c[i] - series.slices[0].psi_c[i]));
  }
  o.require(drift == 0.0, "psi_c time independent");

  // Q1 + Q2 = E - V on off-grid slices. The interpolation error depends on where X2 sits in
  // its cell, so the sup is taken over slices spanning one coarse cell.
  auto q_error = [](int n) {
    ScenarioParams p = default_params(ScenarioName::frozen_ground);
    p.n1 = n;
    p.n2 = n;
    const Scenario fg = analytic_scenario(ScenarioName::frozen_ground, p);
    const ConditionalContext c(fg.state.psi, fg.potential, fg.state.energy);
    const VelocityField f(fg.state.psi, fg.potential.masses());
    const double cell = 2.0 * p.extent / 128;
    double e = 0.0;
    for (int j = 0; j < 8; ++j) {
      const Trajectory still = integrate_trajectory(f, {0.5, 0.5 + j * cell / 8}, 0.0, 0.2);
      const ConditionalSlice s = conditional_series(c, still, 0.0, 0.2, 0.1).slices[0];
      for (std::size_t i = 0; i < s.psi_c.size(); ++i) {
        if (s.trusted[i]) e = std::max(e, std::abs(s.Q1c[i] + s.Q2c[i] + s.V_c[i] - fg.state.energy));
      }
    }
    return e;
  };
  const double q128 = q_error(128);
  const double qerr = q_error(256);
  o.require(qerr < 1e-4 && q128 / qerr > 3.5, "Q = E - V at stencil order");
  bool singular = true;
  for (std::size_t k = 0; k < series.size(); ++k) singular = singular && gamma_field(series, k).singular;
  o.require(singular, "Gamma singular-flagged");
  o.detail << " max|v| = " << num(vmax) << ", max displacement " << num(moved) << ", max|psi_c(t) - psi_c(0)| = "
           << num(drift) << ", max|Q1 + Q2 + V - E| = " << num(q128) << " -> " << num(qerr)
           << " (sup over a cell; 128, 256), Gamma " << (singular ? "singular" : "defined");
  return o;
}

int cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "condbohm");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "condbohm_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream os(root / "ensemble.ini");
    os << "[run]\nscenario = vortex_oscillator\nvelocity_models = bohmian, stream\nn_ensemble = 2000\n"
          "t_final = 1\nreseeds = 5\nseed = 7\n[grid]\nn1 = 128\nn2 = 128\n";
  }
  struct Job {
    std::string subcommand;
    fs::path config;
  };
  const std::vector<Job> jobs = {{"classicality", fs::path(CONDBOHM_CONFIG_DIR) / "ring_classicality.ini"},
                                 {"residuals", fs::path(CONDBOHM_CONFIG_DIR) / "vortex_residuals.ini"},
                                 {"equivariance", root / "ensemble.ini"}};
  std::size_t compared = 0;
  for (const Job& job : jobs) {
    const fs::path first = root / (job.subcommand + "_first");
    const fs::path replay = root / (job.subcommand + "_replay");
    const bool ran = cli_run({job.subcommand, "--config", job.config.string(), "--out", first.string(), "--quiet"}) == 0 &&
                     cli_run({job.subcommand, "--config", (first / cli::kManifestName).string(), "--out",
                              replay.string(), "--quiet"}) == 0;
    o.require(ran, job.subcommand + " runs");
    if (!ran) continue;
    const cli::RunManifest m = cli::manifest_from_json(Json::parse(slurp(first / cli::kManifestName)));
    for (const cli::ManifestFile& f : m.files) {
      ++compared;
      o.require(slurp(first / f.path) == slurp(replay / f.path), job.subcommand + "/" + f.path);
    }
    o.require(cli::verify_manifest(replay).empty(), job.subcommand + " replay digests");
  }
  o.detail << " " << jobs.size() << " experiments replayed from their manifests; " << compared
           << " output files byte-identical";
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& check) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << name << ":" << o.detail.str() << " ("
              << num(seconds) << " s)" << std::endl;
  };

  report(1, "eigenstate fidelity", eigenstate_fidelity);
  report(2, "equivariance", equivariance);
  report(3, "pseudo-Schroedinger identity", pseudo_identity);

  ComparisonReport comparison;
  std::string comparison_error;
  try {
    const ExperimentConfig c = shipped("coupled_compare.ini");
    comparison = run_velocity_comparison(c, scenario_for(c));
  } catch (const std::exception& e) {
    comparison_error = e.what();
  }
  auto with_comparison = [&](const std::function<Outcome(const ComparisonReport&)>& check) {
    return [&, check] {
      if (!comparison_error.empty()) throw std::runtime_error(comparison_error);
      return check(comparison);
    };
  };
  report(4, "conditional Schroedinger approximation", with_comparison(conditional_schrodinger));
  report(5, "velocity discrimination", with_comparison(velocity_discrimination));
  report(6, "classical-limit diagnostics", classical_limit);
  report(7, "conditional classical mechanics", conditional_classical);
  report(8, "frozen-ground suite", trivial_suite);
  report(9, "determinism", determinism);

  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
  return failures == 0 ? 0 : 1;
}
