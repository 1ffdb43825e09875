#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "condbohm/experiments.hpp"
#include "condbohm/report.hpp"
#include "condbohm/sampling.hpp"

using namespace condbohm;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Scenario small(ScenarioName name, int n1, int n2) {
  ScenarioParams p = default_params(name);
  p.n1 = n1;
  p.n2 = n2;
  return build_scenario(name, p);
}

ExperimentConfig config_for(const Scenario& sc) {
  ExperimentConfig c;
  c.scenario = sc.name;
  c.params = sc.params;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("condbohm_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

ComparisonEntry entry(double lambda, double ratio) {
  ComparisonEntry e;
  e.model = "scaling";
  e.lambda = lambda;
  e.ratio_final = ratio;
  return e;
}

}  // namespace

TEST_CASE("velocity model names") {
  CHECK(parse_model_spec("bohmian") == ModelSpec{VelocityKind::bohmian, 0.0});
  CHECK(parse_model_spec("scaling:-1") == ModelSpec{VelocityKind::scaling, -1.0});
  CHECK(parse_model_spec("scaling:0") == ModelSpec{VelocityKind::bohmian, 0.0});
  CHECK(parse_model_spec("stream") == ModelSpec{VelocityKind::stream, 1.0});
  CHECK(parse_model_spec("stream:0.5") == ModelSpec{VelocityKind::stream, 0.5});
  for (const char* name : {"bohmian", "scaling:-1", "scaling:0.5", "scaling:2", "stream", "stream:0.25"}) {
    CHECK(parse_model_spec(name).label() == name);
  }
  for (const char* bad : {"scaling", "scaling:x", "scaling:1e999", "bohmian:1", "guidance", ""}) {
    CHECK_THROWS_AS(parse_model_spec(bad), Error);
  }
}

TEST_CASE("config validation names the offending field") {
  auto message = [](ExperimentConfig c) -> std::string {
    try {
      validate(c);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
      return e.what();
    }
    return "";
  };
  CHECK(message(ExperimentConfig{}).empty());
  ExperimentConfig c;
  c.t_final = -1.0;
  CHECK(message(c).find("t_final") != std::string::npos);
  c = {};
  c.dt_slice = 1e-4;
  CHECK(message(c).find("dt_slice") != std::string::npos);
  c = {};
  c.reseeds = 1;
  CHECK(message(c).find("reseeds") != std::string::npos);
  c = {};
  c.velocity_models.clear();
  CHECK(message(c).find("velocity_models") != std::string::npos);
  c = {};
  c.scenario = ScenarioName::ring_planewave_env;
  c.params.n2 = 65;
  CHECK(message(c).find("grid") != std::string::npos);
  c = {};
  c.lambda_sweep.push_back(kNaN);
  CHECK(message(c).find("lambda_sweep") != std::string::npos);
}

TEST_CASE("binned density and total variation") {
  const Scenario sc = small(ScenarioName::vortex_oscillator, 64, 64);
  const BinnedDensity target = binned_density(sc.state.psi, 12);
  double total = 0.0;
  for (double p : target.p) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(target.bins1 == 12);
  CHECK(target.lo1 < -3.0);
  CHECK(target.hi1 > 3.0);

  // Every point in one bin: TV = 1 - p_bin.
  const Point2 x{0.9, -0.4};
  const long b = target.bin_of(x);
  REQUIRE(b >= 0);
  const std::vector<Point2> clump(50, x);
  CHECK(tv_distance(target, clump) == doctest::Approx(1.0 - target.p[static_cast<std::size_t>(b)]).epsilon(1e-6));

  const std::vector<Point2> far(10, Point2{100.0, 100.0});
  CHECK(target.bin_of(far[0]) == -1);
  CHECK(tv_distance(target, far) == doctest::Approx(1.0));

  const std::vector<Point2> drawn = sample_ensemble(sc.state.psi, 20000, 3);
  CHECK(tv_distance(target, drawn) < 0.08);
  CHECK_THROWS_AS(tv_distance(target, std::vector<Point2>{}), Error);
  CHECK_THROWS_AS(binned_density(sc.state.psi, 1), Error);

  // Ring axis: the support wraps, so the box covers the whole circle.
  const Scenario ring = small(ScenarioName::ring_planewave_env, 64, 64);
  const BinnedDensity rt = binned_density(ring.state.psi, 8);
  CHECK(rt.wrap2);
  CHECK(rt.bin_of({0.0, 2.0 * 3.14159265358979 + 0.1}) == rt.bin_of({0.0, 0.1}));
}

TEST_CASE("equivariance run on a small vortex") {
  const Scenario sc = small(ScenarioName::vortex_oscillator, 96, 96);
  ExperimentConfig c = config_for(sc);
  c.velocity_models = {parse_model_spec("bohmian"), parse_model_spec("scaling:-1"), parse_model_spec("stream")};
  c.n_ensemble = 2000;
  c.t_final = 1.0;
  c.checkpoints = 2;
  c.bins = 12;
  c.reseeds = 6;
  const EquivarianceReport rep = run_equivariance(c, sc);
  REQUIRE(rep.bootstrap.size() == 6);
  double mean = 0.0;
  for (double d : rep.bootstrap) mean += d;
  mean /= 6.0;
  double var = 0.0;
  for (double d : rep.bootstrap) var += (d - mean) * (d - mean);
  CHECK(rep.d0 == doctest::Approx(mean));
  CHECK(rep.sigma == doctest::Approx(std::sqrt(var / 5.0)));
  CHECK(rep.bound == doctest::Approx(rep.d0 + 3.0 * rep.sigma));
  REQUIRE(rep.models.size() == 3);
  for (const EquivarianceSeries& s : rep.models) {
    CHECK(s.times == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(s.tv.size() == 3);
    CHECK(s.tv.front() == rep.models.front().tv.front());
  }
  // u = 0 everywhere: nothing moves.
  const EquivarianceSeries& frozen = rep.models[1];
  CHECK(frozen.model == "scaling:-1");
  CHECK(frozen.tv[1] == frozen.tv[0]);
  CHECK(frozen.tv[2] == frozen.tv[0]);
  CHECK(rep.models[0].tv.back() < 2.0 * rep.bound);

  // Same seed, same report.
  CHECK(to_json(run_equivariance(c, sc)).dump() == to_json(rep).dump());
}

TEST_CASE("classicality: plane-wave environment, frozen ground, vortex") {
  ExperimentConfig c;
  c.t_final = 1.0;
  c.velocity_models = {parse_model_spec("bohmian"), parse_model_spec("scaling:-1")};

  const Scenario ring = small(ScenarioName::ring_planewave_env, 128, 128);
  c.scenario = ring.name;
  c.params = ring.params;
  const ClassicalityReport r = run_classicality(c, ring);
  REQUIRE(r.models.size() == 2);
  const ClassicalityMetrics& b = r.models[0];
  // L2 is capped at the ring length, P2 = hbar k.
  CHECK(b.ratio == doctest::Approx(2.0 * 3.14159265358979 * ring.params.k).epsilon(1e-6));
  CHECK(b.v2_spread < 1e-10);
  CHECK(b.gamma_flatness < 1e-10);
  CHECK(b.trajectory_gap < 1e-8);
  CHECK(b.classical);
  CHECK(!b.singular);
  const ClassicalityMetrics& still = r.models[1];
  CHECK(still.singular);
  CHECK(std::isnan(still.v2_spread));
  CHECK(!still.classical);

  const Scenario frozen = small(ScenarioName::frozen_ground, 64, 64);
  c.scenario = frozen.name;
  c.params = frozen.params;
  c.velocity_models = {ModelSpec{}};
  const ClassicalityMetrics f = run_classicality(c, frozen).models.front();
  CHECK(f.singular);
  CHECK(!f.classical);
  CHECK(f.ratio == 0.0);

  const Scenario vortex = small(ScenarioName::vortex_oscillator, 128, 128);
  c.scenario = vortex.name;
  c.params = vortex.params;
  const ClassicalityMetrics v = run_classicality(c, vortex).models.front();
  CHECK(!v.singular);
  CHECK(v.ratio < 10.0);
  CHECK(v.v2_spread > 0.1);
  CHECK(!v.classical);
}

TEST_CASE("monotonicity in |lambda| averages signs and ignores non-scaling entries") {
  std::vector<ComparisonEntry> entries = {entry(0.0, 1.0), entry(-0.5, 1.2), entry(0.5, 2.0), entry(-1.0, 3.0),
                                          entry(2.0, 1.7)};
  CHECK(!monotone_in_abs_lambda(entries, &ComparisonEntry::ratio_final));
  entries.back().ratio_final = 4.0;
  CHECK(monotone_in_abs_lambda(entries, &ComparisonEntry::ratio_final));
  // 0.5 group mean is 1.6 >= 1; a single dip inside a group does not count.
  entries[1].ratio_final = 0.9;
  CHECK(monotone_in_abs_lambda(entries, &ComparisonEntry::ratio_final));
  ComparisonEntry stream = entry(1.0, 0.0);
  stream.scaling = false;
  entries.push_back(stream);
  CHECK(monotone_in_abs_lambda(entries, &ComparisonEntry::ratio_final));
  entries[2].ratio_final = kNaN;
  CHECK(!monotone_in_abs_lambda(entries, &ComparisonEntry::ratio_final));
}

TEST_CASE("velocity comparison on a small plane-wave environment") {
  const Scenario sc = small(ScenarioName::ring_planewave_env, 64, 64);
  ExperimentConfig c = config_for(sc);
  c.velocity_models = {ModelSpec{}, parse_model_spec("stream")};
  c.lambda_sweep = {0.0, -0.5, 0.5};
  c.t_final = 1.0;
  c.n_starts = 2;
  const ComparisonReport rep = run_velocity_comparison(c, sc);
  CHECK(rep.starts.size() == 2);
  REQUIRE(rep.entries.size() == 4);
  CHECK(rep.entries[0].model == "bohmian");
  CHECK(rep.entries[0].ratio_final == doctest::Approx(1.0));
  CHECK(rep.entry("scaling:-0.5").lambda == -0.5);
  CHECK(!rep.entry("stream").scaling);
  CHECK_THROWS_AS(rep.entry("scaling:7"), Error);
  for (const ComparisonRun& run : rep.runs) {
    CHECK(run.times.size() == run.deviation.size());
    CHECK(run.ok);
  }
  // On a product state the Bohmian slice is the reference evolution up to the propagator error.
  CHECK(rep.entries[0].r_max < 1e-3);
  CHECK(rep.entries[0].deviation_final < 1e-3);
  // V does not depend on x2 here, so every scaling law gives the same conditional evolution.
  for (const char* m : {"scaling:-0.5", "scaling:0.5"}) CHECK(rep.entry(m).deviation_final < 1e-6);

  // Explicit starts override sampling.
  c.starts = {{0.1, 1.0}};
  CHECK(run_velocity_comparison(c, sc).starts.size() == 1);
}

TEST_CASE("residual report: order and Gamma ablation on the vortex") {
  const Scenario sc = small(ScenarioName::vortex_oscillator, 128, 128);
  ExperimentConfig c = config_for(sc);
  c.t_final = 1.0;
  const ResidualReport rep = run_residuals(c, sc);
  CHECK(rep.model == "bohmian");
  CHECK(rep.times.size() == 51);
  CHECK(rep.r_pseudo.size() == rep.times.size());
  CHECK(rep.r_exact_order > 1.5);
  CHECK(rep.r_no_gamma_rms > 10.0 * rep.r_pseudo_rms);
  CHECK(std::abs(rep.r_no_gamma_order) < 0.5);
  CHECK(rep.N.front() > 0.0);

  ScenarioParams odd = sc.params;
  odd.n1 = 31;
  Scenario bad = sc;
  bad.params = odd;
  CHECK_THROWS_AS(run_residuals(c, bad), Error);
}

TEST_CASE("reports are written in order and reproducibly") {
  const Scenario sc = small(ScenarioName::ring_planewave_env, 64, 64);
  ExperimentConfig c = config_for(sc);
  c.t_final = 0.5;
  const ClassicalityReport rep = run_classicality(c, sc);
  const fs::path a = scratch("report_a");
  const fs::path b = scratch("report_b");
  const auto files = write_report(rep, a);
  write_report(run_classicality(c, sc), b);
  REQUIRE(files == std::vector<fs::path>{"classicality.json", "classicality.csv"});
  for (const fs::path& f : files) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const Json j = Json::parse(slurp(a / "classicality.json"));
  CHECK(j["scenario"] == "ring_planewave_env");
  CHECK(j["models"].size() == 1);
  const std::string csv = slurp(a / "classicality.csv");
  CHECK(csv.rfind("model,t,ratio,v2_spread,gamma_flatness\n", 0) == 0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("rms over finite entries") {
  CHECK(rms_finite(std::vector<double>{3.0, 4.0, kNaN}) == doctest::Approx(std::sqrt(12.5)));
  CHECK(std::isnan(rms_finite(std::vector<double>{kNaN})));
}
