#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "condbohm/config.hpp"
#include "condbohm/io.hpp"
#include "manifest.hpp"

namespace condbohm::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string grid;
  bool quiet = false;
};

/// Accepts a config file or a manifest, whose config snapshot is replayed.
ExperimentConfig load_config(const fs::path& path) {
  if (path.extension() == ".json") {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::config, "cannot read manifest '" + path.string() + "'");
    Json j;
    try {
      j = Json::parse(is);
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::config, path.string() + ": " + e.what());
    }
    return parse_config_text(manifest_from_json(j).config);
  }
  return parse_config(path);
}

ExperimentConfig resolve_config(const Options& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (!o.grid.empty()) std::tie(c.params.n1, c.params.n2) = parse_grid_size(o.grid);
  if (!o.out.empty()) c.output_dir = o.out;
  validate(c);
  return c;
}

Json error_record(ErrorKind kind, const std::string& message) {
  return {{"error", {{"kind", to_string(kind)}, {"exit_code", static_cast<int>(kind)}, {"message", message}}}};
}

/// Reports the failure on `err` and, when an output directory is known, as error.json inside it.
int fail(ErrorKind kind, const std::string& message, const std::optional<fs::path>& out_dir, std::ostream& err) {
  const Json record = error_record(kind, message);
  err << record.dump() << "\n";
  if (out_dir) {
    std::error_code ec;
    fs::create_directories(*out_dir, ec);
    std::ofstream os(*out_dir / "error.json", std::ios::binary);
    if (os) os << dump(record);
  }
  return static_cast<int>(kind);
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

void summarize(const EquivarianceReport& r, std::ostream& out) {
  out << "bootstrap d0 = " << fixed(r.d0) << ", sigma = " << fixed(r.sigma) << ", bound = " << fixed(r.bound) << "\n";
  for (const EquivarianceSeries& s : r.models) {
    out << "  " << std::left << std::setw(16) << s.model << " tv(t_final) = " << fixed(s.tv.back())
        << (s.pass ? "  pass" : "  FAIL") << (s.truncated ? "  truncated=" + std::to_string(s.truncated) : "") << "\n";
  }
}

void summarize(const ClassicalityReport& r, std::ostream& out) {
  for (const ClassicalityMetrics& m : r.models) {
    out << "  " << std::left << std::setw(16) << m.model << " ratio = " << fixed(m.ratio)
        << "  v2_spread = " << fixed(m.v2_spread) << "  gamma_flatness = " << fixed(m.gamma_flatness)
        << "  gap = " << fixed(m.trajectory_gap) << (m.classical ? "  classical" : "  non-classical") << "\n";
  }
}

void summarize(const ComparisonReport& r, std::ostream& out) {
  for (const ComparisonEntry& e : r.entries) {
    out << "  " << std::left << std::setw(16) << e.model << " r_max = " << fixed(e.r_max)
        << "  deviation(t_final) = " << fixed(e.deviation_final) << "  ratio = " << fixed(e.ratio_final)
        << "  sup ratio = " << fixed(e.ratio_sup) << (e.finite ? "" : "  (incomplete)") << "\n";
  }
  out << "monotone in |lambda|: final " << (r.monotone_final ? "yes" : "no") << ", sup "
      << (r.monotone_sup ? "yes" : "no") << ", residual " << (r.monotone_residual ? "yes" : "no") << "\n";
}

void summarize(const ResidualReport& r, std::ostream& out) {
  out << "  " << r.model << ": rms r_pseudo = " << fixed(r.r_pseudo_rms) << " (half resolution "
      << fixed(r.r_pseudo_rms_half) << ", order " << fixed(r.r_exact_order, 3) << "), rms r_cond_schrod = "
      << fixed(rms_finite(r.r_cond_schrod)) << "\n";
  out << "  without Gamma: rms " << fixed(r.r_no_gamma_rms) << " (half resolution " << fixed(r.r_no_gamma_rms_half)
      << ", order " << fixed(r.r_no_gamma_order, 3) << ")\n";
}

Json scenarios_json() {
  Json list = Json::array();
  for (ScenarioName n : all_scenarios()) {
    const ScenarioParams p = default_params(n);
    list.push_back({{"name", to_string(n)},
                    {"description", describe(n)},
                    {"defaults",
                     {{"n1", p.n1},
                      {"n2", p.n2},
                      {"extent", p.extent},
                      {"m1", p.m1},
                      {"m2", p.m2},
                      {"omega", p.omega},
                      {"k", p.k},
                      {"epsilon", p.epsilon}}}});
  }
  return {{"scenarios", list}};
}

template <typename Report>
int finish(const std::string& subcommand, const ExperimentConfig& c, const std::string& started, const Report& report,
           const Options& o, std::ostream& out) {
  RunManifest manifest;
  manifest.version = kVersion;
  manifest.subcommand = subcommand;
  manifest.seed = c.seed;
  manifest.config = config_text(c);
  manifest.started_utc = started;
  add_files(manifest, c.output_dir, write_report(report, c.output_dir));
  manifest.finished_utc = utc_now();
  write_manifest(manifest, c.output_dir);
  if (!o.quiet) {
    summarize(report, out);
    out << "wrote " << manifest.files.size() + 1 << " files to " << c.output_dir.string() << "\n";
  }
  return 0;
}

int run_subcommand(const std::string& name, const Options& o, std::ostream& out) {
  const std::string started = utc_now();
  if (name == "scenarios") {
    const Json j = scenarios_json();
    if (!o.quiet || o.out.empty()) {
      for (const Json& s : j["scenarios"]) {
        out << std::left << std::setw(22) << s["name"].get<std::string>() << s["description"].get<std::string>()
            << "\n";
        const Json& d = s["defaults"];
        out << std::string(22, ' ') << "grid " << d["n1"] << "x" << d["n2"] << ", extent " << d["extent"] << ", m1 "
            << d["m1"] << ", m2 " << d["m2"] << ", omega " << d["omega"] << ", k " << d["k"] << ", epsilon "
            << d["epsilon"] << "\n";
      }
    }
    if (!o.out.empty()) {
      const fs::path dir = o.out;
      fs::create_directories(dir);
      {
        std::ofstream os(dir / "scenarios.json", std::ios::binary);
        if (!os) throw Error(ErrorKind::io, "cannot write scenarios.json");
        os << dump(j);
      }
      RunManifest manifest;
      manifest.version = kVersion;
      manifest.subcommand = name;
      manifest.started_utc = started;
      add_files(manifest, dir, {"scenarios.json"});
      manifest.finished_utc = utc_now();
      write_manifest(manifest, dir);
    }
    return 0;
  }

  const ExperimentConfig c = resolve_config(o);
  if (!o.quiet) out << name << ": building " << to_string(c.scenario) << " on " << c.params.n1 << "x" << c.params.n2 << "\n";
  const Scenario scenario = build_scenario(c.scenario, c.params);
  if (!o.quiet) out << "  E = " << format_double(scenario.state.energy) << ", residual " << fixed(scenario.residual, 3) << "\n";
  if (name == "equivariance") return finish(name, c, started, run_equivariance(c, scenario), o, out);
  if (name == "classicality") return finish(name, c, started, run_classicality(c, scenario), o, out);
  if (name == "compare") return finish(name, c, started, run_velocity_comparison(c, scenario), o, out);
  if (name == "residuals") return finish(name, c, started, run_residuals(c, scenario), o, out);
  throw Error(ErrorKind::config, "unknown subcommand '" + name + "'");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditional wave function experiments for a two-particle stationary state", "condbohm"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(kVersion));
  Options o;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub, bool experiment) {
    sub->add_option("--out", o.out, "Output directory");
    sub->add_flag("--quiet", o.quiet, "Only write files");
    if (!experiment) return;
    sub->add_option("--config", o.config, "Config file, or a manifest.json to replay")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Seed (overrides the config)");
    sub->add_option("--grid", o.grid, "Grid size N1xN2 (overrides the config)");
  };
  common(app.add_subcommand("scenarios", "List the analytic and numerical scenarios"), false);
  common(app.add_subcommand("equivariance", "Ensemble transport against |psi|^2 for each velocity model"), true);
  common(app.add_subcommand("classicality", "Classical-limit diagnostics along a trajectory"), true);
  common(app.add_subcommand("compare", "Velocity-law sweep against the classical reference propagation"), true);
  common(app.add_subcommand("residuals", "Pseudo- and conditional Schroedinger residuals with convergence order"), true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    return fail(ErrorKind::config, e.what(), std::nullopt, err);
  }
  const CLI::App* sub = app.get_subcommands().front();
  if (const CLI::Option* opt = sub->get_option_no_throw("--seed"); opt && opt->count() > 0) o.seed = seed;

  std::optional<fs::path> out_dir;
  if (!o.out.empty()) out_dir = o.out;
  try {
    if (!out_dir && sub->get_name() != "scenarios") out_dir = resolve_config(o).output_dir;
  } catch (const Error&) {
    // Reported below with the same message.
  }
  try {
    return run_subcommand(sub->get_name(), o, out);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), out_dir, err);
  } catch (const fs::filesystem_error& e) {
    return fail(ErrorKind::io, e.what(), out_dir, err);
  } catch (const std::exception& e) {
    err << error_record(ErrorKind::validation, e.what()).dump() << "\n";
    return 1;
  }
}

}  // namespace condbohm::cli
