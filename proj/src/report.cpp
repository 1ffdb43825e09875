#include "condbohm/report.hpp"

#include <cmath>
#include <fstream>

#include "condbohm/error.hpp"
#include "condbohm/io.hpp"

namespace condbohm {

namespace {

namespace fs = std::filesystem;

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

Json point(Point2 p) { return Json::array({p.x1, p.x2}); }

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  return os;
}

void finish_output(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

void write_json(const Json& j, const fs::path& dir, const fs::path& name, std::vector<fs::path>& files) {
  std::ofstream os = open_output(dir / name);
  os << dump(j);
  finish_output(os, dir / name);
  files.push_back(name);
}

template <typename Fn>
void write_csv(const fs::path& dir, const fs::path& name, std::vector<fs::path>& files, Fn&& body) {
  std::ofstream os = open_output(dir / name);
  body(os);
  finish_output(os, dir / name);
  files.push_back(name);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create '" + dir.string() + "': " + ec.message());
}

/// File-name friendly form of a model label.
std::string slug(const std::string& label) {
  std::string out;
  for (char c : label) out += (c == ':' ? '_' : c);
  return out;
}

}  // namespace

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const EquivarianceReport& r) {
  Json models = Json::array();
  for (const EquivarianceSeries& s : r.models) {
    models.push_back({{"model", s.model},
                      {"times", numbers(s.times)},
                      {"tv", numbers(s.tv)},
                      {"truncated", s.truncated},
                      {"pass", s.pass}});
  }
  return {{"scenario", r.scenario},
          {"n_ensemble", r.n_ensemble},
          {"bins", r.bins},
          {"bootstrap", numbers(r.bootstrap)},
          {"d0", number(r.d0)},
          {"sigma", number(r.sigma)},
          {"bound", number(r.bound)},
          {"all_pass", r.all_pass()},
          {"models", models}};
}

Json to_json(const ClassicalityMetrics& m) {
  return {{"model", m.model},
          {"start", point(m.start)},
          {"ratio", number(m.ratio)},
          {"v2_spread", number(m.v2_spread)},
          {"gamma_flatness", number(m.gamma_flatness)},
          {"trajectory_gap", number(m.trajectory_gap)},
          {"classical", m.classical},
          {"flags", {{"singular", m.singular}, {"truncated", m.truncated}}}};
}

Json to_json(const ClassicalityReport& r) {
  Json models = Json::array();
  for (const ClassicalityMetrics& m : r.models) models.push_back(to_json(m));
  return {{"scenario", r.scenario}, {"classical_ratio_threshold", kClassicalRatio}, {"models", models}};
}

Json to_json(const ComparisonReport& r) {
  Json starts = Json::array();
  for (Point2 p : r.starts) starts.push_back(point(p));
  Json models = Json::array();
  for (const ComparisonEntry& e : r.entries) {
    Json runs = Json::array();
    for (const ComparisonRun& run : r.runs) {
      if (run.model != e.model) continue;
      runs.push_back({{"start", point(run.start)},
                      {"ok", run.ok},
                      {"r_max", number(run.r_max)},
                      {"deviation_final", number(run.deviation_final)},
                      {"deviation_sup", number(run.deviation_sup)},
                      {"r_cond_schrod", numbers(run.r_cond_schrod)},
                      {"classicality", to_json(run.classicality)}});
    }
    models.push_back({{"model", e.model},
                      {"lambda", e.lambda},
                      {"family", e.scaling ? "scaling" : "stream"},
                      {"r_max", number(e.r_max)},
                      {"deviation_final", number(e.deviation_final)},
                      {"deviation_sup", number(e.deviation_sup)},
                      {"verdict",
                       {{"ratio_final", number(e.ratio_final)},
                        {"ratio_sup", number(e.ratio_sup)},
                        {"ratio_residual", number(e.ratio_residual)},
                        {"finite", e.finite}}},
                      {"runs", runs}});
  }
  const Json times = r.runs.empty() ? Json::array() : numbers(r.runs.front().times);
  return {{"scenario", r.scenario},
          {"baseline", r.entries.empty() ? std::string() : r.entries.front().model},
          {"starts", starts},
          {"times", times},
          {"monotone", {{"ratio_final", r.monotone_final}, {"ratio_sup", r.monotone_sup}, {"ratio_residual", r.monotone_residual}}},
          {"models", models}};
}

Json to_json(const ResidualReport& r) {
  Json singular = Json::array();
  Json node = Json::array();
  for (auto f : r.singular) singular.push_back(f != 0);
  for (auto f : r.node_dominated) node.push_back(f != 0);
  return {{"scenario", r.scenario},
          {"model", r.model},
          {"start", point(r.start)},
          {"times", numbers(r.times)},
          {"r_cond_schrod", numbers(r.r_cond_schrod)},
          {"r_pseudo", numbers(r.r_pseudo)},
          {"r_pseudo_rms", number(r.r_pseudo_rms)},
          {"r_pseudo_rms_half", number(r.r_pseudo_rms_half)},
          {"r_exact_order", number(r.r_exact_order)},
          {"r_no_gamma", numbers(r.r_no_gamma)},
          {"r_no_gamma_rms", number(r.r_no_gamma_rms)},
          {"r_no_gamma_rms_half", number(r.r_no_gamma_rms_half)},
          {"r_no_gamma_order", number(r.r_no_gamma_order)},
          {"gamma_t", numbers(r.gamma_t)},
          {"N", numbers(r.N)},
          {"classicality",
           {{"ratio", number(r.classicality.ratio)},
            {"v2_spread", number(r.classicality.v2_spread)},
            {"gamma_flatness", number(r.classicality.gamma_flatness)},
            {"trajectory_gap", number(r.classicality.trajectory_gap)},
            {"classical", r.classicality.classical}}},
          {"flags",
           {{"singular_gamma", singular},
            {"node_dominated", node},
            {"truncated", r.classicality.truncated}}}};
}

std::vector<fs::path> write_report(const EquivarianceReport& r, const fs::path& dir) {
  ensure_dir(dir);
  std::vector<fs::path> files;
  write_json(to_json(r), dir, "equivariance.json", files);
  write_csv(dir, "equivariance.csv", files, [&](std::ostream& os) {
    CsvWriter csv(os, {"model", "t", "tv"});
    for (const EquivarianceSeries& s : r.models) {
      for (std::size_t k = 0; k < s.times.size(); ++k) {
        csv.field(s.model).field(s.times[k]).field(s.tv[k]);
        csv.end_row();
      }
    }
  });
  return files;
}

std::vector<fs::path> write_report(const ClassicalityReport& r, const fs::path& dir) {
  ensure_dir(dir);
  std::vector<fs::path> files;
  write_json(to_json(r), dir, "classicality.json", files);
  write_csv(dir, "classicality.csv", files, [&](std::ostream& os) {
    CsvWriter csv(os, {"model", "t", "ratio", "v2_spread", "gamma_flatness"});
    for (const ClassicalityMetrics& m : r.models) {
      for (std::size_t k = 0; k < m.times.size() && k < m.ratio_t.size(); ++k) {
        csv.field(m.model).field(m.times[k]).field(m.ratio_t[k]).field(m.v2_spread_t[k]).field(m.flatness_t[k]);
        csv.end_row();
      }
    }
  });
  return files;
}

std::vector<fs::path> write_report(const ComparisonReport& r, const fs::path& dir) {
  ensure_dir(dir);
  std::vector<fs::path> files;
  write_json(to_json(r), dir, "comparison.json", files);
  write_csv(dir, "comparison_long.csv", files, [&](std::ostream& os) {
    CsvWriter csv(os, {"model", "lambda", "t", "metric", "value"});
    for (const ComparisonEntry& e : r.entries) {
      // Start-averaged series; runs that stopped early are left out.
      std::vector<double> times;
      std::vector<double> res;
      std::vector<double> dev;
      int n = 0;
      for (const ComparisonRun& run : r.runs) {
        if (run.model != e.model || !run.ok) continue;
        if (times.empty()) {
          times = run.times;
          res.assign(times.size(), 0.0);
          dev.assign(times.size(), 0.0);
        }
        for (std::size_t k = 0; k < times.size(); ++k) {
          res[k] += run.r_cond_schrod[k];
          dev[k] += run.deviation[k];
        }
        ++n;
      }
      for (std::size_t k = 0; k < times.size(); ++k) {
        csv.field(e.model).field(e.lambda).field(times[k]).field("r_cond_schrod").field(res[k] / n);
        csv.end_row();
        csv.field(e.model).field(e.lambda).field(times[k]).field("deviation").field(dev[k] / n);
        csv.end_row();
      }
    }
  });
  for (const ComparisonEntry& e : r.entries) {
    write_csv(dir, "sweep_" + slug(e.model) + ".csv", files, [&](std::ostream& os) {
      CsvWriter csv(os, {"start", "X1_0", "X2_0", "t", "r_cond_schrod", "deviation"});
      long long index = 0;
      for (const ComparisonRun& run : r.runs) {
        if (run.model != e.model) continue;
        for (std::size_t k = 0; k < run.times.size(); ++k) {
          csv.field(index).field(run.start.x1).field(run.start.x2).field(run.times[k]);
          csv.field(run.r_cond_schrod[k]).field(run.deviation[k]);
          csv.end_row();
        }
        ++index;
      }
    });
  }
  return files;
}

std::vector<fs::path> write_report(const ResidualReport& r, const fs::path& dir) {
  ensure_dir(dir);
  std::vector<fs::path> files;
  write_json(to_json(r), dir, "residuals.json", files);
  write_csv(dir, "residuals.csv", files, [&](std::ostream& os) {
    CsvWriter csv(os, {"t", "r_cond_schrod", "r_pseudo", "r_no_gamma", "gamma_t", "N", "singular_gamma",
                           "node_dominated"});
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      csv.field(r.times[k]).field(r.r_cond_schrod[k]).field(r.r_pseudo[k]).field(r.r_no_gamma[k]);
      csv.field(r.gamma_t[k]).field(r.N[k]);
      csv.field(static_cast<long long>(r.singular[k])).field(static_cast<long long>(r.node_dominated[k]));
      csv.end_row();
    }
  });
  return files;
}

}  // namespace condbohm
