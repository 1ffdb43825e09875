#include <pybind11/iostream.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "condbohm/config.hpp"
#include "condbohm/report.hpp"
#include "condbohm/scenarios.hpp"
#include "condbohm/velocity.hpp"

namespace py = pybind11;
using namespace condbohm;

namespace {

/// Reports cross the boundary as JSON text; the Python side parses them.
std::string run_experiment(const std::string& kind, const std::string& config) {
  const ExperimentConfig c = parse_config_text(config);
  validate(c);
  const Scenario sc = build_scenario(c.scenario, c.params);
  if (kind == "equivariance") return to_json(run_equivariance(c, sc)).dump();
  if (kind == "classicality") return to_json(run_classicality(c, sc)).dump();
  if (kind == "compare") return to_json(run_velocity_comparison(c, sc)).dump();
  if (kind == "residuals") return to_json(run_residuals(c, sc)).dump();
  throw Error(ErrorKind::config, "unknown experiment '" + kind + "'");
}

py::dict scenario_state(const std::string& name, int n1, int n2) {
  const ScenarioName id = parse_scenario_name(name);
  ScenarioParams p = default_params(id);
  if (n1 > 0) p.n1 = n1;
  if (n2 > 0) p.n2 = n2;
  const Scenario sc = build_scenario(id, p);
  const Grid2D& g = sc.grid;
  py::array_t<std::complex<double>> psi({g.axis1.size(), g.axis2.size()});
  auto w = psi.mutable_unchecked<2>();
  for (int i = 0; i < g.axis1.size(); ++i) {
    for (int j = 0; j < g.axis2.size(); ++j) w(i, j) = sc.state.psi(i, j);
  }
  std::vector<double> x1(g.axis1.size()), x2(g.axis2.size());
  for (int i = 0; i < g.axis1.size(); ++i) x1[i] = g.axis1.x(i);
  for (int j = 0; j < g.axis2.size(); ++j) x2[j] = g.axis2.x(j);
  py::dict out;
  out["name"] = to_string(sc.name);
  out["energy"] = sc.state.energy;
  out["residual"] = sc.residual;
  out["default_start"] = py::make_tuple(sc.default_start.x1, sc.default_start.x2);
  out["masses"] = py::make_tuple(sc.potential.masses().m1, sc.potential.masses().m2);
  out["x1"] = x1;
  out["x2"] = x2;
  out["psi"] = psi;
  return out;
}

py::tuple velocity_at(const std::string& name, int n1, int n2, double x1, double x2) {
  const ScenarioName id = parse_scenario_name(name);
  ScenarioParams p = default_params(id);
  if (n1 > 0) p.n1 = n1;
  if (n2 > 0) p.n2 = n2;
  const Scenario sc = build_scenario(id, p);
  const Velocity v = bohmian_velocity(sc.state.psi, sc.potential.masses(), {x1, x2});
  return py::make_tuple(v.u1, v.u2);
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"condbohm"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  py::scoped_ostream_redirect out(std::cout, py::module_::import("sys").attr("stdout"));
  py::scoped_estream_redirect err(std::cerr, py::module_::import("sys").attr("stderr"));
  return cli::run(static_cast<int>(argv.size()), argv.data(), std::cout, std::cerr);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Conditional wave function experiments";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def("canonical_config", [](const std::string& text) { return config_text(parse_config_text(text)); },
        py::arg("text"), "Parse config text and return its canonical form.");
  m.def("run_experiment", &run_experiment, py::arg("kind"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>(), "Run an experiment and return its report as JSON text.");
  m.def("scenario_state", &scenario_state, py::arg("name"), py::arg("n1") = 0, py::arg("n2") = 0,
        "Eigenstate of a named scenario with its grid.");
  m.def("bohmian_velocity", &velocity_at, py::arg("name"), py::arg("n1"), py::arg("n2"), py::arg("x1"),
        py::arg("x2"));
  m.def("cli", &cli_main, py::arg("args"), "Run the command-line tool in-process; returns the exit code.");
}
