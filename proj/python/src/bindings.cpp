#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "kplate/experiments.hpp"

namespace py = pybind11;
using namespace kplate;

namespace {

std::shared_ptr<const Mesh> share(const Mesh& mesh) { return std::make_shared<const Mesh>(mesh); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Argyris finite elements for Kirchhoff plates in contact with an obstacle";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Point>(m, "Point")
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readwrite("x", &Point::x)
      .def_readwrite("y", &Point::y)
      .def("__repr__", [](const Point& p) { return "Point(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")"; });

  py::class_<Mesh>(m, "Mesh")
      .def(py::init<std::vector<Point>, std::vector<Triangle>>(), py::arg("vertices"), py::arg("triangles"))
      .def_property_readonly("vertices", &Mesh::vertices)
      .def_property_readonly("triangles", &Mesh::triangles)
      .def_property_readonly("edges", &Mesh::edges)
      .def_property_readonly("num_vertices", &Mesh::num_vertices)
      .def_property_readonly("num_triangles", &Mesh::num_triangles)
      .def_property_readonly("num_edges", &Mesh::num_edges)
      .def("is_boundary_edge", &Mesh::is_boundary_edge)
      .def("is_boundary_vertex", &Mesh::is_boundary_vertex)
      .def("area", &Mesh::area)
      .def("min_angle", &Mesh::min_angle);

  m.def("structured_unit_square", &build_structured_unit_square, py::arg("n"));
  m.def("uniform_refine", &uniform_refine, py::arg("mesh"));
  m.def("rgb_refine", [](const Mesh& mesh, const std::vector<int>& marked) { return rgb_refine(mesh, marked); },
        py::arg("mesh"), py::arg("marked"));

  py::enum_<Preset>(m, "Preset").value("rigid", Preset::rigid).value("elastic", Preset::elastic).value("custom", Preset::custom);
  py::enum_<RefinementMode>(m, "RefinementMode")
      .value("uniform", RefinementMode::uniform)
      .value("adaptive", RefinementMode::adaptive);
  py::enum_<MeshSize>(m, "MeshSize").value("longest_edge", MeshSize::longest_edge).value("area", MeshSize::area);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("preset", &ExperimentConfig::preset)
      .def_readwrite("initial_subdivision", &ExperimentConfig::initial_subdivision)
      .def_readwrite("mode", &ExperimentConfig::mode)
      .def_readwrite("steps", &ExperimentConfig::steps)
      .def_readwrite("eps", &ExperimentConfig::eps)
      .def_readwrite("alpha", &ExperimentConfig::alpha)
      .def_readwrite("tol", &ExperimentConfig::tol)
      .def_readwrite("theta", &ExperimentConfig::theta)
      .def_readwrite("max_iterations", &ExperimentConfig::max_iterations)
      .def_readwrite("mesh_size", &ExperimentConfig::mesh_size)
      .def_readwrite("young", &ExperimentConfig::young)
      .def_readwrite("poisson", &ExperimentConfig::poisson)
      .def_readwrite("thickness", &ExperimentConfig::thickness)
      .def_readwrite("load", &ExperimentConfig::load)
      .def_readwrite("obstacle", &ExperimentConfig::obstacle)
      .def_readwrite("output", &ExperimentConfig::output)
      .def_readwrite("resolution", &ExperimentConfig::resolution)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; })
      .def("__repr__", [](const ExperimentConfig& c) { return serialise(c); });

  m.def("preset_defaults", &preset_defaults, py::arg("preset"));
  m.def("parse_config", &parse_config_text, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("serialise", &serialise, py::arg("config"));
  m.def("validate", &validate, py::arg("config"), py::arg("where") = "config");

  py::class_<HistoryRow>(m, "HistoryRow")
      .def_readonly("step", &HistoryRow::step)
      .def_readonly("n", &HistoryRow::n)
      .def_readonly("eta", &HistoryRow::eta)
      .def_readonly("s", &HistoryRow::s)
      .def_readonly("iterations", &HistoryRow::iterations)
      .def_readonly("contact_area_fraction", &HistoryRow::contact_area_fraction)
      .def_readonly("converged", &HistoryRow::converged)
      .def_property_readonly("eta_plus_s", &HistoryRow::eta_plus_s);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("history", &RunResult::history)
      .def_readonly("contact_components", &RunResult::contact_components)
      .def_readonly("noncontact_components", &RunResult::noncontact_components)
      .def_readonly("failure", &RunResult::failure);

  m.def("run_experiment", &run_experiment, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("history_slope", [](const std::vector<HistoryRow>& rows) { return history_slope(rows); }, py::arg("history"));

  py::class_<DiscreteSolution>(m, "Solution")
      .def_property_readonly("dofs", [](const DiscreteSolution& s) {
        return std::vector<double>(s.dofs.data(), s.dofs.data() + s.dofs.size());
      })
      .def_readonly("iterations", &DiscreteSolution::iterations)
      .def_readonly("converged", &DiscreteSolution::converged)
      .def_property_readonly("num_dofs", &DiscreteSolution::num_dofs)
      .def_property_readonly("num_free_dofs", &DiscreteSolution::num_free_dofs)
      .def("displacement", [](const DiscreteSolution& s, int tri, double x, double y) {
        return s.evaluate(tri, Point{x, y})[deriv::u];
      })
      .def("reaction", [](const DiscreteSolution& s, int tri, double x, double y) { return s.reaction(tri, Point{x, y}); });

  m.def("solve", [](const ExperimentConfig& config, const Mesh& mesh) { return solve_contact(make_problem(config), share(mesh)); },
        py::arg("config"), py::arg("mesh"));

  py::class_<ErrorBreakdown>(m, "ErrorBreakdown")
      .def_readonly("indicator", &ErrorBreakdown::indicator)
      .def_readonly("eta", &ErrorBreakdown::eta)
      .def_readonly("s", &ErrorBreakdown::s)
      .def_property_readonly("total", &ErrorBreakdown::total);

  m.def("estimate", &estimate, py::arg("solution"));
  m.def("mark_elements", [](const std::vector<double>& e, double theta) { return mark_elements(e, theta); },
        py::arg("indicators"), py::arg("theta"));
  m.def("convergence_slope",
        [](const std::vector<double>& n, const std::vector<double>& e) { return convergence_slope(n, e); }, py::arg("n"),
        py::arg("error"));
}
