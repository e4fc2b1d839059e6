#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.hpp"
#include "mobgap/chern.hpp"
#include "mobgap/errors.hpp"
#include "mobgap/experiment.hpp"
#include "mobgap/localization.hpp"
#include "mobgap/metric.hpp"
#include "mobgap/spectral.hpp"

namespace py = pybind11;
using namespace mobgap;

PYBIND11_MODULE(_mobgap, m) {
  m.doc() = "Local distance, real-space Chern numbers and localization diagnostics";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  auto numeric = py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<EigenvalueCollision>(m, "EigenvalueCollision", numeric.ptr());

  py::class_<LatticeBox>(m, "LatticeBox")
      .def(py::init<int, int>(), py::arg("dim"), py::arg("side"))
      .def_property_readonly("dim", &LatticeBox::dim)
      .def_property_readonly("side", &LatticeBox::side)
      .def_property_readonly("size", &LatticeBox::size)
      .def_property_readonly("origin", &LatticeBox::origin)
      .def("site", [](const LatticeBox& b, std::size_t i) { return b.site(i); })
      .def("distance", &LatticeBox::distance);

  py::class_<BlockOperator>(m, "BlockOperator")
      .def(py::init<LatticeBox, int, Matrix, bool>(), py::arg("box"), py::arg("orbitals"), py::arg("dense"),
           py::arg("hermitian") = false)
      .def_property_readonly("box", &BlockOperator::box)
      .def_property_readonly("orbitals", &BlockOperator::orbitals)
      .def_property_readonly("hermitian", &BlockOperator::hermitian)
      .def_property_readonly("dense", &BlockOperator::dense)
      .def("block_norms", &BlockOperator::block_norms)
      .def("__add__", [](const BlockOperator& a, const BlockOperator& b) { return add(a, b); })
      .def("__sub__", [](const BlockOperator& a, const BlockOperator& b) { return subtract(a, b); })
      .def("__mul__", [](const BlockOperator& a, cplx f) { return scale(a, f); })
      .def("__rmul__", [](const BlockOperator& a, cplx f) { return scale(a, f); });

  py::enum_<ModelKind>(m, "ModelKind")
      .value("anderson", ModelKind::anderson)
      .value("hofstadter", ModelKind::hofstadter)
      .value("custom", ModelKind::custom);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init<>())
      .def_readwrite("kind", &ModelSpec::kind)
      .def_readwrite("dim", &ModelSpec::dim)
      .def_readwrite("side", &ModelSpec::side)
      .def_readwrite("orbitals", &ModelSpec::orbitals)
      .def_readwrite("flux_p", &ModelSpec::flux_p)
      .def_readwrite("flux_q", &ModelSpec::flux_q)
      .def_readwrite("disorder_width", &ModelSpec::disorder_width)
      .def_readwrite("seed", &ModelSpec::seed)
      .def_readwrite("energy_shift", &ModelSpec::energy_shift);

  m.def("build_hamiltonian", &build_hamiltonian, py::arg("spec"));
  m.def("operator_norm", &operator_norm, py::arg("a"));

  py::class_<MetricResult>(m, "MetricResult")
      .def_readonly("value", &MetricResult::value)
      .def_readonly("mu_star", &MetricResult::mu_star)
      .def_readonly("c_star", &MetricResult::c_star);
  m.def("local_distance", &local_distance, py::arg("a"), py::arg("b"));
  m.def("envelope_check", &envelope_check, py::arg("a"), py::arg("b"), py::arg("t"), py::arg("slack") = 1e-9);
  m.def("opnorm_bound_from_metric", &opnorm_bound_from_metric, py::arg("dl"), py::arg("dim"));

  py::class_<EnergyWindow>(m, "EnergyWindow")
      .def(py::init<double, double>(), py::arg("lower"), py::arg("upper"))
      .def_readonly("lower", &EnergyWindow::lower)
      .def_readonly("upper", &EnergyWindow::upper);

  py::class_<SpectralDecomposition>(m, "SpectralDecomposition")
      .def_property_readonly("eigenvalues", &SpectralDecomposition::eigenvalues)
      .def_property_readonly("eigenvectors", &SpectralDecomposition::eigenvectors)
      .def("count_below", &SpectralDecomposition::count_below)
      .def("distance_to_spectrum", &SpectralDecomposition::distance_to_spectrum);
  m.def("diagonalize", &diagonalize, py::arg("h"));
  m.def("fermi_projection", &fermi_projection, py::arg("dec"), py::arg("fermi_energy"),
        py::arg("collision_tol") = 1e-12);
  m.def(
      "contour_projection",
      [](const BlockOperator& h, double lambda, int nodes, const std::string& method) {
        return contour_projection(h, lambda, nodes,
                                  method == "direct" ? ResolventMethod::direct : ResolventMethod::spectral);
      },
      py::arg("h"), py::arg("fermi_energy"), py::arg("nodes_per_unit") = 200, py::arg("method") = "spectral");

  py::class_<ChernResult>(m, "ChernResult")
      .def_readonly("raw", &ChernResult::raw)
      .def_readonly("imaginary", &ChernResult::imaginary)
      .def_readonly("rounded", &ChernResult::rounded)
      .def_readonly("residual", &ChernResult::residual)
      .def_readonly("decided", &ChernResult::decided)
      .def_readonly("switch_id", &ChernResult::switch_id)
      .def_readonly("trace_radius", &ChernResult::trace_radius);
  m.def(
      "chern_number",
      [](const BlockOperator& h, double fermi_energy, const std::string& sw, int trace_radius, double tolerance) {
        ChernOptions opt;
        opt.trace_radius = trace_radius;
        opt.tolerance = tolerance;
        return chern_of_hamiltonian(h, fermi_energy, SwitchFunction::by_name(sw), opt);
      },
      py::arg("h"), py::arg("fermi_energy"), py::arg("switch") = "sharp", py::arg("trace_radius") = -1,
      py::arg("tolerance") = 0.05);
  m.def("bloch_chern_oracle", &bloch_chern_oracle, py::arg("spec"), py::arg("n_bands_filled"),
        py::arg("k_grid") = 36);

  py::class_<CertificateClause>(m, "CertificateClause")
      .def_readonly("name", &CertificateClause::name)
      .def_readonly("measured", &CertificateClause::measured)
      .def_readonly("threshold", &CertificateClause::threshold)
      .def_readonly("passed", &CertificateClause::pass);
  py::class_<InsulatorCertificate>(m, "InsulatorCertificate")
      .def_readonly("passed", &InsulatorCertificate::pass)
      .def_readonly("clauses", &InsulatorCertificate::clauses)
      .def_readonly("amplitude", &InsulatorCertificate::b1_envelope_amplitude)
      .def_property_readonly("rate", [](const InsulatorCertificate& c) { return c.b1_fit.rate; });
  m.def(
      "insulator_certificate",
      [](const BlockOperator& h, const EnergyWindow& window) {
        return insulator_certificate(h, window, CertificateThresholds{});
      },
      py::arg("h"), py::arg("window"));
  m.def("fermi_avg_projection_diff", &fermi_avg_projection_diff, py::arg("dec_a"), py::arg("dec_b"),
        py::arg("window"), py::arg("x"), py::arg("y"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
