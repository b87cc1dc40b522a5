#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "micropolar/cli.hpp"
#include "micropolar/errors.hpp"
#include "micropolar/green.hpp"
#include "micropolar/parallel.hpp"

namespace py = pybind11;
using namespace micropolar;

namespace {

using CArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

ScalarField field_from_array(const GridSpec& g, const CArray& a, bool real) {
  if (a.ndim() != 3 || a.shape(0) != g.n() || a.shape(1) != g.n() || a.shape(2) != g.n())
    throw StructuralError("coefficient array must have shape (n, n, n)");
  std::vector<Complex> modes(a.data(), a.data() + g.size());
  return ScalarField(g, std::move(modes), real);
}

py::array_t<double> mat_to_array(const green::Mat2& m) {
  py::array_t<double> out({2, 2});
  auto r = out.mutable_unchecked<2>();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = m(i, j);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pseudospectral micropolar fluid lab: core bindings";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<BlowUpError>(m, "BlowUpError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<int, double>(), py::arg("n"), py::arg("length"))
      .def_property_readonly("n", &GridSpec::n)
      .def_property_readonly("length", &GridSpec::length)
      .def_property_readonly("unit", &GridSpec::unit)
      .def_property_readonly("dealias_cutoff", &GridSpec::dealias_cutoff);

  m.def("worker_count", &worker_count);
  m.def("set_worker_count", &set_worker_count, py::arg("n"));

  m.def(
      "reduced_green", [](double rho, double t) { return mat_to_array(green::reduced_green_eval(rho, t)); },
      py::arg("rho"), py::arg("t"), "2x2 reduced propagator exp(-t A(rho)).");
  m.def(
      "reduced_generator", [](double rho) { return mat_to_array(green::reduced_generator(rho)); },
      py::arg("rho"));

  m.def(
      "besov_norm",
      [](const CArray& coeffs, double length, double s, double p, double q, bool real) {
        const GridSpec g(static_cast<int>(coeffs.shape(0)), length);
        return lp::besov_norm(field_from_array(g, coeffs, real), {s, p, q});
      },
      py::arg("coeffs"), py::arg("length"), py::arg("s"), py::arg("p"), py::arg("q") = lp::kInf,
      py::arg("real") = true, "Homogeneous Besov norm of a scalar field given by its (n, n, n) coefficients.");

  m.def(
      "config_violations",
      [](const std::string& text) -> std::vector<std::string> {
        try {
          cli::parse_config(text);
        } catch (const ValidationError& e) {
          return e.violations();
        }
        return {};
      },
      py::arg("text"), "Every violated rule of a TOML configuration; empty when valid.");

  m.def(
      "read_snapshot",
      [](const std::string& path) {
        const cli::Snapshot s = cli::read_snapshot(path);
        const py::ssize_t n = s.grid.n();
        py::array_t<std::complex<double>> fields({static_cast<py::ssize_t>(s.fields.size()), n, n, n});
        auto* out = fields.mutable_data();
        for (const auto& f : s.fields) out = std::copy(f.modes().begin(), f.modes().end(), out);
        py::dict d;
        d["n"] = s.grid.n();
        d["length"] = s.grid.length();
        d["real"] = s.real;
        d["fields"] = fields;
        return d;
      },
      py::arg("path"), "Snapshot as {n, length, real, fields[count, n, n, n]}.");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "micropolar");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        std::ostringstream out, err;
        const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool in-process; returns (exit code, stdout, stderr).");

  m.def(
      "verify_green_report",
      [](std::uint64_t seed, int samples, int modes) {
        verify::Report r;
        r.suite = "green";
        r.checks = {verify::check_reduced_vs_ode(seed, samples), verify::check_full_vs_reduced(seed + 1, modes),
                    verify::check_generator_eigenvalues(), verify::check_propagator_bounded(),
                    verify::check_semigroup(seed + 2)};
        return verify::to_json(r);
      },
      py::arg("seed") = 0, py::arg("samples") = 100, py::arg("modes") = 20,
      "JSON report of the closed-form propagator checks.");
}
