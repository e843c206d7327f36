#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kslab/cli.hpp"
#include "kslab/errors.hpp"
#include "kslab/verification.hpp"

namespace py = pybind11;
using namespace kslab;
using spectral::Field;
using spectral::GridSpec;

namespace {

Field field_from_array(const GridSpec& g, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (static_cast<std::size_t>(a.size()) != g.points())
    throw InvalidGrid("array has " + std::to_string(a.size()) + " samples, grid has " + std::to_string(g.points()));
  spectral::RealVec v(a.data(), a.data() + a.size());
  return Field::scalar_physical(g, std::move(v));
}

py::array_t<double> samples(const Field& f, int comp) {
  const auto& x = f.physical(comp);
  std::vector<py::ssize_t> shape(f.grid().n.begin(), f.grid().n.end());
  py::array_t<double> out(shape);
  std::copy(x.begin(), x.end(), out.mutable_data());
  return out;
}

py::dict report_dict(const verification::CheckReport& r) {
  py::dict d;
  d["check_id"] = r.check_id;
  d["passed"] = r.passed();
  d["worst_slack"] = r.worst_slack();
  d["first_failure"] = r.first_failure();
  py::list rows;
  for (const auto& m : r.measured) rows.append(py::make_tuple(m.params, m.lhs, m.rhs, m.slack));
  d["measurements"] = rows;
  py::list fits;
  for (const auto& f : r.fits) fits.append(py::make_tuple(f.name, f.slope, f.std_error, f.target, f.pass()));
  d["fits"] = fits;
  d["constants"] = r.constants;
  d["notes"] = r.notes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_kslab, m) {
  m.doc() = "Spectral laboratory: Littlewood-Paley blocks, Besov norms, atom data and the chemotaxis solver";
  m.attr("__version__") = "1.0.0";

  static py::exception<Error> err(m, "KslabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(err, e.what());
    }
  });

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<int, int, double>(), py::arg("d"), py::arg("points"), py::arg("length"))
      .def(py::init<std::vector<int>, std::vector<double>>(), py::arg("points"), py::arg("lengths"))
      .def_readonly("d", &GridSpec::d)
      .def_readonly("n", &GridSpec::n)
      .def_readonly("L", &GridSpec::L)
      .def("nyquist", &GridSpec::nyquist)
      .def("__repr__", [](const GridSpec& g) {
        std::string s = "GridSpec(n=[";
        for (int i = 0; i < g.d; ++i) s += (i ? "," : "") + std::to_string(g.n[static_cast<std::size_t>(i)]);
        return s + "])";
      });

  py::class_<Field>(m, "Field")
      .def_static("from_samples", &field_from_array, py::arg("grid"), py::arg("samples"))
      .def_static("zeros", [](const GridSpec& g) { return Field::zeros(g); })
      .def("samples", &samples, py::arg("comp") = 0)
      .def_property_readonly("components", &Field::components)
      .def_property_readonly("grid", &Field::grid);

  py::class_<spectral::BesovParams>(m, "BesovParams")
      .def(py::init<double, double, double>(), py::arg("s"), py::arg("p"), py::arg("r"))
      .def_readwrite("s", &spectral::BesovParams::s)
      .def_readwrite("p", &spectral::BesovParams::p)
      .def_readwrite("r", &spectral::BesovParams::r);

  m.def("lebesgue_norm", [](const Field& f, double p) { return spectral::lebesgue_norm(f, p); });
  m.def("besov_norm", [](const Field& f, double s, double p, double r) {
    return spectral::besov_norm(f, {s, p, r}, spectral::build_cutoffs(4));
  }, py::arg("field"), py::arg("s"), py::arg("p"), py::arg("r"));
  m.def("shell_energy", [](const Field& f) {
    const auto range = spectral::resolvable_range(f.grid());
    const auto e = spectral::shell_energy(f, spectral::build_cutoffs(4), range);
    py::dict out;
    for (int j = range.lo; j <= range.hi; ++j) out[py::int_(j)] = e[static_cast<std::size_t>(j - range.lo)];
    return out;
  });
  m.def("heat_propagate", &spectral::heat_propagate, py::arg("field"), py::arg("t"));

  py::class_<construction::AtomSpec>(m, "AtomSpec")
      .def(py::init<>())
      .def_readwrite("beta", &construction::AtomSpec::beta)
      .def_readwrite("plateau_fraction", &construction::AtomSpec::plateau_fraction)
      .def_readwrite("modulation_inner", &construction::AtomSpec::modulation_inner);
  m.def("theta_hat", &construction::theta_hat, py::arg("spec"), py::arg("xi"));

  py::class_<construction::ConstructionParams>(m, "ConstructionParams")
      .def(py::init<>())
      .def_readwrite("d", &construction::ConstructionParams::d)
      .def_readwrite("r", &construction::ConstructionParams::r)
      .def_readwrite("m", &construction::ConstructionParams::m)
      .def_readwrite("K", &construction::ConstructionParams::K)
      .def_readwrite("offsets", &construction::ConstructionParams::offsets)
      .def_readwrite("count_factor", &construction::ConstructionParams::count_factor)
      .def("violations", [](const construction::ConstructionParams& p, const construction::AtomSpec& s) {
        return construction::violations(p, s);
      });

  py::class_<verification::Family>(m, "Family")
      .def_readonly("params", &verification::Family::params)
      .def_readonly("spec", &verification::Family::spec)
      .def_readonly("grid", &verification::Family::grid);
  m.def("default_family", &verification::default_family);
  m.def("fractional_family", &verification::fractional_family, py::arg("count"), py::arg("count_max"),
        py::arg("separation_units"), py::arg("beta") = 0.4, py::arg("m") = 4, py::arg("r") = 1.0);
  m.def("make_family", &verification::make_family, py::arg("params"), py::arg("spec"), py::arg("lengths"),
        py::arg("nyquist_factor") = 3.0);

  m.def("build_f", [](const verification::Family& f) { return construction::build_f(f.params, f.spec, f.grid); });
  m.def("build_initial_data", [](const verification::Family& f) {
    const auto d = construction::build_initial_data(f.params, f.spec, f.grid, spectral::build_cutoffs(4));
    py::dict out;
    out["u0"] = d.u0;
    out["v0"] = d.v0;
    out["u0_besov"] = d.u0_besov;
    out["v0_besov"] = d.v0_besov;
    return out;
  });

  m.def("solve", [](const Field& u0, const Field& v0, double T, const std::string& integrator, int steps) {
    evolution::SolverConfig sc;
    sc.integrator = evolution::parse_integrator(integrator);
    sc.steps = steps;
    sc.output_stride = 1 << 30;
    const auto sol = evolution::solve_chemotaxis(u0, v0, T, sc);
    return py::make_tuple(sol.u.frames.back(), sol.v.frames.back(), sol.max_mean_drift);
  }, py::arg("u0"), py::arg("v0"), py::arg("T"), py::arg("integrator") = "if_rk4", py::arg("steps") = 0);

  m.def("check_ids", &verification::check_ids);
  m.def("run_check", [](const std::string& id, std::uint64_t seed, int corpus_size) {
    verification::CheckReport r;
    {
      py::gil_scoped_release release;
      r = verification::run_check(id, seed, corpus_size);
    }
    return report_dict(r);
  }, py::arg("id"), py::arg("seed") = 12, py::arg("corpus_size") = 0);

  m.def("default_config", [] { return cli::dump_config(cli::ExperimentConfig{}); });
  m.def("validate_config", [](const std::string& text) {
    try {
      cli::parse_config(text);
      return std::vector<std::string>{};
    } catch (const ValidationError& e) {
      return e.violations();
    }
  });
}
