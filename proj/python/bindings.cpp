#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mipt/collapse.hpp"
#include "mipt/errors.hpp"
#include "mipt/exact_oracle.hpp"
#include "mipt/lattice.hpp"
#include "mipt/observables.hpp"
#include "mipt/theory.hpp"
#include "mipt/trajectory.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

mipt::collapse::ScalingDataset dataset(const std::vector<double>& L,
                                       const std::vector<double>& gamma,
                                       const std::vector<double>& value,
                                       const std::vector<double>& err) {
  if (gamma.size() != L.size() || value.size() != L.size() || err.size() != L.size()) {
    throw mipt::InvalidInput("L, gamma, value and err must have the same length");
  }
  mipt::collapse::ScalingDataset d;
  for (std::size_t i = 0; i < L.size(); ++i) d.points.push_back({L[i], gamma[i], value[i], err[i]});
  return d;
}

mipt::Region region(const mipt::LatticeSpec& spec, const std::vector<mipt::Index>& sites) {
  return mipt::Region::from_sites(spec, sites);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian-state trajectories of monitored free fermions and their analysis.";
  m.attr("__version__") = MIPT_VERSION;

  py::register_exception<mipt::InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<mipt::NoTransition>(m, "NoTransition", PyExc_ValueError);
  py::register_exception<mipt::NumericalDegradation>(m, "NumericalDegradation",
                                                     PyExc_RuntimeError);
  py::register_exception<mipt::IoError>(m, "IoError", PyExc_OSError);

  py::class_<mipt::LatticeSpec>(m, "LatticeSpec")
      .def(py::init([](int dim, int size, double hopping) {
             mipt::LatticeSpec s;
             s.dim = dim;
             s.size = size;
             s.hopping = hopping;
             s.validate();
             return s;
           }),
           "dim"_a = 2, "size"_a = 16, "hopping"_a = 1.0)
      .def_readonly("dim", &mipt::LatticeSpec::dim)
      .def_readonly("size", &mipt::LatticeSpec::size)
      .def_readonly("hopping", &mipt::LatticeSpec::hopping)
      .def_property_readonly("num_sites", &mipt::LatticeSpec::num_sites)
      .def("__repr__", [](const mipt::LatticeSpec& s) {
        return "LatticeSpec(dim=" + std::to_string(s.dim) + ", size=" + std::to_string(s.size) +
               ", hopping=" + std::to_string(s.hopping) + ")";
      });

  m.def("energies", [](const mipt::LatticeSpec& s) { return mipt::build_spectrum(s).energies; },
        "Single-particle energies, ascending.", "spec"_a);
  m.def("dispersion",
        [](const mipt::LatticeSpec& s, const std::vector<int>& m_index) {
          return mipt::dispersion(s, std::span<const int>(m_index));
        },
        "E(k) at k = 2 pi m / L.", "spec"_a, "m"_a);

  m.def(
      "run_trajectory",
      [](const mipt::LatticeSpec& spec, double gamma, std::uint64_t seed, double filling,
         std::optional<double> total_time, const std::string& initial) {
        mipt::TrajectoryConfig c;
        c.lattice = spec;
        c.gamma = gamma;
        c.filling = filling;
        c.total_time = total_time;
        c.initial = mipt::parse_initial_state(initial);
        c.validate();
        mipt::TrajectoryResult r;
        {
          py::gil_scoped_release release;
          r = mipt::run_trajectory(c, seed);
        }
        return py::dict("green"_a = r.green, "n_measurements"_a = r.n_measurements,
                        "n_clicks"_a = r.n_clicks, "n_repurifications"_a = r.n_repurifications,
                        "total_time"_a = r.total_time, "config_digest"_a = r.config_digest);
      },
      "One measurement trajectory; returns the final coordinate Green function and counters.",
      "spec"_a, "gamma"_a, "seed"_a, "filling"_a = 0.5, "total_time"_a = py::none(),
      "initial"_a = "ground");

  m.def("density_correlator", &mipt::density_correlator, "green"_a);
  m.def(
      "entanglement_entropy",
      [](const mipt::LatticeSpec& s, const Eigen::MatrixXcd& g,
         const std::vector<mipt::Index>& sites) {
        return mipt::entanglement_entropy(g, region(s, sites));
      },
      "spec"_a, "green"_a, "sites"_a);
  m.def(
      "covariance",
      [](const mipt::LatticeSpec& s, const Eigen::MatrixXcd& g, const std::vector<mipt::Index>& a,
         const std::vector<mipt::Index>& b) {
        return mipt::covariance(g, region(s, a), region(s, b));
      },
      "spec"_a, "green"_a, "a"_a, "b"_a);
  m.def("fcs_cumulants", &mipt::fcs_cumulants_from_spectrum,
        "Cumulants kappa_1..kappa_n from the eigenvalues of G_A.", "eigenvalues"_a,
        "max_order"_a);
  m.def("q_tilde", &mipt::q_tilde, "q"_a);
  m.def("chord_length", &mipt::chord_length, "size"_a, "ell"_a);

  m.def("rg_closed_form", &mipt::theory::rg_closed_form, "G0"_a, "epsilon"_a, "replicas"_a,
        "t"_a);
  m.def(
      "rg_flow",
      [](double G0, double epsilon, double replicas, double l0, double ell_max, int samples) {
        const auto f = mipt::theory::rg_flow(G0, epsilon, replicas, l0, ell_max, samples);
        std::vector<double> ell, G, exact;
        for (const auto& s : f.states) {
          ell.push_back(s.ell);
          G.push_back(s.G);
          exact.push_back(s.G_exact);
        }
        return py::dict("ell"_a = ell, "G"_a = G, "G_exact"_a = exact,
                        "localized"_a = f.localized, "ell_localized"_a = f.ell_localized);
      },
      "G0"_a, "epsilon"_a, "replicas"_a = 1.0, "l0"_a = 1.0, "ell_max"_a = 1e6,
      "samples"_a = 101);
  m.def(
      "critical_quantities",
      [](double epsilon, double replicas, double G0, double l0) {
        const auto c = mipt::theory::critical_quantities(epsilon, replicas, G0, l0);
        return py::dict("G_c"_a = c.G_c, "nu"_a = c.nu, "zeta"_a = c.zeta, "l_corr"_a = c.l_corr);
      },
      "epsilon"_a, "replicas"_a = 1.0, "G0"_a = 1.0, "l0"_a = 1.0);

  py::class_<mipt::collapse::CollapseResult>(m, "CollapseResult")
      .def_readonly("gamma_c", &mipt::collapse::CollapseResult::gamma_c)
      .def_readonly("nu", &mipt::collapse::CollapseResult::nu)
      .def_readonly("zeta", &mipt::collapse::CollapseResult::zeta)
      .def_readonly("chi2", &mipt::collapse::CollapseResult::chi2)
      .def_readonly("covariance", &mipt::collapse::CollapseResult::covariance)
      .def_readonly("gamma_c_err", &mipt::collapse::CollapseResult::gamma_c_err)
      .def_readonly("nu_err", &mipt::collapse::CollapseResult::nu_err)
      .def_readonly("zeta_err", &mipt::collapse::CollapseResult::zeta_err)
      .def_readonly("converged", &mipt::collapse::CollapseResult::converged)
      .def_readonly("iterations", &mipt::collapse::CollapseResult::iterations)
      .def_readonly("errors_reliable", &mipt::collapse::CollapseResult::errors_reliable)
      .def_readonly("n_points", &mipt::collapse::CollapseResult::n_points)
      .def_readonly("excluded_points", &mipt::collapse::CollapseResult::excluded_points);

  m.def(
      "quality",
      [](const std::vector<double>& L, const std::vector<double>& gamma,
         const std::vector<double>& value, const std::vector<double>& err, double nu,
         double gamma_c, double zeta) {
        return mipt::collapse::quality(dataset(L, gamma, value, err), nu, gamma_c, zeta);
      },
      "L"_a, "gamma"_a, "value"_a, "err"_a, "nu"_a, "gamma_c"_a, "zeta"_a = 0.0);
  m.def(
      "fit_collapse",
      [](const std::vector<double>& L, const std::vector<double>& gamma,
         const std::vector<double>& value, const std::vector<double>& err, double gamma_c,
         double nu, bool fit_zeta, std::optional<std::pair<double, double>> window) {
        mipt::collapse::FitOptions o;
        o.fit_zeta = fit_zeta;
        o.window = window;
        return mipt::collapse::fit_collapse(dataset(L, gamma, value, err), gamma_c, nu, o);
      },
      "L"_a, "gamma"_a, "value"_a, "err"_a, "gamma_c"_a, "nu"_a, "fit_zeta"_a = false,
      "window"_a = std::optional<std::pair<double, double>>(std::pair{2.4, 3.4}));
  m.def(
      "extrapolate_q0",
      [](const std::vector<double>& q, const std::vector<double>& y,
         const std::vector<double>& dy) {
        const auto r = mipt::collapse::extrapolate_q0(std::span<const double>(q),
                                                      std::span<const double>(y),
                                                      std::span<const double>(dy));
        return py::make_tuple(r.value, r.std_err);
      },
      "Weighted cubic fit through five points, evaluated at q = 0: (value, std_err).", "q"_a,
      "y"_a, "dy"_a);
  m.def(
      "crossing",
      [](const std::vector<double>& L, const std::vector<double>& gamma,
         const std::vector<double>& value) {
        std::vector<double> err(L.size(), 1.0);
        const auto est =
            mipt::collapse::crossing_locator(mipt::collapse::curves_from(dataset(L, gamma, value, err)));
        return py::dict("found"_a = est.found, "median"_a = est.median, "spread"_a = est.spread,
                        "crossings"_a = est.crossings);
      },
      "L"_a, "gamma"_a, "value"_a);

  m.def(
      "oracle_check",
      [](int dim, int size, double gamma, std::size_t events, std::uint64_t seed,
         const std::string& initial) {
        mipt::TrajectoryConfig c;
        c.lattice.dim = dim;
        c.lattice.size = size;
        c.gamma = gamma;
        c.initial = mipt::parse_initial_state(initial);
        c.validate();
        const auto r = mipt::exact::oracle_check(c, events, seed);
        return py::dict("steps"_a = r.report.steps,
                        "max_probability_deviation"_a = r.report.max_probability_deviation,
                        "max_green_deviation"_a = r.report.max_green_deviation);
      },
      "Gaussian engine against the brute-force many-body simulator.", "dim"_a = 2, "size"_a = 2,
      "gamma"_a = 1.0, "events"_a = 50, "seed"_a = 1, "initial"_a = "ground");
}
