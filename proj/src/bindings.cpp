#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qpair/analysis.hpp"
#include "qpair/lindblad.hpp"

namespace py = pybind11;
using namespace qpair;

namespace {

EnsembleOptions make_options(double dt, bool leak_out, double leak_window,
                             int snapshot_stride) {
  EnsembleOptions o;
  o.dt = dt;
  o.leak_out = leak_out;
  o.leak_window = leak_window;
  o.snapshot_stride = snapshot_stride;
  return o;
}

py::dict merit_dict(const MeritFigures& m) {
  py::dict d;
  d["n"] = m.n;
  d["P"] = m.P;
  d["se_P"] = m.se_P;
  d["p2ph"] = m.p2ph;
  d["se_p2ph"] = m.se_p2ph;
  d["alpha"] = m.alpha;
  d["se_alpha"] = m.se_alpha;
  d["F_model"] = m.F_model;
  d["se_F_model"] = m.se_F_model;
  d["F_direct"] = m.F_direct;
  d["se_F_direct"] = m.se_F_direct;
  d["S_fixed"] = m.S_fixed;
  d["se_S_fixed"] = m.se_S_fixed;
  d["S_opt"] = m.S_opt;
  d["se_S_opt"] = m.se_S_opt;
  d["p2ph_exit"] = m.p2ph_exit;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cavity-mediated entangled-photon-pair source simulator";

  py::register_exception<IntegrationError>(m, "IntegrationError");
  py::register_exception<CalibrationError>(m, "CalibrationError");
  py::register_exception<StepSizeError>(m, "StepSizeError");
  py::register_exception<ClassificationError>(m, "ClassificationError");
  py::register_exception<PostSelectionError>(m, "PostSelectionError");

  py::enum_<PulseShape>(m, "PulseShape")
      .value("gaussian", PulseShape::gaussian)
      .value("square", PulseShape::square);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("g", &ModelParams::g)
      .def_readwrite("amp1", &ModelParams::amp1)
      .def_readwrite("amp2", &ModelParams::amp2)
      .def_readwrite("delta_plus", &ModelParams::delta_plus)
      .def_readwrite("delta_minus", &ModelParams::delta_minus)
      .def_readwrite("t1", &ModelParams::t1)
      .def_readwrite("t_flight", &ModelParams::t_flight)
      .def_readwrite("t2", &ModelParams::t2)
      .def_readwrite("tau1", &ModelParams::tau1)
      .def_readwrite("tau2", &ModelParams::tau2)
      .def_readwrite("pulse_shape", &ModelParams::pulse_shape)
      .def_readwrite("kappa", &ModelParams::kappa)
      .def_readwrite("gamma", &ModelParams::gamma)
      .def_readwrite("n_max", &ModelParams::n_max)
      .def("set_kappa", &ModelParams::set_kappa)
      .def("t_exit", &ModelParams::t_exit)
      .def("validate", &ModelParams::validate)
      .def("__repr__", [](const ModelParams& p) {
        return "<ModelParams " + to_string(p.pulse_shape) +
               " kappa=" + std::to_string(p.kappa[0]) +
               " gamma=" + std::to_string(p.gamma) + ">";
      });

  m.def("preset", &preset, py::arg("name"));
  m.def("preset_names", &preset_names);
  m.def("coupling", &coupling, py::arg("cavity"), py::arg("t"), py::arg("params"));
  m.def("detunings_from_field", &detunings_from_field, py::arg("b_tesla"),
        py::arg("g_j") = 1.5);
  m.def("pulse_area", &pulse_area, py::arg("params"), py::arg("cavity"));
  m.def(
      "calibrate_pulse",
      [](const ModelParams& p, int cavity, const std::string& mode, double target) {
        CalibrationMode cm = mode == "width" ? CalibrationMode::width
                                             : CalibrationMode::amplitude;
        if (mode != "width" && mode != "amplitude")
          throw std::invalid_argument("mode must be 'width' or 'amplitude'");
        return calibrate_pulse(p, cavity, cm, target);
      },
      py::arg("params"), py::arg("cavity"), py::arg("mode") = "amplitude",
      py::arg("target_area") = 3.14159265358979323846);

  m.def("analytic_cavity1", &analytic_cavity1, py::arg("t"), py::arg("g1"),
        py::arg("delta"));
  m.def("analytic_cavity2", &analytic_cavity2, py::arg("t_prime"), py::arg("g2"),
        py::arg("delta"));

  // Closed-system population curves for the landmark states, as columns
  // (g_t, I, B, D, E+, E-).
  m.def(
      "coherent_populations",
      [](const ModelParams& p, double dt, int stride) {
        auto basis = FockBasis::simulation_space(p.n_max);
        auto psi0 = named_state(NamedState::I, basis);
        auto res = evolve(psi0, p, 0.0, p.t_exit(), dt, stride);
        auto named = all_named_states(basis);
        Eigen::MatrixXd out(res.times.size(), 6);
        for (size_t k = 0; k < res.times.size(); ++k) {
          out(k, 0) = res.times[k] * p.g;
          for (int c = 0; c < 5; ++c)
            out(k, c + 1) = std::norm(named[c].amps().dot(res.snapshots[k]));
        }
        return out;
      },
      py::arg("params"), py::arg("dt") = 1e-3, py::arg("stride") = 10);

  py::class_<EnsembleStats>(m, "EnsembleStats")
      .def_readonly("n", &EnsembleStats::n)
      .def_readonly("click_counts", &EnsembleStats::click_counts)
      .def_readonly("total_jumps", &EnsembleStats::total_jumps)
      .def_readonly("norm_violations", &EnsembleStats::norm_violations)
      .def_property_readonly("mean_exit_populations",
                             [](const EnsembleStats& s) {
                               return Eigen::VectorXd(s.exit_pop_sum / double(s.n));
                             })
      .def_property_readonly("series_times",
                             [](const EnsembleStats& s) { return s.series.times; })
      .def_property_readonly("series_mean", [](const EnsembleStats& s) {
        return Eigen::MatrixXd(s.series.sum / double(s.n));
      });

  m.def(
      "run_ensemble",
      [](const ModelParams& p, std::int64_t n, std::uint64_t seed, int workers,
         double dt, bool leak_out, double leak_window, int snapshot_stride) {
        py::gil_scoped_release nogil;
        return run_ensemble(p, n, seed, workers,
                            make_options(dt, leak_out, leak_window, snapshot_stride));
      },
      py::arg("params"), py::arg("n"), py::arg("seed") = 12345,
      py::arg("workers") = 1, py::arg("dt") = 1e-3, py::arg("leak_out") = true,
      py::arg("leak_window") = -1.0, py::arg("snapshot_stride") = 0);

  m.def("merit_figures",
        [](const EnsembleStats& s) { return merit_dict(merit_figures(s)); });
  m.def("classify_events", [](const EnsembleStats& s) {
    auto masses = classify_events(s);
    py::dict d;
    for (int c = 0; c < 5; ++c)
      d[to_string(static_cast<EventClass>(c)).c_str()] = masses[c];
    return d;
  });

  // Master-equation oracle: final populations on the 15-state basis.
  m.def(
      "oracle_populations",
      [](const ModelParams& p, double t_end, double dt) {
        auto basis = FockBasis::simulation_space(p.n_max);
        auto psi0 = named_state(NamedState::I, basis);
        if (t_end < 0) t_end = p.t_exit();
        auto res = evolve_density(DensityMatrix::pure(psi0), p, t_end, dt, 0);
        return Eigen::VectorXd(res.final_state().diagonal());
      },
      py::arg("params"), py::arg("t_end") = -1.0, py::arg("dt") = 1e-3);

  m.def("basis_labels", [](int n_max) {
    auto basis = FockBasis::simulation_space(n_max);
    std::vector<std::string> out;
    for (const BasisState& s : basis->states()) out.push_back(to_string(s));
    return out;
  }, py::arg("n_max") = 2);

  m.def("fidelity_model", &fidelity_model, py::arg("alpha"));
  m.def("rho_model",
        [](double alpha) { return Eigen::Matrix4cd(rho_model(alpha).rho); },
        py::arg("alpha"));
  m.def("chsh_fixed",
        [](const Eigen::Matrix4cd& rho) { return chsh_fixed({rho}); },
        py::arg("rho"));
  m.def("chsh_optimal",
        [](const Eigen::Matrix4cd& rho) { return chsh_optimal({rho}); },
        py::arg("rho"));
}
