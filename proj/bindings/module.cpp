#include "quditls/config.hpp"
#include "quditls/entangle.hpp"
#include "quditls/gates.hpp"
#include "quditls/lightshift.hpp"
#include "quditls/measure.hpp"
#include "quditls/noise.hpp"
#include "quditls/runner.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace quditls;

namespace {

lightshift::SolveConstraint parse_constraint(const std::string& s) {
    if (s == "fix_delta") return lightshift::SolveConstraint::FixDelta;
    if (s == "fix_shift") return lightshift::SolveConstraint::FixShift;
    throw std::invalid_argument("constraint must be 'fix_delta' or 'fix_shift'");
}

py::dict fit_to_dict(const measure::DecayFit& fit) {
    py::dict d;
    d["per_gate_fidelity"] = fit.f;
    d["per_gate_fidelity_raw"] = fit.f_raw;
    d["per_gate_fidelity_err"] = fit.f_err;
    d["spam_amplitude"] = fit.amplitude;
    d["spam_amplitude_err"] = fit.amplitude_err;
    d["chi2"] = fit.chi2;
    d["dof"] = fit.dof;
    d["non_exponential"] = fit.non_exponential;
    return d;
}

py::dict report_to_dict(const entangle::EntanglementReport& rep) {
    py::dict d;
    d["dimension"] = rep.d;
    d["fidelity"] = rep.fidelity;
    d["fidelity_err"] = rep.fidelity_err;
    d["fidelity_threshold"] = rep.fidelity_threshold;
    d["schmidt_number_certified"] = rep.schmidt_number_certified;
    d["concurrence"] = rep.concurrence;
    d["concurrence_err"] = rep.concurrence_err;
    d["max_concurrence"] = rep.max_concurrence;
    d["eof_lower_bound"] = rep.eof_lower_bound;
    d["pure_state_path"] = rep.pure_state_path;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-qudit light-shift gate simulator for trapped ions";

    // --- ideal gate algebra -------------------------------------------------
    m.def("rotation", &gates::rotation_R, py::arg("d"), py::arg("j"), py::arg("k"),
          py::arg("theta"), py::arg("phi") = 0.0,
          "Symmetric two-ion rotation R^{j,k}(theta, phi) on the d*d spin space");
    m.def("cyclic_shift", &gates::cyclic_shift, py::arg("d"));
    m.def("preparation", &gates::preparation_P, py::arg("d"));
    m.def("gate_G", &gates::ideal_gate_G, py::arg("d"), py::arg("theta"));
    m.def("ideal_final_state", &gates::ideal_final_state, py::arg("d"), py::arg("theta"),
          py::arg("n_gates") = 1);
    m.def("target_state", [](int d) { return gates::target_state(d).lambda; },
          py::arg("d"), "Schmidt coefficients of the reference target state");
    m.def(
        "entangling_phase",
        [](int d) {
            const auto ep = gates::entangling_phase(d);
            py::dict out;
            out["theta"] = ep.theta;
            out["fidelity"] = ep.fidelity;
            out["state"] = ep.state;
            return out;
        },
        py::arg("d"), "Gate phase maximizing the fidelity to the target state");

    // --- light-shift pulse model --------------------------------------------
    py::class_<lightshift::LightShiftParams>(m, "LightShiftParams")
        .def_readonly("delta", &lightshift::LightShiftParams::delta)
        .def_readonly("eta", &lightshift::LightShiftParams::eta)
        .def_readonly("t_g", &lightshift::LightShiftParams::t_g)
        .def_readonly("shifts", &lightshift::LightShiftParams::shifts)
        .def_readonly("spatial_phase", &lightshift::LightShiftParams::spatial_phase)
        .def_property_readonly(
            "n_max", [](const lightshift::LightShiftParams& p) { return p.mode.n_max; });

    m.def(
        "solve_gate_params",
        [](int d, double theta, double eta, const std::string& constraint, double value,
           double spacing, int n_max) {
            return lightshift::solve_gate_params(d, theta, eta,
                                                 parse_constraint(constraint), value,
                                                 spacing, n_max);
        },
        py::arg("d"), py::arg("theta"), py::arg("eta") = 0.167,
        py::arg("constraint") = "fix_delta",
        py::arg("value") = 2 * 3.14159265358979323846 / 35e-6,
        py::arg("spacing") = 3.14159265358979323846, py::arg("n_max") = 20);
    m.def("pulse_phase", &lightshift::geometric_phase, py::arg("params"), py::arg("j"),
          py::arg("k"), py::arg("t"), "Enclosed-area phase of spin state |jk> at time t");
    m.def("propagator_analytic", &lightshift::ls_propagator_analytic, py::arg("params"),
          py::arg("t"), py::arg("d"));
    m.def("propagator_numeric", &lightshift::ls_propagator_numeric, py::arg("params"),
          py::arg("t"), py::arg("d"), py::arg("n_steps") = 600,
          py::arg("conv_tol") = 1e-8);
    m.def("composed_gate", &lightshift::composed_gate, py::arg("params"), py::arg("d"));
    m.def(
        "spacing_scan",
        [](double spacing_phase, double t, double eta, double shift) {
            lightshift::TrapConfig trap;
            lightshift::LightShiftParams p;
            p.delta = 0;
            p.eta = eta;
            p.shifts[0] = {shift};
            p.shifts[1] = {shift};
            p.spatial_phase = {0.0, spacing_phase};
            const auto pt = lightshift::spacing_scan(trap, p, t);
            return py::make_tuple(pt.com_nbar, pt.breathing_nbar);
        },
        py::arg("spacing_phase"), py::arg("t") = 10e-6, py::arg("eta") = 0.167,
        py::arg("shift") = 2 * 3.14159265358979323846 * 1e5,
        "COM and breathing excitation under a resonant pulse");

    // --- entanglement certification ------------------------------------------
    m.def(
        "schmidt_threshold",
        [](int d, int r) { return entangle::schmidt_threshold(gates::target_state(d), r); },
        py::arg("d"), py::arg("r"));
    m.def(
        "certify_schmidt_number",
        [](double f, int d) {
            return entangle::certify_schmidt_number(f, gates::target_state(d));
        },
        py::arg("fidelity"), py::arg("d"));
    m.def("concurrence_pure", &entangle::concurrence_pure, py::arg("psi"), py::arg("d"));
    m.def("concurrence_lower_bound",
          py::overload_cast<const CMat&, int>(&entangle::concurrence_lower_bound),
          py::arg("rho_spin"), py::arg("d"));
    m.def("max_concurrence", &entangle::max_concurrence, py::arg("d"));
    m.def("eof_lower_bound", &entangle::eof_lower_bound, py::arg("concurrence"),
          py::arg("d"));
    m.def(
        "full_report",
        [](const CMat& rho_spin, int d) {
            return report_to_dict(entangle::full_report(rho_spin, gates::target_state(d)));
        },
        py::arg("rho_spin"), py::arg("d"));

    // --- measurement and estimation -------------------------------------------
    m.def(
        "decay_fit",
        [](const std::vector<int>& ns, const std::vector<double>& f,
           const std::vector<double>& var) {
            return fit_to_dict(measure::decay_fit(ns, f, var));
        },
        py::arg("gate_counts"), py::arg("fidelities"),
        py::arg("variances") = std::vector<double>{});
    m.def("entangled_gate_counts", &measure::entangled_gate_counts, py::arg("d"),
          py::arg("theta"), py::arg("n_max") = 9);
    m.def(
        "bayes_coherence",
        [](const std::vector<double>& phases, const std::vector<std::int64_t>& n_even,
           std::int64_t shots) {
            if (phases.size() != n_even.size())
                throw std::invalid_argument("phases and n_even must have equal length");
            std::vector<measure::ShotRecord> recs(phases.size());
            for (size_t i = 0; i < phases.size(); ++i) {
                recs[i].phase = phases[i];
                recs[i].shots = shots;
                recs[i].counts = {n_even[i], shots - n_even[i], 0, 0};
            }
            const auto est = measure::bayes_coherence(recs);
            py::dict out;
            out["magnitude"] = est.magnitude;
            out["sigma"] = est.sigma;
            out["ci68"] = est.ci68;
            out["ci95"] = est.ci95;
            return out;
        },
        py::arg("phases"), py::arg("n_even"), py::arg("shots"),
        "Posterior coherence magnitude from parity counts per phase setting");

    // --- noise model -----------------------------------------------------------
    m.def(
        "simulate_noisy_gate",
        [](int d, int n_gates, int samples, std::uint64_t seed, int n_max,
           const std::string& single_source, int threads) {
            const double theta = gates::entangling_phase(d).theta;
            auto params = lightshift::solve_gate_params(
                d, theta, 0.167, lightshift::SolveConstraint::FixDelta,
                2 * 3.14159265358979323846 / 35e-6, 3.14159265358979323846, n_max);
            noise::NoiseConfig cfg;
            if (!single_source.empty()) cfg = cfg.single_source(single_source);
            cfg.n_samples = samples;
            cfg.rng_seed = seed;
            cfg.n_max = n_max;
            cfg.threads = threads;
            const auto res = noise::simulate_noisy_gate(d, params, theta, cfg, n_gates);
            py::dict out;
            out["gate_counts"] = res.gate_counts;
            out["fidelity"] = res.fidelity;
            out["fidelity_variance"] = res.fidelity_variance;
            out["entangled_counts"] = res.entangled_counts;
            out["fit"] = fit_to_dict(res.fit);
            out["peak_leakage"] = res.peak_leakage;
            out["rho_spin_1"] = res.rho_spin.front();
            return out;
        },
        py::arg("d"), py::arg("n_gates") = 9, py::arg("samples") = 100,
        py::arg("seed") = 0xC0FFEE, py::arg("n_max") = 20,
        py::arg("single_source") = "", py::arg("threads") = 0,
        "Monte Carlo gate-decay simulation with the default noise model");

    // --- config-driven commands -------------------------------------------------
    m.def(
        "run",
        [](const std::string& verb, const std::string& config_text,
           const std::string& out_dir) {
            auto cfg = config::parse_config_text(config_text);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            report::json j;
            if (verb == "simulate")
                j = runner::run_simulate(cfg);
            else if (verb == "calibrate-spacing")
                j = runner::run_calibrate_spacing(cfg);
            else if (verb == "solve-params")
                j = runner::run_solve_params(cfg);
            else if (verb == "budget")
                j = runner::run_budget(cfg);
            else if (verb == "certify")
                j = runner::run_certify(cfg, cfg.certify_input);
            else
                throw std::invalid_argument("unknown verb " + verb);
            return j.dump();
        },
        py::arg("verb"), py::arg("config_text") = "", py::arg("out_dir") = ".",
        "Run a CLI command and return the report as a JSON string");

    m.attr("__version__") = "0.1.0";
}
