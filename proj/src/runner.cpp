#include "quditls/runner.hpp"

#include "quditls/entangle.hpp"
#include "quditls/gates.hpp"
#include "quditls/measure.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

namespace quditls {
namespace runner {

namespace {
constexpr double kPi = std::numbers::pi;
namespace fs = std::filesystem;

using config::ConfigError;
using config::DataError;
using config::NumericalError;
using config::PhysicsError;

std::string out_path(const config::ExperimentConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

void emit(const config::ExperimentConfig& cfg, const std::string& base,
          const report::json& j, const std::string& csv) {
    if (cfg.format == "json" || cfg.format == "both")
        report::write_text(out_path(cfg, base + ".json"), report::dump(j));
    if ((cfg.format == "csv" || cfg.format == "both") && !csv.empty())
        report::write_text(out_path(cfg, base + ".csv"), csv);
}

double resolve_theta(const config::ExperimentConfig& cfg) {
    if (cfg.theta > 0) return cfg.theta;
    return gates::entangling_phase(cfg.dimension).theta;
}

lightshift::LightShiftParams solve_from_config(const config::ExperimentConfig& cfg,
                                               double theta) {
    const auto constraint = cfg.constraint == "fix_shift"
                                ? lightshift::SolveConstraint::FixShift
                                : lightshift::SolveConstraint::FixDelta;
    const double value = constraint == lightshift::SolveConstraint::FixShift
                             ? cfg.shift
                             : cfg.delta;
    try {
        return lightshift::solve_gate_params(cfg.dimension, theta, cfg.eta, constraint,
                                             value, cfg.trap.spacing_phase,
                                             cfg.noise.n_max);
    } catch (const std::exception& e) {
        throw PhysicsError(e.what());
    }
}

std::string series_csv(const std::vector<int>& ns, const std::vector<double>& exact,
                       const std::vector<double>& measured,
                       const std::vector<double>& sigma,
                       const std::vector<int>& included) {
    std::string out = "n,fidelity_exact,fidelity_measured,sigma,included\n";
    char buf[160];
    for (size_t i = 0; i < ns.size(); ++i) {
        const bool inc =
            std::find(included.begin(), included.end(), ns[i]) != included.end();
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%d\n", ns[i], exact[i],
                      measured[i], sigma[i], inc ? 1 : 0);
        out += buf;
    }
    return out;
}

}  // namespace

report::json run_simulate(const config::ExperimentConfig& cfg) {
    const int d = cfg.dimension;
    const double theta = resolve_theta(cfg);
    const auto params = solve_from_config(cfg, theta);
    const int n_gates = cfg.sequence == "single_gate" ? 1 : cfg.gates_max;

    // All randomness flows from the single config seed.
    noise::NoiseConfig ncfg = cfg.noise;
    ncfg.rng_seed = cfg.seed;

    noise::NoisyGateResult res;
    try {
        res = noise::simulate_noisy_gate(d, params, theta, ncfg, n_gates);
    } catch (const std::exception& e) {
        throw NumericalError(e.what());
    }

    // Measurement pipeline on the averaged states: populations + parity scans
    // with Bayesian coherence estimation, then the decay fit.
    measure::Rng meas_rng(cfg.seed ^ 0x6D656173ull);
    std::vector<double> f_meas(n_gates), f_var(n_gates);
    measure::StateEstimate first_estimate;
    for (int n = 1; n <= n_gates; ++n) {
        const CVec ideal = gates::ideal_final_state(d, theta, n);
        gates::TargetState target;
        target.d = d;
        target.lambda = RVec(d);
        for (int i = 0; i < d; ++i) target.lambda(i) = std::abs(ideal(i * d + i));
        const auto est = measure::estimate_state(res.rho_spin[n - 1], d, cfg.shots,
                                                 cfg.phases, meas_rng);
        if (n == 1) first_estimate = est;
        const auto fe = measure::state_fidelity_estimate(est, target);
        f_meas[n - 1] = fe.value;
        f_var[n - 1] = fe.variance + res.fidelity_variance[n - 1];
    }

    measure::DecayFit fit_meas;
    {
        std::vector<int> ns;
        std::vector<double> fs, vs;
        for (int n : res.entangled_counts) {
            ns.push_back(n);
            fs.push_back(std::max(f_meas[n - 1], 1e-12));
            vs.push_back(f_var[n - 1]);
        }
        if (ns.size() >= 3) fit_meas = measure::decay_fit(ns, fs, vs);
    }

    // Entanglement certification of the single-gate state, both paths.
    const auto target1 = gates::target_state(d);
    const auto rep_exact = entangle::full_report(res.rho_spin[0], target1);
    entangle::MeasuredData md;
    md.d = d;
    md.populations = first_estimate.populations;
    md.population_vars = first_estimate.population_vars;
    md.coherence_mags = first_estimate.coherences;
    md.coherence_vars = first_estimate.coherence_vars;
    const auto rep_meas = entangle::full_report(md, target1);

    report::json j;
    j["schema"] = report::kSchemaVersion;
    j["command"] = "simulate";
    j["config"] = report::config_to_json(cfg);
    j["theta"] = theta;
    j["params"] = report::params_to_json(params);
    report::json series = report::json::array();
    // n = 0 is the pure SPAM point: reported, never part of the fit.
    series.push_back({{"n", 0},
                      {"fidelity_exact", res.fidelity_spam},
                      {"fidelity_measured", res.fidelity_spam},
                      {"sigma", 0.0},
                      {"included", false}});
    for (int n = 1; n <= n_gates; ++n) {
        const bool inc = std::find(res.entangled_counts.begin(),
                                   res.entangled_counts.end(),
                                   n) != res.entangled_counts.end();
        series.push_back({{"n", n},
                          {"fidelity_exact", res.fidelity[n - 1]},
                          {"fidelity_measured", f_meas[n - 1]},
                          {"sigma", std::sqrt(f_var[n - 1])},
                          {"included", inc}});
    }
    j["fidelity_vs_n"] = series;
    j["fidelity_spam"] = res.fidelity_spam;
    j["decay_exact"] = report::decay_fit_to_json(res.fit);
    j["per_gate_fidelity"] = fit_meas.f;
    j["decay"] = report::decay_fit_to_json(fit_meas);
    j["entanglement_exact"] = report::entanglement_to_json(rep_exact);
    j["entanglement_measured"] = report::entanglement_to_json(rep_meas);
    j["state_estimate"] = report::state_estimate_to_json(first_estimate);
    j["peak_leakage"] = res.peak_leakage;

    std::vector<double> sig(n_gates);
    for (int n = 0; n < n_gates; ++n) sig[n] = std::sqrt(f_var[n]);
    emit(cfg, "simulate", j,
         series_csv(res.gate_counts, res.fidelity, f_meas, sig, res.entangled_counts));
    return j;
}

report::json run_calibrate_spacing(const config::ExperimentConfig& cfg) {
    report::json j;
    j["schema"] = report::kSchemaVersion;
    j["command"] = "calibrate-spacing";
    j["config"] = report::config_to_json(cfg);

    report::json rows = report::json::array();
    std::string csv = "spacing_phase,com_nbar,breathing_nbar\n";
    double best_phase = 0, best_com = -1;
    const int pts = cfg.scan_points;
    if (pts < 2) j["warning"] = "degenerate scan: fewer than 2 points";
    for (int i = 0; i < pts; ++i) {
        const double phase = 2 * kPi * i / std::max(1, pts - 1);
        lightshift::LightShiftParams p;
        p.delta = 0;
        p.eta = cfg.eta;
        p.shifts[0] = {cfg.scan_shift};
        p.shifts[1] = {cfg.scan_shift};
        p.spatial_phase = {0.0, phase};
        const auto pt = lightshift::spacing_scan(cfg.trap, p, cfg.scan_time);
        rows.push_back({{"spacing_phase", phase},
                        {"com_nbar", pt.com_nbar},
                        {"breathing_nbar", pt.breathing_nbar}});
        char buf[120];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", phase, pt.com_nbar,
                      pt.breathing_nbar);
        csv += buf;
        if (best_com < 0 || pt.com_nbar < best_com) {
            best_com = pt.com_nbar;
            best_phase = phase;
        }
    }
    j["scan"] = rows;
    j["min_com_phase"] = best_phase;
    j["min_com_nbar"] = best_com;
    emit(cfg, "spacing", j, csv);
    return j;
}

report::json run_solve_params(const config::ExperimentConfig& cfg) {
    const double theta = resolve_theta(cfg);
    const auto params = solve_from_config(cfg, theta);

    // Verification: composed pulse train against the ideal diagonal gate.
    auto check = params;
    check.mode.n_max = 12;
    const CMat composed = lightshift::composed_gate(check, cfg.dimension);
    const CMat ideal = algebra::tensor(gates::ideal_gate_G(cfg.dimension, theta),
                                       algebra::identity(check.mode.dim()));
    const double defect = algebra::distance_up_to_phase(composed, ideal);

    report::json j;
    j["schema"] = report::kSchemaVersion;
    j["command"] = "solve-params";
    j["config"] = report::config_to_json(cfg);
    j["theta"] = theta;
    j["params"] = report::params_to_json(params);
    j["per_pulse_phase"] =
        lightshift::geometric_phase(params, 0, 1, params.t_g);
    j["composed_gate_defect"] = defect;
    emit(cfg, "params", j, "");
    return j;
}

report::json run_budget(const config::ExperimentConfig& cfg) {
    noise::BudgetInputs in;
    in.noise = cfg.noise;
    in.noise.rng_seed = cfg.seed;
    in.analytic = cfg.analytic;
    in.eta = cfg.eta;
    in.delta = cfg.delta;
    in.n_gates = cfg.gates_max;
    in.sources = cfg.budget_sources;
    in.include_joint = cfg.budget_joint;

    noise::BudgetTable table;
    try {
        table = noise::error_budget_table(in, cfg.budget_dims);
    } catch (const std::exception& e) {
        throw NumericalError(e.what());
    }

    report::json j;
    j["schema"] = report::kSchemaVersion;
    j["command"] = "budget";
    j["config"] = report::config_to_json(cfg);
    j["budget"] = report::budget_to_json(table, cfg.budget_dims);
    emit(cfg, "budget", j, report::budget_to_csv(table, cfg.budget_dims));
    return j;
}

report::json run_certify(const config::ExperimentConfig& cfg,
                         const std::string& input_path) {
    std::ifstream in(input_path);
    if (!in) throw DataError("certify: cannot open input file " + input_path);
    report::json input;
    try {
        in >> input;
    } catch (const std::exception& e) {
        throw DataError(std::string("certify: input is not valid JSON: ") + e.what());
    }

    // Accept either a simulate report (contains state_estimate), a
    // measured-data file, or summary values.
    if (input.contains("state_estimate")) input = input["state_estimate"];

    int d = cfg.dimension;
    if (input.contains("dimension")) d = input["dimension"].get<int>();
    if (d < 2 || d > 5) throw DataError("certify: dimension out of range");
    gates::TargetState target = gates::target_state(d);
    if (input.contains("target")) {
        const auto lam = input["target"].get<std::vector<double>>();
        if (int(lam.size()) != d) throw DataError("certify: target length mismatch");
        target.lambda = Eigen::Map<const RVec>(lam.data(), d);
    }

    entangle::EntanglementReport rep;
    if (input.contains("fidelity") && input.contains("concurrence")) {
        const auto f = input["fidelity"];
        const auto c = input["concurrence"];
        rep = entangle::report_from_summary(f.at(0).get<double>(), f.at(1).get<double>(),
                                            c.at(0).get<double>(), c.at(1).get<double>(),
                                            target);
    } else if (input.contains("populations") && input.contains("coherences")) {
        auto load = [&](const report::json& m) {
            if (int(m.size()) != d) throw DataError("certify: matrix size mismatch");
            Eigen::MatrixXd out(d, d);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) out(r, c) = m.at(r).at(c).get<double>();
            return out;
        };
        entangle::MeasuredData md;
        md.d = d;
        md.populations = load(input["populations"]);
        md.coherence_mags = load(input["coherences"]);
        md.population_vars = input.contains("population_vars")
                                 ? load(input["population_vars"])
                                 : Eigen::MatrixXd::Zero(d, d);
        md.coherence_vars = input.contains("coherence_vars")
                                ? load(input["coherence_vars"])
                                : Eigen::MatrixXd::Zero(d, d);
        rep = entangle::full_report(md, target);
    } else {
        throw DataError(
            "certify: input needs either fidelity+concurrence or populations+coherences");
    }

    report::json j;
    j["schema"] = report::kSchemaVersion;
    j["command"] = "certify";
    j["config"] = report::config_to_json(cfg);
    j["report"] = report::entanglement_to_json(rep);
    emit(cfg, "certify", j, "");
    return j;
}

int run_command(const std::string& verb, const config::ExperimentConfig& cfg) {
    try {
        if (verb == "simulate")
            run_simulate(cfg);
        else if (verb == "calibrate-spacing")
            run_calibrate_spacing(cfg);
        else if (verb == "solve-params")
            run_solve_params(cfg);
        else if (verb == "budget")
            run_budget(cfg);
        else if (verb == "certify")
            run_certify(cfg, cfg.certify_input);
        else {
            std::cerr << report::error_record(kConfigError, "cli",
                                              "unknown command " + verb);
            return kConfigError;
        }
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << report::error_record(kConfigError, "config", e.what());
        return kConfigError;
    } catch (const PhysicsError& e) {
        std::cerr << report::error_record(kPhysicsError, "physics", e.what());
        return kPhysicsError;
    } catch (const DataError& e) {
        std::cerr << report::error_record(kDataError, "data", e.what());
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << report::error_record(kNumericalError, "numerical", e.what());
        return kNumericalError;
    }
}

}  // namespace runner
}  // namespace quditls
