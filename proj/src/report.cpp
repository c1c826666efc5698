#include "quditls/report.hpp"

#include <cstdio>
#include <fstream>

namespace quditls {
namespace report {

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const CMat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

json real_matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

json config_to_json(const config::ExperimentConfig& cfg) {
    json j;
    j["run"] = {{"dimension", cfg.dimension},
                {"sequence", cfg.sequence},
                {"gates_max", cfg.gates_max},
                {"shots", cfg.shots},
                {"phases", cfg.phases},
                {"seed", cfg.seed},
                {"out", cfg.out_dir},
                {"format", cfg.format}};
    j["trap"] = {{"omega_com", cfg.trap.omega_com},
                 {"omega_breathing", cfg.trap.breathing()},
                 {"spacing_phase", cfg.trap.spacing_phase}};
    j["lightshift"] = {{"theta", cfg.theta},
                       {"constraint", cfg.constraint},
                       {"delta", cfg.delta},
                       {"eta", cfg.eta},
                       {"shift", cfg.shift}};
    const auto& n = cfg.noise;
    j["noise"] = {{"heating_rate", n.heating_rate},
                  {"motional_coherence", n.motional_coherence},
                  {"initial_nbar", n.initial_nbar},
                  {"gate_rabi_frac", n.gate_rabi_frac},
                  {"slow_local_rabi_frac", n.slow_local_rabi_frac},
                  {"fast_local_rabi_frac", n.fast_local_rabi_frac},
                  {"local_rabi_imbalance_frac", n.local_rabi_imbalance_frac},
                  {"gate_freq_noise", n.gate_freq_noise},
                  {"local_freq_noise", n.local_freq_noise},
                  {"transition_sensitivity", n.transition_sensitivity},
                  {"samples", n.n_samples},
                  {"local_pulse_time", n.local_pulse_time},
                  {"ls_substeps", n.ls_substeps},
                  {"n_max", n.n_max},
                  {"leakage_threshold", n.leakage_threshold}};
    j["analytic"] = {{"qubit_scattering_error", cfg.analytic.qubit_scattering_error},
                     {"d_state_lifetime", cfg.analytic.d_state_lifetime}};
    j["budget"] = {{"dims", cfg.budget_dims},
                   {"sources", cfg.budget_sources},
                   {"joint", cfg.budget_joint}};
    j["scan"] = {{"points", cfg.scan_points},
                 {"time", cfg.scan_time},
                 {"shift", cfg.scan_shift}};
    return j;
}

json params_to_json(const lightshift::LightShiftParams& p) {
    json j;
    j["delta"] = p.delta;
    j["eta"] = p.eta;
    j["t_g"] = p.t_g;
    j["spatial_phase"] = {p.spatial_phase[0], p.spatial_phase[1]};
    j["shifts_ion0"] = p.shifts[0];
    j["shifts_ion1"] = p.shifts[1];
    j["n_max"] = p.mode.n_max;
    return j;
}

json entanglement_to_json(const entangle::EntanglementReport& rep) {
    json j;
    j["dimension"] = rep.d;
    j["fidelity"] = rep.fidelity;
    j["fidelity_err"] = rep.fidelity_err;
    j["fidelity_threshold"] = rep.fidelity_threshold;
    j["schmidt_number_certified"] = rep.schmidt_number_certified;
    j["schmidt_number_certified_1sigma"] = rep.schmidt_number_certified_1sigma;
    j["concurrence"] = rep.concurrence;
    j["concurrence_err"] = rep.concurrence_err;
    j["max_concurrence"] = rep.max_concurrence;
    j["eof_lower_bound"] = rep.eof_lower_bound;
    j["eof_err"] = rep.eof_err;
    j["pure_state_path"] = rep.pure_state_path;
    j["notes"] = rep.notes;
    return j;
}

json decay_fit_to_json(const measure::DecayFit& fit) {
    json j;
    j["per_gate_fidelity"] = fit.f;
    j["per_gate_fidelity_raw"] = fit.f_raw;
    j["per_gate_fidelity_err"] = fit.f_err;
    j["spam_amplitude"] = fit.amplitude;
    j["spam_amplitude_err"] = fit.amplitude_err;
    j["chi2"] = fit.chi2;
    j["dof"] = fit.dof;
    j["max_residual"] = fit.max_residual;
    j["non_exponential"] = fit.non_exponential;
    return j;
}

json budget_to_json(const noise::BudgetTable& table, const std::vector<int>& dims) {
    json j;
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r;
        r["source"] = row.source;
        r["value"] = row.value;
        r["unit"] = row.unit;
        r["simulated"] = row.simulated;
        json inf;
        for (int d : dims) {
            const auto it = row.infidelity.find(d);
            inf["d" + std::to_string(d)] = it == row.infidelity.end() ? 0.0 : it->second;
        }
        r["infidelity"] = inf;
        rows.push_back(r);
    }
    j["rows"] = rows;
    json totals, theta;
    for (int d : dims) {
        totals["d" + std::to_string(d)] = table.totals.at(d);
        theta["d" + std::to_string(d)] = table.theta.at(d);
    }
    j["totals"] = totals;
    j["theta"] = theta;
    if (!table.joint.empty()) {
        json joint;
        for (auto& [d, v] : table.joint) joint["d" + std::to_string(d)] = v;
        j["joint_totals"] = joint;
    }
    return j;
}

json state_estimate_to_json(const measure::StateEstimate& est) {
    json j;
    j["dimension"] = est.d;
    j["populations"] = real_matrix_to_json(est.populations);
    j["population_vars"] = real_matrix_to_json(est.population_vars);
    j["coherences"] = real_matrix_to_json(est.coherences);
    j["coherence_vars"] = real_matrix_to_json(est.coherence_vars);
    return j;
}

namespace {
std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

std::string budget_to_csv(const noise::BudgetTable& table, const std::vector<int>& dims) {
    std::string out = "source";
    for (int d : dims) out += ",d" + std::to_string(d);
    out += "\n";
    for (const auto& row : table.rows) {
        out += row.source;
        for (int d : dims) {
            const auto it = row.infidelity.find(d);
            out += "," + fmt_double(it == row.infidelity.end() ? 0.0 : it->second);
        }
        out += "\n";
    }
    out += "total";
    for (int d : dims) out += "," + fmt_double(table.totals.at(d));
    out += "\n";
    return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string error_record(int code, const std::string& stage, const std::string& message) {
    json j;
    j["error"] = {{"code", code}, {"stage", stage}, {"message", message}};
    return j.dump() + "\n";
}

}  // namespace report
}  // namespace quditls
