#include "quditls/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace quditls {
namespace config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

std::int64_t to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("config: bad integer value for " + key + ": '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean value for " + key + ": '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::string section = "run";
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    auto set_key = [&](const std::string& key, const std::string& val) {
        const std::string where = section + "." + key;
        if (section == "run") {
            if (key == "dimension") {
                cfg.dimension = int(to_int(where, val));
                if (cfg.dimension < 2 || cfg.dimension > 5)
                    throw ConfigError("config: dimension must be in 2..5");
            } else if (key == "sequence") {
                static const std::vector<std::string> ok = {
                    "single_gate", "decay", "spacing_scan", "budget", "certify"};
                if (std::find(ok.begin(), ok.end(), val) == ok.end())
                    throw ConfigError("config: unknown sequence '" + val + "'");
                cfg.sequence = val;
            } else if (key == "gates_max") {
                cfg.gates_max = int(to_int(where, val));
                if (cfg.gates_max < 1) throw ConfigError("config: gates_max must be >= 1");
            } else if (key == "shots") {
                cfg.shots = to_int(where, val);
                if (cfg.shots < 0) throw ConfigError("config: shots must be >= 0");
            } else if (key == "phases") {
                cfg.phases = int(to_int(where, val));
            } else if (key == "seed") {
                cfg.seed = std::uint64_t(to_int(where, val));
            } else if (key == "out") {
                cfg.out_dir = val;
            } else if (key == "format") {
                if (val != "json" && val != "csv" && val != "both")
                    throw ConfigError("config: format must be json|csv|both");
                cfg.format = val;
            } else if (key == "certify_input") {
                cfg.certify_input = val;
            } else {
                throw ConfigError("config: unknown key " + where);
            }
        } else if (section == "trap") {
            if (key == "omega_com")
                cfg.trap.omega_com = to_double(where, val);
            else if (key == "omega_breathing")
                cfg.trap.omega_breathing = to_double(where, val);
            else if (key == "spacing_phase")
                cfg.trap.spacing_phase = to_double(where, val);
            else
                throw ConfigError("config: unknown key " + where);
        } else if (section == "lightshift") {
            if (key == "theta")
                cfg.theta = (val == "auto") ? 0.0 : to_double(where, val);
            else if (key == "constraint") {
                if (val != "fix_delta" && val != "fix_shift")
                    throw ConfigError("config: constraint must be fix_delta|fix_shift");
                cfg.constraint = val;
            } else if (key == "delta")
                cfg.delta = to_double(where, val);
            else if (key == "eta")
                cfg.eta = to_double(where, val);
            else if (key == "shift")
                cfg.shift = to_double(where, val);
            else
                throw ConfigError("config: unknown key " + where);
        } else if (section == "noise") {
            auto& n = cfg.noise;
            if (key == "heating_rate")
                n.heating_rate = to_double(where, val);
            else if (key == "motional_coherence")
                n.motional_coherence = to_double(where, val);
            else if (key == "initial_nbar")
                n.initial_nbar = to_double(where, val);
            else if (key == "gate_rabi_frac")
                n.gate_rabi_frac = to_double(where, val);
            else if (key == "slow_local_rabi_frac")
                n.slow_local_rabi_frac = to_double(where, val);
            else if (key == "fast_local_rabi_frac")
                n.fast_local_rabi_frac = to_double(where, val);
            else if (key == "local_rabi_imbalance_frac")
                n.local_rabi_imbalance_frac = to_double(where, val);
            else if (key == "gate_freq_noise")
                n.gate_freq_noise = to_double(where, val);
            else if (key == "local_freq_noise")
                n.local_freq_noise = to_double(where, val);
            else if (key == "transition_sensitivity") {
                n.transition_sensitivity.clear();
                for (const auto& tok : split_list(val))
                    n.transition_sensitivity.push_back(to_double(where, tok));
            } else if (key == "samples")
                n.n_samples = int(to_int(where, val));
            else if (key == "local_pulse_time")
                n.local_pulse_time = to_double(where, val);
            else if (key == "ls_substeps")
                n.ls_substeps = int(to_int(where, val));
            else if (key == "n_max") {
                n.n_max = int(to_int(where, val));
                if (n.n_max < 1) throw ConfigError("config: n_max must be >= 1");
            } else if (key == "leakage_threshold")
                n.leakage_threshold = to_double(where, val);
            else if (key == "threads")
                n.threads = int(to_int(where, val));
            else
                throw ConfigError("config: unknown key " + where);
        } else if (section == "analytic") {
            auto& a = cfg.analytic;
            if (key == "qubit_scattering_error")
                a.qubit_scattering_error = to_double(where, val);
            else if (key == "d_state_lifetime")
                a.d_state_lifetime = to_double(where, val);
            else if (key == "gate_time_factor") {
                a.gate_time_factor.clear();
                for (const auto& tok : split_list(val))
                    a.gate_time_factor.push_back(to_double(where, tok));
            } else if (key == "intensity_factor") {
                a.intensity_factor.clear();
                for (const auto& tok : split_list(val))
                    a.intensity_factor.push_back(to_double(where, tok));
            } else
                throw ConfigError("config: unknown key " + where);
        } else if (section == "budget") {
            if (key == "dims") {
                cfg.budget_dims.clear();
                for (const auto& tok : split_list(val)) {
                    const int d = int(to_int(where, tok));
                    if (d < 2 || d > 5) throw ConfigError("config: budget dims must be 2..5");
                    cfg.budget_dims.push_back(d);
                }
            } else if (key == "sources") {
                cfg.budget_sources = split_list(val);
                const auto known = noise::stochastic_source_names();
                for (const auto& s : cfg.budget_sources)
                    if (std::find(known.begin(), known.end(), s) == known.end())
                        throw ConfigError("config: unknown budget source '" + s + "'");
            } else if (key == "joint")
                cfg.budget_joint = to_bool(where, val);
            else
                throw ConfigError("config: unknown key " + where);
        } else if (section == "scan") {
            if (key == "points") {
                cfg.scan_points = int(to_int(where, val));
            } else if (key == "time")
                cfg.scan_time = to_double(where, val);
            else if (key == "shift")
                cfg.scan_shift = to_double(where, val);
            else
                throw ConfigError("config: unknown key " + where);
        } else {
            throw ConfigError("config: unknown section [" + section + "]");
        }
    };

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section header at line " +
                                  std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " +
                              std::to_string(lineno));
        set_key(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }

    // Cross-field validation.
    if (cfg.noise.n_samples < 1) throw ConfigError("config: samples must be >= 1");
    if (cfg.constraint == "fix_shift" && cfg.shift <= 0)
        throw ConfigError("config: fix_shift requires a positive shift value");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_grammar() {
    return R"(Config file grammar: '#' starts a comment; '[section]' headers; 'key = value'
lines. Unknown sections or keys are rejected. Sections and keys:

[run]       dimension (2..5) | sequence (single_gate|decay|spacing_scan|budget|certify)
            gates_max | shots (0 = exact probabilities) | phases | seed | out
            format (json|csv|both) | certify_input
[trap]      omega_com | omega_breathing (0 = sqrt(3)*omega_com) | spacing_phase
[lightshift] theta (radians or 'auto') | constraint (fix_delta|fix_shift)
            delta | eta | shift
[noise]     heating_rate | motional_coherence | initial_nbar | gate_rabi_frac
            slow_local_rabi_frac | fast_local_rabi_frac | local_rabi_imbalance_frac
            gate_freq_noise | local_freq_noise | transition_sensitivity (list)
            samples | local_pulse_time | ls_substeps | n_max | leakage_threshold
            threads
[analytic]  qubit_scattering_error | d_state_lifetime | gate_time_factor (list)
            intensity_factor (list)
[budget]    dims (list) | sources (list) | joint (bool)
[scan]      points | time | shift
)";
}

}  // namespace config
}  // namespace quditls
