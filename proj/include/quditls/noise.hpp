#pragma once

#include "quditls/algebra.hpp"
#include "quditls/gates.hpp"
#include "quditls/lightshift.hpp"
#include "quditls/measure.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace quditls {
namespace noise {

using Rng = std::mt19937_64;

/// Noise magnitudes (defaults: the reference error budget) plus execution
/// knobs. A magnitude of zero disables the source; motional_coherence = 0
/// means no motional dephasing.
struct NoiseConfig {
    double heating_rate = 15.0;            ///< phonons/s
    double motional_coherence = 16e-3;     ///< s (0 disables)
    double initial_nbar = 0.1;             ///< phonons
    double gate_rabi_frac = 0.01;          ///< static fractional std on all Δ
    double slow_local_rabi_frac = 0.006;   ///< static fractional std, local pulses
    double fast_local_rabi_frac = 0.007;   ///< per-pulse fractional std
    double local_rabi_imbalance_frac = 0.01;  ///< static ion-0 vs ion-1 differential
    double gate_freq_noise = 2 * 3.14159265358979323846 * 200;  ///< rad/s std on δ
    double local_freq_noise = 2 * 3.14159265358979323846 * 19;  ///< rad/s std, reference transition
    /// Per-transition multipliers for local_freq_noise on |0⟩↔|j⟩, j = 1..d−1.
    /// The |0⟩↔|1⟩ transition is the reference (factor 1); higher levels are
    /// more field-sensitive. Calibrated against the reference budget.
    std::vector<double> transition_sensitivity{0.08, 2.2, 1.4, 4.4};

    int n_samples = 100;
    std::uint64_t rng_seed = 0xC0FFEE;

    double local_pulse_time = 10e-6;  ///< s per local π pulse
    int ls_substeps = 8;              ///< dissipative splitting steps per LS pulse
    int n_max = 20;
    double leakage_threshold = 1e-3;
    int reduction_blocks = 16;        ///< fixed partition for deterministic reduction
    int threads = 0;                  ///< 0 = hardware concurrency

    /// All noise magnitudes set to zero (initial_nbar too).
    NoiseConfig zeroed() const;
    /// Keep a single named source, zero the rest. Valid names:
    /// heating, motional_coherence, occupation, gate_rabi, slow_local_rabi,
    /// fast_local_rabi, local_rabi_imbalance, gate_freq, local_freq.
    NoiseConfig single_source(const std::string& name) const;
    /// Scale every noise magnitude by s (rates and stds; coherence time 1/s).
    NoiseConfig scaled(double s) const;

    double sensitivity(int level) const;
    double dephasing_rate() const {
        return motional_coherence > 0 ? 2.0 / motional_coherence : 0.0;
    }
    bool has_dissipation() const { return heating_rate > 0 || motional_coherence > 0; }
};

/// Inputs of the analytic error rows.
struct AnalyticErrorParams {
    double qubit_scattering_error = 1.6e-4;
    double d_state_lifetime = 1.0;  ///< s; <= 0 disables the row
    /// Per-dimension scale factors relative to d = 2 (index 0 ↔ d = 2).
    /// Defaults follow the pulse counts and solved beam intensities.
    std::vector<double> gate_time_factor;   ///< total LS pulse time ratios
    std::vector<double> intensity_factor;   ///< beam intensity ratios
};

/// One draw of the quasi-static offsets plus an independent stream for the
/// fast per-pulse Rabi noise.
struct StaticOffsets {
    double gate_rabi_scale = 1.0;      ///< multiplies all Δ_{N,j}
    double gate_delta_offset = 0.0;    ///< rad/s added to δ
    std::array<double, 2> local_scale{1.0, 1.0};  ///< per-ion local pulse area scale
    std::vector<double> level_detuning;           ///< ε_j rad/s, ε_0 = 0
    std::uint64_t fast_seed = 0;
};

StaticOffsets sample_noise_realization(const NoiseConfig& cfg, int d, Rng& rng);

/// Collapse operators on the motional space implied by the config
/// (heating: √Γ a†, √Γ a with Γ = heating_rate; dephasing: √(2/τ) a†a).
std::vector<CMat> collapse_operators(const NoiseConfig& cfg, int n_max);

/// Fixed-step RK4 integration of the Lindblad master equation; the result
/// is checked against a doubled step count (throws on non-convergence).
CMat lindblad_evolve(const CMat& rho, const CMat& h, const std::vector<CMat>& collapse,
                     double t, int n_steps = 200, double conv_tol = 1e-7);

/// One dissipative light-shift pulse on the composite space, evolved with
/// the production splitting scheme (exact coherent steps interleaved with
/// the motional dissipator). Exposed for cross-checks against direct
/// master-equation integration.
CMat apply_ls_pulse_dissipative(const CMat& rho, const lightshift::LightShiftParams& p,
                                const NoiseConfig& cfg);

struct NoisyGateResult {
    int d = 2;
    std::vector<int> gate_counts;          ///< 1..n_gates
    std::vector<CMat> rho_spin;            ///< sample-averaged, per gate count
    std::vector<double> fidelity;          ///< element estimator vs the ideal state
    std::vector<double> fidelity_variance; ///< Monte Carlo variance of the estimate
    CMat rho_spin_spam;                    ///< n = 0 point (P then P†, no gates)
    double fidelity_spam = 1;              ///< reported, excluded from the fit
    std::vector<int> entangled_counts;
    measure::DecayFit fit;                 ///< over the entangled subset
    double peak_leakage = 0;
};

/// Monte Carlo simulation of P → (X_d U_LS)^d × n → P† with static offsets
/// redrawn per realization, fast Rabi noise per pulse, and motional Lindblad
/// terms active throughout. `theta` is the gate phase the params were solved
/// for (used for the ideal reference states).
NoisyGateResult simulate_noisy_gate(int d, const lightshift::LightShiftParams& params,
                                    double theta, const NoiseConfig& cfg, int n_gates);

/// Analytic rows: photon scattering and D-manifold decay per gate.
struct AnalyticRows {
    double scattering = 0;
    double d_decay = 0;
};
AnalyticRows analytic_error_budget(int d, const AnalyticErrorParams& params,
                                   double theta_d, double theta_2, double t_g,
                                   double local_pulse_time);

struct BudgetRow {
    std::string source;
    double value = 0;       ///< configured noise magnitude
    std::string unit;
    bool simulated = true;
    std::map<int, double> infidelity;  ///< keyed by dimension
};

struct BudgetTable {
    std::vector<BudgetRow> rows;
    std::map<int, double> totals;          ///< row sums per dimension
    std::map<int, double> joint;           ///< jointly simulated (optional)
    std::map<int, double> theta;           ///< solved gate phase per dimension
};

struct BudgetInputs {
    NoiseConfig noise;
    AnalyticErrorParams analytic;
    double eta = 0.167;
    double delta = 2 * 3.14159265358979323846 / 35e-6;
    int n_gates = 9;
    std::vector<std::string> sources;  ///< empty = all stochastic sources
    bool include_joint = false;
};

/// One row per enabled noise source per dimension plus the analytic rows;
/// totals follow the row-sum convention.
BudgetTable error_budget_table(const BudgetInputs& in, const std::vector<int>& dims);

std::vector<std::string> stochastic_source_names();

}  // namespace noise
}  // namespace quditls
