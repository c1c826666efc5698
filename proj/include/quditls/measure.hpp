#pragma once

#include "quditls/algebra.hpp"
#include "quditls/gates.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace quditls {
namespace measure {

using Rng = std::mt19937_64;

/// shots == kInfiniteShots selects the analytic (exact Born probability) mode.
constexpr std::int64_t kInfiniteShots = 0;

/// One measurement setting. Outcomes are the two-ion bright/dark pairs in
/// the order (BB, BD, DB, DD); bright is level |0⟩.
struct ShotRecord {
    std::string setting;
    double phase = 0;                 ///< analysis phase for coherence settings
    std::array<std::int64_t, 4> counts{0, 0, 0, 0};
    std::int64_t shots = 0;
    std::array<double, 4> probs{0, 0, 0, 0};  ///< exact probabilities

    double parity() const;
};

/// Projective bright/dark readout of both ions.
ShotRecord readout_population(const CMat& rho_spin, int d, std::int64_t shots, Rng& rng);

/// Transfer pulse T_0^j = R^{0,j}(π, 0) and analysis pulse A^j_{0,φ} =
/// R^{0,j}(π/2, φ), as two-ion spin operators.
CMat transfer_T(int d, int j);
CMat analysis_A(int d, int j, double phi);

/// The same pulses as single-entry sequences (for composing programs).
gates::PulseSequence transfer_pulse(int d, int j, double pulse_time = 0);
gates::PulseSequence analysis_pulse(int d, int j, double phi, double pulse_time = 0);

/// Parity fringe for the coherence between |jj⟩ and |kk⟩: transfer the lower
/// level to |00⟩ when needed, apply the analysis pulse at each phase, read
/// out. Ideal contrast is 2|⟨jj|ρ|kk⟩|.
std::vector<ShotRecord> parity_scan(const CMat& rho_spin, int d, int j, int k,
                                    const std::vector<double>& phases,
                                    std::int64_t shots_per_phase, Rng& rng);

struct CoherenceEstimate {
    double magnitude = 0;  ///< posterior mean of contrast/2, in [0, 0.5]
    double sigma = 0;
    std::array<double, 2> ci68{0, 0};
    std::array<double, 2> ci95{0, 0};
};

/// Grid posterior over (contrast, fringe phase) with a binomial likelihood
/// per phase setting and uniform prior; the constant parity offset is taken
/// from the data mean. Estimates never leave the physical range.
CoherenceEstimate bayes_coherence(const std::vector<ShotRecord>& records,
                                  int grid = 201);

struct ValueWithError {
    double value = 0;
    double variance = 0;
};

/// Measured elements of a two-qudit state: populations p_{jk} (via transfer
/// pulses) and pairwise coherence magnitudes (via parity scans + Bayes).
struct StateEstimate {
    int d = 2;
    Eigen::MatrixXd populations;
    Eigen::MatrixXd population_vars;
    Eigen::MatrixXd coherences;
    Eigen::MatrixXd coherence_vars;
};

StateEstimate estimate_state(const CMat& rho_spin, int d, std::int64_t shots,
                             int n_phases, Rng& rng);

/// F = Σ_i λ_i² p_ii + 2 Σ_{i<j} λ_i λ_j |ρ_{ii,jj}| with first-order error
/// propagation.
ValueWithError state_fidelity_estimate(const StateEstimate& est,
                                       const gates::TargetState& target);

struct DecayFit {
    double f = 1;        ///< per-gate fidelity (clamped to ≤ 1)
    double f_raw = 1;    ///< unclamped fit value
    double amplitude = 1;///< SPAM factor A in F(n) = A fⁿ
    double f_err = 0;
    double amplitude_err = 0;
    double chi2 = 0;
    int dof = 0;
    double max_residual = 0;   ///< largest |log-domain residual|
    bool non_exponential = false;
};

/// Weighted least squares of F(n) = A·fⁿ in the log domain with variance
/// weights (equal weights when all variances vanish).
DecayFit decay_fit(const std::vector<int>& ns, const std::vector<double>& fidelities,
                   const std::vector<double>& variances);

/// Gate counts n ∈ [1, n_max] whose ideal state passes the maximal-Schmidt
/// witness for dimension d (the rest give product-like states and are
/// excluded from the decay fit).
std::vector<int> entangled_gate_counts(int d, double theta, int n_max);

}  // namespace measure
}  // namespace quditls
