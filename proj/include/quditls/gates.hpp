#pragma once

#include "quditls/algebra.hpp"

#include <utility>
#include <vector>

namespace quditls {
namespace gates {

/// A resonant two-level rotation on the |j⟩↔|k⟩ transition, driven on one
/// ion or symmetrically on both.
struct LocalRotation {
    enum class Target { Ion0, Ion1, Both };
    Target target = Target::Both;
    int j = 0;
    int k = 1;
    double theta = 0;  ///< rotation angle (π for transfer pulses)
    double phi = 0;    ///< drive phase, sets the rotation axis
    double duration = 0;
};

struct Pulse {
    enum class Kind { Local, LightShift };
    Kind kind = Kind::Local;
    LocalRotation local;
    double duration = 0;
};

struct PulseSequence {
    std::vector<Pulse> pulses;

    double total_duration() const {
        double t = 0;
        for (const auto& p : pulses) t += p.duration;
        return t;
    }
    int local_pulse_count() const {
        int n = 0;
        for (const auto& p : pulses) n += (p.kind == Pulse::Kind::Local);
        return n;
    }
    void append(const PulseSequence& other) {
        pulses.insert(pulses.end(), other.pulses.begin(), other.pulses.end());
    }
};

/// Schmidt coefficients of the diagonal target state Σ λ_i |ii⟩, descending.
struct TargetState {
    int d = 2;
    RVec lambda;
};

/// σ^{j,k}(φ) = cos(φ)σ_x + sin(φ)σ_y embedded in the d-level space.
CMat pauli_sigma(int d, int j, int k, double phi);

/// Single-ion rotation exp(−i θ/2 σ^{j,k}(φ)).
CMat rotation_single(int d, int j, int k, double theta, double phi);

/// Symmetric two-ion rotation R^{j,k}(θ, φ) acting on the d² spin space.
CMat rotation_R(int d, int j, int k, double theta, double phi);

/// Two-ion rotation with independent per-ion angles (used by the noise model).
CMat rotation_pair(int d, int j, int k, double theta0, double theta1, double phi);

/// Cyclic permutation X_d = Σ |j+1 mod d⟩⟨j| on one ion.
CMat cyclic_shift(int d);

/// X_d decomposed into π pulses on the |0⟩↔|j⟩ transitions. For d > 2 the
/// first pulse carries a π phase offset.
PulseSequence cyclic_shift_pulses(int d, double pulse_time = 0);

/// Preparation operator P mapping |00⟩ to an equal-magnitude superposition
/// of all d² basis states.
CMat preparation_P(int d);
PulseSequence preparation_pulses(int d, double pulse_time = 0);

/// Full entangling-gate pulse train: d repetitions of one light-shift pulse
/// followed by the X_d π-pulse block.
PulseSequence gate_pulse_sequence(int d, double ls_time, double pulse_time);

/// Compose a sequence of local rotations into a two-ion spin operator.
CMat compose_local(const PulseSequence& seq, int d);

/// Diagonal entangling gate: |jj⟩ → |jj⟩, |jk⟩ → e^{iθ}|jk⟩ for j≠k.
CMat ideal_gate_G(int d, double theta);

TargetState target_state(int d);

/// Fidelity of a state to the diagonal target Σ λ_i|ii⟩, maximized over
/// local diagonal phases: (Σ_i λ_i |⟨ii|ψ⟩|)². Equals 1 iff the state is
/// supported on the diagonal with |amplitudes| = λ.
double fidelity_to_target(const CVec& psi, const TargetState& target);
double fidelity_to_target(const CMat& rho_spin, const TargetState& target);

/// Phase-insensitive fidelity estimate from populations and coherence
/// magnitudes: Σ λ_i² p_ii + 2 Σ_{i<j} λ_i λ_j |ρ_{ii,jj}| (matches the
/// measured estimator).
double fidelity_from_elements(const CMat& rho_spin, const TargetState& target);

struct EntanglingPhase {
    double theta = 0;        ///< optimal gate phase
    double fidelity = 0;     ///< fidelity of the achieved state to the target
    CVec state;              ///< P† G(θ*) P |00⟩
    TargetState target;
};

/// Scan θ ∈ [0, 2π) and refine for the phase that maximizes the fidelity of
/// P† G(θ) P |00⟩ to target_state(d).
EntanglingPhase entangling_phase(int d);

/// Ideal final state P† G(θ)ⁿ P |00⟩.
CVec ideal_final_state(int d, double theta, int n_gates);

/// Index pairs whose single-pulse phases sum to the composed phase on |jk⟩
/// after (X_d U)^d: the orbit {(j+m mod d, k+m mod d)}.
std::vector<std::pair<int, int>> orbit_pairs(int d, int j, int k);

/// Composed phase matrix: entry (j,k) is the orbit sum of `phi`.
Eigen::MatrixXd composed_phases(int d, const Eigen::MatrixXd& phi);

/// True when u = v up to phases of the form a_j + b_k on |jk⟩ (local
/// diagonal phase gauge plus a global phase).
bool equal_up_to_local_phases(const CMat& u, const CMat& v, int d, double tol);

}  // namespace gates
}  // namespace quditls
