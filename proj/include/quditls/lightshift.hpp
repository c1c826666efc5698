#pragma once

#include "quditls/algebra.hpp"

#include <array>
#include <vector>

namespace quditls {
namespace lightshift {

using algebra::OscillatorSpace;

struct TrapConfig {
    double omega_com = 2 * 3.14159265358979323846 * 1.1e6;  ///< rad/s
    double omega_breathing = 0;  ///< rad/s; 0 means derive as √3·ω_COM
    double spacing_phase = 3.14159265358979323846;  ///< φ_1 − φ_0 of the travelling wave

    double breathing() const {
        return omega_breathing > 0 ? omega_breathing : std::sqrt(3.0) * omega_com;
    }
};

/// All parameters of the spin-dependent-force pulse: detuning δ from the
/// motional mode, Lamb-Dicke factor η, per-ion per-level shifts Δ_{N,j},
/// spatial phases φ_N, and the pulse duration t_g.
struct LightShiftParams {
    double delta = 0;                          ///< rad/s
    double eta = 0.167;
    std::array<std::vector<double>, 2> shifts; ///< Δ_{N,j}, rad/s
    std::array<double, 2> spatial_phase{0.0, 3.14159265358979323846};
    double t_g = 0;                            ///< s
    OscillatorSpace mode;

    int dim() const { return int(shifts[0].size()); }

    /// Level-0-dominant factory: Δ_{N,0} = shift, Δ_{N,j≠0} = 0, loop
    /// closure t_g = 2π/δ. Throws if δ = 0 (no closed loop exists).
    static LightShiftParams level0(int d, double delta, double eta, double shift,
                                   double spacing_diff = 3.14159265358979323846);
};

/// Drive coefficient c_jk = Δ_{0,j}e^{iφ_0} + Δ_{1,k}e^{iφ_1} of the spin
/// state |jk⟩.
Complex drive_coeff(const LightShiftParams& p, int j, int k);

/// Phase-space trajectory of spin state |jk⟩ under the pulse.
Complex displacement_amplitude(const LightShiftParams& p, int j, int k, double t);

/// Enclosed-area phase accumulated by |jk⟩ up to time t; at t = 2π/δ it
/// equals π η² |c_jk|² / (2δ²).
double geometric_phase(const LightShiftParams& p, int j, int k, double t);

/// Closed-form propagator at time t on the (spin ⊗ motion) space:
/// Σ_jk |jk⟩⟨jk| ⊗ e^{iΦ_jk(t)} D(α_jk(t)).
CMat ls_propagator_analytic(const LightShiftParams& p, double t, int d);

/// Time-ordered RK4 integration of the same Hamiltonian; the step count is
/// doubled once and the result must agree to conv_tol or a runtime_error is
/// thrown.
CMat ls_propagator_numeric(const LightShiftParams& p, double t, int d, int n_steps,
                           double conv_tol = 1e-8);

/// Coherent excitation of the two axial modes under a resonant (δ = 0)
/// pulse of duration t. The modes couple with effective drives
/// (Δ_0 e^{iφ_0} ± Δ_1 e^{iφ_1}).
struct SpacingScanPoint {
    double com_nbar = 0;
    double breathing_nbar = 0;
};
SpacingScanPoint spacing_scan(const TrapConfig& trap, const LightShiftParams& p,
                              double t);

enum class SolveConstraint { FixDelta, FixShift };

/// Invert the per-pulse phase relation for the level-0-dominant drive so
/// that the composed sequence (X_d U_LS(t_g))^d equals G(θ) up to a global
/// phase. Exactly one of δ or Δ is fixed (`value`); the other is solved.
/// Throws std::runtime_error when no usable solution exists (vanishing
/// differential drive, or solved δ below min_delta).
LightShiftParams solve_gate_params(int d, double theta, double eta,
                                   SolveConstraint constraint, double value,
                                   double spacing_diff = 3.14159265358979323846,
                                   int n_max = 20, double min_delta = 2 * 3.141592653589793 * 1e3);

/// (X_d ⊗ X_d ⊗ I) U_LS(t_g) composed d times, on the full space.
CMat composed_gate(const LightShiftParams& p, int d);

}  // namespace lightshift
}  // namespace quditls
