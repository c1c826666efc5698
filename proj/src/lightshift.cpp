#include "quditls/lightshift.hpp"

#include "quditls/gates.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace quditls {
namespace lightshift {

namespace {
constexpr double kPi = std::numbers::pi;
}

LightShiftParams LightShiftParams::level0(int d, double delta, double eta, double shift,
                                          double spacing_diff) {
    if (d < 2) throw std::invalid_argument("level0: d must be >= 2");
    if (delta == 0) throw std::runtime_error("level0: delta = 0 admits no closed loop");
    LightShiftParams p;
    p.delta = delta;
    p.eta = eta;
    p.shifts[0].assign(d, 0.0);
    p.shifts[1].assign(d, 0.0);
    p.shifts[0][0] = shift;
    p.shifts[1][0] = shift;
    p.spatial_phase = {0.0, spacing_diff};
    p.t_g = 2 * kPi / delta;
    return p;
}

Complex drive_coeff(const LightShiftParams& p, int j, int k) {
    return p.shifts[0][j] * std::exp(Complex(0, p.spatial_phase[0])) +
           p.shifts[1][k] * std::exp(Complex(0, p.spatial_phase[1]));
}

Complex displacement_amplitude(const LightShiftParams& p, int j, int k, double t) {
    const Complex c = drive_coeff(p, j, k);
    if (p.delta == 0) return 0.5 * p.eta * c * t;
    // α(t) = ∫₀ᵗ (η/2) c e^{iδt'} dt'
    return 0.5 * p.eta * c * (std::exp(Complex(0, p.delta * t)) - 1.0) /
           Complex(0, p.delta);
}

double geometric_phase(const LightShiftParams& p, int j, int k, double t) {
    const Complex c = drive_coeff(p, j, k);
    if (p.delta == 0) return 0.0;
    const double amp2 = p.eta * p.eta * std::norm(c) / 4.0;
    return (amp2 / p.delta) * (t - std::sin(p.delta * t) / p.delta);
}

CMat ls_propagator_analytic(const LightShiftParams& p, double t, int d) {
    if (int(p.shifts[0].size()) < d)
        throw std::invalid_argument("ls_propagator_analytic: shifts shorter than d");
    const int nf = p.mode.dim();
    CMat u = CMat::Zero(d * d * nf, d * d * nf);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            const Complex alpha = displacement_amplitude(p, j, k, t);
            const double phase = geometric_phase(p, j, k, t);
            const CMat block =
                std::exp(Complex(0, phase)) * algebra::displacement(alpha, p.mode);
            const int s = (j * d + k) * nf;
            u.block(s, s, nf, nf) = block;
        }
    return u;
}

namespace {

// Generator of one spin block: dU/dt = A(t) U with
// A(t) = (η/2)(c e^{iδt} a† − c* e^{−iδt} a).
CMat block_generator(const LightShiftParams& p, Complex c, const CMat& adag,
                     const CMat& a, double t) {
    const Complex f = 0.5 * p.eta * c * std::exp(Complex(0, p.delta * t));
    return f * adag - std::conj(f) * a;
}

CMat rk4_block(const LightShiftParams& p, Complex c, int nf, double t_final,
               int n_steps) {
    const CMat a = algebra::destroy_op(nf - 1);
    const CMat adag = a.adjoint();
    CMat u = CMat::Identity(nf, nf);
    const double h = t_final / n_steps;
    for (int s = 0; s < n_steps; ++s) {
        const double t = s * h;
        const CMat k1 = block_generator(p, c, adag, a, t) * u;
        const CMat k2 = block_generator(p, c, adag, a, t + h / 2) * (u + 0.5 * h * k1);
        const CMat k3 = block_generator(p, c, adag, a, t + h / 2) * (u + 0.5 * h * k2);
        const CMat k4 = block_generator(p, c, adag, a, t + h) * (u + h * k3);
        u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return u;
}

}  // namespace

CMat ls_propagator_numeric(const LightShiftParams& p, double t, int d, int n_steps,
                           double conv_tol) {
    if (n_steps < 2) throw std::invalid_argument("ls_propagator_numeric: n_steps too small");
    const int nf = p.mode.dim();
    CMat u = CMat::Zero(d * d * nf, d * d * nf);
    double worst = 0;
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            const Complex c = drive_coeff(p, j, k);
            const CMat coarse = rk4_block(p, c, nf, t, n_steps);
            const CMat fine = rk4_block(p, c, nf, t, 2 * n_steps);
            worst = std::max(worst, algebra::max_abs_diff(coarse, fine));
            const int s = (j * d + k) * nf;
            u.block(s, s, nf, nf) = fine;
        }
    if (worst > conv_tol)
        throw std::runtime_error("ls_propagator_numeric: step count not converged (defect " +
                                 std::to_string(worst) + ")");
    return u;
}

SpacingScanPoint spacing_scan(const TrapConfig& trap, const LightShiftParams& p,
                              double t) {
    const Complex d0 = p.shifts[0][0] * std::exp(Complex(0, p.spatial_phase[0]));
    const Complex d1 = p.shifts[1][0] * std::exp(Complex(0, p.spatial_phase[1]));
    const double eta_com = p.eta;
    const double eta_br = p.eta * std::sqrt(trap.omega_com / trap.breathing());
    SpacingScanPoint out;
    out.com_nbar = std::norm(0.5 * eta_com * (d0 + d1) * t);
    out.breathing_nbar = std::norm(0.5 * eta_br * (d0 - d1) * t);
    return out;
}

LightShiftParams solve_gate_params(int d, double theta, double eta,
                                   SolveConstraint constraint, double value,
                                   double spacing_diff, int n_max, double min_delta) {
    if (d < 2) throw std::invalid_argument("solve_gate_params: d must be >= 2");
    if (theta <= 0 || theta >= 2 * kPi)
        throw std::invalid_argument("solve_gate_params: theta must be in (0, 2π)");

    // Composed relative phase for the level-0-dominant drive with spacing
    // difference s: θ_rel = −2 φ̄ cos(s), with φ̄ = π η² Δ² / (2δ²) the
    // per-pulse phase of the states touching level 0.
    const double cs = std::cos(spacing_diff);
    if (std::abs(cs) < 1e-6)
        throw std::runtime_error(
            "solve_gate_params: differential drive vanishes at this spacing");
    const double phi_bar = cs < 0 ? theta / (-2.0 * cs) : (2 * kPi - theta) / (2.0 * cs);

    double delta = 0, shift = 0;
    if (constraint == SolveConstraint::FixDelta) {
        delta = value;
        if (delta <= 0) throw std::runtime_error("solve_gate_params: delta must be > 0");
        shift = (delta / eta) * std::sqrt(2.0 * phi_bar / kPi);
    } else {
        shift = value;
        if (shift <= 0) throw std::runtime_error("solve_gate_params: shift must be > 0");
        delta = eta * shift * std::sqrt(kPi / (2.0 * phi_bar));
        if (delta < min_delta)
            throw std::runtime_error(
                "solve_gate_params: fixed shift too small, solved delta below minimum");
    }

    LightShiftParams p = LightShiftParams::level0(d, delta, eta, shift, spacing_diff);
    p.mode.n_max = n_max;
    return p;
}

CMat composed_gate(const LightShiftParams& p, int d) {
    const int nf = p.mode.dim();
    const CMat x2 = algebra::tensor(gates::cyclic_shift(d), gates::cyclic_shift(d));
    const CMat xm = algebra::tensor(x2, algebra::identity(nf));
    const CMat uls = ls_propagator_analytic(p, p.t_g, d);
    CMat g = CMat::Identity(d * d * nf, d * d * nf);
    for (int m = 0; m < d; ++m) g = xm * uls * g;
    return g;
}

}  // namespace lightshift
}  // namespace quditls
