#include "quditls/gates.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace quditls {
namespace gates {

using algebra::identity;
using algebra::tensor;

namespace {
constexpr double kPi = std::numbers::pi;

void check_levels(int d, int j, int k) {
    if (j < 0 || j >= d || k < 0 || k >= d || j == k)
        throw std::invalid_argument("invalid transition levels (j,k) for dimension d");
}
}  // namespace

CMat pauli_sigma(int d, int j, int k, double phi) {
    check_levels(d, j, k);
    CMat s = CMat::Zero(d, d);
    s(j, k) = std::exp(Complex(0, -phi));
    s(k, j) = std::exp(Complex(0, phi));
    return s;
}

CMat rotation_single(int d, int j, int k, double theta, double phi) {
    check_levels(d, j, k);
    CMat r = identity(d);
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    r(j, j) = c;
    r(k, k) = c;
    r(j, k) = Complex(0, -s) * std::exp(Complex(0, -phi));
    r(k, j) = Complex(0, -s) * std::exp(Complex(0, phi));
    return r;
}

CMat rotation_R(int d, int j, int k, double theta, double phi) {
    const CMat r = rotation_single(d, j, k, theta, phi);
    return tensor(r, r);
}

CMat rotation_pair(int d, int j, int k, double theta0, double theta1, double phi) {
    return tensor(rotation_single(d, j, k, theta0, phi),
                  rotation_single(d, j, k, theta1, phi));
}

CMat cyclic_shift(int d) {
    if (d < 2) throw std::invalid_argument("cyclic_shift: d must be >= 2");
    CMat x = CMat::Zero(d, d);
    for (int j = 0; j < d; ++j) x((j + 1) % d, j) = 1.0;
    return x;
}

PulseSequence cyclic_shift_pulses(int d, double pulse_time) {
    if (d < 2) throw std::invalid_argument("cyclic_shift_pulses: d must be >= 2");
    PulseSequence seq;
    for (int j = 1; j < d; ++j) {
        LocalRotation rot;
        rot.j = 0;
        rot.k = j;
        rot.theta = kPi;
        rot.phi = (d > 2 && j == 1) ? kPi : 0.0;
        rot.duration = pulse_time;
        seq.pulses.push_back({Pulse::Kind::Local, rot, pulse_time});
    }
    return seq;
}

PulseSequence preparation_pulses(int d, double pulse_time) {
    if (d < 2) throw std::invalid_argument("preparation_pulses: d must be >= 2");
    PulseSequence seq;
    // Applied right-to-left: the j = d−1 rotation acts on |00⟩ first.
    for (int j = d - 1; j >= 1; --j) {
        LocalRotation rot;
        rot.j = 0;
        rot.k = j;
        rot.theta = 2.0 * std::asin(1.0 / std::sqrt(double(j + 1)));
        rot.phi = 0;
        rot.duration = pulse_time;
        seq.pulses.push_back({Pulse::Kind::Local, rot, pulse_time});
    }
    return seq;
}

PulseSequence gate_pulse_sequence(int d, double ls_time, double pulse_time) {
    PulseSequence seq;
    const PulseSequence shift = cyclic_shift_pulses(d, pulse_time);
    for (int m = 0; m < d; ++m) {
        Pulse ls;
        ls.kind = Pulse::Kind::LightShift;
        ls.duration = ls_time;
        seq.pulses.push_back(ls);
        seq.append(shift);
    }
    return seq;
}

CMat compose_local(const PulseSequence& seq, int d) {
    CMat u = identity(d * d);
    for (const auto& p : seq.pulses) {
        if (p.kind != Pulse::Kind::Local)
            throw std::invalid_argument("compose_local: sequence contains non-local pulses");
        const auto& r = p.local;
        u = rotation_R(d, r.j, r.k, r.theta, r.phi) * u;
    }
    return u;
}

CMat preparation_P(int d) {
    CMat p = identity(d * d);
    for (int j = 1; j < d; ++j) {
        const double theta = 2.0 * std::asin(1.0 / std::sqrt(double(j + 1)));
        p = p * rotation_R(d, 0, j, theta, 0);
    }
    return p;
}

CMat ideal_gate_G(int d, double theta) {
    CMat g = CMat::Zero(d * d, d * d);
    const Complex ph = std::exp(Complex(0, theta));
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) g(j * d + k, j * d + k) = (j == k) ? 1.0 : ph;
    return g;
}

TargetState target_state(int d) {
    if (d < 2 || d > 5) throw std::invalid_argument("target_state: d must be in 2..5");
    TargetState t;
    t.d = d;
    t.lambda = RVec(d);
    if (d <= 4) {
        t.lambda.setConstant(1.0 / std::sqrt(double(d)));
    } else {
        t.lambda << 0.6, 0.4, 0.4, 0.4, 0.4;
    }
    return t;
}

double fidelity_to_target(const CVec& psi, const TargetState& target) {
    const int d = target.d;
    double s = 0;
    for (int i = 0; i < d; ++i) s += target.lambda(i) * std::abs(psi(i * d + i));
    return s * s;
}

double fidelity_to_target(const CMat& rho_spin, const TargetState& target) {
    return fidelity_from_elements(rho_spin, target);
}

double fidelity_from_elements(const CMat& rho_spin, const TargetState& target) {
    const int d = target.d;
    double f = 0;
    for (int i = 0; i < d; ++i)
        f += target.lambda(i) * target.lambda(i) * rho_spin(i * d + i, i * d + i).real();
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            f += 2.0 * target.lambda(i) * target.lambda(j) *
                 std::abs(rho_spin(i * d + i, j * d + j));
    return f;
}

CVec ideal_final_state(int d, double theta, int n_gates) {
    const CMat p = preparation_P(d);
    CVec psi = CVec::Zero(d * d);
    psi(0) = 1.0;
    psi = p * psi;
    const CMat g = ideal_gate_G(d, theta);
    for (int n = 0; n < n_gates; ++n) psi = g * psi;
    return p.adjoint() * psi;
}

EntanglingPhase entangling_phase(int d) {
    const TargetState target = target_state(d);

    auto fid = [&](double theta) {
        return fidelity_to_target(ideal_final_state(d, theta, 1), target);
    };

    // Coarse scan, then golden-section refinement around the best point.
    // Several phases can be optimal (conjugate solutions); take the smallest.
    const int n_scan = 720;
    double best_theta = 0, best_f = -1;
    for (int i = n_scan - 1; i >= 1; --i) {
        const double th = 2.0 * kPi * i / n_scan;
        const double f = fid(th);
        if (f > best_f - 1e-13) {
            if (f > best_f) best_f = f;
            best_theta = th;
        }
    }
    double a = best_theta - 2.0 * kPi / n_scan;
    double b = best_theta + 2.0 * kPi / n_scan;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = fid(x1), f2 = fid(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = fid(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = fid(x1);
        }
    }

    EntanglingPhase out;
    out.theta = (a + b) / 2;
    out.fidelity = fid(out.theta);
    // The optimum is flat to machine precision; prefer a nearby simple
    // rational multiple of π when it is numerically no worse.
    for (int m = 1; m <= 8; ++m)
        for (int k = 1; k < 2 * m; ++k) {
            const double cand = kPi * k / m;
            if (std::abs(cand - out.theta) < 5e-3 && fid(cand) >= out.fidelity - 1e-13) {
                out.theta = cand;
                out.fidelity = fid(cand);
                m = 9;
                break;
            }
        }
    out.state = ideal_final_state(d, out.theta, 1);
    out.target = target;
    return out;
}

std::vector<std::pair<int, int>> orbit_pairs(int d, int j, int k) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(d);
    for (int m = 0; m < d; ++m) pairs.emplace_back((j + m) % d, (k + m) % d);
    return pairs;
}

Eigen::MatrixXd composed_phases(int d, const Eigen::MatrixXd& phi) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
            for (const auto& [a, b] : orbit_pairs(d, j, k)) out(j, k) += phi(a, b);
    return out;
}

bool equal_up_to_local_phases(const CMat& u, const CMat& v, int d, double tol) {
    const CMat m = u * v.adjoint();
    // Off-diagonal entries must vanish.
    for (int r = 0; r < d * d; ++r)
        for (int c = 0; c < d * d; ++c)
            if (r != c && std::abs(m(r, c)) > tol) return false;
    // Diagonal phases must factor as a_j + b_k.
    std::vector<Complex> diag(d * d);
    for (int i = 0; i < d * d; ++i) {
        diag[i] = m(i, i);
        if (std::abs(std::abs(diag[i]) - 1.0) > tol) return false;
    }
    auto ph = [&](int j, int k) { return diag[j * d + k] / std::abs(diag[j * d + k]); };
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            // a_j + b_k + g − (a_0 + b_k + g) − (a_j + b_0 + g) + (a_0 + b_0 + g) = 0
            const Complex resid = ph(j, k) * ph(0, 0) / (ph(0, k) * ph(j, 0));
            if (std::abs(resid - Complex(1, 0)) > tol) return false;
        }
    return true;
}

}  // namespace gates
}  // namespace quditls
