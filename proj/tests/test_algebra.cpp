#include "quditls/algebra.hpp"

#include <doctest.h>

#include <random>

using namespace quditls;
using namespace quditls::algebra;

namespace {

CMat random_density(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    CMat a(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = Complex(g(rng), g(rng));
    CMat rho = a * a.adjoint();
    rho /= rho.trace();
    return rho;
}

}  // namespace

TEST_CASE("tensor products") {
    CHECK(max_abs_diff(tensor(identity(2), identity(3)), identity(6)) == 0.0);

    // σ_x ⊗ I on |00⟩ gives |10⟩
    CMat sx = CMat::Zero(2, 2);
    sx(0, 1) = sx(1, 0) = 1;
    CVec v00 = tensor(basis_state(0, 2), basis_state(0, 2));
    CVec out = tensor(sx, identity(2)) * v00;
    CHECK(std::abs(out(2) - 1.0) < 1e-15);

    // mixed-product property on random matrices
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    auto rand_mat = [&](int n) {
        CMat m(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) m(r, c) = Complex(g(rng), g(rng));
        return m;
    };
    CMat a = rand_mat(2), b = rand_mat(3), c = rand_mat(2), d = rand_mat(3);
    const CMat ac = a * c, bd = b * d;
    CHECK(max_abs_diff(tensor(a, b) * tensor(c, d), tensor(ac, bd)) < 1e-12);

    // a† ⊗ I on |0⟩_Fock ⊗ ψ gives |1⟩_Fock ⊗ ψ with coefficient 1
    CVec psi(2);
    psi << Complex(0.6, 0), Complex(0, 0.8);
    CVec in = tensor(CVec(fock_state(0, 3)), psi);
    CVec up = tensor(create_op(3), identity(2)) * in;
    CHECK((up - tensor(CVec(fock_state(1, 3)), psi)).norm() < 1e-14);
}

TEST_CASE("partial trace") {
    // product state
    CMat rho00 = CMat::Zero(4, 4);
    rho00(0, 0) = 1;
    CMat red = partial_trace(rho00, {2, 2}, {0});
    CHECK(std::abs(red(0, 0) - 1.0) < 1e-15);

    // maximally entangled marginal
    CVec phi(4);
    phi << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
    CMat bell = phi * phi.adjoint();
    red = partial_trace(bell, {2, 2}, {0});
    CHECK(max_abs_diff(red, identity(2) / 2.0) < 1e-14);

    // d = 5 diagonal Schmidt state: marginal diag(9,4,4,4,4)/25
    CVec psi5 = CVec::Zero(25);
    psi5(0) = 3.0 / 5;
    for (int j = 1; j < 5; ++j) psi5(j * 5 + j) = 2.0 / 5;
    red = partial_trace(psi5 * psi5.adjoint(), {5, 5}, {0});
    for (int j = 0; j < 5; ++j)
        CHECK(std::abs(red(j, j).real() - (j == 0 ? 9.0 : 4.0) / 25) < 1e-14);
    CHECK(std::abs(red.trace().real() - 1.0) < 1e-9);

    // Tr_B(ρ_A ⊗ ρ_B) = ρ_A for density inputs
    std::mt19937_64 rng(3);
    CMat ra = random_density(3, rng), rb = random_density(4, rng);
    CHECK(max_abs_diff(partial_trace(tensor(ra, rb), {3, 4}, {0}), ra) < 1e-12);

    CHECK_THROWS(partial_trace(bell, {2, 2}, {5}));
}

TEST_CASE("displacement operators") {
    OscillatorSpace sp{20, MotionalMode::COM};
    CHECK(max_abs_diff(displacement(0.0, sp), identity(21)) < 1e-14);

    // coherent state mean occupation
    CVec vac = fock_state(0, 20);
    CVec coh = displacement(Complex(0.5, 0), sp) * vac;
    const double nbar = (coh.adjoint() * number_op(20) * coh)(0).real();
    CHECK(std::abs(nbar - 0.25) < 1e-6);

    // unitarity and inverse on the truncated space
    OscillatorSpace sp15{15, MotionalMode::COM};
    CMat d1 = displacement(Complex(0.7, 0.3), sp15);
    CHECK(unitarity_defect(d1) < 1e-12);
    CHECK(max_abs_diff(displacement(Complex(0.7, 0.3), sp15) *
                           displacement(Complex(-0.7, -0.3), sp15),
                       identity(16)) < 1e-8);

    // composition phase: D(α)D(β) = exp((αβ* − α*β)/2) D(α+β); the identity
    // holds away from the truncation edge.
    OscillatorSpace sp25{25, MotionalMode::COM};
    const Complex alpha(0.3, 0), beta(0, 0.2);
    const Complex bch = std::exp((alpha * std::conj(beta) - std::conj(alpha) * beta) / 2.0);
    CHECK(max_abs_diff_unleaked(displacement(alpha, sp25) * displacement(beta, sp25),
                                bch * displacement(alpha + beta, sp25), 26) < 1e-7);

    CHECK_THROWS(displacement(Complex(5.0, 0), OscillatorSpace{10, MotionalMode::COM}));
}

TEST_CASE("thermal state") {
    CMat th = thermal_state(0.1, 20);
    CHECK(std::abs(th.trace().real() - 1.0) < 1e-12);
    const double nbar = (number_op(20) * th).trace().real();
    CHECK(nbar == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(max_abs_diff(thermal_state(0.0, 5),
                       CVec(fock_state(0, 5)) * CVec(fock_state(0, 5)).adjoint()) == 0.0);
}

TEST_CASE("validation helpers") {
    std::mt19937_64 rng(11);
    CMat rho = random_density(6, rng);
    const auto chk = check_density(rho);
    CHECK(chk.ok());
    CHECK(chk.trace_defect == doctest::Approx(0.0).epsilon(1e-9));

    CVec bad(2);
    bad << 1.0, 1.0;
    CHECK_THROWS(require_state(bad));

    Space space{2, {20, MotionalMode::COM}};
    CHECK(space.index(1, 0, 3) == 2 * 21 + 3);
    CVec psi = CVec::Zero(space.dim());
    psi(space.index(0, 0, 20)) = 1.0;
    CHECK(leakage_top_two(psi, space) == doctest::Approx(1.0));
}

TEST_CASE("phase-stripped comparison") {
    std::mt19937_64 rng(5);
    CMat rho = random_density(4, rng);
    Eigen::SelfAdjointEigenSolver<CMat> es(rho);
    CMat u = es.eigenvectors();
    CHECK(distance_up_to_phase(u, Complex(0, 1) * u) < 1e-14);
    CHECK(distance_up_to_phase(u, u * std::exp(Complex(0, 0.7))) < 1e-14);
}
