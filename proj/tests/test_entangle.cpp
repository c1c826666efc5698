#include "quditls/entangle.hpp"

#include <doctest.h>

#include <random>

using namespace quditls;
using namespace quditls::entangle;
using gates::TargetState;
using gates::target_state;

namespace {

CVec haar_state(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    CVec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
    return v / v.norm();
}

// Random pure state with Schmidt rank ≤ r, built from r orthonormal local
// bases and random coefficients.
CVec rank_limited_state(int d, int r, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    auto haar_unitary = [&](int n) {
        CMat a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
        Eigen::HouseholderQR<CMat> qr(a);
        return CMat(qr.householderQ());
    };
    const CMat ua = haar_unitary(d), ub = haar_unitary(d);
    CVec c(r);
    for (int i = 0; i < r; ++i) c(i) = Complex(g(rng), g(rng));
    c /= c.norm();
    CVec psi = CVec::Zero(d * d);
    for (int i = 0; i < r; ++i)
        psi += c(i) * algebra::tensor(CVec(ua.col(i)), CVec(ub.col(i)));
    return psi;
}

CVec max_entangled(int d) {
    CVec psi = CVec::Zero(d * d);
    for (int j = 0; j < d; ++j) psi(j * d + j) = 1.0 / std::sqrt(double(d));
    return psi;
}

}  // namespace

TEST_CASE("schmidt thresholds") {
    CHECK(schmidt_threshold(target_state(3), 2) == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(schmidt_threshold(target_state(2), 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(schmidt_threshold(target_state(4), 3) == doctest::Approx(0.75).epsilon(1e-12));
    // d=5 target: 0.36 + 3·0.16 = 0.84 from the stated coefficients
    CHECK(schmidt_threshold(target_state(5), 4) == doctest::Approx(0.84).epsilon(1e-12));
    CHECK(schmidt_threshold(target_state(5), 4) != doctest::Approx(0.8).epsilon(1e-3));
}

TEST_CASE("schmidt certification") {
    CHECK(certify_schmidt_number(0.978, target_state(3)) == 3);
    // boundary: strict inequality required
    CHECK(certify_schmidt_number(0.5, target_state(2)) == 1);
    CHECK(certify_schmidt_number(0.5 + 1e-9, target_state(2)) == 2);
    CHECK(certify_schmidt_number(0.947, target_state(4)) == 4);
    CHECK(certify_schmidt_number(0.884, target_state(5)) == 5);
}

TEST_CASE("pure-state concurrence") {
    CHECK(concurrence_pure(max_entangled(2), 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(concurrence_pure(max_entangled(3), 3) == doctest::Approx(1.1547).epsilon(1e-4));
    CHECK(concurrence_pure(max_entangled(4), 4) == doctest::Approx(1.2247).epsilon(1e-4));
    CHECK(concurrence_pure(max_entangled(5), 5) == doctest::Approx(1.2649).epsilon(1e-4));

    CVec prod = CVec::Zero(4);
    prod(1) = 1.0;  // |01⟩
    CHECK(concurrence_pure(prod, 2) == doctest::Approx(0.0));

    // max-concurrence row to three decimals
    CHECK(max_concurrence(2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(max_concurrence(3) == doctest::Approx(1.154).epsilon(1e-3));
    CHECK(max_concurrence(4) == doctest::Approx(1.224).epsilon(1e-3));
    CHECK(max_concurrence(5) == doctest::Approx(1.264).epsilon(1e-3));
}

TEST_CASE("concurrence lower bound") {
    // tight on the maximally entangled family
    for (int d = 2; d <= 5; ++d) {
        const CVec psi = max_entangled(d);
        const CMat rho = psi * psi.adjoint();
        CHECK(concurrence_lower_bound(rho, d) ==
              doctest::Approx(concurrence_pure(psi, d)).epsilon(1e-10));
    }

    // fully mixed state clamps to zero
    CHECK(concurrence_lower_bound(CMat(CMat::Identity(9, 9) / 9.0), 3) == 0.0);

    // strictly decreasing along the depolarizing family
    const CVec psi = max_entangled(2);
    const CMat pure = psi * psi.adjoint();
    double last = 2.0;
    for (double v : {1.0, 0.9, 0.7, 0.5}) {
        const CMat rho = v * pure + (1 - v) * CMat::Identity(4, 4) / 4.0;
        const double c = concurrence_lower_bound(rho, 2);
        CHECK(c < last);
        last = c;
    }

    Eigen::MatrixXd bad_p = Eigen::MatrixXd::Constant(2, 2, 1.0);
    CHECK_THROWS(concurrence_lower_bound(bad_p, Eigen::MatrixXd::Zero(2, 2), 2));
}

TEST_CASE("entanglement of formation bound") {
    CHECK(eof_lower_bound(1.0, 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eof_lower_bound(1.08, 5) == doctest::Approx(1.262).epsilon(1e-3));
    CHECK(eof_lower_bound(0.0, 3) == doctest::Approx(0.0));
    CHECK_THROWS(eof_lower_bound(2.0, 2));

    // strictly increasing on its domain
    double last = -1;
    for (double c = 0; c <= max_concurrence(4) + 1e-12; c += 0.05) {
        const double e = eof_lower_bound(std::min(c, max_concurrence(4)), 4);
        CHECK(e > last);
        last = e;
    }
}

TEST_CASE("witness soundness over rank-limited states") {
    std::mt19937_64 rng(1234);
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const int d = 2 + int(rng() % 4);
        const int r = 1 + int(rng() % d);
        const CVec psi = rank_limited_state(d, r, rng);
        const TargetState tgt = target_state(d);
        Complex ov = 0;
        for (int j = 0; j < d; ++j) ov += tgt.lambda(j) * std::conj(psi(j * d + j));
        const double f = std::norm(ov);
        CHECK(f <= schmidt_threshold(tgt, r) + 1e-12);
    }
}

TEST_CASE("bound validity over random pure states") {
    std::mt19937_64 rng(77);
    for (int d = 2; d <= 5; ++d)
        for (int t = 0; t < 2500; ++t) {
            const CVec psi = haar_state(d * d, rng);
            const CMat rho = psi * psi.adjoint();
            CHECK(concurrence_lower_bound(rho, d) <= concurrence_pure(psi, d) + 1e-10);
        }
}

TEST_CASE("full report") {
    // ideal single-gate qutrit state
    const auto ep = gates::entangling_phase(3);
    const CMat rho = ep.state * ep.state.adjoint();
    const auto rep = full_report(rho, target_state(3));
    CHECK(rep.fidelity == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.schmidt_number_certified == 3);
    CHECK(rep.concurrence == doctest::Approx(1.1547).epsilon(1e-4));
    CHECK(rep.pure_state_path);
    CHECK(rep.eof_lower_bound == doctest::Approx(std::log2(3.0)).epsilon(1e-9));

    // reference measured values reproduce the expected certificates
    struct Row {
        int d;
        double f, f_err, c, c_err, eof, eof_err;
        int schmidt;
    };
    const std::vector<Row> rows = {{2, 0.989, 0.005, 0.98, 0.01, 0.97, 0.08, 2},
                                   {3, 0.978, 0.012, 1.12, 0.02, 1.50, 0.12, 3},
                                   {4, 0.947, 0.012, 1.14, 0.01, 1.61, 0.13, 4},
                                   {5, 0.884, 0.012, 1.08, 0.01, 1.26, 0.06, 5}};
    for (const auto& row : rows) {
        const auto r = report_from_summary(row.f, row.f_err, row.c, row.c_err,
                                           target_state(row.d));
        CHECK(r.schmidt_number_certified == row.schmidt);
        const double bars = (row.d == 2 || row.d == 5) ? 1.0 : 1.5;
        CHECK(std::abs(r.eof_lower_bound - row.eof) <= bars * row.eof_err);
        CHECK(r.concurrence <= r.max_concurrence + 1e-9);
    }

    CHECK_THROWS(full_report(CMat(CMat::Identity(4, 4) / 4.0), target_state(3)));
}
