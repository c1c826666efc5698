#include "quditls/measure.hpp"

#include "quditls/entangle.hpp"

#include <doctest.h>

#include <numbers>

using namespace quditls;
using namespace quditls::measure;

namespace {
constexpr double kPi = std::numbers::pi;

CMat diag_state(int d, const std::vector<Complex>& amps) {
    CVec psi = CVec::Zero(d * d);
    for (int j = 0; j < d; ++j) psi(j * d + j) = amps[j];
    return psi * psi.adjoint();
}

std::vector<double> phase_grid(int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = kPi * i / n;
    return out;
}

// Synthetic parity records for a given contrast/offset fringe.
std::vector<ShotRecord> synthetic_records(double contrast, double offset, double psi0,
                                          int n_phases, std::int64_t shots, Rng& rng) {
    std::vector<ShotRecord> recs;
    for (double phi : phase_grid(n_phases)) {
        ShotRecord r;
        r.setting = "synthetic";
        r.phase = phi;
        r.shots = shots;
        const double parity = offset + contrast * std::cos(2 * phi + psi0);
        const double p_even = std::clamp((1.0 + parity) / 2.0, 0.0, 1.0);
        std::binomial_distribution<std::int64_t> bin(shots, p_even);
        const std::int64_t even = bin(rng);
        r.counts = {even, shots - even, 0, 0};
        recs.push_back(r);
    }
    return recs;
}

}  // namespace

TEST_CASE("population readout") {
    Rng rng(1);
    // |00⟩: every shot bright-bright
    CMat rho00 = diag_state(2, {1.0, 0.0});
    auto rec = readout_population(rho00, 2, 1000, rng);
    CHECK(rec.counts[0] == 1000);

    // Bell state: BB and DD each half, no cross terms
    CMat bell = diag_state(2, {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)});
    rec = readout_population(bell, 2, 4000, rng);
    CHECK(rec.counts[1] == 0);
    CHECK(rec.counts[2] == 0);
    CHECK(std::abs(rec.counts[0] - 2000.0) < 5 * std::sqrt(1000.0));

    // analytic mode returns exact probabilities
    rec = readout_population(bell, 2, kInfiniteShots, rng);
    CHECK(rec.probs[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rec.probs[3] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rec.shots == kInfiniteShots);
}

TEST_CASE("transfer and analysis pulses") {
    // T_0^1 moves |11⟩ population into the bright-bright outcome
    CMat rho11 = diag_state(2, {0.0, 1.0});
    const CMat t = transfer_T(2, 1);
    CMat moved = t * rho11 * t.adjoint();
    Rng rng(2);
    auto rec = readout_population(moved, 2, kInfiniteShots, rng);
    CHECK(rec.probs[0] == doctest::Approx(1.0).epsilon(1e-12));

    // A^1_{0,0} on the Bell state: full-contrast parity oscillation
    CMat bell = diag_state(2, {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)});
    double lo = 1, hi = -1;
    for (double phi : phase_grid(24)) {
        const CMat a = analysis_A(2, 1, phi);
        const CMat r = a * bell * a.adjoint();
        ShotRecord s = readout_population(r, 2, kInfiniteShots, rng);
        const double parity = s.probs[0] - s.probs[1] - s.probs[2] + s.probs[3];
        lo = std::min(lo, parity);
        hi = std::max(hi, parity);
    }
    CHECK((hi - lo) / 2 == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS(transfer_T(3, 0));
    CHECK_THROWS(analysis_A(3, 3, 0.0));
}

TEST_CASE("parity scan contrast") {
    Rng rng(3);
    // pure Bell state: contrast 1 in the infinite-shot limit
    CMat bell = diag_state(2, {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)});
    auto recs = parity_scan(bell, 2, 0, 1, phase_grid(24), kInfiniteShots, rng);
    double lo = 1, hi = -1;
    for (const auto& r : recs) {
        lo = std::min(lo, r.parity());
        hi = std::max(hi, r.parity());
    }
    CHECK((hi - lo) / 2 == doctest::Approx(1.0).epsilon(1e-6));

    // fully dephased state: contrast 0
    CMat dephased = CMat::Zero(4, 4);
    dephased(0, 0) = dephased(3, 3) = 0.5;
    recs = parity_scan(dephased, 2, 0, 1, phase_grid(24), kInfiniteShots, rng);
    for (const auto& r : recs) CHECK(std::abs(r.parity()) < 1e-12);

    // d=5 pair (0,1): contrast 2·(3/5)(2/5) = 0.48
    CMat psi5 = diag_state(5, {0.6, 0.4, 0.4, 0.4, 0.4});
    recs = parity_scan(psi5, 5, 0, 1, phase_grid(24), kInfiniteShots, rng);
    lo = 1, hi = -1;
    for (const auto& r : recs) {
        lo = std::min(lo, r.parity());
        hi = std::max(hi, r.parity());
    }
    CHECK((hi - lo) / 2 == doctest::Approx(0.48).epsilon(1e-6));
}

TEST_CASE("bayesian coherence estimation") {
    Rng rng(4);
    // synthetic contrast 0.8 with offset: posterior mean within 0.03
    {
        double total_err = 0;
        int n_trials = 20;
        for (int t = 0; t < n_trials; ++t) {
            auto recs = synthetic_records(0.8, 0.0, 0.6, 12, 500, rng);
            const auto est = bayes_coherence(recs);
            total_err += std::abs(est.magnitude - 0.4);
            CHECK(std::abs(est.magnitude - 0.4) < 0.03);
        }
        CHECK(total_err / n_trials < 0.01);
    }

    // contrast 1.0 never overshoots the physical bound
    for (int t = 0; t < 10; ++t) {
        auto recs = synthetic_records(1.0, 0.0, 0.2, 12, 500, rng);
        const auto est = bayes_coherence(recs);
        CHECK(est.magnitude <= 0.5 + 1e-12);
        CHECK(est.ci95[1] <= 0.5 + 1e-12);
    }

    // zero contrast concentrates near zero
    for (int t = 0; t < 5; ++t) {
        auto recs = synthetic_records(0.0, 0.0, 0.9, 12, 500, rng);
        const auto est = bayes_coherence(recs);
        CHECK(est.magnitude <= 0.05);
    }

    // credible intervals stay inside [0, 0.5]
    auto recs = synthetic_records(0.5, 0.3, 1.1, 12, 200, rng);
    const auto est = bayes_coherence(recs);
    CHECK(est.ci68[0] >= 0.0);
    CHECK(est.ci68[1] <= 0.5);
    CHECK(est.ci68[0] <= est.magnitude);
    CHECK(est.magnitude <= est.ci68[1] + 1e-12);

    CHECK_THROWS(bayes_coherence({}));
    std::vector<ShotRecord> degenerate(3);
    CHECK_THROWS(bayes_coherence(degenerate));
}

TEST_CASE("estimator calibration coverage") {
    // nominal 95% interval covers the truth in at least 90% of trials
    Rng rng(5);
    int covered = 0, trials = 200;
    for (int t = 0; t < trials; ++t) {
        auto recs = synthetic_records(0.8, 0.0, 0.37, 12, 500, rng);
        const auto est = bayes_coherence(recs);
        if (est.ci95[0] <= 0.4 && 0.4 <= est.ci95[1]) ++covered;
    }
    CHECK(covered >= 180);
}

TEST_CASE("state estimate and fidelity") {
    Rng rng(6);
    // exact qutrit target inputs give F = 1
    CMat rho3 = diag_state(3, {1 / std::sqrt(3.0), 1 / std::sqrt(3.0), 1 / std::sqrt(3.0)});
    auto est = estimate_state(rho3, 3, kInfiniteShots, 12, rng);
    auto f = state_fidelity_estimate(est, gates::target_state(3));
    CHECK(f.value == doctest::Approx(1.0).epsilon(1e-10));

    // diagonal-only state with correct populations: F = 0.5 for d = 2
    CMat dephased = CMat::Zero(4, 4);
    dephased(0, 0) = dephased(3, 3) = 0.5;
    est = estimate_state(dephased, 2, kInfiniteShots, 12, rng);
    f = state_fidelity_estimate(est, gates::target_state(2));
    CHECK(f.value == doctest::Approx(0.5).epsilon(1e-10));

    // monotone under depolarizing noise
    CMat bell = diag_state(2, {1 / std::sqrt(2.0), 1 / std::sqrt(2.0)});
    double last = 2;
    for (double v : {1.0, 0.8, 0.6, 0.4}) {
        const CMat rho = v * bell + (1 - v) * CMat::Identity(4, 4) / 4.0;
        est = estimate_state(rho, 2, kInfiniteShots, 12, rng);
        f = state_fidelity_estimate(est, gates::target_state(2));
        CHECK(f.value < last);
        last = f.value;
    }

    // sampled mode agrees within shot noise
    est = estimate_state(bell, 2, 2000, 12, rng);
    f = state_fidelity_estimate(est, gates::target_state(2));
    CHECK(f.value == doctest::Approx(1.0).epsilon(0.05));
    CHECK(f.variance > 0);
}

TEST_CASE("decay fit") {
    // exact model recovery
    std::vector<int> ns;
    std::vector<double> fs, vs;
    for (int n = 1; n <= 9; ++n) {
        ns.push_back(n);
        fs.push_back(0.98 * std::pow(0.99, n));
        vs.push_back(0.0);
    }
    auto fit = decay_fit(ns, fs, vs);
    CHECK(fit.f == doctest::Approx(0.99).epsilon(1e-6));
    CHECK(fit.amplitude == doctest::Approx(0.98).epsilon(1e-6));
    CHECK_FALSE(fit.non_exponential);

    // two-rate mixture is flagged as non-exponential
    std::vector<double> mix;
    for (int n = 1; n <= 9; ++n)
        mix.push_back(0.5 * std::pow(0.999, n) + 0.5 * std::pow(0.85, n));
    fit = decay_fit(ns, mix, vs);
    CHECK(fit.non_exponential);

    // variance weights are honored (no crash, reasonable output)
    std::vector<double> noisy = fs, w(9, 1e-6);
    noisy[8] *= 0.98;
    fit = decay_fit(ns, noisy, w);
    CHECK(fit.f <= 1.0);
    CHECK(fit.f_err > 0);

    CHECK_THROWS(decay_fit({1, 2}, {0.9, 0.8}, {0, 0}));
    CHECK_THROWS(decay_fit({1, 2, 3}, {0.9, -0.1, 0.5}, {0, 0, 0}));
}

TEST_CASE("pulse sequence forms") {
    // transfer and analysis pulses as sequences compose to the matrix forms
    const auto t = transfer_pulse(3, 2, 10e-6);
    CHECK(t.pulses.size() == 1);
    CHECK(t.total_duration() == doctest::Approx(10e-6));
    CHECK(algebra::max_abs_diff(gates::compose_local(t, 3), transfer_T(3, 2)) < 1e-14);
    const auto a = analysis_pulse(3, 1, 0.7, 10e-6);
    CHECK(algebra::max_abs_diff(gates::compose_local(a, 3), analysis_A(3, 1, 0.7)) <
          1e-14);

    // the full gate train: d light-shift pulses and d(d−1) local π pulses
    const auto g5 = gates::gate_pulse_sequence(5, 35e-6, 10e-6);
    CHECK(g5.local_pulse_count() == 20);
    CHECK(int(g5.pulses.size()) == 25);
    CHECK(g5.total_duration() == doctest::Approx(5 * 35e-6 + 20 * 10e-6));
}

TEST_CASE("entangled gate counts") {
    // d=2 at θ* = π/2: even counts give product states
    const double theta2 = gates::entangling_phase(2).theta;
    CHECK(entangled_gate_counts(2, theta2, 9) == std::vector<int>{1, 3, 5, 7, 9});

    // d=3 at θ* = 2π/3: multiples of 3 are excluded
    const double theta3 = gates::entangling_phase(3).theta;
    CHECK(entangled_gate_counts(3, theta3, 9) == std::vector<int>{1, 2, 4, 5, 7, 8});
}
