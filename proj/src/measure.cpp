#include "quditls/measure.hpp"

#include "quditls/entangle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace quditls {
namespace measure {

namespace {
constexpr double kPi = std::numbers::pi;

std::array<double, 4> outcome_probs(const CMat& rho_spin, int d) {
    std::array<double, 4> p{0, 0, 0, 0};
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            const double pop = std::max(0.0, rho_spin(j * d + k, j * d + k).real());
            const int outcome = 2 * (j != 0) + (k != 0);
            p[outcome] += pop;
        }
    double s = p[0] + p[1] + p[2] + p[3];
    if (s > 0)
        for (auto& x : p) x /= s;
    return p;
}

void sample_counts(ShotRecord& rec, std::int64_t shots, Rng& rng) {
    rec.shots = shots;
    if (shots == kInfiniteShots) return;
    std::discrete_distribution<int> dist(rec.probs.begin(), rec.probs.end());
    for (std::int64_t s = 0; s < shots; ++s) rec.counts[dist(rng)]++;
}

}  // namespace

double ShotRecord::parity() const {
    if (shots == kInfiniteShots) return probs[0] - probs[1] - probs[2] + probs[3];
    return double(counts[0] - counts[1] - counts[2] + counts[3]) / double(shots);
}

ShotRecord readout_population(const CMat& rho_spin, int d, std::int64_t shots, Rng& rng) {
    if (shots < 0) throw std::invalid_argument("readout_population: negative shot count");
    ShotRecord rec;
    rec.setting = "population";
    rec.probs = outcome_probs(rho_spin, d);
    sample_counts(rec, shots, rng);
    return rec;
}

CMat transfer_T(int d, int j) {
    if (j < 1 || j >= d) throw std::invalid_argument("transfer_T: invalid level");
    return gates::rotation_R(d, 0, j, kPi, 0);
}

CMat analysis_A(int d, int j, double phi) {
    if (j < 1 || j >= d) throw std::invalid_argument("analysis_A: invalid level");
    return gates::rotation_R(d, 0, j, kPi / 2, phi);
}

gates::PulseSequence transfer_pulse(int d, int j, double pulse_time) {
    if (j < 1 || j >= d) throw std::invalid_argument("transfer_pulse: invalid level");
    gates::PulseSequence seq;
    gates::LocalRotation rot;
    rot.j = 0;
    rot.k = j;
    rot.theta = kPi;
    rot.duration = pulse_time;
    seq.pulses.push_back({gates::Pulse::Kind::Local, rot, pulse_time});
    return seq;
}

gates::PulseSequence analysis_pulse(int d, int j, double phi, double pulse_time) {
    if (j < 1 || j >= d) throw std::invalid_argument("analysis_pulse: invalid level");
    gates::PulseSequence seq;
    gates::LocalRotation rot;
    rot.j = 0;
    rot.k = j;
    rot.theta = kPi / 2;
    rot.phi = phi;
    rot.duration = pulse_time;
    seq.pulses.push_back({gates::Pulse::Kind::Local, rot, pulse_time});
    return seq;
}

std::vector<ShotRecord> parity_scan(const CMat& rho_spin, int d, int j, int k,
                                    const std::vector<double>& phases,
                                    std::int64_t shots_per_phase, Rng& rng) {
    if (j == k || j < 0 || k < 0 || j >= d || k >= d)
        throw std::invalid_argument("parity_scan: invalid level pair");
    const int lo = std::min(j, k), hi = std::max(j, k);
    CMat rho = rho_spin;
    if (lo > 0) {
        const CMat t = transfer_T(d, lo);
        rho = t * rho * t.adjoint();
    }
    std::vector<ShotRecord> out;
    out.reserve(phases.size());
    for (double phi : phases) {
        const CMat a = analysis_A(d, hi, phi);
        const CMat rho_a = a * rho * a.adjoint();
        ShotRecord rec;
        rec.setting = "coherence(" + std::to_string(j) + "," + std::to_string(k) + ")";
        rec.phase = phi;
        rec.probs = outcome_probs(rho_a, d);
        sample_counts(rec, shots_per_phase, rng);
        out.push_back(rec);
    }
    return out;
}

CoherenceEstimate bayes_coherence(const std::vector<ShotRecord>& records, int grid) {
    if (records.size() < 3)
        throw std::invalid_argument("bayes_coherence: need at least 3 phase settings");
    for (const auto& r : records)
        if (r.shots <= 0) throw std::invalid_argument("bayes_coherence: degenerate records");

    double offset = 0;
    for (const auto& r : records) offset += r.parity();
    offset /= double(records.size());

    const int nc = grid, np = grid;
    Eigen::MatrixXd loglik = Eigen::MatrixXd::Zero(nc, np);
    for (const auto& r : records) {
        const std::int64_t n_even = r.counts[0] + r.counts[3];
        const std::int64_t n = r.shots;
        for (int ic = 0; ic < nc; ++ic) {
            const double c = double(ic) / (nc - 1);
            for (int ip = 0; ip < np; ++ip) {
                const double psi = 2 * kPi * ip / np;
                double p = 0.5 * (1.0 + offset + c * std::cos(2 * r.phase + psi));
                p = std::clamp(p, 1e-9, 1.0 - 1e-9);
                loglik(ic, ip) += n_even * std::log(p) + (n - n_even) * std::log1p(-p);
            }
        }
    }

    const double mx = loglik.maxCoeff();
    Eigen::VectorXd post_c = Eigen::VectorXd::Zero(nc);
    for (int ic = 0; ic < nc; ++ic)
        for (int ip = 0; ip < np; ++ip) post_c(ic) += std::exp(loglik(ic, ip) - mx);
    post_c /= post_c.sum();

    double mean = 0, m2 = 0;
    for (int ic = 0; ic < nc; ++ic) {
        const double c = double(ic) / (nc - 1);
        mean += c * post_c(ic);
        m2 += c * c * post_c(ic);
    }
    const double var = std::max(0.0, m2 - mean * mean);

    auto quantile = [&](double q) {
        double acc = 0;
        for (int ic = 0; ic < nc; ++ic) {
            acc += post_c(ic);
            if (acc >= q) return double(ic) / (nc - 1);
        }
        return 1.0;
    };

    CoherenceEstimate est;
    est.magnitude = mean / 2.0;
    est.sigma = std::sqrt(var) / 2.0;
    est.ci68 = {quantile(0.16) / 2.0, quantile(0.84) / 2.0};
    est.ci95 = {quantile(0.025) / 2.0, quantile(0.975) / 2.0};
    return est;
}

StateEstimate estimate_state(const CMat& rho_spin, int d, std::int64_t shots,
                             int n_phases, Rng& rng) {
    StateEstimate est;
    est.d = d;
    est.populations = Eigen::MatrixXd::Zero(d, d);
    est.population_vars = Eigen::MatrixXd::Zero(d, d);
    est.coherences = Eigen::MatrixXd::Zero(d, d);
    est.coherence_vars = Eigen::MatrixXd::Zero(d, d);

    // Populations p_{jk} via per-ion transfer pulses and bright/bright counts.
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            CMat rho = rho_spin;
            CMat u = algebra::identity(d * d);
            if (j > 0 || k > 0) {
                const CMat t0 = j > 0 ? gates::rotation_single(d, 0, j, kPi, 0)
                                      : algebra::identity(d);
                const CMat t1 = k > 0 ? gates::rotation_single(d, 0, k, kPi, 0)
                                      : algebra::identity(d);
                u = algebra::tensor(t0, t1);
                rho = u * rho * u.adjoint();
            }
            ShotRecord rec = readout_population(rho, d, shots, rng);
            double p;
            if (shots == kInfiniteShots) {
                p = rec.probs[0];
                est.population_vars(j, k) = 0;
            } else {
                p = double(rec.counts[0]) / double(rec.shots);
                est.population_vars(j, k) =
                    std::max(p * (1 - p), 1.0 / double(rec.shots)) / double(rec.shots);
            }
            est.populations(j, k) = p;
        }

    // Pairwise diagonal-block coherences.
    std::vector<double> phases(std::max(3, n_phases));
    for (size_t i = 0; i < phases.size(); ++i) phases[i] = kPi * double(i) / phases.size();
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
            if (shots == kInfiniteShots) {
                est.coherences(j, k) = std::abs(rho_spin(j * d + j, k * d + k));
                est.coherence_vars(j, k) = 0;
                continue;
            }
            const auto records = parity_scan(rho_spin, d, j, k, phases, shots, rng);
            const CoherenceEstimate ce = bayes_coherence(records);
            est.coherences(j, k) = ce.magnitude;
            est.coherence_vars(j, k) = ce.sigma * ce.sigma;
        }
    return est;
}

ValueWithError state_fidelity_estimate(const StateEstimate& est,
                                       const gates::TargetState& target) {
    const int d = target.d;
    if (est.d != d) throw std::invalid_argument("state_fidelity_estimate: dimension mismatch");
    ValueWithError out;
    for (int i = 0; i < d; ++i) {
        const double w = target.lambda(i) * target.lambda(i);
        out.value += w * est.populations(i, i);
        out.variance += w * w * est.population_vars(i, i);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const double w = 2.0 * target.lambda(i) * target.lambda(j);
            out.value += w * est.coherences(i, j);
            out.variance += w * w * est.coherence_vars(i, j);
        }
    out.value = std::clamp(out.value, 0.0, 1.0);
    return out;
}

DecayFit decay_fit(const std::vector<int>& ns, const std::vector<double>& fidelities,
                   const std::vector<double>& variances) {
    const size_t m = ns.size();
    if (m < 3 || fidelities.size() != m)
        throw std::invalid_argument("decay_fit: need at least 3 points");
    for (double f : fidelities)
        if (f <= 0) throw std::invalid_argument("decay_fit: non-positive fidelity input");

    bool all_zero_var = true;
    for (size_t i = 0; i < variances.size(); ++i)
        if (variances[i] > 0) all_zero_var = false;

    Eigen::VectorXd y(m), w(m);
    Eigen::MatrixXd x(m, 2);
    for (size_t i = 0; i < m; ++i) {
        y(i) = std::log(fidelities[i]);
        x(i, 0) = 1.0;
        x(i, 1) = double(ns[i]);
        if (all_zero_var || variances.empty()) {
            w(i) = 1.0;
        } else {
            // var(log F) = var(F)/F²; floor avoids infinite weights.
            const double vy = std::max(variances[i], 1e-12) /
                              (fidelities[i] * fidelities[i]);
            w(i) = 1.0 / vy;
        }
    }

    const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
    const Eigen::Matrix2d gram = xtw * x;
    const Eigen::Vector2d beta = gram.ldlt().solve(xtw * y);
    const Eigen::Matrix2d cov = gram.inverse();

    DecayFit fit;
    fit.f_raw = std::exp(beta(1));
    fit.f = std::min(1.0, fit.f_raw);
    fit.amplitude = std::exp(beta(0));
    fit.f_err = fit.f_raw * std::sqrt(std::max(0.0, cov(1, 1)));
    fit.amplitude_err = fit.amplitude * std::sqrt(std::max(0.0, cov(0, 0)));
    fit.dof = int(m) - 2;

    const Eigen::VectorXd resid = y - x * beta;
    fit.max_residual = resid.cwiseAbs().maxCoeff();
    for (size_t i = 0; i < m; ++i) fit.chi2 += w(i) * resid(i) * resid(i);
    if (all_zero_var || variances.empty())
        fit.non_exponential = fit.max_residual > 1e-4;
    else
        fit.non_exponential = fit.dof > 0 && fit.chi2 / fit.dof > 9.0;
    return fit;
}

std::vector<int> entangled_gate_counts(int d, double theta, int n_max) {
    const gates::TargetState target = gates::target_state(d);
    const double threshold = entangle::schmidt_threshold(target, d - 1);
    std::vector<int> out;
    for (int n = 1; n <= n_max; ++n) {
        const CVec psi = gates::ideal_final_state(d, theta, n);
        // Margin keeps boundary (product-like) points out when theta carries
        // scan-level rounding.
        if (gates::fidelity_to_target(psi, target) > threshold + 1e-6) out.push_back(n);
    }
    return out;
}

}  // namespace measure
}  // namespace quditls
