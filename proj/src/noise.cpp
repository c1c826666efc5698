#include "quditls/noise.hpp"

#include "quditls/entangle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <map>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace quditls {
namespace noise {

namespace {
constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97f4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t realization_seed(std::uint64_t master, std::uint64_t idx) {
    return splitmix64(master ^ splitmix64(idx + 1));
}

double draw_normal(Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    return g(rng);
}
}  // namespace

NoiseConfig NoiseConfig::zeroed() const {
    NoiseConfig c = *this;
    c.heating_rate = 0;
    c.motional_coherence = 0;
    c.initial_nbar = 0;
    c.gate_rabi_frac = 0;
    c.slow_local_rabi_frac = 0;
    c.fast_local_rabi_frac = 0;
    c.local_rabi_imbalance_frac = 0;
    c.gate_freq_noise = 0;
    c.local_freq_noise = 0;
    return c;
}

NoiseConfig NoiseConfig::single_source(const std::string& name) const {
    NoiseConfig c = zeroed();
    if (name == "heating")
        c.heating_rate = heating_rate;
    else if (name == "motional_coherence")
        c.motional_coherence = motional_coherence;
    else if (name == "occupation")
        c.initial_nbar = initial_nbar;
    else if (name == "gate_rabi")
        c.gate_rabi_frac = gate_rabi_frac;
    else if (name == "slow_local_rabi")
        c.slow_local_rabi_frac = slow_local_rabi_frac;
    else if (name == "fast_local_rabi")
        c.fast_local_rabi_frac = fast_local_rabi_frac;
    else if (name == "local_rabi_imbalance")
        c.local_rabi_imbalance_frac = local_rabi_imbalance_frac;
    else if (name == "gate_freq")
        c.gate_freq_noise = gate_freq_noise;
    else if (name == "local_freq")
        c.local_freq_noise = local_freq_noise;
    else
        throw std::invalid_argument("single_source: unknown source " + name);
    return c;
}

NoiseConfig NoiseConfig::scaled(double s) const {
    if (s < 0) throw std::invalid_argument("scaled: factor must be >= 0");
    NoiseConfig c = *this;
    c.heating_rate *= s;
    c.motional_coherence = s > 0 ? motional_coherence / s : 0;
    c.initial_nbar *= s;
    c.gate_rabi_frac *= s;
    c.slow_local_rabi_frac *= s;
    c.fast_local_rabi_frac *= s;
    c.local_rabi_imbalance_frac *= s;
    c.gate_freq_noise *= s;
    c.local_freq_noise *= s;
    return c;
}

double NoiseConfig::sensitivity(int level) const {
    if (level <= 0) return 0.0;
    const int i = level - 1;
    if (transition_sensitivity.empty()) return 1.0;
    if (i < int(transition_sensitivity.size())) return transition_sensitivity[i];
    return transition_sensitivity.back();
}

StaticOffsets sample_noise_realization(const NoiseConfig& cfg, int d, Rng& rng) {
    StaticOffsets off;
    off.gate_rabi_scale = 1.0 + cfg.gate_rabi_frac * draw_normal(rng);
    off.gate_delta_offset = cfg.gate_freq_noise * draw_normal(rng);
    const double slow = cfg.slow_local_rabi_frac * draw_normal(rng);
    const double imb = cfg.local_rabi_imbalance_frac * draw_normal(rng);
    off.local_scale = {1.0 + slow + imb / 2.0, 1.0 + slow - imb / 2.0};
    const double xi = cfg.local_freq_noise * draw_normal(rng);
    off.level_detuning.assign(d, 0.0);
    for (int j = 1; j < d; ++j) off.level_detuning[j] = cfg.sensitivity(j) * xi;
    off.fast_seed = rng();
    return off;
}

std::vector<CMat> collapse_operators(const NoiseConfig& cfg, int n_max) {
    // Infinite-temperature heating bath: √(Γ/2)·a† and √(Γ/2)·a, so the
    // occupation grows as Γt/2 while phase-space superpositions separated by
    // Δα dephase at (Γ/2)|Δα|².
    std::vector<CMat> ops;
    if (cfg.heating_rate > 0) {
        const double g = std::sqrt(cfg.heating_rate / 2.0);
        ops.push_back(g * algebra::create_op(n_max));
        ops.push_back(g * algebra::destroy_op(n_max));
    }
    if (cfg.motional_coherence > 0)
        ops.push_back(std::sqrt(cfg.dephasing_rate()) * algebra::number_op(n_max));
    return ops;
}

namespace {

CMat lindblad_rhs(const CMat& rho, const CMat& h, const std::vector<CMat>& ls) {
    CMat out = Complex(0, -1) * (h * rho - rho * h);
    for (const auto& l : ls) {
        const CMat ldag_l = l.adjoint() * l;
        out += l * rho * l.adjoint() - 0.5 * (ldag_l * rho + rho * ldag_l);
    }
    return out;
}

CMat lindblad_rk4(const CMat& rho0, const CMat& h, const std::vector<CMat>& ls,
                  double t, int n_steps) {
    CMat rho = rho0;
    const double dt = t / n_steps;
    for (int s = 0; s < n_steps; ++s) {
        const CMat k1 = lindblad_rhs(rho, h, ls);
        const CMat k2 = lindblad_rhs(rho + 0.5 * dt * k1, h, ls);
        const CMat k3 = lindblad_rhs(rho + 0.5 * dt * k2, h, ls);
        const CMat k4 = lindblad_rhs(rho + dt * k3, h, ls);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return rho;
}

}  // namespace

CMat lindblad_evolve(const CMat& rho, const CMat& h, const std::vector<CMat>& collapse,
                     double t, int n_steps, double conv_tol) {
    if (t == 0) return rho;
    const CMat coarse = lindblad_rk4(rho, h, collapse, t, n_steps);
    const CMat fine = lindblad_rk4(rho, h, collapse, t, 2 * n_steps);
    if (algebra::max_abs_diff(coarse, fine) > conv_tol)
        throw std::runtime_error("lindblad_evolve: step count not converged");
    return fine;
}

// ---------------------------------------------------------------------------
// Fast dissipator on the composite (spin ⊗ motion) space.
// ---------------------------------------------------------------------------

namespace {

struct Dissipator {
    int ds = 0, nf = 0;
    double gamma_up = 0, gamma_dn = 0, kappa = 0;
    std::vector<double> w_up, w_dn;  ///< truncated diagonal of a a† and a†a
    double rate_bound = 0;

    Dissipator(const NoiseConfig& cfg, int ds_, int nf_) : ds(ds_), nf(nf_) {
        gamma_up = cfg.heating_rate / 2.0;
        gamma_dn = cfg.heating_rate / 2.0;
        kappa = cfg.dephasing_rate();
        w_up.resize(nf);
        w_dn.resize(nf);
        for (int m = 0; m < nf; ++m) {
            w_up[m] = (m < nf - 1) ? m + 1 : 0;
            w_dn[m] = m;
        }
        rate_bound = gamma_up * nf + gamma_dn * nf + 0.5 * kappa * double(nf - 1) * (nf - 1);
    }

    bool active() const { return gamma_up > 0 || gamma_dn > 0 || kappa > 0; }

    void rhs(const CMat& rho, CMat& out) const {
        const int n = ds * nf;
        out.setZero();
        for (int rs = 0; rs < ds; ++rs)
            for (int cs = 0; cs < ds; ++cs)
                for (int m = 0; m < nf; ++m)
                    for (int k = 0; k < nf; ++k) {
                        const int r = rs * nf + m, c = cs * nf + k;
                        Complex acc = 0;
                        if (gamma_up > 0) {
                            if (m > 0 && k > 0)
                                acc += gamma_up * std::sqrt(double(m) * k) *
                                       rho(r - 1, c - 1);
                            acc -= 0.5 * gamma_up * (w_up[m] + w_up[k]) * rho(r, c);
                        }
                        if (gamma_dn > 0) {
                            if (m + 1 < nf && k + 1 < nf)
                                acc += gamma_dn * std::sqrt(double(m + 1) * (k + 1)) *
                                       rho(r + 1, c + 1);
                            acc -= 0.5 * gamma_dn * (w_dn[m] + w_dn[k]) * rho(r, c);
                        }
                        if (kappa > 0)
                            acc -= 0.5 * kappa * double(m - k) * (m - k) * rho(r, c);
                        out(r, c) = acc;
                    }
        (void)n;
    }

    /// rho ← exp(t·D) rho via Taylor series with automatic substepping.
    void apply_exp(CMat& rho, double t, CMat& tmp, CMat& tmp2) const {
        if (!active() || t == 0) return;
        const int sub = std::max(1, int(std::ceil(t * rate_bound / 0.2)));
        const double h = t / sub;
        for (int s = 0; s < sub; ++s) {
            tmp = rho;
            for (int order = 1; order <= 4; ++order) {
                rhs(tmp, tmp2);
                tmp = tmp2 * (h / order);
                rho += tmp;
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Sequence executors.
// ---------------------------------------------------------------------------

struct RunContext {
    int d = 2;
    int ds = 4;
    int nf = 21;
    lightshift::LightShiftParams params;  ///< with the realization offsets applied
    double t_g = 0;                       ///< calibrated pulse duration
    const NoiseConfig* cfg = nullptr;
    StaticOffsets off;
    Rng fast;
    int shift_count = 0;  ///< completed cyclic permutations, mod d

    double fast_scale() {
        if (cfg->fast_local_rabi_frac == 0) return 1.0;
        return 1.0 + cfg->fast_local_rabi_frac * draw_normal(fast);
    }

    // The local-operation frequency noise tracks the carrier phase of each
    // drive tone, which the permutation echo does not refocus: the detuning
    // follows the logical level through the cyclic shifts.
    double detuning_phys(int level) const {
        return off.level_detuning[((level - shift_count) % d + d) % d];
    }

    /// Per-ion local pulse factors exp(−i h_N t): h_N includes the scaled
    /// drive and the static per-level detunings.
    CMat local_unitary(const gates::LocalRotation& rot, double fscale) const {
        const double t_p = cfg->local_pulse_time;
        CMat u0, u1;
        for (int ion = 0; ion < 2; ++ion) {
            const double theta = rot.theta * off.local_scale[ion] * fscale;
            CMat h = CMat::Zero(d, d);
            if (t_p > 0) {
                h = (theta / (2.0 * t_p)) * gates::pauli_sigma(d, rot.j, rot.k, rot.phi);
                for (int j = 0; j < d; ++j) h(j, j) += detuning_phys(j);
                (ion == 0 ? u0 : u1) = algebra::expm_hermitian(h, t_p);
            } else {
                // Instantaneous pulse limit: detunings act only between pulses.
                (ion == 0 ? u0 : u1) =
                    gates::rotation_single(d, rot.j, rot.k, theta, rot.phi);
            }
        }
        return algebra::tensor(u0, u1);
    }

    Complex ls_block_phase(int j, int k, double t0, double t1) const {
        // Phase increment of spin block |jk⟩ between t0 and t1: geometric part,
        // displacement-splitting part, and the static level detunings.
        const Complex a0 = lightshift::displacement_amplitude(params, j, k, t0);
        const Complex a1 = lightshift::displacement_amplitude(params, j, k, t1);
        const double geo = lightshift::geometric_phase(params, j, k, t1) -
                           lightshift::geometric_phase(params, j, k, t0) -
                           std::imag(a1 * std::conj(a0));
        const double dwell = (detuning_phys(j) + detuning_phys(k)) * (t1 - t0);
        return std::exp(Complex(0, geo - dwell));
    }
};

/// Cache of truncated displacement operators keyed by the exact amplitude.
struct DisplacementCache {
    int n_max = 20;
    std::map<std::pair<double, double>, CMat> cache;

    const CMat& get(Complex a) {
        const auto k = std::make_pair(a.real(), a.imag());
        auto it = cache.find(k);
        if (it != cache.end()) return it->second;
        algebra::OscillatorSpace sp{n_max, algebra::MotionalMode::COM};
        return cache.emplace(k, algebra::displacement(a, sp)).first->second;
    }
};

class PureExecutor {
  public:
    PureExecutor(RunContext& ctx, int initial_fock) : ctx_(ctx) {
        m_ = CMat::Zero(ctx.ds, ctx.nf);
        m_(0, initial_fock) = 1.0;
        disp_.n_max = ctx.nf - 1;
    }

    void apply_local(const gates::LocalRotation& rot, double fscale) {
        m_ = ctx_.local_unitary(rot, fscale) * m_;
    }

    void apply_ls() {
        const int d = ctx_.d;
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                const int s = j * d + k;
                const Complex alpha =
                    lightshift::displacement_amplitude(ctx_.params, j, k, ctx_.t_g);
                const CMat& dop = disp_.get(alpha);
                const Complex phase = ctx_.ls_block_phase(j, k, 0.0, ctx_.t_g);
                m_.row(s) = phase * (dop * m_.row(s).transpose()).transpose();
            }
    }

    double leakage() const {
        double pop = 0;
        for (int s = 0; s < ctx_.ds; ++s)
            pop += std::norm(m_(s, ctx_.nf - 1)) + std::norm(m_(s, ctx_.nf - 2));
        return pop;
    }

    CMat spin_density() const { return m_ * m_.adjoint(); }

    CMat state() const { return m_; }
    void restore(const CMat& m) { m_ = m; }

  private:
    RunContext& ctx_;
    CMat m_;  ///< ds × nf amplitude matrix
    DisplacementCache disp_;
};

class DensityExecutor {
  public:
    DensityExecutor(RunContext& ctx, const Dissipator& diss)
        : ctx_(ctx), diss_(diss) {
        const int n = ctx.ds * ctx.nf;
        rho_ = CMat::Zero(n, n);
        const CMat th = algebra::thermal_state(ctx.cfg->initial_nbar, ctx.nf - 1);
        rho_.block(0, 0, ctx.nf, ctx.nf) = th;
        tmp_.resize(n, n);
        tmp2_.resize(n, n);
        disp_.n_max = ctx.nf - 1;
    }

    void apply_local(const gates::LocalRotation& rot, double fscale) {
        const double t_p = ctx_.cfg->local_pulse_time;
        diss_.apply_exp(rho_, t_p / 2, tmp_, tmp2_);
        conjugate_spin(ctx_.local_unitary(rot, fscale));
        diss_.apply_exp(rho_, t_p / 2, tmp_, tmp2_);
    }

    void apply_ls() {
        const int k_sub = std::max(1, ctx_.cfg->ls_substeps);
        const double h = ctx_.t_g / k_sub;
        diss_.apply_exp(rho_, h / 2, tmp_, tmp2_);
        for (int s = 0; s < k_sub; ++s) {
            coherent_substep(s * h, (s + 1) * h);
            diss_.apply_exp(rho_, s + 1 < k_sub ? h : h / 2, tmp_, tmp2_);
        }
    }

    double leakage() const {
        double pop = 0;
        for (int s = 0; s < ctx_.ds; ++s) {
            pop += rho_(s * ctx_.nf + ctx_.nf - 1, s * ctx_.nf + ctx_.nf - 1).real();
            pop += rho_(s * ctx_.nf + ctx_.nf - 2, s * ctx_.nf + ctx_.nf - 2).real();
        }
        return pop;
    }

    CMat spin_density() const {
        CMat out = CMat::Zero(ctx_.ds, ctx_.ds);
        for (int a = 0; a < ctx_.ds; ++a)
            for (int b = 0; b < ctx_.ds; ++b) {
                Complex acc = 0;
                for (int m = 0; m < ctx_.nf; ++m)
                    acc += rho_(a * ctx_.nf + m, b * ctx_.nf + m);
                out(a, b) = acc;
            }
        return out;
    }

    CMat state() const { return rho_; }
    void restore(const CMat& rho) { rho_ = rho; }

  private:
    void conjugate_spin(const CMat& u) {
        const int nf = ctx_.nf, ds = ctx_.ds;
        tmp_.setZero();
        for (int a = 0; a < ds; ++a)
            for (int b = 0; b < ds; ++b) {
                const Complex w = u(a, b);
                if (std::abs(w) < 1e-15) continue;
                tmp_.middleRows(a * nf, nf) += w * rho_.middleRows(b * nf, nf);
            }
        rho_.setZero();
        for (int a = 0; a < ds; ++a)
            for (int b = 0; b < ds; ++b) {
                const Complex w = std::conj(u(a, b));
                if (std::abs(w) < 1e-15) continue;
                rho_.middleCols(a * nf, nf) += w * tmp_.middleCols(b * nf, nf);
            }
    }

    void coherent_substep(double t0, double t1) {
        const int d = ctx_.d, nf = ctx_.nf;
        std::vector<const CMat*> dops(ctx_.ds);
        std::vector<Complex> phases(ctx_.ds);
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                const int s = j * d + k;
                const Complex a0 =
                    lightshift::displacement_amplitude(ctx_.params, j, k, t0);
                const Complex a1 =
                    lightshift::displacement_amplitude(ctx_.params, j, k, t1);
                dops[s] = &disp_.get(a1 - a0);
                phases[s] = ctx_.ls_block_phase(j, k, t0, t1);
            }
        for (int s = 0; s < ctx_.ds; ++s)
            rho_.middleRows(s * nf, nf) =
                phases[s] * (*dops[s] * rho_.middleRows(s * nf, nf));
        for (int s = 0; s < ctx_.ds; ++s)
            rho_.middleCols(s * nf, nf) = std::conj(phases[s]) *
                                          (rho_.middleCols(s * nf, nf) * dops[s]->adjoint());
    }

    RunContext& ctx_;
    const Dissipator& diss_;
    CMat rho_, tmp_, tmp2_;
    DisplacementCache disp_;
};

struct RealizationOutput {
    std::vector<CMat> rho_spin;  ///< per gate count
    CMat rho_spam;               ///< decoded with no gates applied
    double peak_leakage = 0;
};

int sample_thermal_fock(double nbar, int n_max, Rng& rng) {
    if (nbar <= 0) return 0;
    const double r = nbar / (1.0 + nbar);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(rng), acc = 0, w = 1.0 - r;
    double norm = 1.0 - std::pow(r, n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        acc += w * std::pow(r, n) / norm;
        if (u <= acc) return n;
    }
    return n_max;
}

template <class Executor>
RealizationOutput run_realization(Executor& exec, RunContext& ctx, int d, int n_gates,
                                  const gates::PulseSequence& prep,
                                  const gates::PulseSequence& xseq) {
    RealizationOutput out;
    out.rho_spin.reserve(n_gates);

    auto track = [&]() { out.peak_leakage = std::max(out.peak_leakage, exec.leakage()); };

    // Decode a copy with P† (fresh fast-noise stream per snapshot).
    auto decode_snapshot = [&](int n) {
        const CMat saved = exec.state();
        const Rng saved_fast = ctx.fast;
        ctx.fast = Rng(splitmix64(ctx.off.fast_seed ^ splitmix64(0x5EED + n)));
        for (int j = 1; j < d; ++j) {
            gates::LocalRotation rot;
            rot.j = 0;
            rot.k = j;
            rot.theta = -2.0 * std::asin(1.0 / std::sqrt(double(j + 1)));
            rot.phi = 0;
            exec.apply_local(rot, ctx.fast_scale());
        }
        CMat rho = exec.spin_density();
        exec.restore(saved);
        ctx.fast = saved_fast;
        return rho;
    };

    for (const auto& p : prep.pulses) exec.apply_local(p.local, ctx.fast_scale());
    out.rho_spam = decode_snapshot(0);

    for (int n = 1; n <= n_gates; ++n) {
        for (int m = 0; m < d; ++m) {
            exec.apply_ls();
            track();
            for (const auto& p : xseq.pulses) exec.apply_local(p.local, ctx.fast_scale());
            ctx.shift_count = (ctx.shift_count + 1) % d;
        }
        if (out.peak_leakage > ctx.cfg->leakage_threshold)
            throw std::runtime_error("simulate_noisy_gate: Fock truncation leakage " +
                                     std::to_string(out.peak_leakage) +
                                     " above threshold");
        out.rho_spin.push_back(decode_snapshot(n));
    }
    return out;
}

}  // namespace

CMat apply_ls_pulse_dissipative(const CMat& rho, const lightshift::LightShiftParams& p,
                                const NoiseConfig& cfg) {
    const int d = p.dim();
    const int nf = p.mode.dim();
    if (rho.rows() != d * d * nf)
        throw std::invalid_argument("apply_ls_pulse_dissipative: dimension mismatch");
    RunContext ctx;
    ctx.d = d;
    ctx.ds = d * d;
    ctx.nf = nf;
    ctx.cfg = &cfg;
    ctx.params = p;
    ctx.t_g = p.t_g;
    ctx.off.level_detuning.assign(d, 0.0);
    Dissipator diss(cfg, ctx.ds, nf);
    DensityExecutor exec(ctx, diss);
    exec.restore(rho);
    exec.apply_ls();
    return exec.state();
}

NoisyGateResult simulate_noisy_gate(int d, const lightshift::LightShiftParams& params,
                                    double theta, const NoiseConfig& cfg, int n_gates) {
    if (n_gates < 1) throw std::invalid_argument("simulate_noisy_gate: n_gates >= 1");
    const int nf = cfg.n_max + 1;
    const int ds = d * d;
    const int samples = std::max(1, cfg.n_samples);
    const bool dissipative = cfg.has_dissipation();
    // Without dissipation or sampled randomness every realization is equal.
    const bool stochastic = cfg.gate_rabi_frac > 0 || cfg.gate_freq_noise > 0 ||
                            cfg.slow_local_rabi_frac > 0 ||
                            cfg.fast_local_rabi_frac > 0 ||
                            cfg.local_rabi_imbalance_frac > 0 ||
                            cfg.local_freq_noise > 0 ||
                            (!dissipative && cfg.initial_nbar > 0);
    const int m_runs = stochastic ? samples : 1;

    const gates::PulseSequence prep = gates::preparation_pulses(d, cfg.local_pulse_time);
    const gates::PulseSequence xseq = gates::cyclic_shift_pulses(d, cfg.local_pulse_time);

    std::vector<RealizationOutput> results(m_runs);
    std::vector<std::exception_ptr> errors(m_runs);

    auto run_one = [&](int r) {
        Rng rng(realization_seed(cfg.rng_seed, r));
        RunContext ctx;
        ctx.d = d;
        ctx.ds = ds;
        ctx.nf = nf;
        ctx.cfg = &cfg;
        ctx.off = sample_noise_realization(cfg, d, rng);
        ctx.params = params;
        ctx.params.mode.n_max = cfg.n_max;
        ctx.params.delta += ctx.off.gate_delta_offset;
        for (auto& row : ctx.params.shifts)
            for (auto& v : row) v *= ctx.off.gate_rabi_scale;
        ctx.t_g = params.t_g;
        ctx.fast = Rng(splitmix64(ctx.off.fast_seed));

        if (dissipative) {
            Dissipator diss(cfg, ds, nf);
            DensityExecutor exec(ctx, diss);
            results[r] = run_realization(exec, ctx, d, n_gates, prep, xseq);
        } else {
            const int fock = sample_thermal_fock(cfg.initial_nbar, nf - 1, rng);
            PureExecutor exec(ctx, fock);
            results[r] = run_realization(exec, ctx, d, n_gates, prep, xseq);
        }
    };

    const int blocks = std::max(1, cfg.reduction_blocks);
    int n_threads = cfg.threads > 0 ? cfg.threads
                                    : int(std::thread::hardware_concurrency());
    n_threads = std::clamp(n_threads, 1, blocks);
    {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back([&, t]() {
                for (int b = t; b < blocks; b += n_threads) {
                    const int lo = int(std::int64_t(b) * m_runs / blocks);
                    const int hi = int(std::int64_t(b + 1) * m_runs / blocks);
                    for (int r = lo; r < hi; ++r) {
                        try {
                            run_one(r);
                        } catch (...) {
                            errors[r] = std::current_exception();
                        }
                    }
                }
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    NoisyGateResult out;
    out.d = d;
    out.gate_counts.resize(n_gates);
    for (int n = 1; n <= n_gates; ++n) out.gate_counts[n - 1] = n;

    // Ideal per-count reference amplitudes.
    std::vector<gates::TargetState> targets(n_gates);
    for (int n = 1; n <= n_gates; ++n) {
        const CVec psi = gates::ideal_final_state(d, theta, n);
        gates::TargetState t;
        t.d = d;
        t.lambda = RVec(d);
        for (int i = 0; i < d; ++i) t.lambda(i) = std::abs(psi(i * d + i));
        targets[n - 1] = t;
    }

    out.rho_spin.assign(n_gates, CMat::Zero(ds, ds));
    out.rho_spin_spam = CMat::Zero(ds, ds);
    for (const auto& r : results) {
        out.peak_leakage = std::max(out.peak_leakage, r.peak_leakage);
        out.rho_spin_spam += r.rho_spam;
        for (int n = 0; n < n_gates; ++n) out.rho_spin[n] += r.rho_spin[n];
    }
    for (auto& rho : out.rho_spin) rho /= double(m_runs);
    out.rho_spin_spam /= double(m_runs);
    // SPAM-only reference: decoding without gates should return |00⟩.
    out.fidelity_spam = out.rho_spin_spam(0, 0).real();

    out.fidelity.resize(n_gates);
    out.fidelity_variance.assign(n_gates, 0.0);
    for (int n = 0; n < n_gates; ++n) {
        out.fidelity[n] = gates::fidelity_from_elements(out.rho_spin[n], targets[n]);
        if (m_runs > 1) {
            // Linearized estimator around the averaged state for MC error bars.
            const auto& lam = targets[n].lambda;
            std::vector<double> vals(m_runs);
            double mean = 0;
            for (int r = 0; r < m_runs; ++r) {
                double f = 0;
                for (int i = 0; i < d; ++i)
                    f += lam(i) * lam(i) *
                         results[r].rho_spin[n](i * d + i, i * d + i).real();
                for (int i = 0; i < d; ++i)
                    for (int j = i + 1; j < d; ++j) {
                        const Complex avg = out.rho_spin[n](i * d + i, j * d + j);
                        const Complex dir =
                            std::abs(avg) > 1e-15 ? avg / std::abs(avg) : Complex(1, 0);
                        f += 2.0 * lam(i) * lam(j) *
                             std::real(results[r].rho_spin[n](i * d + i, j * d + j) *
                                       std::conj(dir));
                    }
                vals[r] = f;
                mean += f;
            }
            mean /= m_runs;
            double var = 0;
            for (double v : vals) var += (v - mean) * (v - mean);
            out.fidelity_variance[n] = var / (double(m_runs) * (m_runs - 1));
        }
    }

    out.entangled_counts = measure::entangled_gate_counts(d, theta, n_gates);
    std::vector<int> ns;
    std::vector<double> fs, vs;
    for (int n : out.entangled_counts) {
        ns.push_back(n);
        fs.push_back(std::max(out.fidelity[n - 1], 1e-12));
        vs.push_back(out.fidelity_variance[n - 1]);
    }
    if (ns.size() >= 3) out.fit = measure::decay_fit(ns, fs, vs);
    return out;
}

AnalyticRows analytic_error_budget(int d, const AnalyticErrorParams& params,
                                   double theta_d, double theta_2, double t_g,
                                   double local_pulse_time) {
    AnalyticRows rows;
    // Scattering: qubit value scaled by total LS pulse time, beam intensity
    // and the S-manifold population fraction of the equal superposition.
    const int idx = d - 2;
    double time_f =
        idx < int(params.gate_time_factor.size()) ? params.gate_time_factor[idx] : d / 2.0;
    double int_f = idx < int(params.intensity_factor.size())
                       ? params.intensity_factor[idx]
                       : std::sqrt(theta_d / theta_2);
    const double s_frac = (1.0 / d) / 0.5;
    rows.scattering = params.qubit_scattering_error * time_f * int_f * s_frac;

    // D-manifold decay: population-weighted sequence time over the lifetime.
    if (params.d_state_lifetime > 0 && std::isfinite(params.d_state_lifetime)) {
        const double t_seq = d * t_g + d * (d - 1) * local_pulse_time;
        rows.d_decay = 2.0 * (double(d - 1) / d) * t_seq / params.d_state_lifetime;
    }
    return rows;
}

std::vector<std::string> stochastic_source_names() {
    return {"heating",         "motional_coherence",  "occupation",
            "gate_rabi",       "slow_local_rabi",     "fast_local_rabi",
            "local_rabi_imbalance", "gate_freq",      "local_freq"};
}

namespace {
std::pair<double, std::string> source_magnitude(const NoiseConfig& n,
                                                const std::string& src) {
    if (src == "heating") return {n.heating_rate, "ph/s"};
    if (src == "motional_coherence") return {n.motional_coherence, "s"};
    if (src == "occupation") return {n.initial_nbar, "ph"};
    if (src == "gate_rabi") return {100 * n.gate_rabi_frac, "%"};
    if (src == "slow_local_rabi") return {100 * n.slow_local_rabi_frac, "%"};
    if (src == "fast_local_rabi") return {100 * n.fast_local_rabi_frac, "%"};
    if (src == "local_rabi_imbalance") return {100 * n.local_rabi_imbalance_frac, "%"};
    if (src == "gate_freq") return {n.gate_freq_noise, "rad/s"};
    if (src == "local_freq") return {n.local_freq_noise, "rad/s"};
    return {0.0, ""};
}
}  // namespace

BudgetTable error_budget_table(const BudgetInputs& in, const std::vector<int>& dims) {
    BudgetTable table;
    std::vector<std::string> sources =
        in.sources.empty() ? stochastic_source_names() : in.sources;

    for (const auto& src : sources) {
        BudgetRow row;
        row.source = src;
        std::tie(row.value, row.unit) = source_magnitude(in.noise, src);
        table.rows.push_back(row);
    }
    BudgetRow scat;
    scat.source = "scattering";
    scat.simulated = false;
    BudgetRow decay;
    decay.source = "d_decay";
    decay.value = in.analytic.d_state_lifetime;
    decay.unit = "s";
    decay.simulated = false;

    const double theta_2 = gates::entangling_phase(2).theta;

    for (int d : dims) {
        const double theta = gates::entangling_phase(d).theta;
        table.theta[d] = theta;
        const auto params = lightshift::solve_gate_params(
            d, theta, in.eta, lightshift::SolveConstraint::FixDelta, in.delta,
            kPi, in.noise.n_max);

        double total = 0;
        for (auto& row : table.rows) {
            const NoiseConfig cfg = in.noise.single_source(row.source);
            const auto res = simulate_noisy_gate(d, params, theta, cfg, in.n_gates);
            const double infid = std::max(0.0, 1.0 - res.fit.f);
            row.infidelity[d] = infid;
            total += infid;
        }
        const AnalyticRows ar = analytic_error_budget(
            d, in.analytic, theta, theta_2, params.t_g, in.noise.local_pulse_time);
        scat.infidelity[d] = ar.scattering;
        decay.infidelity[d] = ar.d_decay;
        total += ar.scattering + ar.d_decay;
        table.totals[d] = total;

        if (in.include_joint) {
            const auto res = simulate_noisy_gate(d, params, theta, in.noise, in.n_gates);
            table.joint[d] = std::max(0.0, 1.0 - res.fit.f);
        }
    }
    table.rows.push_back(scat);
    table.rows.push_back(decay);
    return table;
}

}  // namespace noise
}  // namespace quditls
