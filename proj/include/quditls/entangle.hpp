#pragma once

#include "quditls/algebra.hpp"
#include "quditls/gates.hpp"

#include <optional>
#include <string>
#include <vector>

namespace quditls {
namespace entangle {

using gates::TargetState;

struct EntanglementReport {
    int d = 2;
    double fidelity = 0;
    double fidelity_err = 0;
    int schmidt_number_certified = 0;
    int schmidt_number_certified_1sigma = 0;
    double fidelity_threshold = 0;   ///< witness bound for maximal Schmidt number
    double concurrence = 0;
    double concurrence_err = 0;
    double max_concurrence = 0;
    double eof_lower_bound = 0;
    double eof_err = 0;
    bool pure_state_path = false;    ///< EoF computed exactly from the reduced entropy
    std::vector<std::string> notes;
};

/// Σ of the r largest λ_i²; a fidelity above this witnesses Schmidt number > r.
double schmidt_threshold(const TargetState& target, int r);

/// Largest r with F > schmidt_threshold(target, r−1) (strict inequality).
int certify_schmidt_number(double fidelity, const TargetState& target);

/// √(2(1 − Tr ρ_A²)) for a pure bipartite state on d ⊗ d.
double concurrence_pure(const CVec& psi, int d);

/// Maximum concurrence of any pure state in dimension d: √(2(d−1)/d).
double max_concurrence(int d);

/// Lower bound computable from populations p_{jk} and the coherence
/// magnitudes |ρ_{jj,kk}|:
///   √(2/(d(d−1))) · 2 Σ_{j<k} ( |ρ_{jj,kk}| − √(p_{jk} p_{kj}) ), clamped at 0.
double concurrence_lower_bound(const Eigen::MatrixXd& populations,
                               const Eigen::MatrixXd& coherence_mags, int d);
double concurrence_lower_bound(const CMat& rho_spin, int d);

/// −log₂(1 − C²/2) in bits; valid lower bound on the entanglement of
/// formation for a concurrence bound C.
double eof_lower_bound(double concurrence, int d);

/// Exact entanglement entropy (bits) of a pure state, for the pure-state path.
double entanglement_entropy(const CVec& psi, int d);

/// Report from an exact density matrix (simulation path). Fidelity and the
/// concurrence bound use populations and coherence magnitudes, so the result
/// is insensitive to local diagonal phases.
EntanglementReport full_report(const CMat& rho_spin, const TargetState& target);

/// Report from measured estimates (pipeline path).
struct MeasuredData {
    int d = 2;
    Eigen::MatrixXd populations;      ///< p_{jk}, d×d
    Eigen::MatrixXd population_vars;  ///< variances of p_{jk}
    Eigen::MatrixXd coherence_mags;   ///< |ρ_{jj,kk}| estimates (upper triangle)
    Eigen::MatrixXd coherence_vars;
};
EntanglementReport full_report(const MeasuredData& data, const TargetState& target);

/// Report from summary values (fidelity and concurrence with errors).
EntanglementReport report_from_summary(double fidelity, double fidelity_err,
                                       double concurrence, double concurrence_err,
                                       const TargetState& target);

}  // namespace entangle
}  // namespace quditls
