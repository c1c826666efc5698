#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace quditls {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

namespace algebra {

enum class MotionalMode { COM, Breathing };

/// Truncated harmonic oscillator, dimension n_max + 1.
struct OscillatorSpace {
    int n_max = 20;
    MotionalMode mode = MotionalMode::COM;

    int dim() const { return n_max + 1; }
};

/// Composite space for two qudits and one motional mode.
/// Basis ordering is (ion 0 spin) ⊗ (ion 1 spin) ⊗ (motion), row-major:
/// index(j, k, n) = (j*d + k)*(n_max+1) + n.
struct Space {
    int d = 2;
    OscillatorSpace osc;

    int spin_dim() const { return d * d; }
    int fock_dim() const { return osc.dim(); }
    int dim() const { return spin_dim() * fock_dim(); }
    int spin_index(int j, int k) const { return j * d + k; }
    int index(int j, int k, int n) const { return spin_index(j, k) * fock_dim() + n; }
};

CMat identity(int n);
CMat tensor(const CMat& a, const CMat& b);
CVec tensor(const CVec& a, const CVec& b);

/// Ladder operators on the truncated Fock space.
CMat destroy_op(int n_max);
CMat create_op(int n_max);
CMat number_op(int n_max);

CVec fock_state(int n, int n_max);
CVec basis_state(int index, int dim);

/// exp(alpha a† − alpha* a) on the truncated space (exactly unitary there).
/// Throws if |alpha|² is too large a fraction of the truncation.
CMat displacement(Complex alpha, const OscillatorSpace& space);

/// Thermal state with mean occupation nbar, renormalized after truncation.
CMat thermal_state(double nbar, int n_max);

/// Trace out all subsystems not listed in `keep`. `dims` are the factor
/// dimensions in tensor order, `keep` is a sorted list of factor indices.
CMat partial_trace(const CMat& rho, const std::vector<int>& dims,
                   const std::vector<int>& keep);

/// Population in the top two Fock levels, maximized over spin sectors.
double leakage_top_two(const CVec& psi, const Space& space);
double leakage_top_two(const CMat& rho, const Space& space);

/// Matrix exponential of −i·H·t for Hermitian H (eigendecomposition).
CMat expm_hermitian(const CMat& h, double t);

double max_abs(const CMat& a);
double max_abs_diff(const CMat& a, const CMat& b);

/// Max-norm difference restricted to the unleaked subspace: entries whose
/// Fock indices (operators are blocked spin ⊗ motion, block size fock_dim)
/// both stay at least `margin` levels below the truncation edge.
double max_abs_diff_unleaked(const CMat& a, const CMat& b, int fock_dim,
                             int margin = 8);

/// ‖U†U − I‖_max.
double unitarity_defect(const CMat& u);

/// min over global phase of ‖A − e^{iφ}B‖_max (φ from Tr(B†A)).
double distance_up_to_phase(const CMat& a, const CMat& b);
double distance_up_to_phase(const CVec& a, const CVec& b);

struct DensityCheck {
    double hermiticity_defect = 0;
    double trace_defect = 0;
    double min_eigenvalue = 0;
    bool ok(double herm_tol = 1e-10, double trace_tol = 1e-9,
            double eig_floor = -1e-8) const {
        return hermiticity_defect < herm_tol && std::abs(trace_defect) < trace_tol &&
               min_eigenvalue > eig_floor;
    }
};
DensityCheck check_density(const CMat& rho);

/// Throws std::invalid_argument when the state invariants are violated.
void require_state(const CVec& psi, double tol = 1e-10);
void require_density(const CMat& rho);

}  // namespace algebra
}  // namespace quditls
