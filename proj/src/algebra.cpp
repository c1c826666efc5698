#include "quditls/algebra.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace quditls {
namespace algebra {

CMat identity(int n) { return CMat::Identity(n, n); }

CMat tensor(const CMat& a, const CMat& b) {
    const Eigen::Index ra = a.rows(), ca = a.cols();
    const Eigen::Index rb = b.rows(), cb = b.cols();
    CMat out(ra * rb, ca * cb);
    for (Eigen::Index i = 0; i < ra; ++i)
        for (Eigen::Index j = 0; j < ca; ++j)
            out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    return out;
}

CVec tensor(const CVec& a, const CVec& b) {
    CVec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

CMat destroy_op(int n_max) {
    CMat a = CMat::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

CMat create_op(int n_max) { return destroy_op(n_max).adjoint(); }

CMat number_op(int n_max) {
    CMat n = CMat::Zero(n_max + 1, n_max + 1);
    for (int k = 0; k <= n_max; ++k) n(k, k) = double(k);
    return n;
}

CVec fock_state(int n, int n_max) {
    if (n < 0 || n > n_max) throw std::invalid_argument("fock_state: level out of range");
    CVec v = CVec::Zero(n_max + 1);
    v(n) = 1.0;
    return v;
}

CVec basis_state(int index, int dim) {
    if (index < 0 || index >= dim) throw std::invalid_argument("basis_state: index out of range");
    CVec v = CVec::Zero(dim);
    v(index) = 1.0;
    return v;
}

CMat displacement(Complex alpha, const OscillatorSpace& space) {
    const double amp2 = std::norm(alpha);
    if (amp2 > 0.25 * space.n_max)
        throw std::runtime_error("displacement: |alpha|^2 too large for truncation n_max=" +
                                 std::to_string(space.n_max));
    const CMat a = destroy_op(space.n_max);
    // i(alpha a† − alpha* a) is Hermitian; exponentiate via its eigensystem.
    const CMat h = Complex(0, 1) * (alpha * a.adjoint() - std::conj(alpha) * a);
    return expm_hermitian(h, 1.0);
}

CMat thermal_state(double nbar, int n_max) {
    if (nbar < 0) throw std::invalid_argument("thermal_state: nbar must be >= 0");
    CMat rho = CMat::Zero(n_max + 1, n_max + 1);
    if (nbar == 0) {
        rho(0, 0) = 1.0;
        return rho;
    }
    const double r = nbar / (1.0 + nbar);
    double w = 1.0, total = 0.0;
    for (int n = 0; n <= n_max; ++n, w *= r) {
        rho(n, n) = w;
        total += w;
    }
    rho /= total;
    return rho;
}

CMat partial_trace(const CMat& rho, const std::vector<int>& dims,
                   const std::vector<int>& keep) {
    const int nsub = int(dims.size());
    long total = 1;
    for (int d : dims) total *= d;
    if (rho.rows() != total || rho.cols() != total)
        throw std::invalid_argument("partial_trace: dimension mismatch");
    for (int k : keep)
        if (k < 0 || k >= nsub) throw std::out_of_range("partial_trace: subsystem index out of range");

    std::vector<int> strides(nsub);
    long s = 1;
    for (int i = nsub - 1; i >= 0; --i) {
        strides[i] = int(s);
        s *= dims[i];
    }
    std::vector<char> kept(nsub, 0);
    for (int k : keep) kept[k] = 1;

    long dim_keep = 1, dim_tr = 1;
    std::vector<int> keep_idx, tr_idx;
    for (int i = 0; i < nsub; ++i) {
        if (kept[i]) {
            dim_keep *= dims[i];
            keep_idx.push_back(i);
        } else {
            dim_tr *= dims[i];
            tr_idx.push_back(i);
        }
    }

    auto full_index = [&](long ik, long it) {
        long idx = 0;
        long rem = ik;
        for (int i = int(keep_idx.size()) - 1; i >= 0; --i) {
            int sub = keep_idx[i];
            idx += (rem % dims[sub]) * strides[sub];
            rem /= dims[sub];
        }
        rem = it;
        for (int i = int(tr_idx.size()) - 1; i >= 0; --i) {
            int sub = tr_idx[i];
            idx += (rem % dims[sub]) * strides[sub];
            rem /= dims[sub];
        }
        return idx;
    };

    CMat out = CMat::Zero(dim_keep, dim_keep);
    for (long r = 0; r < dim_keep; ++r)
        for (long c = 0; c < dim_keep; ++c) {
            Complex acc = 0;
            for (long t = 0; t < dim_tr; ++t) acc += rho(full_index(r, t), full_index(c, t));
            out(r, c) = acc;
        }
    return out;
}

double leakage_top_two(const CVec& psi, const Space& space) {
    const int nf = space.fock_dim();
    if (nf < 2) return 0.0;
    double pop = 0;
    for (int s = 0; s < space.spin_dim(); ++s) {
        pop += std::norm(psi(s * nf + nf - 1));
        pop += std::norm(psi(s * nf + nf - 2));
    }
    return pop;
}

double leakage_top_two(const CMat& rho, const Space& space) {
    const int nf = space.fock_dim();
    if (nf < 2) return 0.0;
    double pop = 0;
    for (int s = 0; s < space.spin_dim(); ++s) {
        pop += rho(s * nf + nf - 1, s * nf + nf - 1).real();
        pop += rho(s * nf + nf - 2, s * nf + nf - 2).real();
    }
    return pop;
}

CMat expm_hermitian(const CMat& h, double t) {
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    const RVec& ev = es.eigenvalues();
    CVec phases(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        phases(i) = std::exp(Complex(0, -ev(i) * t));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double max_abs(const CMat& a) { return a.cwiseAbs().maxCoeff(); }

double max_abs_diff(const CMat& a, const CMat& b) { return (a - b).cwiseAbs().maxCoeff(); }

double max_abs_diff_unleaked(const CMat& a, const CMat& b, int fock_dim, int margin) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() % fock_dim != 0)
        throw std::invalid_argument("max_abs_diff_unleaked: shape mismatch");
    const int keep = std::max(1, fock_dim - margin);
    double worst = 0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        if (r % fock_dim >= keep) continue;
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (c % fock_dim >= keep) continue;
            worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
        }
    }
    return worst;
}

double unitarity_defect(const CMat& u) {
    return max_abs_diff(u.adjoint() * u, identity(int(u.cols())));
}

double distance_up_to_phase(const CMat& a, const CMat& b) {
    Complex tr = (b.adjoint() * a).trace();
    Complex phase = std::abs(tr) > 0 ? tr / std::abs(tr) : Complex(1, 0);
    return max_abs_diff(a, phase * b);
}

double distance_up_to_phase(const CVec& a, const CVec& b) {
    Complex ov = b.dot(a);
    Complex phase = std::abs(ov) > 0 ? ov / std::abs(ov) : Complex(1, 0);
    return (a - phase * b).cwiseAbs().maxCoeff();
}

DensityCheck check_density(const CMat& rho) {
    DensityCheck out;
    out.hermiticity_defect = max_abs_diff(rho, rho.adjoint());
    out.trace_defect = rho.trace().real() - 1.0;
    Eigen::SelfAdjointEigenSolver<CMat> es((rho + rho.adjoint()) / 2.0);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    return out;
}

void require_state(const CVec& psi, double tol) {
    if (std::abs(psi.norm() - 1.0) > tol)
        throw std::invalid_argument("state vector not normalized");
}

void require_density(const CMat& rho) {
    if (!check_density(rho).ok()) throw std::invalid_argument("invalid density matrix");
}

}  // namespace algebra
}  // namespace quditls
