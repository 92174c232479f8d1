// operators.hpp — transmon, cavity, and composite operator construction
//
// The composite basis is (qubit eigenbasis) x (Fock basis) with flattened index
// q * cavity_dim + m, i.e. the Fock index runs fastest. Every Hermitian builder
// constructs its matrix so that the stored upper and lower triangles are exact
// conjugates (max elementwise asymmetry is 0, not merely small).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "qcl/system_spec.hpp"

namespace qcl {

using Matrix = Eigen::MatrixXd;
using MatrixC = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using VectorC = Eigen::VectorXcd;
using Index = Eigen::Index;

enum class BasisTag { Transmon, Cavity, Composite };

struct OperatorMatrix {
    MatrixC mat;
    BasisTag basis{BasisTag::Composite};
    bool hermitian{false};
};

// Ascending transmon eigenpairs; columns of `states` are |i>_q in the charge basis.
// The transmon Hamiltonian is real symmetric, so the eigenvectors are real.
struct QubitEigensystem {
    Vector energies;
    Matrix states;
};

// ------------------------------ transmon ------------------------------------

// 4 E_C N_t^2 - (E_J/2) sum_n (|n><n+1| + |n+1><n|) on charges -K..K.
inline Matrix transmon_hamiltonian_matrix(const SystemSpec& s) {
    const int d = s.qubit_dim();
    Matrix h = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const double n = static_cast<double>(i - s.charge_cutoff) - s.n_g;
        h(i, i) = 4.0 * s.e_c * n * n;
    }
    for (int i = 0; i + 1 < d; ++i) {
        h(i, i + 1) = -0.5 * s.e_j;
        h(i + 1, i) = -0.5 * s.e_j;
    }
    return h;
}

inline OperatorMatrix build_transmon_hamiltonian(const SystemSpec& s) {
    return {transmon_hamiltonian_matrix(s).cast<std::complex<double>>(), BasisTag::Transmon, true};
}

// Diagonal charge operator diag(n - N_g), n = -K..K.
inline Matrix charge_operator_matrix(const SystemSpec& s) {
    const int d = s.qubit_dim();
    Matrix m = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        m(i, i) = static_cast<double>(i - s.charge_cutoff) - s.n_g;
    return m;
}

inline OperatorMatrix build_charge_operator(const SystemSpec& s) {
    return {charge_operator_matrix(s).cast<std::complex<double>>(), BasisTag::Transmon, true};
}

// Sign convention: the largest-magnitude component of each eigenvector is made
// positive; ties broken by the lowest basis index. Keeps overlaps reproducible.
inline void fix_real_column_signs(Matrix& v) {
    for (Index j = 0; j < v.cols(); ++j) {
        Index imax = 0;
        double amax = -1.0;
        for (Index i = 0; i < v.rows(); ++i) {
            const double a = std::abs(v(i, j));
            if (a > amax) {
                amax = a;
                imax = i;
            }
        }
        if (v(imax, j) < 0.0) v.col(j) = -v.col(j);
    }
}

inline QubitEigensystem build_qubit_eigensystem(const SystemSpec& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(transmon_hamiltonian_matrix(s));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("build_qubit_eigensystem: eigensolver failed to converge");
    QubitEigensystem q{solver.eigenvalues(), solver.eigenvectors()};
    fix_real_column_signs(q.states);
    return q;
}

// Charge operator rotated into the qubit eigenbasis, symmetrized so the stored
// matrix is exactly symmetric.
inline Matrix charge_in_qubit_eigenbasis(const SystemSpec& s, const QubitEigensystem& q) {
    Matrix m = q.states.transpose() * charge_operator_matrix(s) * q.states;
    m = 0.5 * (m + m.transpose()).eval();
    return m;
}

// ------------------------------- cavity -------------------------------------

// Annihilation operator on |0>..|F>: c|m> = sqrt(m)|m-1>.
inline Matrix cavity_annihilation(int fock_cutoff) {
    const int d = fock_cutoff + 1;
    Matrix c = Matrix::Zero(d, d);
    for (int m = 0; m + 1 < d; ++m)
        c(m, m + 1) = std::sqrt(static_cast<double>(m + 1));
    return c;
}

inline Vector fock_numbers(int fock_cutoff) {
    return Vector::LinSpaced(fock_cutoff + 1, 0.0, static_cast<double>(fock_cutoff));
}

// ------------------------------ composite -----------------------------------

namespace detail {

// Superdiagonal part of the rotated charge operator: the excitation-preserving
// projection of the coupling keeps only |i+1><i| (x) c terms and conjugates.
// Restricting to |i - j| = 1 (rather than all i > j) is what makes
// [H, N_q + c^dag c] vanish identically; matrix elements with |i - j| >= 2
// change the total excitation number and are dropped.
inline Matrix superdiagonal_part(const Matrix& m) {
    Matrix r = Matrix::Zero(m.rows(), m.cols());
    for (Index i = 0; i + 1 < m.rows(); ++i)
        r(i + 1, i) = m(i + 1, i);
    return r;
}

} // namespace detail

// H = sum_i w_i |i><i| (x) 1 + 1 (x) c^dag c + H_int in the paper gauge, where
// H_int = i g N_t (c^dag - c) for Full coupling and the excitation-preserving
// projection i g (R (x) c - R^T (x) c^dag), R the superdiagonal of the rotated
// charge operator, for RWA.
inline OperatorMatrix build_composite_hamiltonian(const SystemSpec& s) {
    const QubitEigensystem q = build_qubit_eigensystem(s);
    const Matrix ntil = charge_in_qubit_eigenbasis(s, q);
    const int dq = s.qubit_dim();
    const int df = s.cavity_dim();
    const Index dim = static_cast<Index>(dq) * df;
    const std::complex<double> ig(0.0, s.g);

    MatrixC h = MatrixC::Zero(dim, dim);
    for (int qi = 0; qi < dq; ++qi)
        for (int m = 0; m < df; ++m)
            h(qi * df + m, qi * df + m) = q.energies(qi) + static_cast<double>(m);

    if (s.coupling == CouplingForm::Full) {
        // i g ntil(qi,qj) ((c^dag)_{m,m'} - c_{m,m'}): fill the upper triangle of
        // the cavity part (m' = m+1 ... the c block) and mirror exactly.
        for (int qi = 0; qi < dq; ++qi)
            for (int qj = 0; qj < dq; ++qj) {
                const double nij = ntil(qi, qj);
                if (nij == 0.0) continue;
                for (int m = 0; m + 1 < df; ++m) {
                    const double sq = std::sqrt(static_cast<double>(m + 1));
                    // c^dag contributes at (m+1, m), -c at (m, m+1)
                    h(qi * df + m + 1, qj * df + m) += ig * nij * sq;
                    h(qi * df + m, qj * df + m + 1) -= ig * nij * sq;
                }
            }
    } else {
        const Matrix r = detail::superdiagonal_part(ntil);
        for (int qi = 0; qi + 1 < dq; ++qi) {
            const double rij = r(qi + 1, qi);
            if (rij == 0.0) continue;
            for (int m = 0; m + 1 < df; ++m) {
                const double sq = std::sqrt(static_cast<double>(m + 1));
                // i g (R (x) c) at ((qi+1, m), (qi, m+1)), minus conjugate transpose
                h((qi + 1) * df + m, qi * df + m + 1) += ig * rij * sq;
                h(qi * df + m + 1, (qi + 1) * df + m) -= ig * rij * sq;
            }
        }
    }
    return {std::move(h), BasisTag::Composite, true};
}

// Unitarily equivalent real-symmetric form of the composite Hamiltonian under
// the Fock phase rotation D = diag(i^m), which maps i g N_t (c^dag - c) to
// g N_t (c^dag + c) (and the RWA projection to -g (R (x) c + R^T (x) c^dag)).
// Spectra and all |overlap|^2 are identical to the paper gauge; eigenvectors
// map back through the same phases (see EigenSolution::eigenvector_paper).
inline Matrix build_composite_rotated(const SystemSpec& s) {
    const QubitEigensystem q = build_qubit_eigensystem(s);
    const Matrix ntil = charge_in_qubit_eigenbasis(s, q);
    const int dq = s.qubit_dim();
    const int df = s.cavity_dim();
    const Index dim = static_cast<Index>(dq) * df;

    Matrix h = Matrix::Zero(dim, dim);
    for (int qi = 0; qi < dq; ++qi)
        for (int m = 0; m < df; ++m)
            h(qi * df + m, qi * df + m) = q.energies(qi) + static_cast<double>(m);

    if (s.coupling == CouplingForm::Full) {
        for (int qi = 0; qi < dq; ++qi)
            for (int qj = 0; qj < dq; ++qj) {
                const double v = s.g * ntil(qi, qj);
                if (v == 0.0) continue;
                for (int m = 0; m + 1 < df; ++m) {
                    const double sq = std::sqrt(static_cast<double>(m + 1));
                    h(qi * df + m + 1, qj * df + m) += v * sq;
                    h(qi * df + m, qj * df + m + 1) += v * sq;
                }
            }
    } else {
        const Matrix r = detail::superdiagonal_part(ntil);
        for (int qi = 0; qi + 1 < dq; ++qi) {
            const double v = -s.g * r(qi + 1, qi);
            if (v == 0.0) continue;
            for (int m = 0; m + 1 < df; ++m) {
                const double sq = std::sqrt(static_cast<double>(m + 1));
                h((qi + 1) * df + m, qi * df + m + 1) += v * sq;
                h(qi * df + m + 1, (qi + 1) * df + m) += v * sq;
            }
        }
    }
    return h;
}

// ------------------------- composite observables -----------------------------

// Diagonal of N_q (x) 1 in the composite basis.
inline Vector occupancy_diagonal(const SystemSpec& s) {
    const int df = s.cavity_dim();
    Vector d(s.dim());
    for (int qi = 0; qi < s.qubit_dim(); ++qi)
        for (int m = 0; m < df; ++m)
            d(qi * df + m) = static_cast<double>(qi);
    return d;
}

// Diagonal of 1 (x) c^dag c in the composite basis.
inline Vector photon_diagonal(const SystemSpec& s) {
    const int df = s.cavity_dim();
    Vector d(s.dim());
    for (int qi = 0; qi < s.qubit_dim(); ++qi)
        for (int m = 0; m < df; ++m)
            d(qi * df + m) = static_cast<double>(m);
    return d;
}

// N_q (x) 1 with N_q = sum_i i |i><i| in the qubit eigenbasis.
inline OperatorMatrix build_occupancy_operator(const SystemSpec& s) {
    return {occupancy_diagonal(s).cast<std::complex<double>>().asDiagonal().toDenseMatrix(),
            BasisTag::Composite, true};
}

inline OperatorMatrix build_photon_number_operator(const SystemSpec& s) {
    return {photon_diagonal(s).cast<std::complex<double>>().asDiagonal().toDenseMatrix(),
            BasisTag::Composite, true};
}

inline OperatorMatrix build_total_excitation_operator(const SystemSpec& s) {
    return {(occupancy_diagonal(s) + photon_diagonal(s))
                .cast<std::complex<double>>().asDiagonal().toDenseMatrix(),
            BasisTag::Composite, true};
}

// 1 (x) (c^dag + c), the cavity position quadrature.
inline OperatorMatrix build_cavity_position_operator(const SystemSpec& s) {
    const int dq = s.qubit_dim();
    const int df = s.cavity_dim();
    MatrixC m = MatrixC::Zero(s.dim(), s.dim());
    for (int qi = 0; qi < dq; ++qi)
        for (int k = 0; k + 1 < df; ++k) {
            const double sq = std::sqrt(static_cast<double>(k + 1));
            m(qi * df + k + 1, qi * df + k) = sq;
            m(qi * df + k, qi * df + k + 1) = sq;
        }
    return {std::move(m), BasisTag::Composite, true};
}

// 1 (x) i(c^dag - c), the cavity momentum quadrature.
inline OperatorMatrix build_cavity_momentum_operator(const SystemSpec& s) {
    const int dq = s.qubit_dim();
    const int df = s.cavity_dim();
    const std::complex<double> i1(0.0, 1.0);
    MatrixC m = MatrixC::Zero(s.dim(), s.dim());
    for (int qi = 0; qi < dq; ++qi)
        for (int k = 0; k + 1 < df; ++k) {
            const double sq = std::sqrt(static_cast<double>(k + 1));
            m(qi * df + k + 1, qi * df + k) = i1 * sq;
            m(qi * df + k, qi * df + k + 1) = -i1 * sq;
        }
    return {std::move(m), BasisTag::Composite, true};
}

// Max elementwise |A - A^dag|; 0 for every builder above.
inline double hermiticity_defect(const MatrixC& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

// Max |[A, D]| where D is diagonal with the given entries; used for the block
// labeling precondition || [H, N_q + c^dag c] ||_max.
inline double commutator_with_diagonal_max(const MatrixC& a, const Vector& diag) {
    double mx = 0.0;
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i) {
            const double v = std::abs(a(i, j)) * std::abs(diag(j) - diag(i));
            if (v > mx) mx = v;
        }
    return mx;
}

} // namespace qcl
