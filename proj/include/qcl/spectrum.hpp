// spectrum.hpp — full dense eigendecomposition of composite Hamiltonians plus
// overlap / expectation queries over the sorted eigenbasis
//
// Two entry points: diagonalize() takes any Hermitian OperatorMatrix (complex
// path, LAPACK zheevd); diagonalize_spec() builds the unitarily equivalent
// real-symmetric rotated form of the composite Hamiltonian and runs dsyevd,
// which is the fast path used for paper-scale instances. Both produce an
// EigenSolution whose queries are gauge-invariant.

#pragma once

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qcl/operators.hpp"
#include "qcl/system_spec.hpp"

namespace qcl {

enum class EigenGauge { Paper, FockRotated };

struct EigenSolution {
    SystemSpec spec;
    EigenGauge gauge{EigenGauge::Paper};
    Vector energies;        // ascending
    Vector nq_expect;       // <N_q (x) 1> per eigenstate
    Vector photon_expect;   // <1 (x) c^dag c> per eigenstate
    Matrix states_real;     // eigenvector columns, FockRotated gauge
    MatrixC states_cplx;    // eigenvector columns, Paper gauge
    double residual_max{0.0};   // max_k ||H v_k - e_k v_k||_2
    double h_max_abs{0.0};      // ||H||_max of the diagonalized matrix

    bool real_mode() const { return states_real.size() > 0; }
    Index dim() const { return energies.size(); }

    // Eigenvector in the stored gauge, lifted to complex.
    VectorC eigenvector(Index k) const {
        return real_mode() ? VectorC(states_real.col(k).cast<std::complex<double>>())
                           : VectorC(states_cplx.col(k));
    }

    // Eigenvector mapped to the paper gauge. For FockRotated storage this applies
    // the Fock phases i^m that undo the rotation D = diag(i^m).
    VectorC eigenvector_paper(Index k) const {
        VectorC v = eigenvector(k);
        if (!real_mode()) return v;
        const int df = spec.cavity_dim();
        const std::complex<double> phases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        for (Index i = 0; i < v.size(); ++i)
            v(i) *= phases[static_cast<int>(i % df) % 4];
        return v;
    }
};

namespace detail {

inline void fix_complex_column_phases(MatrixC& v) {
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
        const std::complex<double> z = v(imax, j);
        if (std::abs(z) > 0.0) v.col(j) *= std::conj(z) / std::abs(z);
    }
}

// Reorder exactly/nearly degenerate eigenvalue groups by ascending photon
// expectation, then ascending qubit occupancy, for deterministic labeling.
template <typename StatesMatrix>
inline void reorder_degenerate(Vector& e, StatesMatrix& s, Vector& nq, Vector& ph) {
    const Index n = e.size();
    const double scale = std::max(1.0, std::max(std::abs(e(0)), std::abs(e(n - 1))));
    const double tol = 1e-12 * scale;
    Index lo = 0;
    while (lo < n) {
        Index hi = lo + 1;
        while (hi < n && e(hi) - e(hi - 1) <= tol) ++hi;
        if (hi - lo > 1) {
            std::vector<Index> idx(hi - lo);
            std::iota(idx.begin(), idx.end(), lo);
            std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
                if (ph(a) != ph(b)) return ph(a) < ph(b);
                return nq(a) < nq(b);
            });
            Vector e2(hi - lo), nq2(hi - lo), ph2(hi - lo);
            StatesMatrix s2(s.rows(), hi - lo);
            for (Index k = 0; k < hi - lo; ++k) {
                e2(k) = e(idx[k]);
                nq2(k) = nq(idx[k]);
                ph2(k) = ph(idx[k]);
                s2.col(k) = s.col(idx[k]);
            }
            e.segment(lo, hi - lo) = e2;
            nq.segment(lo, hi - lo) = nq2;
            ph.segment(lo, hi - lo) = ph2;
            s.middleCols(lo, hi - lo) = s2;
        }
        lo = hi;
    }
}

template <typename StatesMatrix>
inline std::pair<Vector, Vector> diagonal_expectations(const StatesMatrix& s,
                                                       const SystemSpec& spec) {
    const Vector qd = occupancy_diagonal(spec);
    const Vector pd = photon_diagonal(spec);
    Vector nq(s.cols()), ph(s.cols());
    for (Index j = 0; j < s.cols(); ++j) {
        double a = 0.0, b = 0.0;
        for (Index i = 0; i < s.rows(); ++i) {
            const double w = std::norm(s(i, j));
            a += qd(i) * w;
            b += pd(i) * w;
        }
        nq(j) = a;
        ph(j) = b;
    }
    return {std::move(nq), std::move(ph)};
}

// Max over columns of ||H v_k - e_k v_k||_2, computed in column blocks to keep
// the transient below ~30 MB at paper scale.
template <typename HMatrix, typename StatesMatrix>
inline double max_column_residual(const HMatrix& h, const StatesMatrix& s, const Vector& e) {
    const Index n = s.cols();
    const Index block = 512;
    double mx = 0.0;
    for (Index j0 = 0; j0 < n; j0 += block) {
        const Index w = std::min(block, n - j0);
        StatesMatrix r = h * s.middleCols(j0, w);
        for (Index k = 0; k < w; ++k) {
            const double nrm = (r.col(k) - e(j0 + k) * s.col(j0 + k)).norm();
            if (nrm > mx) mx = nrm;
        }
    }
    return mx;
}

} // namespace detail

// Full ascending eigensystem of a Hermitian operator (complex path).
inline EigenSolution diagonalize(const OperatorMatrix& h, const SystemSpec& provenance) {
    if (!h.hermitian)
        throw std::invalid_argument("diagonalize: operator is not marked Hermitian");
    if (h.mat.rows() != h.mat.cols() || h.mat.rows() == 0)
        throw std::invalid_argument("diagonalize: matrix must be square and non-empty");

    const Index n = h.mat.rows();
    EigenSolution sol;
    sol.spec = provenance;
    sol.gauge = EigenGauge::Paper;
    sol.h_max_abs = h.mat.cwiseAbs().maxCoeff();
    sol.states_cplx = h.mat;
    sol.energies.resize(n);

    const lapack_int info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
        sol.states_cplx.data(), static_cast<lapack_int>(n), sol.energies.data());
    if (info != 0)
        throw std::runtime_error("diagonalize: zheevd failed to converge (info=" +
                                 std::to_string(info) + ")");

    auto [nq, ph] = detail::diagonal_expectations(sol.states_cplx, provenance);
    detail::reorder_degenerate(sol.energies, sol.states_cplx, nq, ph);
    detail::fix_complex_column_phases(sol.states_cplx);
    std::tie(sol.nq_expect, sol.photon_expect) =
        detail::diagonal_expectations(sol.states_cplx, provenance);
    sol.residual_max = detail::max_column_residual(h.mat, sol.states_cplx, sol.energies);
    return sol;
}

// Fast path: diagonalize the rotated real-symmetric composite Hamiltonian.
inline EigenSolution diagonalize_spec(const SystemSpec& spec) {
    Matrix h = build_composite_rotated(spec);
    const Index n = h.rows();

    EigenSolution sol;
    sol.spec = spec;
    sol.gauge = EigenGauge::FockRotated;
    sol.h_max_abs = h.cwiseAbs().maxCoeff();
    sol.states_real = h;  // overwritten with eigenvectors
    sol.energies.resize(n);

    const lapack_int info = LAPACKE_dsyevd(
        LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
        sol.states_real.data(), static_cast<lapack_int>(n), sol.energies.data());
    if (info != 0)
        throw std::runtime_error("diagonalize_spec: dsyevd failed to converge (info=" +
                                 std::to_string(info) + ")");

    auto [nq, ph] = detail::diagonal_expectations(sol.states_real, spec);
    detail::reorder_degenerate(sol.energies, sol.states_real, nq, ph);
    fix_real_column_signs(sol.states_real);
    std::tie(sol.nq_expect, sol.photon_expect) =
        detail::diagonal_expectations(sol.states_real, spec);
    sol.residual_max = detail::max_column_residual(h, sol.states_real, sol.energies);
    return sol;
}

// Populate caches and residual bookkeeping for states loaded from a cache file or
// constructed synthetically in tests. Residual is carried over by the caller.
inline void refresh_expectations(EigenSolution& sol) {
    if (sol.real_mode())
        std::tie(sol.nq_expect, sol.photon_expect) =
            detail::diagonal_expectations(sol.states_real, sol.spec);
    else
        std::tie(sol.nq_expect, sol.photon_expect) =
            detail::diagonal_expectations(sol.states_cplx, sol.spec);
}

// |<lambda | p>_q (x) |n>_c|^2 for every eigenstate; a row of the eigenvector
// matrix since product states are basis vectors of the composite basis.
inline Vector product_state_overlaps(const EigenSolution& sol, int p, int n) {
    if (p < 0 || p >= sol.spec.qubit_dim())
        throw std::invalid_argument("product_state_overlaps: qubit label out of range");
    if (n < 0 || n > sol.spec.fock_cutoff)
        throw std::invalid_argument("product_state_overlaps: photon number out of range");
    const Index row = static_cast<Index>(p) * sol.spec.cavity_dim() + n;
    if (sol.real_mode())
        return sol.states_real.row(row).transpose().cwiseAbs2();
    return sol.states_cplx.row(row).transpose().cwiseAbs2();
}

// |<lambda|v>|^2 / <v|v> for every eigenstate.
inline Vector vector_overlaps(const EigenSolution& sol, const VectorC& v) {
    if (v.size() != sol.dim())
        throw std::invalid_argument("vector_overlaps: dimension mismatch");
    const double nrm2 = v.squaredNorm();
    if (nrm2 == 0.0)
        throw std::invalid_argument("vector_overlaps: zero vector");
    Vector ov;
    if (sol.real_mode()) {
        const Vector re = sol.states_real.transpose() * v.real();
        const Vector im = sol.states_real.transpose() * v.imag();
        ov = re.cwiseAbs2() + im.cwiseAbs2();
    } else {
        ov = (sol.states_cplx.adjoint() * v).cwiseAbs2();
    }
    return ov / nrm2;
}

} // namespace qcl
