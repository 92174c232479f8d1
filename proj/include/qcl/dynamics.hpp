// dynamics.hpp — driven Schrodinger dynamics in the lab and displaced frames
//
// Lab frame: i d/dt |psi> = [H + E (e^{-i w_d t} c^dag + e^{i w_d t} c)] |psi>.
// Displaced frame: the state is phi = U psi with U = exp(-a c^dag + a* c), and
// the displacement a(t) obeys
//     da/dt = -i [ w_c (a + <c>_U) + i g <N_t>_U + E e^{-i w_d t} ],
// which cancels the drive and the coherent part of the cavity motion. The
// residual generator, obtained by substituting c -> c + a into the driven
// Hamiltonian and subtracting i U dU^dag/dt, is
//     H_eff = H + 2 g Im(a) (N_t x 1) - (w c^dag + w* c),  w = w_c <c>_U + i g <N_t>_U,
// so the transformed state stays near the Fock vacuum and a small cavity
// truncation suffices. Lab observables are reconstructed through
// photon_lab = <c^dag c>_U + 2 Re(a* <c>_U) + |a|^2; <N_q> is frame-invariant.
//
// Both integrators use classic fixed-step RK4 on the composite state (index
// q * cavity_dim + m, paper gauge) with the spectrum shifted by the initial
// energy; a global phase that does not affect any reported observable.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcl/observables.hpp"
#include "qcl/operators.hpp"
#include "qcl/spectrum.hpp"
#include "qcl/system_spec.hpp"

namespace qcl {

struct DriveParams {
    double amplitude{0.0};     // E, in omega_c units
    double omega_d{1.0};       // drive frequency
    double t_end{100.0};       // in 1/omega_c units
    double dt{1e-3};           // integrator step
    int fock_cutoff_dyn{150};  // cavity truncation for dynamics (may differ from spectral)
    double sample_stride{0.5}; // time between recorded samples

    bool operator==(const DriveParams&) const = default;

    void validate() const {
        if (!(amplitude >= 0.0)) throw std::invalid_argument("DriveParams: amplitude must be >= 0");
        if (!(dt > 0.0)) throw std::invalid_argument("DriveParams: dt must be > 0");
        if (!(t_end > 0.0)) throw std::invalid_argument("DriveParams: t_end must be > 0");
        if (fock_cutoff_dyn < 1) throw std::invalid_argument("DriveParams: fock_cutoff_dyn must be >= 1");
        if (!(sample_stride > 0.0)) throw std::invalid_argument("DriveParams: sample_stride must be > 0");
    }
};

enum class Frame { Lab, Displaced };

struct TrajectorySample {
    double t{0.0};
    std::complex<double> alpha;  // displacement parameter (Displaced) or <c> (Lab)
    double nq{0.0};              // <N_q (x) 1>
    double photon_lab{0.0};      // lab-frame <c^dag c>
};

struct Trajectory {
    Frame frame{Frame::Lab};
    SystemSpec spec;
    DriveParams drive;
    std::string initial_label;
    std::vector<TrajectorySample> samples;
    VectorC final_state;                 // composite state at t_end (frame as integrated)
    double norm_drift{0.0};              // max |  ||psi|| - 1  | over samples
    double max_ceiling_population{0.0};  // max top-2-Fock-row population over samples
};

// Extract a labeled eigenstate in the paper gauge and re-truncate it to the
// dynamics Fock cutoff (zero-padded if the dynamics basis is larger).
inline VectorC embed_labeled_state(const EigenSolution& sol, Index eigen_index,
                                   int fock_cutoff_dyn) {
    const int dq = sol.spec.qubit_dim();
    const int df_src = sol.spec.cavity_dim();
    const int df_dst = fock_cutoff_dyn + 1;
    const VectorC src = sol.eigenvector_paper(eigen_index);
    VectorC dst = VectorC::Zero(static_cast<Index>(dq) * df_dst);
    const int df_copy = std::min(df_src, df_dst);
    for (int q = 0; q < dq; ++q)
        dst.segment(static_cast<Index>(q) * df_dst, df_copy) =
            src.segment(static_cast<Index>(q) * df_src, df_copy);
    const double nrm = dst.norm();
    if (nrm == 0.0)
        throw std::invalid_argument("embed_labeled_state: state vanishes under re-truncation");
    dst /= nrm;
    return dst;
}

namespace detail {

// State layout for the integrator: the composite vector viewed as a cavity_dim x
// qubit_dim column-major complex matrix Psi(m, q). Right-multiplication by the
// real matrix ntil acts independently on real and imaginary parts, so it is done
// as one real GEMM on the interleaved (2*cavity_dim) x qubit_dim view.
struct DynWorkspace {
    int dq{0}, df{0};
    double g{0.0};
    Vector col_energy;   // omega_q - energy_shift, per qubit column
    VectorC row_number_c; // Fock number m per row
    VectorC sq_c;         // sqrt(m+1), m = 0..df-2
    Vector sq;            // sqrt(m+1), real
    Matrix ntil;          // charge operator in the qubit eigenbasis

    MatrixC b;          // Psi * ntil
    MatrixC k1, k2, k3, k4, tmp, out;

    DynWorkspace(const SystemSpec& spec, int fock_cutoff_dyn, double energy_shift) {
        const QubitEigensystem q = build_qubit_eigensystem(spec);
        dq = spec.qubit_dim();
        df = fock_cutoff_dyn + 1;
        g = spec.g;
        ntil = charge_in_qubit_eigenbasis(spec, q);
        col_energy = q.energies.array() - energy_shift;
        row_number_c =
            Vector::LinSpaced(df, 0.0, static_cast<double>(df - 1)).cast<std::complex<double>>();
        sq.resize(df - 1);
        for (int m = 0; m + 1 < df; ++m) sq(m) = std::sqrt(static_cast<double>(m + 1));
        sq_c = sq.cast<std::complex<double>>();
        b.resize(df, dq);
        k1.resize(df, dq); k2.resize(df, dq); k3.resize(df, dq); k4.resize(df, dq);
        tmp.resize(df, dq); out.resize(df, dq);
    }

    void mul_ntil(const MatrixC& psi, MatrixC& res) const {
        using RealView = Eigen::Map<const Matrix>;
        using RealViewMut = Eigen::Map<Matrix>;
        RealView pv(reinterpret_cast<const double*>(psi.data()), 2 * df, dq);
        RealViewMut rv(reinterpret_cast<double*>(res.data()), 2 * df, dq);
        rv.noalias() = pv * ntil;
    }

    std::complex<double> expect_c(const MatrixC& psi) const {
        return (psi.topRows(df - 1).conjugate().array() *
                (psi.middleRows(1, df - 1).array().colwise() * sq_c.array()))
            .sum();
    }

    double expect_nq(const MatrixC& psi) const {
        double s = 0.0;
        for (int q = 1; q < dq; ++q) s += q * psi.col(q).squaredNorm();
        return s;
    }

    double expect_photon(const MatrixC& psi) const {
        double s = 0.0;
        for (int q = 0; q < dq; ++q)
            for (int m = 1; m < df; ++m) s += m * std::norm(psi(m, q));
        return s;
    }

    double ceiling_population(const MatrixC& psi) const {
        double s = psi.row(df - 1).squaredNorm();
        if (df >= 2) s += psi.row(df - 2).squaredNorm();
        return s;
    }
};

} // namespace detail

namespace detail {

// out = -i * [ (diag + interaction + linear cavity terms) psi ]. `bmat` must
// hold psi * ntil (see mul_ntil). `alpha_im2g` = 2 g Im(alpha) multiplies the
// charge operator and `zlin` multiplies c^dag (with conj(zlin) multiplying c);
// the lab-frame drive and the displaced-frame -(w c^dag + w* c) term share
// that slot since both are linear cavity terms.
inline void apply_generator(DynWorkspace& ws, const MatrixC& psi, const MatrixC& bmat,
                            std::complex<double> zlin, double alpha_im2g, MatrixC& out) {
    const int df = ws.df;
    const std::complex<double> ig(0.0, ws.g);

    out = psi.array().colwise() * ws.row_number_c.array();
    out.noalias() += psi * ws.col_energy.asDiagonal();
    if (alpha_im2g != 0.0) out += alpha_im2g * bmat;
    // i g ntil (c^dag - c), applied through bmat
    out.middleRows(1, df - 1).array() +=
        (ig * bmat.topRows(df - 1).array()).colwise() * ws.sq_c.array();
    out.topRows(df - 1).array() -=
        (ig * bmat.middleRows(1, df - 1).array()).colwise() * ws.sq_c.array();
    if (zlin != 0.0) {
        out.middleRows(1, df - 1).array() +=
            (zlin * psi.topRows(df - 1).array()).colwise() * ws.sq_c.array();
        out.topRows(df - 1).array() +=
            (std::conj(zlin) * psi.middleRows(1, df - 1).array()).colwise() * ws.sq_c.array();
    }
    out *= std::complex<double>(0.0, -1.0);
}

// <H - s> on the (possibly unnormalized) state; one generator application.
inline double mean_energy(DynWorkspace& ws, const MatrixC& psi) {
    ws.mul_ntil(psi, ws.b);
    apply_generator(ws, psi, ws.b, 0.0, 0.0, ws.out);
    return -(psi.conjugate().cwiseProduct(ws.out).sum()).imag() / psi.squaredNorm();
}

inline void record_sample(Trajectory& traj, double t, std::complex<double> alpha,
                          double nq, double photon_lab, double step_defect, double ceiling,
                          const DriveParams& drive) {
    traj.samples.push_back({t, alpha, nq, photon_lab});
    if (step_defect > traj.norm_drift) traj.norm_drift = step_defect;
    if (ceiling > traj.max_ceiling_population) traj.max_ceiling_population = ceiling;
    if (ceiling > 1e-6)
        throw std::runtime_error(
            "dynamics: top-2 Fock-level population " + std::to_string(ceiling) +
            " at t = " + std::to_string(t) +
            " exceeds 1e-6; raise fock_cutoff_dyn (" +
            std::to_string(drive.fock_cutoff_dyn) + ")");
}

// Renormalize after a completed RK4 step (the integration is norm-preserving by
// construction) and report the step's unitarity defect, which measures whether
// dt resolves the populated spectral band.
inline double renormalize_step(MatrixC& psi, double t) {
    const double nrm = psi.norm();
    const double defect = std::abs(nrm - 1.0);
    if (defect > 1e-6)
        throw std::runtime_error(
            "dynamics: single-step norm defect " + std::to_string(defect) + " at t = " +
            std::to_string(t) + " exceeds 1e-6; reduce dt");
    psi /= nrm;
    return defect;
}

} // namespace detail

inline Trajectory integrate_lab(const SystemSpec& spec, const DriveParams& drive,
                                const VectorC& initial, std::string initial_label = {}) {
    drive.validate();
    const int dq = spec.qubit_dim();
    const int df = drive.fock_cutoff_dyn + 1;
    if (initial.size() != static_cast<Index>(dq) * df)
        throw std::invalid_argument("integrate_lab: initial state has wrong dimension");
    if (initial.norm() == 0.0)
        throw std::invalid_argument("integrate_lab: initial state is zero");

    // keep the populated spectral band centered on zero (a pure gauge phase):
    // shift by the initial mean energy, then re-center at every sample time
    detail::DynWorkspace ws(spec, drive.fock_cutoff_dyn, 0.0);
    MatrixC psi = Eigen::Map<const MatrixC>(initial.data(), df, dq);
    psi /= psi.norm();
    ws.col_energy.array() -= detail::mean_energy(ws, psi);

    Trajectory traj;
    traj.frame = Frame::Lab;
    traj.spec = spec;
    traj.drive = drive;
    traj.initial_label = std::move(initial_label);

    const long nsteps = std::lround(drive.t_end / drive.dt);
    const long stride = std::max(1L, std::lround(drive.sample_stride / drive.dt));
    const double e = drive.amplitude;
    double max_defect = 0.0;

    auto sample = [&](double t) {
        const double nrm2 = psi.squaredNorm();
        detail::record_sample(traj, t, ws.expect_c(psi) / nrm2, ws.expect_nq(psi) / nrm2,
                              ws.expect_photon(psi) / nrm2, max_defect,
                              ws.ceiling_population(psi) / nrm2, drive);
        ws.col_energy.array() -= detail::mean_energy(ws, psi);
    };
    auto drv_at = [&](double t) {
        return e == 0.0 ? std::complex<double>(0.0)
                        : e * std::exp(std::complex<double>(0.0, -drive.omega_d * t));
    };
    auto stage = [&](const MatrixC& p, double t, MatrixC& k) {
        ws.mul_ntil(p, ws.b);
        detail::apply_generator(ws, p, ws.b, drv_at(t), 0.0, k);
    };

    sample(0.0);
    const double dt = drive.dt;
    for (long step = 0; step < nsteps; ++step) {
        const double t = step * dt;
        stage(psi, t, ws.k1);
        ws.tmp = psi + (0.5 * dt) * ws.k1;
        stage(ws.tmp, t + 0.5 * dt, ws.k2);
        ws.tmp = psi + (0.5 * dt) * ws.k2;
        stage(ws.tmp, t + 0.5 * dt, ws.k3);
        ws.tmp = psi + dt * ws.k3;
        stage(ws.tmp, t + dt, ws.k4);
        psi += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
        max_defect = std::max(max_defect, detail::renormalize_step(psi, (step + 1) * dt));
        if ((step + 1) % stride == 0) sample((step + 1) * dt);
    }
    traj.final_state = Eigen::Map<const VectorC>(psi.data(), psi.size());
    return traj;
}

inline Trajectory integrate_displaced(const SystemSpec& spec, const DriveParams& drive,
                                      const VectorC& initial, std::string initial_label = {}) {
    drive.validate();
    const int dq = spec.qubit_dim();
    const int df = drive.fock_cutoff_dyn + 1;
    if (initial.size() != static_cast<Index>(dq) * df)
        throw std::invalid_argument("integrate_displaced: initial state has wrong dimension");
    if (initial.norm() == 0.0)
        throw std::invalid_argument("integrate_displaced: initial state is zero");

    detail::DynWorkspace ws(spec, drive.fock_cutoff_dyn, 0.0);
    MatrixC phi = Eigen::Map<const MatrixC>(initial.data(), df, dq);
    phi /= phi.norm();
    ws.col_energy.array() -= detail::mean_energy(ws, phi);

    Trajectory traj;
    traj.frame = Frame::Displaced;
    traj.spec = spec;
    traj.drive = drive;
    traj.initial_label = std::move(initial_label);

    const long nsteps = std::lround(drive.t_end / drive.dt);
    const long stride = std::max(1L, std::lround(drive.sample_stride / drive.dt));
    const double e = drive.amplitude;
    std::complex<double> alpha(0.0, 0.0);
    double max_defect = 0.0;

    // d/dt (phi, alpha); the expectation values that enter the generator are
    // evaluated on the stage state, normalized for robustness.
    MatrixC a1(df, dq), a2(df, dq), a3(df, dq), a4(df, dq);
    std::complex<double> l1, l2, l3, l4;
    auto rhs = [&](double t, const MatrixC& p, std::complex<double> a,
                   MatrixC& dp, std::complex<double>& da) {
        const double nrm2 = p.squaredNorm();
        ws.mul_ntil(p, ws.b);
        const double nt_u = (p.conjugate().cwiseProduct(ws.b).sum()).real() / nrm2;
        const std::complex<double> c_u = ws.expect_c(p) / nrm2;
        const std::complex<double> drv =
            e * std::exp(std::complex<double>(0.0, -drive.omega_d * t));
        da = std::complex<double>(0.0, -1.0) *
             (a + c_u + std::complex<double>(0.0, ws.g * nt_u) + drv);
        const std::complex<double> w = c_u + std::complex<double>(0.0, ws.g * nt_u);
        detail::apply_generator(ws, p, ws.b, -w, 2.0 * ws.g * a.imag(), dp);
    };

    auto sample = [&](double t) {
        const double nrm2 = phi.squaredNorm();
        const std::complex<double> c_u = ws.expect_c(phi) / nrm2;
        const double photon_lab = ws.expect_photon(phi) / nrm2 +
                                  2.0 * (std::conj(alpha) * c_u).real() + std::norm(alpha);
        detail::record_sample(traj, t, alpha, ws.expect_nq(phi) / nrm2, photon_lab,
                              max_defect, ws.ceiling_population(phi) / nrm2, drive);
        ws.col_energy.array() -= detail::mean_energy(ws, phi);
        if (std::norm(alpha) > static_cast<double>(spec.fock_cutoff))
            throw std::runtime_error(
                "dynamics: |alpha|^2 = " + std::to_string(std::norm(alpha)) +
                " exceeds the spectral fock_cutoff " + std::to_string(spec.fock_cutoff) +
                "; labels beyond the spectral basis are meaningless");
    };

    sample(0.0);
    const double dt = drive.dt;
    for (long step = 0; step < nsteps; ++step) {
        const double t = step * dt;
        rhs(t, phi, alpha, a1, l1);
        ws.tmp = phi + (0.5 * dt) * a1;
        rhs(t + 0.5 * dt, ws.tmp, alpha + (0.5 * dt) * l1, a2, l2);
        ws.tmp = phi + (0.5 * dt) * a2;
        rhs(t + 0.5 * dt, ws.tmp, alpha + (0.5 * dt) * l2, a3, l3);
        ws.tmp = phi + dt * a3;
        rhs(t + dt, ws.tmp, alpha + dt * l3, a4, l4);
        phi += (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        alpha += (dt / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        max_defect = std::max(max_defect, detail::renormalize_step(phi, (step + 1) * dt));
        if ((step + 1) % stride == 0) sample((step + 1) * dt);
    }
    traj.final_state = Eigen::Map<const VectorC>(phi.data(), phi.size());
    return traj;
}

// ---------------------------- trajectory analysis ----------------------------

struct TrajectoryComparison {
    double l1_mean_deviation{0.0};
    std::size_t samples_used{0};
    double n_lo{0.0}, n_hi{0.0};
};

// Mean |<N_q>(sample) - ladder occupancy interpolated at n = photon_lab| over
// samples whose lab-frame photon number falls in [n_lo, n_hi].
inline TrajectoryComparison trajectory_vs_ladder(const Trajectory& traj,
                                                 const OccupancyCurve& curve,
                                                 double n_lo, double n_hi) {
    if (curve.points.size() < 2)
        throw std::invalid_argument("trajectory_vs_ladder: occupancy curve too short");
    const double cn_lo = curve.points.front().n;
    const double cn_hi = curve.points.back().n;
    auto interp = [&](double x) {
        const std::size_t i = std::min(
            curve.points.size() - 2,
            static_cast<std::size_t>(std::max(0.0, x - cn_lo)));
        const auto& p0 = curve.points[i];
        const auto& p1 = curve.points[i + 1];
        const double f = (x - p0.n) / (p1.n - p0.n);
        return p0.value + f * (p1.value - p0.value);
    };

    TrajectoryComparison cmp;
    cmp.n_lo = n_lo;
    cmp.n_hi = n_hi;
    double sum = 0.0;
    for (const auto& s : traj.samples) {
        if (s.photon_lab < n_lo || s.photon_lab > n_hi) continue;
        if (s.photon_lab < cn_lo || s.photon_lab > cn_hi) continue;
        sum += std::abs(s.nq - interp(s.photon_lab));
        ++cmp.samples_used;
    }
    if (cmp.samples_used == 0)
        throw std::invalid_argument(
            "trajectory_vs_ladder: no trajectory samples in [" + std::to_string(n_lo) +
            ", " + std::to_string(n_hi) + "]");
    cmp.l1_mean_deviation = sum / static_cast<double>(cmp.samples_used);
    return cmp;
}

// Max deviation of (nq, photon_lab) over the common sample times of two runs;
// used for step-halving convergence and lab/displaced equivalence checks.
inline double max_observable_divergence(const Trajectory& a, const Trajectory& b) {
    const std::size_t n = std::min(a.samples.size(), b.samples.size());
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(a.samples[i].t - b.samples[i].t) > 1e-9)
            throw std::invalid_argument("max_observable_divergence: sample times differ");
        mx = std::max(mx, std::abs(a.samples[i].nq - b.samples[i].nq));
        mx = std::max(mx, std::abs(a.samples[i].photon_lab - b.samples[i].photon_lab));
    }
    return mx;
}

} // namespace qcl
