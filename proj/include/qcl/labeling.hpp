// labeling.hpp — assign (qubit level p, photon number n) labels to eigenstates
//
// Four methods: Overlap (largest product-state overlap), Block (total-excitation
// block structure; requires an excitation-preserving Hamiltonian), Recursive
// (largest overlap with c^dag applied to the previous labeled state), and
// Continuity (energy-window candidates around a linear extrapolation, winner by
// smallest change of qubit occupancy). compare_ladders locates the first
// divergence between two ladders and, for continuity pairs whose divergent
// energies straddle the shared candidate energy, bounds the level repulsion.

#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "qcl/operators.hpp"
#include "qcl/spectrum.hpp"
#include "qcl/system_spec.hpp"

namespace qcl {

enum class LabelMethod { Overlap, Block, Recursive, Continuity };

enum class FirstStep { Extrapolate, Overlap };

struct ContinuityConfig {
    double delta{0.01};  // full energy-window width; candidates satisfy |e - e'| <= delta/2
    int n_max{0};
    FirstStep first_step{FirstStep::Extrapolate};
    bool ignore_truncation_margin{false};
};

struct LadderEntry {
    Index eigen_index{0};
    double energy{0.0};
    double nq_expect{0.0};
    bool window_fallback{false};
    double photon_expect{0.0};
};

struct LabelLadder {
    int p{0};
    LabelMethod method{LabelMethod::Overlap};
    std::vector<LadderEntry> entries;  // entry k labels photon number n = k
    double delta{0.0};                 // continuity only
    FirstStep first_step{FirstStep::Extrapolate};
    SystemSpec spec;                   // provenance
    // A labeling that assigns one eigenstate to two photon numbers has failed;
    // this is evidence about the method, so it is diagnosed rather than fatal.
    bool duplicate_indices{false};
    int duplicate_count{0};

    int n_max() const { return static_cast<int>(entries.size()) - 1; }
};

inline const char* to_string(LabelMethod m) {
    switch (m) {
        case LabelMethod::Overlap: return "overlap";
        case LabelMethod::Block: return "block";
        case LabelMethod::Recursive: return "recursive";
        case LabelMethod::Continuity: return "continuity";
    }
    return "?";
}

namespace detail {

// Labeled states near the Fock ceiling are truncation-polluted; by default a
// 90-state margin below the cutoff is enforced (overridable for small fixtures).
inline void check_ladder_range(const SystemSpec& spec, int p, int n_max, bool ignore_margin) {
    if (p < 0 || p >= spec.qubit_dim())
        throw std::invalid_argument("labeling: qubit label p out of range");
    if (n_max < 0 || n_max >= spec.dim())
        throw std::invalid_argument("labeling: n_max out of range");
    if (!ignore_margin && n_max > spec.fock_cutoff - 90)
        throw std::invalid_argument(
            "labeling: n_max " + std::to_string(n_max) + " exceeds fock_cutoff - 90 = " +
            std::to_string(spec.fock_cutoff - 90) +
            "; raise fock_cutoff or set ignore_truncation_margin");
}

inline Index argmax(const Vector& v) {
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;  // strict: ties keep the lower index
    return best;
}

inline void push_entry(LabelLadder& ladder, std::unordered_set<Index>& used, Index k,
                       const EigenSolution& sol, bool fallback = false) {
    if (!used.insert(k).second) {
        ladder.duplicate_indices = true;
        ++ladder.duplicate_count;
    }
    ladder.entries.push_back(
        {k, sol.energies(k), sol.nq_expect(k), fallback, sol.photon_expect(k)});
}

// Apply 1 (x) c^dag to a composite-basis vector (valid in either gauge up to a
// global phase, which overlaps ignore). The top Fock component is dropped.
template <typename Vec>
inline Vec apply_cdagger(const Vec& v, int cavity_dim) {
    Vec out = Vec::Zero(v.size());
    const Index dq = v.size() / cavity_dim;
    for (Index q = 0; q < dq; ++q)
        for (int m = 0; m + 1 < cavity_dim; ++m)
            out(q * cavity_dim + m + 1) = std::sqrt(static_cast<double>(m + 1)) * v(q * cavity_dim + m);
    return out;
}

} // namespace detail

// One step of the continuity selection rule, exposed separately so the
// level-repulsion property can be exercised on synthetic two-level models.
// `energies` must be ascending. Returns the winning index and whether the
// empty-window fallback ("two eigenstates closest to the candidate") fired.
struct ContinuitySelection {
    Index index{0};
    bool fallback{false};
};

inline ContinuitySelection continuity_select(const Vector& energies, const Vector& nq,
                                             double eps_prime, double delta, double prev_nq) {
    const Index n = energies.size();
    const double* beg = energies.data();
    const double* end = beg + n;

    std::vector<Index> cands;
    bool fallback = false;
    // window is inclusive at exactly |e - e'| = delta/2
    const double lo = eps_prime - 0.5 * delta;
    const double hi = eps_prime + 0.5 * delta;
    const Index first = std::lower_bound(beg, end, lo) - beg;
    Index last = std::upper_bound(beg, end, hi) - beg;
    if (first < last) {
        for (Index k = first; k < last; ++k) cands.push_back(k);
    } else {
        // no state in the window: take the two closest; if the 2nd and 3rd
        // closest are exactly equidistant, include both
        fallback = true;
        const Index ins = std::lower_bound(beg, end, eps_prime) - beg;
        Index l = ins - 1, r = ins;
        auto dist = [&](Index k) { return std::abs(energies(k) - eps_prime); };
        auto take_closer = [&]() -> Index {
            if (l < 0) return r++;
            if (r >= n) return l--;
            return dist(l) <= dist(r) ? l-- : r++;
        };
        cands.push_back(take_closer());
        if (l >= 0 || r < n) cands.push_back(take_closer());
        if ((l >= 0 || r < n)) {
            const Index third = (l < 0) ? r : (r >= n) ? l : (dist(l) <= dist(r) ? l : r);
            if (dist(third) == dist(cands.back())) cands.push_back(third);
        }
    }

    Index best = cands.front();
    for (std::size_t i = 1; i < cands.size(); ++i) {
        const Index k = cands[i];
        const double dnq_k = std::abs(nq(k) - prev_nq);
        const double dnq_b = std::abs(nq(best) - prev_nq);
        if (dnq_k < dnq_b) {
            best = k;
        } else if (dnq_k == dnq_b) {
            const double de_k = std::abs(energies(k) - eps_prime);
            const double de_b = std::abs(energies(best) - eps_prime);
            if (de_k < de_b || (de_k == de_b && k < best)) best = k;
        }
    }
    return {best, fallback};
}

// ------------------------------ ladder methods -------------------------------

inline LabelLadder label_overlap(const EigenSolution& sol, int p, int n_max,
                                 bool ignore_margin = false) {
    detail::check_ladder_range(sol.spec, p, n_max, ignore_margin);
    LabelLadder ladder{p, LabelMethod::Overlap};
    ladder.spec = sol.spec;
    std::unordered_set<Index> used;
    for (int n = 0; n <= n_max; ++n)
        detail::push_entry(ladder, used, detail::argmax(product_state_overlaps(sol, p, n)), sol);
    return ladder;
}

// Requires [H, N_q + c^dag c] = 0 (RWA coupling); the commutator norm is checked
// against the Hamiltonian rebuilt from the solution's provenance spec.
inline LabelLadder label_block(const EigenSolution& sol, int p, int n_max,
                               bool ignore_margin = false) {
    detail::check_ladder_range(sol.spec, p, n_max, ignore_margin);

    const OperatorMatrix h = build_composite_hamiltonian(sol.spec);
    const Vector total = occupancy_diagonal(sol.spec) + photon_diagonal(sol.spec);
    const double comm = commutator_with_diagonal_max(h.mat, total);
    const double hmax = h.mat.cwiseAbs().maxCoeff();
    if (comm > 1e-8 * hmax)
        throw std::invalid_argument(
            "label_block: Hamiltonian does not preserve the total excitation number; "
            "||[H, N_q + c^dag c]||_max = " + std::to_string(comm) +
            " exceeds 1e-8 * ||H||_max = " + std::to_string(1e-8 * hmax));

    LabelLadder ladder{p, LabelMethod::Block};
    ladder.spec = sol.spec;
    std::unordered_set<Index> used;
    for (int n = 0; n <= n_max; ++n) {
        const long m_target = p + n;
        Index best = -1;
        double best_dph = 0.0;
        for (Index k = 0; k < sol.dim(); ++k) {
            if (std::lround(sol.nq_expect(k) + sol.photon_expect(k)) != m_target) continue;
            const double dph = std::abs(sol.photon_expect(k) - static_cast<double>(n));
            if (best < 0 || dph < best_dph) {
                best = k;
                best_dph = dph;
            }
        }
        if (best < 0)
            throw std::runtime_error("label_block: no eigenstate with total excitation " +
                                     std::to_string(m_target));
        detail::push_entry(ladder, used, best, sol);
    }
    return ladder;
}

inline LabelLadder label_recursive(const EigenSolution& sol, int p, int n_max,
                                   bool ignore_margin = false) {
    detail::check_ladder_range(sol.spec, p, n_max, ignore_margin);
    LabelLadder ladder{p, LabelMethod::Recursive};
    ladder.spec = sol.spec;
    std::unordered_set<Index> used;
    detail::push_entry(ladder, used, detail::argmax(product_state_overlaps(sol, p, 0)), sol);
    const int df = sol.spec.cavity_dim();
    for (int n = 1; n <= n_max; ++n) {
        const Index prev = ladder.entries.back().eigen_index;
        Vector ov;
        if (sol.real_mode()) {
            const Vector cand = detail::apply_cdagger<Vector>(sol.states_real.col(prev), df);
            ov = (sol.states_real.transpose() * cand).cwiseAbs2();
        } else {
            const VectorC cand = detail::apply_cdagger<VectorC>(sol.states_cplx.col(prev), df);
            ov = (sol.states_cplx.adjoint() * cand).cwiseAbs2();
        }
        detail::push_entry(ladder, used, detail::argmax(ov), sol);
    }
    return ladder;
}

inline LabelLadder label_continuity(const EigenSolution& sol, int p, const ContinuityConfig& cfg) {
    if (!(cfg.delta > 0.0))
        throw std::invalid_argument("label_continuity: delta must be > 0");
    detail::check_ladder_range(sol.spec, p, cfg.n_max, cfg.ignore_truncation_margin);

    LabelLadder ladder{p, LabelMethod::Continuity};
    ladder.spec = sol.spec;
    ladder.delta = cfg.delta;
    ladder.first_step = cfg.first_step;
    std::unordered_set<Index> used;
    detail::push_entry(ladder, used, detail::argmax(product_state_overlaps(sol, p, 0)), sol);

    for (int n = 1; n <= cfg.n_max; ++n) {
        if (n == 1 && cfg.first_step == FirstStep::Overlap) {
            detail::push_entry(ladder, used, detail::argmax(product_state_overlaps(sol, p, 1)), sol);
            continue;
        }
        // candidate energy: previous energy plus the last photon-addition shift
        // (one bare cavity quantum for the first step)
        const auto& e = ladder.entries;
        const double eps_prime = (n == 1)
            ? e[0].energy + 1.0
            : 2.0 * e[n - 1].energy - e[n - 2].energy;
        const ContinuitySelection sel =
            continuity_select(sol.energies, sol.nq_expect, eps_prime, cfg.delta,
                              e[n - 1].nq_expect);
        detail::push_entry(ladder, used, sel.index, sol, sel.fallback);
    }
    return ladder;
}

// --------------------------- ladder comparison -------------------------------

// Eq.-style level-repulsion bound emitted when two continuity ladders with
// windows delta_1 >= delta_2 part ways around a shared candidate energy:
// 0 < Delta < delta_1 + delta_2.
struct RepulsionBound {
    int divergence_n{0};
    double delta_1{0.0};
    double delta_2{0.0};
    double bound_low{0.0};
    double bound_high{0.0};
    double resonant_energy{0.0};
};

struct DivergenceReport {
    std::optional<int> divergence_n;
    std::optional<RepulsionBound> repulsion;
};

inline DivergenceReport compare_ladders(const LabelLadder& a, const LabelLadder& b) {
    if (a.p != b.p || !(a.spec == b.spec))
        throw std::invalid_argument("compare_ladders: ladders have mismatched provenance");

    DivergenceReport rep;
    const std::size_t len = std::min(a.entries.size(), b.entries.size());
    std::size_t n = 0;
    while (n < len && a.entries[n].eigen_index == b.entries[n].eigen_index) ++n;
    if (n == len) return rep;
    rep.divergence_n = static_cast<int>(n);

    if (a.method != LabelMethod::Continuity || b.method != LabelMethod::Continuity)
        return rep;
    // the shared candidate at the divergence comes from the common prefix
    double eps_prime;
    if (n >= 2)
        eps_prime = 2.0 * a.entries[n - 1].energy - a.entries[n - 2].energy;
    else if (n == 1 && a.first_step == FirstStep::Extrapolate &&
             b.first_step == FirstStep::Extrapolate)
        eps_prime = a.entries[0].energy + 1.0;
    else
        return rep;

    const double ea = a.entries[n].energy;
    const double eb = b.entries[n].energy;
    if ((ea - eps_prime) * (eb - eps_prime) >= 0.0) return rep;  // no straddle

    RepulsionBound bound;
    bound.divergence_n = static_cast<int>(n);
    bound.delta_1 = std::max(a.delta, b.delta);
    bound.delta_2 = std::min(a.delta, b.delta);
    bound.bound_low = 0.0;
    bound.bound_high = bound.delta_1 + bound.delta_2;
    bound.resonant_energy = 0.5 * (ea + eb);
    rep.repulsion = bound;
    return rep;
}

} // namespace qcl
