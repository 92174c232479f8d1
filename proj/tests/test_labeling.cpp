#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qcl/labeling.hpp"
#include "qcl/spectrum.hpp"

using namespace qcl;

namespace {

SystemSpec small_spec(double g = 0.01, CouplingForm coupling = CouplingForm::Full) {
    return {0.05, 1.6, g, 0.0, 2, 8, coupling};
}

// Synthetic EigenSolution with hand-picked energies, occupancies, and states.
EigenSolution synthetic_solution(const SystemSpec& spec, Vector energies, Vector nq, MatrixC states) {
    EigenSolution sol;
    sol.spec = spec;
    sol.gauge = EigenGauge::Paper;
    sol.energies = std::move(energies);
    sol.nq_expect = std::move(nq);
    sol.photon_expect = Vector::Zero(sol.energies.size());
    sol.states_cplx = std::move(states);
    return sol;
}

} // namespace

TEST_CASE("all methods coincide at g = 0", "[labeling]") {
    SystemSpec s = small_spec(0.0);
    const EigenSolution sol = diagonalize_spec(s);
    const int n_max = 6;

    const LabelLadder ov = label_overlap(sol, 0, n_max, true);
    const LabelLadder bl = label_block(sol, 0, n_max, true);  // H commutes exactly at g = 0
    const LabelLadder rc = label_recursive(sol, 0, n_max, true);
    const LabelLadder ct = label_continuity(sol, 0, {0.01, n_max, FirstStep::Extrapolate, true});

    const QubitEigensystem q = build_qubit_eigensystem(s);
    for (int n = 0; n <= n_max; ++n) {
        CHECK(ov.entries[n].eigen_index == bl.entries[n].eigen_index);
        CHECK(ov.entries[n].eigen_index == rc.entries[n].eigen_index);
        CHECK(ov.entries[n].eigen_index == ct.entries[n].eigen_index);
        CHECK(std::abs(ov.entries[n].energy - (q.energies(0) + n)) < 1e-12);
    }
    CHECK_FALSE(ov.duplicate_indices);
}

TEST_CASE("overlap ladder matches an exhaustive scan", "[labeling]") {
    const SystemSpec s = small_spec(0.01);
    const EigenSolution sol = diagonalize_spec(s);
    const int n_max = 5;
    const LabelLadder ladder = label_overlap(sol, 1, n_max, true);

    for (int n = 0; n <= n_max; ++n) {
        // independent scan over every eigenstate
        const Index row = static_cast<Index>(1) * s.cavity_dim() + n;
        Index best = 0;
        double best_w = -1.0;
        for (Index k = 0; k < sol.dim(); ++k) {
            const double w = sol.states_real(row, k) * sol.states_real(row, k);
            if (w > best_w) {
                best_w = w;
                best = k;
            }
        }
        CHECK(ladder.entries[n].eigen_index == best);
        CHECK(ladder.entries[n].energy == sol.energies(best));
    }
}

TEST_CASE("block labeling requires an excitation-preserving hamiltonian", "[labeling]") {
    SECTION("full coupling is rejected with the commutator norm") {
        const SystemSpec s = small_spec(0.02, CouplingForm::Full);
        const EigenSolution sol = diagonalize_spec(s);
        CHECK_THROWS_WITH(label_block(sol, 0, 3, true),
                          Catch::Matchers::ContainsSubstring("does not preserve"));
    }

    SECTION("RWA agrees with overlap in the perturbative regime") {
        const SystemSpec s = small_spec(0.005, CouplingForm::RWA);
        const EigenSolution sol = diagonalize_spec(s);
        const LabelLadder bl = label_block(sol, 0, 6, true);
        const LabelLadder ov = label_overlap(sol, 0, 6, true);
        for (int n = 0; n <= 6; ++n)
            CHECK(bl.entries[n].eigen_index == ov.entries[n].eigen_index);
    }
}

TEST_CASE("methods agree entry-for-entry deep in the perturbative regime", "[labeling]") {
    const SystemSpec s = small_spec(1e-3);
    const EigenSolution sol = diagonalize_spec(s);
    for (int p : {0, 1}) {
        const LabelLadder ov = label_overlap(sol, p, 6, true);
        const LabelLadder rc = label_recursive(sol, p, 6, true);
        const LabelLadder ct = label_continuity(sol, p, {0.01, 6, FirstStep::Extrapolate, true});
        for (int n = 0; n <= 6; ++n) {
            CHECK(ov.entries[n].eigen_index == rc.entries[n].eigen_index);
            CHECK(ov.entries[n].eigen_index == ct.entries[n].eigen_index);
        }
    }
}

TEST_CASE("continuity first step follows the configured convention", "[labeling]") {
    const SystemSpec s = small_spec(0.01);
    const EigenSolution sol = diagonalize_spec(s);
    const LabelLadder extrapolated =
        label_continuity(sol, 0, {0.05, 4, FirstStep::Extrapolate, true});
    const LabelLadder via_overlap = label_continuity(sol, 0, {0.05, 4, FirstStep::Overlap, true});
    const LabelLadder ov = label_overlap(sol, 0, 4, true);
    // in this regime both conventions land on the overlap state for n = 1
    CHECK(via_overlap.entries[1].eigen_index == ov.entries[1].eigen_index);
    CHECK(extrapolated.entries[1].eigen_index == via_overlap.entries[1].eigen_index);
    CHECK_FALSE(via_overlap.entries[1].window_fallback);
}

TEST_CASE("continuity selection rule", "[labeling]") {
    SECTION("window boundary is inclusive at exactly delta/2") {
        Vector e(2), nq(2);
        e << 0.875, 1.125;  // both exactly at |e - 1.0| = 0.125
        nq << 0.0, 1.0;
        const auto sel = continuity_select(e, nq, 1.0, 0.25, 0.9);
        CHECK_FALSE(sel.fallback);
        CHECK(sel.index == 1);  // occupancy closest to 0.9
    }

    SECTION("empty window falls back to the two closest states") {
        Vector e(4), nq(4);
        e << 0.5, 1.4, 1.6001, 2.5;
        nq << 0.0, 3.0, 1.0, 0.5;
        const auto sel = continuity_select(e, nq, 1.5, 0.1, 1.2);
        CHECK(sel.fallback);
        CHECK(sel.index == 2);  // 1.6001 has occupancy 1.0, closest to 1.2
    }

    SECTION("exactly equidistant 2nd and 3rd closest are both included") {
        Vector e(3), nq(3);
        e << 1.3, 1.45, 1.7;  // distances 0.2, 0.05, 0.2 from 1.5
        nq << 5.0, 9.0, 0.1;
        const auto sel = continuity_select(e, nq, 1.5, 0.01, 0.0);
        CHECK(sel.fallback);
        CHECK(sel.index == 2);  // only reachable if the 3rd closest is a candidate
    }

    SECTION("occupancy tie resolves by energy distance, then index") {
        Vector e(2), nq(2);
        e << 0.9, 1.2;
        nq << 1.0, 1.0;
        CHECK(continuity_select(e, nq, 1.0, 1.0, 0.5).index == 0);

        Vector e2(2);
        e2 << 0.9, 1.1;  // equal energy distance
        CHECK(continuity_select(e2, nq, 1.0, 1.0, 0.5).index == 0);
    }
}

TEST_CASE("truncation margin is enforced and overridable", "[labeling]") {
    SystemSpec s = small_spec(0.0);
    s.charge_cutoff = 1;
    s.fock_cutoff = 100;
    const EigenSolution sol = diagonalize_spec(s);
    CHECK_NOTHROW(label_overlap(sol, 0, 10));
    CHECK_THROWS_AS(label_overlap(sol, 0, 11), std::invalid_argument);
    CHECK_NOTHROW(label_overlap(sol, 0, 11, true));
    CHECK_THROWS_AS(label_continuity(sol, 0, {0.01, 11, FirstStep::Extrapolate, false}),
                    std::invalid_argument);
    CHECK_NOTHROW(label_continuity(sol, 0, {0.01, 11, FirstStep::Extrapolate, true}));
}

TEST_CASE("duplicate assignments are diagnosed, not fatal", "[labeling]") {
    SystemSpec s;
    s.charge_cutoff = 0;  // one qubit level
    s.fock_cutoff = 1;    // two Fock levels
    const double r = 1.0 / std::sqrt(2.0);
    MatrixC states(2, 2);
    states << r, r, r, -r;  // both rows peak (tie) on column 0
    Vector e(2), nq(2);
    e << 0.0, 1.0;
    nq << 0.0, 0.0;
    const EigenSolution sol = synthetic_solution(s, e, nq, states);

    const LabelLadder ladder = label_overlap(sol, 0, 1, true);
    CHECK(ladder.entries[0].eigen_index == 0);
    CHECK(ladder.entries[1].eigen_index == 0);
    CHECK(ladder.duplicate_indices);
    CHECK(ladder.duplicate_count == 1);
}

TEST_CASE("compare_ladders", "[labeling]") {
    SystemSpec s = small_spec(0.01);

    SECTION("identical ladders have no divergence") {
        const EigenSolution sol = diagonalize_spec(s);
        const LabelLadder a = label_continuity(sol, 0, {0.01, 5, FirstStep::Extrapolate, true});
        const LabelLadder b = label_continuity(sol, 0, {0.01, 5, FirstStep::Extrapolate, true});
        const DivergenceReport rep = compare_ladders(a, b);
        CHECK_FALSE(rep.divergence_n.has_value());
        CHECK_FALSE(rep.repulsion.has_value());
    }

    SECTION("mismatched provenance is rejected") {
        const EigenSolution sol = diagonalize_spec(s);
        SystemSpec s2 = s;
        s2.n_g = 0.1;
        const EigenSolution sol2 = diagonalize_spec(s2);
        const LabelLadder a = label_overlap(sol, 0, 3, true);
        const LabelLadder b = label_overlap(sol2, 0, 3, true);
        CHECK_THROWS_AS(compare_ladders(a, b), std::invalid_argument);
    }

    SECTION("straddling continuity divergence emits the repulsion bound") {
        LabelLadder a, b;
        a.p = b.p = 0;
        a.spec = b.spec = s;
        a.method = b.method = LabelMethod::Continuity;
        a.delta = 0.020;
        b.delta = 0.015;
        // shared prefix with unit spacing, then a straddled split around
        // eps' = 2*2.01 - 1.0 = 3.02
        a.entries = {{0, 0.0, 0.0, false}, {1, 1.0, 0.0, false}, {2, 2.01, 0.0, false},
                     {5, 3.028, 0.0, false}};
        b.entries = {{0, 0.0, 0.0, false}, {1, 1.0, 0.0, false}, {2, 2.01, 0.0, false},
                     {4, 3.013, 0.0, false}};
        const DivergenceReport rep = compare_ladders(a, b);
        REQUIRE(rep.divergence_n.has_value());
        CHECK(*rep.divergence_n == 3);
        REQUIRE(rep.repulsion.has_value());
        CHECK(rep.repulsion->delta_1 == 0.020);
        CHECK(rep.repulsion->delta_2 == 0.015);
        CHECK(rep.repulsion->bound_low == 0.0);
        CHECK(rep.repulsion->bound_high == Catch::Approx(0.035));
        CHECK(rep.repulsion->resonant_energy == Catch::Approx(0.5 * (3.028 + 3.013)));

        SECTION("equal windows give the 2*delta specialization") {
            b.delta = 0.020;
            const DivergenceReport rep2 = compare_ladders(a, b);
            REQUIRE(rep2.repulsion.has_value());
            CHECK(rep2.repulsion->bound_high == Catch::Approx(0.040));
        }
    }

    SECTION("no bound without a straddle") {
        LabelLadder a, b;
        a.p = b.p = 0;
        a.spec = b.spec = s;
        a.method = b.method = LabelMethod::Continuity;
        a.delta = 0.020;
        b.delta = 0.015;
        a.entries = {{0, 0.0, 0.0, false}, {1, 1.0, 0.0, false}, {2, 2.0, 0.0, false},
                     {5, 3.004, 0.0, false}};
        b.entries = {{0, 0.0, 0.0, false}, {1, 1.0, 0.0, false}, {2, 2.0, 0.0, false},
                     {4, 3.002, 0.0, false}};  // both above eps' = 3.0
        const DivergenceReport rep = compare_ladders(a, b);
        REQUIRE(rep.divergence_n.has_value());
        CHECK_FALSE(rep.repulsion.has_value());
    }
}

TEST_CASE("photon content grows along small-instance ladders", "[labeling]") {
    const SystemSpec s = small_spec(0.01);
    const EigenSolution sol = diagonalize_spec(s);
    const LabelLadder ct = label_continuity(sol, 0, {0.02, 5, FirstStep::Extrapolate, true});
    for (int n = 1; n <= 5; ++n) {
        if (ct.entries[n].window_fallback) continue;
        CHECK(sol.photon_expect(ct.entries[n].eigen_index) >
              sol.photon_expect(ct.entries[n - 1].eigen_index));
    }
}
