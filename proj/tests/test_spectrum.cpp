#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>

#include "qcl/eigen_cache.hpp"
#include "qcl/operators.hpp"
#include "qcl/spectrum.hpp"

using namespace qcl;

namespace {

SystemSpec small_spec() {
    SystemSpec s{0.05, 1.6, 0.025, 0.0, 3, 8, CouplingForm::Full};
    return s;
}

} // namespace

TEST_CASE("diagonalize solves a 2x2 closed form", "[spectrum]") {
    const double x = 0.3;
    OperatorMatrix h;
    h.mat = MatrixC::Zero(2, 2);
    h.mat(0, 1) = x;
    h.mat(1, 0) = x;
    h.mat(1, 1) = 1.0;
    h.hermitian = true;

    SystemSpec tiny;
    tiny.charge_cutoff = 0;  // not a physical spec; provenance only
    tiny.fock_cutoff = 1;
    const EigenSolution sol = diagonalize(h, tiny);
    const double root = std::sqrt(1.0 + 4.0 * x * x);
    CHECK(std::abs(sol.energies(0) - 0.5 * (1.0 - root)) < 1e-14);
    CHECK(std::abs(sol.energies(1) - 0.5 * (1.0 + root)) < 1e-14);
    CHECK(sol.residual_max < 1e-14);
}

TEST_CASE("diagonalize rejects non-hermitian input", "[spectrum]") {
    OperatorMatrix h;
    h.mat = MatrixC::Random(3, 3);
    h.hermitian = false;
    CHECK_THROWS_AS(diagonalize(h, SystemSpec{}), std::invalid_argument);
}

TEST_CASE("complex and rotated-gauge paths agree", "[spectrum]") {
    SystemSpec s = small_spec();
    s.n_g = 0.3;

    const EigenSolution a = diagonalize(build_composite_hamiltonian(s), s);
    const EigenSolution b = diagonalize_spec(s);
    REQUIRE(a.dim() == b.dim());
    CHECK((a.energies - b.energies).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((a.nq_expect - b.nq_expect).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((a.photon_expect - b.photon_expect).cwiseAbs().maxCoeff() < 1e-10);
    for (int p : {0, 2})
        for (int n : {0, 3})
            CHECK((product_state_overlaps(a, p, n) - product_state_overlaps(b, p, n))
                      .cwiseAbs().maxCoeff() < 1e-10);

    SECTION("eigenvalues match an independent dense solver") {
        Eigen::SelfAdjointEigenSolver<MatrixC> oracle(build_composite_hamiltonian(s).mat);
        CHECK((oracle.eigenvalues() - b.energies).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("eigensolution invariants hold on a mid-size instance", "[spectrum]") {
    SystemSpec s{0.05, 1.6, 0.025, 0.2, 4, 20, CouplingForm::Full};
    const EigenSolution sol = diagonalize_spec(s);

    SECTION("ascending energies and bounded caches") {
        for (Index i = 1; i < sol.dim(); ++i) CHECK(sol.energies(i) >= sol.energies(i - 1));
        CHECK(sol.nq_expect.minCoeff() >= 0.0);
        CHECK(sol.nq_expect.maxCoeff() <= s.qubit_dim() - 1 + 1e-12);
        CHECK(sol.photon_expect.minCoeff() >= 0.0);
        CHECK(sol.photon_expect.maxCoeff() <= s.fock_cutoff + 1e-12);
    }

    SECTION("residual and orthonormality") {
        CHECK(sol.residual_max <= 1e-9 * sol.h_max_abs);
        const Matrix gram = sol.states_real.transpose() * sol.states_real;
        CHECK((gram - Matrix::Identity(sol.dim(), sol.dim())).cwiseAbs().maxCoeff() < 1e-10);
    }

    SECTION("trace preservation") {
        const Matrix h = build_composite_rotated(s);
        CHECK(std::abs(sol.energies.sum() - h.trace()) <=
              1e-8 * sol.h_max_abs * static_cast<double>(sol.dim()));
    }

    SECTION("cached expectations match direct quadratic forms") {
        const Vector qd = occupancy_diagonal(s);
        for (Index k : {Index(0), sol.dim() / 2, sol.dim() - 1}) {
            const Vector v = sol.states_real.col(k);
            const double direct = v.dot(qd.asDiagonal() * v);
            CHECK(std::abs(direct - sol.nq_expect(k)) < 1e-10);
        }
    }
}

TEST_CASE("product-state overlaps", "[spectrum]") {
    SystemSpec s = small_spec();

    SECTION("one-hot at g = 0") {
        s.g = 0.0;
        const EigenSolution sol = diagonalize_spec(s);
        const Vector ov = product_state_overlaps(sol, 1, 2);
        CHECK(std::abs(ov.maxCoeff() - 1.0) < 1e-12);
        CHECK(std::abs(ov.sum() - 1.0) < 1e-10);
    }

    SECTION("completeness at finite g") {
        const EigenSolution sol = diagonalize_spec(s);
        for (int p : {0, 1, 6})
            for (int n : {0, 4, 8})
                CHECK(std::abs(product_state_overlaps(sol, p, n).sum() - 1.0) < 1e-10);
    }

    SECTION("perturbative regime: ground product state stays dominant") {
        SystemSpec ps{0.05, 1.6, 0.025, 0.0, 10, 20, CouplingForm::Full};
        const EigenSolution sol = diagonalize_spec(ps);
        CHECK(product_state_overlaps(sol, 0, 0).maxCoeff() >= 0.99);
    }

    SECTION("out-of-range labels") {
        const EigenSolution sol = diagonalize_spec(s);
        CHECK_THROWS_AS(product_state_overlaps(sol, s.qubit_dim(), 0), std::invalid_argument);
        CHECK_THROWS_AS(product_state_overlaps(sol, 0, s.fock_cutoff + 1), std::invalid_argument);
    }
}

TEST_CASE("vector overlaps", "[spectrum]") {
    const SystemSpec s = small_spec();
    const EigenSolution sol = diagonalize_spec(s);

    SECTION("an eigenvector maps to a one-hot") {
        const Vector ov = vector_overlaps(sol, sol.eigenvector(5));
        CHECK(std::abs(ov(5) - 1.0) < 1e-12);
        CHECK(std::abs(ov.sum() - 1.0) < 1e-10);
    }

    SECTION("equal superposition of two eigenvectors") {
        const VectorC v = (sol.eigenvector(2) + sol.eigenvector(7)) / std::sqrt(2.0);
        const Vector ov = vector_overlaps(sol, v);
        CHECK(std::abs(ov(2) - 0.5) < 1e-12);
        CHECK(std::abs(ov(7) - 0.5) < 1e-12);
    }

    SECTION("normalization is internal") {
        const VectorC v = 3.7 * sol.eigenvector(1);
        CHECK(std::abs(vector_overlaps(sol, v)(1) - 1.0) < 1e-12);
    }

    SECTION("zero vector is rejected") {
        CHECK_THROWS_AS(vector_overlaps(sol, VectorC::Zero(sol.dim())), std::invalid_argument);
    }
}

TEST_CASE("degenerate eigenvalues are ordered by photon content", "[spectrum]") {
    // integer qubit splittings at g = 0 give exact degeneracies across blocks:
    // (q, m) and (q + 1, m - 1) share the energy q + m
    SystemSpec s;
    s.charge_cutoff = 1;  // 3 qubit levels
    s.fock_cutoff = 1;    // 2 Fock levels
    OperatorMatrix h;
    h.mat = MatrixC::Zero(s.dim(), s.dim());
    for (int q = 0; q < s.qubit_dim(); ++q)
        for (int m = 0; m < s.cavity_dim(); ++m)
            h.mat(q * s.cavity_dim() + m, q * s.cavity_dim() + m) = q + m;
    h.hermitian = true;

    const EigenSolution sol = diagonalize(h, s);
    for (Index i = 1; i < sol.dim(); ++i) {
        CHECK(sol.energies(i) >= sol.energies(i - 1));
        if (sol.energies(i) == sol.energies(i - 1)) {
            CHECK(sol.photon_expect(i) >= sol.photon_expect(i - 1));
            if (sol.photon_expect(i) == sol.photon_expect(i - 1))
                CHECK(sol.nq_expect(i) >= sol.nq_expect(i - 1));
        }
    }
}

TEST_CASE("binary cache round-trips bit-identically", "[spectrum][cache]") {
    const SystemSpec s = small_spec();
    const EigenSolution cold = diagonalize_spec(s);

    const auto dir = std::filesystem::temp_directory_path() / "qcl_cache_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    save_eigen_solution(dir / cache_file_name(s), cold);
    const EigenSolution warm = load_eigen_solution(dir / cache_file_name(s));

    REQUIRE(warm.spec == s);
    REQUIRE(warm.dim() == cold.dim());
    CHECK(std::memcmp(warm.energies.data(), cold.energies.data(),
                      sizeof(double) * cold.energies.size()) == 0);
    REQUIRE(warm.real_mode());
    CHECK(std::memcmp(warm.states_real.data(), cold.states_real.data(),
                      sizeof(double) * cold.states_real.size()) == 0);
    CHECK(std::memcmp(warm.nq_expect.data(), cold.nq_expect.data(),
                      sizeof(double) * cold.nq_expect.size()) == 0);
    CHECK(warm.residual_max == cold.residual_max);

    SECTION("cached helper returns the stored solution") {
        const EigenSolution again = diagonalize_spec_cached(s, dir);
        CHECK(std::memcmp(again.states_real.data(), cold.states_real.data(),
                          sizeof(double) * cold.states_real.size()) == 0);
    }
    std::filesystem::remove_all(dir);
}
