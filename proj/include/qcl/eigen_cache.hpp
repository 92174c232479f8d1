// eigen_cache.hpp — binary persistence for EigenSolution keyed by a spec hash
//
// File layout (all fields little-endian):
//   bytes 0..7    magic "QCLEIG01"
//   u64           spec hash (FNV-1a, see spec_hash)
//   f64 x 4       e_c, e_j, g, n_g
//   i64 x 3       charge_cutoff, fock_cutoff, coupling (0 = Full, 1 = RWA)
//   i64           dim
//   u8            gauge (0 = Paper, 1 = FockRotated)
//   f64 x 2       residual_max, h_max_abs
//   f64 x dim     energies, ascending
//   c128 x dim^2  eigenvector matrix, row-major, 16-byte (re, im) pairs
//
// Expectation caches are recomputed on load through the same code path as a
// cold diagonalization, so cached and cold runs are bit-identical.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcl/spectrum.hpp"
#include "qcl/system_spec.hpp"

namespace qcl {

namespace detail {

constexpr char cache_magic[8] = {'Q', 'C', 'L', 'E', 'I', 'G', '0', '1'};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

inline void write_raw(std::FILE* f, const void* p, std::size_t n) {
    if (std::fwrite(p, 1, n, f) != n)
        throw std::runtime_error("eigen cache: short write");
}

inline void read_raw(std::FILE* f, void* p, std::size_t n) {
    if (std::fread(p, 1, n, f) != n)
        throw std::runtime_error("eigen cache: short read");
}

} // namespace detail

inline std::string cache_file_name(const SystemSpec& spec) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "eig_%016llx.bin",
                  static_cast<unsigned long long>(spec_hash(spec)));
    return buf;
}

inline void save_eigen_solution(const std::filesystem::path& path, const EigenSolution& sol) {
    std::unique_ptr<std::FILE, detail::FileCloser> f(std::fopen(path.string().c_str(), "wb"));
    if (!f) throw std::runtime_error("eigen cache: cannot open " + path.string() + " for writing");

    detail::write_raw(f.get(), detail::cache_magic, 8);
    const std::uint64_t hash = spec_hash(sol.spec);
    detail::write_raw(f.get(), &hash, 8);
    const double fp[4] = {sol.spec.e_c, sol.spec.e_j, sol.spec.g, sol.spec.n_g};
    detail::write_raw(f.get(), fp, sizeof fp);
    const std::int64_t ip[3] = {sol.spec.charge_cutoff, sol.spec.fock_cutoff,
                                sol.spec.coupling == CouplingForm::RWA ? 1 : 0};
    detail::write_raw(f.get(), ip, sizeof ip);
    const std::int64_t dim = sol.dim();
    detail::write_raw(f.get(), &dim, 8);
    const std::uint8_t gauge = sol.gauge == EigenGauge::FockRotated ? 1 : 0;
    detail::write_raw(f.get(), &gauge, 1);
    const double diag[2] = {sol.residual_max, sol.h_max_abs};
    detail::write_raw(f.get(), diag, sizeof diag);
    detail::write_raw(f.get(), sol.energies.data(), static_cast<std::size_t>(dim) * 8);

    // row-major complex pairs, buffered one row at a time
    std::vector<double> row(static_cast<std::size_t>(dim) * 2);
    for (Index i = 0; i < dim; ++i) {
        for (Index j = 0; j < dim; ++j) {
            if (sol.real_mode()) {
                row[2 * j] = sol.states_real(i, j);
                row[2 * j + 1] = 0.0;
            } else {
                row[2 * j] = sol.states_cplx(i, j).real();
                row[2 * j + 1] = sol.states_cplx(i, j).imag();
            }
        }
        detail::write_raw(f.get(), row.data(), row.size() * 8);
    }
}

inline EigenSolution load_eigen_solution(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, detail::FileCloser> f(std::fopen(path.string().c_str(), "rb"));
    if (!f) throw std::runtime_error("eigen cache: cannot open " + path.string());

    char magic[8];
    detail::read_raw(f.get(), magic, 8);
    if (!std::equal(magic, magic + 8, detail::cache_magic))
        throw std::runtime_error("eigen cache: bad magic in " + path.string());

    std::uint64_t hash = 0;
    detail::read_raw(f.get(), &hash, 8);
    double fp[4];
    detail::read_raw(f.get(), fp, sizeof fp);
    std::int64_t ip[3];
    detail::read_raw(f.get(), ip, sizeof ip);

    EigenSolution sol;
    sol.spec.e_c = fp[0];
    sol.spec.e_j = fp[1];
    sol.spec.g = fp[2];
    sol.spec.n_g = fp[3];
    sol.spec.charge_cutoff = static_cast<int>(ip[0]);
    sol.spec.fock_cutoff = static_cast<int>(ip[1]);
    sol.spec.coupling = ip[2] == 1 ? CouplingForm::RWA : CouplingForm::Full;
    if (hash != spec_hash(sol.spec))
        throw std::runtime_error("eigen cache: stored hash disagrees with stored spec");

    std::int64_t dim = 0;
    detail::read_raw(f.get(), &dim, 8);
    if (dim != sol.spec.dim())
        throw std::runtime_error("eigen cache: stored dimension disagrees with spec");
    std::uint8_t gauge = 0;
    detail::read_raw(f.get(), &gauge, 1);
    sol.gauge = gauge == 1 ? EigenGauge::FockRotated : EigenGauge::Paper;
    double diag[2];
    detail::read_raw(f.get(), diag, sizeof diag);
    sol.residual_max = diag[0];
    sol.h_max_abs = diag[1];

    sol.energies.resize(dim);
    detail::read_raw(f.get(), sol.energies.data(), static_cast<std::size_t>(dim) * 8);

    std::vector<double> row(static_cast<std::size_t>(dim) * 2);
    if (sol.gauge == EigenGauge::FockRotated) {
        sol.states_real.resize(dim, dim);
        for (Index i = 0; i < dim; ++i) {
            detail::read_raw(f.get(), row.data(), row.size() * 8);
            for (Index j = 0; j < dim; ++j) {
                if (row[2 * j + 1] != 0.0)
                    throw std::runtime_error("eigen cache: rotated-gauge file has complex entries");
                sol.states_real(i, j) = row[2 * j];
            }
        }
    } else {
        sol.states_cplx.resize(dim, dim);
        for (Index i = 0; i < dim; ++i) {
            detail::read_raw(f.get(), row.data(), row.size() * 8);
            for (Index j = 0; j < dim; ++j)
                sol.states_cplx(i, j) = {row[2 * j], row[2 * j + 1]};
        }
    }
    refresh_expectations(sol);
    return sol;
}

// Directory resolution: QCL_CACHE_DIR if set, otherwise `fallback_dir`.
inline std::filesystem::path cache_directory(const std::filesystem::path& fallback_dir) {
    if (const char* env = std::getenv("QCL_CACHE_DIR"); env && *env)
        return env;
    return fallback_dir;
}

// Load-or-compute through the file cache.
inline EigenSolution diagonalize_spec_cached(const SystemSpec& spec,
                                             const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto path = dir / cache_file_name(spec);
    if (std::filesystem::exists(path)) {
        EigenSolution sol = load_eigen_solution(path);
        if (sol.spec == spec) return sol;
        throw std::runtime_error("eigen cache: hash collision for " + path.string());
    }
    EigenSolution sol = diagonalize_spec(spec);
    save_eigen_solution(path, sol);
    return sol;
}

} // namespace qcl
