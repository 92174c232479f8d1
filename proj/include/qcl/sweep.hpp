// sweep.hpp — batch orchestration of offset-charge and energy-window sweeps
//
// Offset-charge sweep: one diagonalization per N_g grid point (optionally through
// the file cache), continuity ladders for each configured start level, curves and
// detected features. Window sweep: one shared diagonalization, one continuity
// ladder per delta, plus pairwise divergence reports with level-repulsion bounds.
// Grid points are independent and run on up to `workers` threads; per-point
// failures are recorded and do not abort the sweep.

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qcl/config.hpp"
#include "qcl/eigen_cache.hpp"
#include "qcl/io.hpp"
#include "qcl/labeling.hpp"
#include "qcl/observables.hpp"
#include "qcl/spectrum.hpp"

namespace qcl {

struct SweepPoint {
    double n_g{0.0};
    double delta{0.0};
    int p{0};
    LabelLadder ladder;
    FrequencyCurve freq;
    std::vector<ResonanceFeature> features;
    std::string error;            // empty on success
    double wall_seconds{0.0};
    double spectral_residual{0.0};
    double ceiling_occupancy{0.0};  // max top-Fock population over labeled states
};

struct WindowComparison {
    double delta_a{0.0}, delta_b{0.0};
    DivergenceReport report;
};

struct SweepResult {
    SweepKind kind{SweepKind::OffsetCharge};
    std::vector<SweepPoint> points;
    std::vector<WindowComparison> comparisons;  // window sweeps only
    Manifest manifest;
};

namespace detail {

inline double ladder_ceiling_occupancy(const EigenSolution& sol, const LabelLadder& ladder) {
    const int df = sol.spec.cavity_dim();
    const int dq = sol.spec.qubit_dim();
    double mx = 0.0;
    for (const auto& entry : ladder.entries) {
        double w = 0.0;
        for (int q = 0; q < dq; ++q) {
            const Index row = static_cast<Index>(q) * df + (df - 1);
            w += sol.real_mode() ? sol.states_real(row, entry.eigen_index) *
                                       sol.states_real(row, entry.eigen_index)
                                 : std::norm(sol.states_cplx(row, entry.eigen_index));
        }
        if (w > mx) mx = w;
    }
    return mx;
}

inline double resolve_delta(const RunConfig& cfg, int p, double n_g) {
    if (cfg.sweep)
        for (const auto& ov : cfg.sweep->delta_overrides)
            if (ov.p == p && ov.n_g == n_g) return ov.delta;
    return cfg.delta;
}

inline EigenSolution solve_point(const RunConfig& cfg, const SystemSpec& spec) {
    if (!cfg.cache) return diagonalize_spec(spec);
    return diagonalize_spec_cached(
        spec, cache_directory(std::filesystem::path(cfg.output_dir) / "eigcache"));
}

template <typename Fn>
inline void run_indexed(int count, int workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto loop = [&]() {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min(workers, count);
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
}

inline void append_point_manifest(Manifest& m, const SweepResult& result) {
    for (std::size_t i = 0; i < result.points.size(); ++i) {
        const auto& pt = result.points[i];
        const std::string k = "point." + std::to_string(i);
        m.emplace_back(k + ".n_g", fmt_float(pt.n_g));
        m.emplace_back(k + ".delta", fmt_float(pt.delta));
        m.emplace_back(k + ".p", std::to_string(pt.p));
        m.emplace_back(k + ".wall_s", fmt_float(pt.wall_seconds));
        if (!pt.error.empty()) {
            m.emplace_back(k + ".error", pt.error);
            continue;
        }
        m.emplace_back(k + ".spectral_residual", fmt_float(pt.spectral_residual));
        m.emplace_back(k + ".ceiling_occupancy", fmt_float(pt.ceiling_occupancy));
        m.emplace_back(k + ".duplicate_indices", pt.ladder.duplicate_indices ? "1" : "0");
    }
}

} // namespace detail

inline SweepResult run_offset_charge_sweep(const RunConfig& cfg) {
    if (!cfg.sweep || cfg.sweep->n_g_values.empty())
        throw std::invalid_argument("run_offset_charge_sweep: no n_g grid configured");
    const auto& grid = cfg.sweep->n_g_values;
    const auto& starts = cfg.sweep->ladder_starts;

    SweepResult result;
    result.kind = SweepKind::OffsetCharge;
    result.points.resize(grid.size() * starts.size());

    detail::run_indexed(static_cast<int>(grid.size()), cfg.workers, [&](int gi) {
        const auto t0 = std::chrono::steady_clock::now();
        SystemSpec spec = cfg.system;
        spec.n_g = grid[gi];
        std::optional<EigenSolution> sol;
        std::string solve_error;
        try {
            sol = detail::solve_point(cfg, spec);
        } catch (const std::exception& err) {
            solve_error = err.what();
        }
        for (std::size_t si = 0; si < starts.size(); ++si) {
            SweepPoint& pt = result.points[gi * starts.size() + si];
            pt.n_g = grid[gi];
            pt.p = starts[si];
            pt.delta = detail::resolve_delta(cfg, pt.p, pt.n_g);
            try {
                if (!solve_error.empty()) throw std::runtime_error(solve_error);
                ContinuityConfig ccfg{pt.delta, cfg.n_max, cfg.first_step,
                                      cfg.ignore_truncation_margin};
                pt.ladder = label_continuity(*sol, pt.p, ccfg);
                pt.freq = cavity_frequency_curve(pt.ladder);
                pt.features = detect_features(pt.freq);
                pt.spectral_residual = sol->residual_max;
                pt.ceiling_occupancy = detail::ladder_ceiling_occupancy(*sol, pt.ladder);
            } catch (const std::exception& err) {
                pt.error = err.what();
            }
            pt.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    });

    result.manifest.emplace_back("tool_version", version);
    result.manifest.emplace_back("sweep_kind", "offset_charge");
    result.manifest.emplace_back("grid_size", std::to_string(result.points.size()));
    detail::append_point_manifest(result.manifest, result);
    return result;
}

inline SweepResult run_window_sweep(const RunConfig& cfg) {
    if (!cfg.sweep || cfg.sweep->delta_values.empty())
        throw std::invalid_argument("run_window_sweep: no delta grid configured");
    const auto& grid = cfg.sweep->delta_values;

    SweepResult result;
    result.kind = SweepKind::Window;
    result.points.resize(grid.size());

    const EigenSolution sol = detail::solve_point(cfg, cfg.system);

    detail::run_indexed(static_cast<int>(grid.size()), cfg.workers, [&](int i) {
        const auto t0 = std::chrono::steady_clock::now();
        SweepPoint& pt = result.points[i];
        pt.n_g = cfg.system.n_g;
        pt.delta = grid[i];
        pt.p = cfg.p;
        try {
            ContinuityConfig ccfg{pt.delta, cfg.n_max, cfg.first_step,
                                  cfg.ignore_truncation_margin};
            pt.ladder = label_continuity(sol, pt.p, ccfg);
            pt.freq = cavity_frequency_curve(pt.ladder);
            pt.features = detect_features(pt.freq);
            pt.spectral_residual = sol.residual_max;
            pt.ceiling_occupancy = detail::ladder_ceiling_occupancy(sol, pt.ladder);
        } catch (const std::exception& err) {
            pt.error = err.what();
        }
        pt.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });

    for (std::size_t i = 0; i < result.points.size(); ++i)
        for (std::size_t j = i + 1; j < result.points.size(); ++j) {
            if (!result.points[i].error.empty() || !result.points[j].error.empty()) continue;
            WindowComparison cmp;
            cmp.delta_a = result.points[i].delta;
            cmp.delta_b = result.points[j].delta;
            cmp.report = compare_ladders(result.points[i].ladder, result.points[j].ladder);
            result.comparisons.push_back(cmp);
        }

    result.manifest.emplace_back("tool_version", version);
    result.manifest.emplace_back("sweep_kind", "window");
    result.manifest.emplace_back("grid_size", std::to_string(result.points.size()));
    detail::append_point_manifest(result.manifest, result);
    for (std::size_t i = 0; i < result.comparisons.size(); ++i) {
        const auto& cmp = result.comparisons[i];
        const std::string k = "compare." + std::to_string(i);
        result.manifest.emplace_back(k + ".delta_pair",
                                     fmt_float(cmp.delta_a) + " " + fmt_float(cmp.delta_b));
        if (cmp.report.divergence_n)
            result.manifest.emplace_back(k + ".divergence_n",
                                         std::to_string(*cmp.report.divergence_n));
        else
            result.manifest.emplace_back(k + ".divergence_n", "none");
        if (cmp.report.repulsion) {
            result.manifest.emplace_back(k + ".repulsion_bound_high",
                                         fmt_float(cmp.report.repulsion->bound_high));
            result.manifest.emplace_back(k + ".resonant_energy",
                                         fmt_float(cmp.report.repulsion->resonant_energy));
        }
    }
    return result;
}

} // namespace qcl
