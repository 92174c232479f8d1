// qcl_main.cpp — command-line surface: spectrum, label, freq, dynamics, compare, sweep

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qcl/config.hpp"
#include "qcl/dynamics.hpp"
#include "qcl/eigen_cache.hpp"
#include "qcl/io.hpp"
#include "qcl/labeling.hpp"
#include "qcl/observables.hpp"
#include "qcl/spectrum.hpp"
#include "qcl/sweep.hpp"
#include "qcl/version.hpp"

namespace {

using namespace qcl;

struct Overrides {
    std::optional<double> e_c, e_j, g, n_g, delta, amplitude, omega_d, t_end, dt, sample_stride;
    std::optional<double> compare_n_lo, compare_n_hi;
    std::optional<int> charge_cutoff, fock_cutoff, p, n_max, fock_cutoff_dyn, workers;
    std::optional<std::string> coupling, method, methods, first_step, frame, out, kind;
    std::optional<bool> cache, ignore_margin;
};

RunConfig load_config(const std::string& config_path, const Overrides& ov) {
    RunConfig cfg;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw std::runtime_error("cannot open config file " + config_path);
        std::stringstream ss;
        ss << f.rdbuf();
        cfg = parse_config(ss.str());
    } else {
        // flags-only invocation still goes through the validating parser
        std::ostringstream minimal;
        minimal << "[system]\n"
                << "e_c = " << fmt_float(ov.e_c.value_or(0.05)) << '\n'
                << "e_j = " << fmt_float(ov.e_j.value_or(1.6)) << '\n'
                << "g = " << fmt_float(ov.g.value_or(0.025)) << '\n'
                << "n_g = " << fmt_float(ov.n_g.value_or(0.0)) << '\n';
        cfg = parse_config(minimal.str());
    }

    auto set = [](auto& dst, const auto& src) { if (src) dst = *src; };
    set(cfg.system.e_c, ov.e_c);
    set(cfg.system.e_j, ov.e_j);
    set(cfg.system.g, ov.g);
    set(cfg.system.n_g, ov.n_g);
    set(cfg.system.charge_cutoff, ov.charge_cutoff);
    set(cfg.system.fock_cutoff, ov.fock_cutoff);
    if (ov.coupling) {
        if (*ov.coupling == "full") cfg.system.coupling = CouplingForm::Full;
        else if (*ov.coupling == "rwa") cfg.system.coupling = CouplingForm::RWA;
        else throw std::runtime_error("--coupling must be full or rwa");
    }
    if (ov.method) cfg.method = detail::parse_method({"method", *ov.method, 0}, *ov.method);
    if (ov.methods) {
        cfg.compare_methods.clear();
        for (const auto& tok : detail::split_list(*ov.methods))
            cfg.compare_methods.push_back(detail::parse_method({"methods", tok, 0}, tok));
    }
    set(cfg.p, ov.p);
    set(cfg.n_max, ov.n_max);
    set(cfg.delta, ov.delta);
    if (ov.first_step) {
        if (*ov.first_step == "extrapolate") cfg.first_step = FirstStep::Extrapolate;
        else if (*ov.first_step == "overlap") cfg.first_step = FirstStep::Overlap;
        else throw std::runtime_error("--first-step must be extrapolate or overlap");
    }
    set(cfg.ignore_truncation_margin, ov.ignore_margin);
    set(cfg.compare_n_lo, ov.compare_n_lo);
    set(cfg.compare_n_hi, ov.compare_n_hi);
    if (ov.amplitude || ov.omega_d || ov.t_end || ov.dt || ov.fock_cutoff_dyn ||
        ov.sample_stride) {
        DriveParams d = cfg.drive.value_or(DriveParams{});
        set(d.amplitude, ov.amplitude);
        set(d.omega_d, ov.omega_d);
        set(d.t_end, ov.t_end);
        set(d.dt, ov.dt);
        set(d.fock_cutoff_dyn, ov.fock_cutoff_dyn);
        set(d.sample_stride, ov.sample_stride);
        d.validate();
        cfg.drive = d;
    }
    if (ov.frame) {
        if (*ov.frame == "lab") cfg.frame = Frame::Lab;
        else if (*ov.frame == "displaced") cfg.frame = Frame::Displaced;
        else throw std::runtime_error("--frame must be lab or displaced");
    }
    if (ov.kind && cfg.sweep) {
        if (*ov.kind == "offset_charge") cfg.sweep->kind = SweepKind::OffsetCharge;
        else if (*ov.kind == "window") cfg.sweep->kind = SweepKind::Window;
        else throw std::runtime_error("--kind must be offset_charge or window");
    }
    set(cfg.output_dir, ov.out);
    set(cfg.cache, ov.cache);
    set(cfg.workers, ov.workers);
    cfg.system.validate();
    return cfg;
}

void append_config_manifest(Manifest& m, const RunConfig& cfg) {
    std::istringstream lines(serialize_config(cfg));
    std::string line, section;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        if (line.front() == '[') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        m.emplace_back("config." + section + "." + line.substr(0, eq), line.substr(eq + 3));
    }
}

EigenSolution solve(const RunConfig& cfg) {
    if (!cfg.cache) return diagonalize_spec(cfg.system);
    return diagonalize_spec_cached(
        cfg.system, cache_directory(std::filesystem::path(cfg.output_dir) / "eigcache"));
}

std::string qubit_label_tag(int p) {
    if (p == 0) return "g";
    if (p == 1) return "e";
    return "p" + std::to_string(p);
}

std::string grid_value_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

LabelLadder make_ladder(const EigenSolution& sol, const RunConfig& cfg, LabelMethod method,
                        int p, double delta) {
    switch (method) {
        case LabelMethod::Overlap:
            return label_overlap(sol, p, cfg.n_max, cfg.ignore_truncation_margin);
        case LabelMethod::Block:
            return label_block(sol, p, cfg.n_max, cfg.ignore_truncation_margin);
        case LabelMethod::Recursive:
            return label_recursive(sol, p, cfg.n_max, cfg.ignore_truncation_margin);
        case LabelMethod::Continuity:
            return label_continuity(
                sol, p, {delta, cfg.n_max, cfg.first_step, cfg.ignore_truncation_margin});
    }
    throw std::logic_error("unreachable");
}

struct RunContext {
    RunConfig cfg;
    std::filesystem::path outdir;
    Manifest manifest;
    std::vector<std::string> diagnostics;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    explicit RunContext(RunConfig c, const char* command) : cfg(std::move(c)), outdir(cfg.output_dir) {
        std::filesystem::create_directories(outdir);
        manifest.emplace_back("tool_version", version);
        manifest.emplace_back("command", command);
        append_config_manifest(manifest, cfg);
    }

    void note_ladder(const std::string& tag, const LabelLadder& ladder,
                     const EigenSolution& sol) {
        manifest.emplace_back("ladder." + tag + ".ceiling_occupancy",
                              fmt_float(qcl::detail::ladder_ceiling_occupancy(sol, ladder)));
        manifest.emplace_back("ladder." + tag + ".duplicate_indices",
                              ladder.duplicate_indices ? "1" : "0");
        if (ladder.duplicate_indices)
            diagnostics.push_back("ladder " + tag + " assigned " +
                                  std::to_string(ladder.duplicate_count) +
                                  " eigenstates more than once");
    }

    int finish() {
        manifest.emplace_back(
            "wall_seconds",
            fmt_float(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
        manifest.emplace_back("diagnostics", std::to_string(diagnostics.size()));
        for (std::size_t i = 0; i < diagnostics.size(); ++i)
            manifest.emplace_back("diagnostic." + std::to_string(i), diagnostics[i]);
        write_text_file(outdir / "manifest.txt", manifest_text(manifest));
        write_text_file(outdir / "config.ini", serialize_config(cfg));
        for (const auto& d : diagnostics) std::cerr << "diagnostic: " << d << '\n';
        return diagnostics.empty() ? 0 : 1;
    }
};

int cmd_spectrum(const RunConfig& cfg) {
    RunContext ctx(cfg, "spectrum");
    const EigenSolution sol = solve(cfg);
    std::ostringstream os;
    os << "# qcl " << version << " spectrum " << spec_header_fields(cfg.system) << '\n';
    os << "lambda,energy,nq_expect,photon_expect\n";
    for (Index k = 0; k < sol.dim(); ++k)
        os << k << ',' << fmt_float(sol.energies(k)) << ',' << fmt_float(sol.nq_expect(k))
           << ',' << fmt_float(sol.photon_expect(k)) << '\n';
    write_text_file(ctx.outdir / "spectrum.csv", os.str());
    ctx.manifest.emplace_back("spectral_residual", fmt_float(sol.residual_max));
    ctx.manifest.emplace_back("h_max_abs", fmt_float(sol.h_max_abs));
    ctx.manifest.emplace_back("dim", std::to_string(sol.dim()));
    return ctx.finish();
}

int cmd_label(const RunConfig& cfg) {
    RunContext ctx(cfg, "label");
    const EigenSolution sol = solve(cfg);
    const LabelLadder ladder = make_ladder(sol, cfg, cfg.method, cfg.p, cfg.delta);
    const std::string tag =
        std::string(to_string(cfg.method)) + "_" + qubit_label_tag(cfg.p);
    write_text_file(ctx.outdir / ("ladder_" + tag + ".csv"), ladder_csv(ladder));
    ctx.manifest.emplace_back("spectral_residual", fmt_float(sol.residual_max));
    ctx.note_ladder(tag, ladder, sol);
    return ctx.finish();
}

int cmd_freq(const RunConfig& cfg) {
    RunContext ctx(cfg, "freq");
    const EigenSolution sol = solve(cfg);
    const LabelLadder ladder = make_ladder(sol, cfg, cfg.method, cfg.p, cfg.delta);
    const FrequencyCurve curve = cavity_frequency_curve(ladder);
    const auto features = detect_features(curve);
    const std::string tag =
        std::string(to_string(cfg.method)) + "_" + qubit_label_tag(cfg.p);
    write_text_file(ctx.outdir / ("ladder_" + tag + ".csv"), ladder_csv(ladder));
    write_text_file(ctx.outdir / ("freq_" + tag + ".csv"), curve_csv(curve, "frequency"));
    write_text_file(ctx.outdir / ("features_" + tag + ".txt"), features_report(features));
    ctx.manifest.emplace_back("spectral_residual", fmt_float(sol.residual_max));
    ctx.manifest.emplace_back("features", std::to_string(features.size()));
    ctx.note_ladder(tag, ladder, sol);
    return ctx.finish();
}

int cmd_dynamics(const RunConfig& cfg) {
    if (!cfg.drive) throw std::runtime_error("dynamics requires a [drive] section or drive flags");
    RunContext ctx(cfg, "dynamics");
    const EigenSolution sol = solve(cfg);
    const Index start = qcl::detail::argmax(product_state_overlaps(sol, cfg.p, 0));
    const VectorC psi0 = embed_labeled_state(sol, start, cfg.drive->fock_cutoff_dyn);
    const std::string label = qubit_label_tag(cfg.p) + ",0";
    const Trajectory traj = cfg.frame == Frame::Lab
                                ? integrate_lab(cfg.system, *cfg.drive, psi0, label)
                                : integrate_displaced(cfg.system, *cfg.drive, psi0, label);
    write_text_file(ctx.outdir / "trajectory.csv", trajectory_csv(traj));
    ctx.manifest.emplace_back("spectral_residual", fmt_float(sol.residual_max));
    ctx.manifest.emplace_back("norm_drift", fmt_float(traj.norm_drift));
    ctx.manifest.emplace_back("max_ceiling_population", fmt_float(traj.max_ceiling_population));
    ctx.manifest.emplace_back("max_photon_lab",
                              fmt_float(std::max_element(traj.samples.begin(), traj.samples.end(),
                                                         [](const auto& a, const auto& b) {
                                                             return a.photon_lab < b.photon_lab;
                                                         })->photon_lab));
    return ctx.finish();
}

int cmd_compare(const RunConfig& cfg) {
    RunContext ctx(cfg, "compare");
    std::vector<LabelMethod> methods = cfg.compare_methods;
    if (methods.empty()) methods = {LabelMethod::Continuity, LabelMethod::Recursive};
    if (methods.size() < 2) throw std::runtime_error("compare needs at least two methods");

    const EigenSolution sol = solve(cfg);
    std::vector<LabelLadder> ladders;
    std::ostringstream report;
    for (const LabelMethod m : methods) {
        ladders.push_back(make_ladder(sol, cfg, m, cfg.p, cfg.delta));
        const std::string tag = std::string(to_string(m)) + "_" + qubit_label_tag(cfg.p);
        write_text_file(ctx.outdir / ("ladder_" + tag + ".csv"), ladder_csv(ladders.back()));
        ctx.note_ladder(tag, ladders.back(), sol);
    }
    for (std::size_t i = 0; i < ladders.size(); ++i)
        for (std::size_t j = i + 1; j < ladders.size(); ++j) {
            const DivergenceReport rep = compare_ladders(ladders[i], ladders[j]);
            report << to_string(methods[i]) << " vs " << to_string(methods[j]) << ": ";
            if (!rep.divergence_n) {
                report << "no divergence\n";
                continue;
            }
            report << "diverge at n = " << *rep.divergence_n;
            if (rep.repulsion)
                report << "; level repulsion in (0, " << fmt_float(rep.repulsion->bound_high)
                       << ") around E_r = " << fmt_float(rep.repulsion->resonant_energy);
            report << '\n';
        }

    if (cfg.drive) {
        const Index start = qcl::detail::argmax(product_state_overlaps(sol, cfg.p, 0));
        const VectorC psi0 = embed_labeled_state(sol, start, cfg.drive->fock_cutoff_dyn);
        const std::string label = qubit_label_tag(cfg.p) + ",0";
        const Trajectory traj = cfg.frame == Frame::Lab
                                    ? integrate_lab(cfg.system, *cfg.drive, psi0, label)
                                    : integrate_displaced(cfg.system, *cfg.drive, psi0, label);
        write_text_file(ctx.outdir / "trajectory.csv", trajectory_csv(traj));
        ctx.manifest.emplace_back("norm_drift", fmt_float(traj.norm_drift));
        for (std::size_t i = 0; i < ladders.size(); ++i) {
            const TrajectoryComparison cmp = trajectory_vs_ladder(
                traj, occupancy_curve(ladders[i]), cfg.compare_n_lo, cfg.compare_n_hi);
            report << "trajectory vs " << to_string(methods[i])
                   << ": l1 = " << fmt_float(cmp.l1_mean_deviation)
                   << " over n in [" << cfg.compare_n_lo << ", " << cfg.compare_n_hi
                   << "] (" << cmp.samples_used << " samples)\n";
            ctx.manifest.emplace_back("l1." + std::string(to_string(methods[i])),
                                      fmt_float(cmp.l1_mean_deviation));
        }
    }
    write_text_file(ctx.outdir / "compare.txt", report.str());
    std::cout << report.str();
    return ctx.finish();
}

int cmd_sweep(const RunConfig& cfg) {
    if (!cfg.sweep) throw std::runtime_error("sweep requires a [sweep] section");
    RunContext ctx(cfg, "sweep");
    const SweepResult result = *cfg.sweep->kind == SweepKind::OffsetCharge
                                   ? run_offset_charge_sweep(cfg)
                                   : run_window_sweep(cfg);
    for (const auto& pt : result.points) {
        const std::string tag = result.kind == SweepKind::OffsetCharge
                                    ? "ng" + grid_value_tag(pt.n_g) + "_" + qubit_label_tag(pt.p)
                                    : "delta" + grid_value_tag(pt.delta);
        if (!pt.error.empty()) {
            ctx.diagnostics.push_back("point " + tag + ": " + pt.error);
            continue;
        }
        write_text_file(ctx.outdir / ("ladder_" + tag + ".csv"), ladder_csv(pt.ladder));
        write_text_file(ctx.outdir / ("freq_" + tag + ".csv"), curve_csv(pt.freq, "frequency"));
        write_text_file(ctx.outdir / ("features_" + tag + ".txt"), features_report(pt.features));
        if (pt.ladder.duplicate_indices)
            ctx.diagnostics.push_back("point " + tag + " reused eigenstates");
    }
    for (const auto& [k, v] : result.manifest) ctx.manifest.emplace_back(k, v);
    return ctx.finish();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transmon-cavity eigenstate labeling and driven dynamics"};
    app.set_version_flag("--version", std::string("qcl ") + qcl::version);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    Overrides ov;
    app.add_option("--config", config_path, "configuration file (see README for the schema)");
    app.add_option("--e-c", ov.e_c, "charging energy E_C");
    app.add_option("--e-j", ov.e_j, "Josephson energy E_J");
    app.add_option("--g", ov.g, "qubit-cavity coupling");
    app.add_option("--n-g", ov.n_g, "offset charge");
    app.add_option("--charge-cutoff", ov.charge_cutoff, "charge basis cutoff");
    app.add_option("--fock-cutoff", ov.fock_cutoff, "spectral Fock cutoff");
    app.add_option("--coupling", ov.coupling, "full | rwa");
    app.add_option("--method", ov.method, "overlap | block | recursive | continuity");
    app.add_option("--methods", ov.methods, "comma list of methods (compare)");
    app.add_option("--p", ov.p, "ladder start qubit level");
    app.add_option("--n-max", ov.n_max, "ladder length");
    app.add_option("--delta", ov.delta, "continuity energy window");
    app.add_option("--first-step", ov.first_step, "extrapolate | overlap");
    app.add_flag("--ignore-truncation-margin", [&ov](std::int64_t) { ov.ignore_margin = true; },
                 "allow ladders within 90 states of the Fock ceiling");
    app.add_option("--amplitude", ov.amplitude, "drive amplitude E");
    app.add_option("--omega-d", ov.omega_d, "drive frequency");
    app.add_option("--t-end", ov.t_end, "integration time");
    app.add_option("--dt", ov.dt, "integrator step");
    app.add_option("--fock-cutoff-dyn", ov.fock_cutoff_dyn, "dynamics Fock cutoff");
    app.add_option("--sample-stride", ov.sample_stride, "time between samples");
    app.add_option("--frame", ov.frame, "lab | displaced");
    app.add_option("--compare-n-lo", ov.compare_n_lo, "lower n for trajectory comparison");
    app.add_option("--compare-n-hi", ov.compare_n_hi, "upper n for trajectory comparison");
    app.add_option("--kind", ov.kind, "sweep kind: offset_charge | window");
    app.add_option("--out", ov.out, "output directory");
    app.add_flag("--cache", [&ov](std::int64_t) { ov.cache = true; },
                 "reuse eigensolutions via the file cache (QCL_CACHE_DIR)");
    app.add_option("--workers", ov.workers, "concurrent sweep workers");

    int (*run)(const RunConfig&) = nullptr;
    app.add_subcommand("spectrum", "diagonalize and dump the eigen summary")
        ->callback([&] { run = cmd_spectrum; });
    app.add_subcommand("label", "label one ladder")->callback([&] { run = cmd_label; });
    app.add_subcommand("freq", "ladder, frequency curve, and detected features")
        ->callback([&] { run = cmd_freq; });
    app.add_subcommand("dynamics", "integrate a driven trajectory")
        ->callback([&] { run = cmd_dynamics; });
    app.add_subcommand("compare", "compare ladders (and optionally a trajectory)")
        ->callback([&] { run = cmd_compare; });
    app.add_subcommand("sweep", "offset-charge or energy-window sweep")
        ->callback([&] { run = cmd_sweep; });

    CLI11_PARSE(app, argc, argv);
    try {
        return run(load_config(config_path, ov));
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
}
