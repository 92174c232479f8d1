// io.hpp — CSV / report serialization with deterministic float formatting
//
// Every float is emitted with 17 significant digits so that identical configs
// produce bit-identical output files.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qcl/dynamics.hpp"
#include "qcl/labeling.hpp"
#include "qcl/observables.hpp"
#include "qcl/system_spec.hpp"
#include "qcl/version.hpp"

namespace qcl {

inline std::string fmt_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline std::string spec_header_fields(const SystemSpec& s) {
    std::ostringstream os;
    os << "e_c=" << fmt_float(s.e_c) << " e_j=" << fmt_float(s.e_j)
       << " g=" << fmt_float(s.g) << " n_g=" << fmt_float(s.n_g)
       << " charge_cutoff=" << s.charge_cutoff << " fock_cutoff=" << s.fock_cutoff
       << " coupling=" << (s.coupling == CouplingForm::RWA ? "rwa" : "full");
    return os.str();
}

inline std::string ladder_csv(const LabelLadder& ladder) {
    std::ostringstream os;
    os << "# qcl " << version << " ladder method=" << to_string(ladder.method)
       << " p=" << ladder.p;
    if (ladder.method == LabelMethod::Continuity)
        os << " delta=" << fmt_float(ladder.delta)
           << " first_step=" << (ladder.first_step == FirstStep::Overlap ? "overlap" : "extrapolate");
    os << ' ' << spec_header_fields(ladder.spec) << '\n';
    os << "n,eigen_index,energy,nq_expect,window_fallback\n";
    for (std::size_t n = 0; n < ladder.entries.size(); ++n) {
        const auto& e = ladder.entries[n];
        os << n << ',' << e.eigen_index << ',' << fmt_float(e.energy) << ','
           << fmt_float(e.nq_expect) << ',' << (e.window_fallback ? 1 : 0) << '\n';
    }
    return os.str();
}

template <typename Curve>
inline std::string curve_csv(const Curve& curve, const char* kind) {
    std::ostringstream os;
    os << "# qcl " << version << " curve kind=" << kind
       << " method=" << to_string(curve.method) << " p=" << curve.p;
    if (curve.method == LabelMethod::Continuity) os << " delta=" << fmt_float(curve.delta);
    os << ' ' << spec_header_fields(curve.spec) << '\n';
    os << "n,value\n";
    for (const auto& p : curve.points)
        os << p.n << ',' << fmt_float(p.value) << '\n';
    return os.str();
}

inline std::string features_report(const std::vector<ResonanceFeature>& features) {
    std::ostringstream os;
    for (const auto& f : features)
        os << to_string(f.kind) << ' ' << f.n << ' ' << fmt_float(f.magnitude) << '\n';
    return os.str();
}

inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "# qcl " << version << " trajectory frame="
       << (traj.frame == Frame::Displaced ? "displaced" : "lab")
       << " initial=" << (traj.initial_label.empty() ? "?" : traj.initial_label)
       << " amplitude=" << fmt_float(traj.drive.amplitude)
       << " omega_d=" << fmt_float(traj.drive.omega_d)
       << " dt=" << fmt_float(traj.drive.dt)
       << " fock_cutoff_dyn=" << traj.drive.fock_cutoff_dyn << ' '
       << spec_header_fields(traj.spec) << '\n';
    os << "t,re_alpha,im_alpha,nq,photon_lab\n";
    for (const auto& s : traj.samples)
        os << fmt_float(s.t) << ',' << fmt_float(s.alpha.real()) << ','
           << fmt_float(s.alpha.imag()) << ',' << fmt_float(s.nq) << ','
           << fmt_float(s.photon_lab) << '\n';
    return os.str();
}

// Manifest: ordered key-value lines; assembly order is the reproducible order.
using Manifest = std::vector<std::pair<std::string, std::string>>;

inline std::string manifest_text(const Manifest& m) {
    std::ostringstream os;
    for (const auto& [k, v] : m) os << k << " = " << v << '\n';
    return os.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw std::runtime_error("failed writing " + path.string());
}

} // namespace qcl
