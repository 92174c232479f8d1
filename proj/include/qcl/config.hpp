// config.hpp — structured run configuration: parse, validate, serialize
//
// The config format is line-oriented key = value text with [section] headers.
// Sections: [system], [labeling], [drive], [sweep], [output]. '#' and ';' start
// comments. Parse errors carry the offending line number. See README for the
// full key reference.

#pragma once

#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qcl/dynamics.hpp"
#include "qcl/io.hpp"
#include "qcl/labeling.hpp"
#include "qcl/system_spec.hpp"

namespace qcl {

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(int line_, const std::string& msg)
        : std::runtime_error("config line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

enum class SweepKind { OffsetCharge, Window };

struct DeltaOverride {
    int p{0};
    double n_g{0.0};
    double delta{0.0};
    bool operator==(const DeltaOverride&) const = default;
};

struct SweepConfig {
    std::optional<SweepKind> kind;
    std::vector<double> n_g_values;
    std::vector<double> delta_values;
    std::vector<int> ladder_starts{0, 1};
    std::vector<DeltaOverride> delta_overrides;
    bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
    SystemSpec system;
    LabelMethod method{LabelMethod::Continuity};
    std::vector<LabelMethod> compare_methods;  // for the compare command
    int p{0};
    int n_max{260};
    double delta{0.01};
    FirstStep first_step{FirstStep::Extrapolate};
    bool ignore_truncation_margin{false};
    double compare_n_lo{0.0};
    double compare_n_hi{260.0};
    std::optional<DriveParams> drive;
    Frame frame{Frame::Displaced};
    std::optional<SweepConfig> sweep;
    std::string output_dir{"out"};
    bool cache{false};
    int workers{1};

    bool operator==(const RunConfig&) const = default;

    ContinuityConfig continuity_config() const {
        return {delta, n_max, first_step, ignore_truncation_margin};
    }
};

namespace detail {

struct ConfigEntry {
    std::string key, value;
    int line;
};

using SectionMap = std::map<std::string, std::vector<ConfigEntry>>;

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline double parse_double(const ConfigEntry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || !trim(std::string_view(end)).empty())
        throw ConfigError(e.line, "expected a number for '" + e.key + "', got '" + e.value + "'");
    return v;
}

inline int parse_int(const ConfigEntry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end == s || trim(end).size() != 0)
        throw ConfigError(e.line, "expected an integer for '" + e.key + "', got '" + e.value + "'");
    return static_cast<int>(v);
}

inline bool parse_bool(const ConfigEntry& e) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    throw ConfigError(e.line, "expected true/false for '" + e.key + "', got '" + e.value + "'");
}

inline int parse_qubit_label(const ConfigEntry& e) {
    if (e.value == "g") return 0;
    if (e.value == "e") return 1;
    const char* s = e.value.c_str();
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end == s || trim(end).size() != 0 || v < 0)
        throw ConfigError(e.line, "expected g, e, or a non-negative integer for '" + e.key + "'");
    return static_cast<int>(v);
}

inline LabelMethod parse_method(const ConfigEntry& e, const std::string& token) {
    if (token == "overlap") return LabelMethod::Overlap;
    if (token == "block") return LabelMethod::Block;
    if (token == "recursive") return LabelMethod::Recursive;
    if (token == "continuity") return LabelMethod::Continuity;
    throw ConfigError(e.line, "unknown labeling method '" + token + "'");
}

inline std::vector<std::string> split_list(std::string_view v) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        const std::size_t comma = v.find(',', pos);
        const std::string_view item =
            trim(v.substr(pos, comma == std::string_view::npos ? v.size() - pos : comma - pos));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::vector<double> parse_double_list(const ConfigEntry& e) {
    std::vector<double> out;
    for (const auto& item : split_list(e.value))
        out.push_back(parse_double({e.key, item, e.line}));
    if (out.empty()) throw ConfigError(e.line, "empty list for '" + e.key + "'");
    return out;
}

inline SectionMap tokenize_config(std::string_view text) {
    SectionMap sections;
    std::map<std::string, std::map<std::string, int>> seen;
    std::string section;
    int line = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        ++line;
        const std::size_t nl = text.find('\n', pos);
        std::string_view raw =
            text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        const std::size_t hash = raw.find_first_of("#;");
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string_view s = trim(raw);
        if (s.empty()) continue;

        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError(line, "malformed section header '" + std::string(s) + "'");
            section = std::string(trim(s.substr(1, s.size() - 2)));
            if (section != "system" && section != "labeling" && section != "drive" &&
                section != "sweep" && section != "output")
                throw ConfigError(line, "unknown section [" + section + "]");
            sections.try_emplace(section);
            continue;
        }

        const std::size_t eq = s.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(line, "expected key = value, got '" + std::string(s) + "'");
        if (section.empty())
            throw ConfigError(line, "key outside of any [section]");
        const std::string key(trim(s.substr(0, eq)));
        const std::string value(trim(s.substr(eq + 1)));
        if (key.empty()) throw ConfigError(line, "empty key");
        if (auto [it, fresh] = seen[section].try_emplace(key, line); !fresh)
            throw ConfigError(line, "duplicate key '" + key + "' in [" + section +
                                        "] (first set on line " + std::to_string(it->second) + ")");
        sections[section].push_back({key, value, line});
    }
    return sections;
}

} // namespace detail

inline RunConfig parse_config(std::string_view text) {
    using detail::ConfigEntry;
    const detail::SectionMap sections = detail::tokenize_config(text);
    RunConfig cfg;

    auto section_line = [&](const std::string& name) {
        const auto it = sections.find(name);
        return it == sections.end() || it->second.empty() ? 0 : it->second.front().line;
    };

    // [system]
    {
        const auto it = sections.find("system");
        if (it == sections.end())
            throw ConfigError(1, "missing required section [system]");
        bool have_ec = false, have_ej = false, have_g = false, have_ng = false;
        for (const ConfigEntry& e : it->second) {
            if (e.key == "e_c") { cfg.system.e_c = detail::parse_double(e); have_ec = true; }
            else if (e.key == "e_j") { cfg.system.e_j = detail::parse_double(e); have_ej = true; }
            else if (e.key == "g") { cfg.system.g = detail::parse_double(e); have_g = true; }
            else if (e.key == "n_g") { cfg.system.n_g = detail::parse_double(e); have_ng = true; }
            else if (e.key == "charge_cutoff") cfg.system.charge_cutoff = detail::parse_int(e);
            else if (e.key == "fock_cutoff") cfg.system.fock_cutoff = detail::parse_int(e);
            else if (e.key == "coupling") {
                if (e.value == "full") cfg.system.coupling = CouplingForm::Full;
                else if (e.value == "rwa") cfg.system.coupling = CouplingForm::RWA;
                else throw ConfigError(e.line, "coupling must be full or rwa");
            } else {
                throw ConfigError(e.line, "unknown key '" + e.key + "' in [system]");
            }
        }
        const int line = section_line("system");
        if (!have_ec) throw ConfigError(line, "missing required key 'e_c' in [system]");
        if (!have_ej) throw ConfigError(line, "missing required key 'e_j' in [system]");
        if (!have_g) throw ConfigError(line, "missing required key 'g' in [system]");
        if (!have_ng) throw ConfigError(line, "missing required key 'n_g' in [system]");
        try {
            cfg.system.validate();
        } catch (const std::invalid_argument& err) {
            throw ConfigError(line, err.what());
        }
    }

    // [labeling]
    if (const auto it = sections.find("labeling"); it != sections.end()) {
        for (const ConfigEntry& e : it->second) {
            if (e.key == "method") cfg.method = detail::parse_method(e, e.value);
            else if (e.key == "methods") {
                cfg.compare_methods.clear();
                for (const auto& tok : detail::split_list(e.value))
                    cfg.compare_methods.push_back(detail::parse_method(e, tok));
            }
            else if (e.key == "p") cfg.p = detail::parse_qubit_label(e);
            else if (e.key == "n_max") cfg.n_max = detail::parse_int(e);
            else if (e.key == "delta") cfg.delta = detail::parse_double(e);
            else if (e.key == "first_step") {
                if (e.value == "extrapolate") cfg.first_step = FirstStep::Extrapolate;
                else if (e.value == "overlap") cfg.first_step = FirstStep::Overlap;
                else throw ConfigError(e.line, "first_step must be extrapolate or overlap");
            }
            else if (e.key == "ignore_truncation_margin")
                cfg.ignore_truncation_margin = detail::parse_bool(e);
            else if (e.key == "compare_n_lo") cfg.compare_n_lo = detail::parse_double(e);
            else if (e.key == "compare_n_hi") cfg.compare_n_hi = detail::parse_double(e);
            else throw ConfigError(e.line, "unknown key '" + e.key + "' in [labeling]");
        }
        const int line = section_line("labeling");
        if (!(cfg.delta > 0.0)) throw ConfigError(line, "delta must be > 0");
        if (cfg.n_max < 0) throw ConfigError(line, "n_max must be >= 0");
        if (cfg.p < 0 || cfg.p >= cfg.system.qubit_dim())
            throw ConfigError(line, "qubit label p out of range for charge_cutoff");
    }

    // [drive]
    if (const auto it = sections.find("drive"); it != sections.end()) {
        DriveParams d;
        bool have_amp = false, have_wd = false, have_tend = false;
        for (const ConfigEntry& e : it->second) {
            if (e.key == "amplitude") { d.amplitude = detail::parse_double(e); have_amp = true; }
            else if (e.key == "omega_d") { d.omega_d = detail::parse_double(e); have_wd = true; }
            else if (e.key == "t_end") { d.t_end = detail::parse_double(e); have_tend = true; }
            else if (e.key == "dt") d.dt = detail::parse_double(e);
            else if (e.key == "fock_cutoff_dyn") d.fock_cutoff_dyn = detail::parse_int(e);
            else if (e.key == "sample_stride") d.sample_stride = detail::parse_double(e);
            else if (e.key == "frame") {
                if (e.value == "lab") cfg.frame = Frame::Lab;
                else if (e.value == "displaced") cfg.frame = Frame::Displaced;
                else throw ConfigError(e.line, "frame must be lab or displaced");
            }
            else throw ConfigError(e.line, "unknown key '" + e.key + "' in [drive]");
        }
        const int line = section_line("drive");
        if (!have_amp) throw ConfigError(line, "missing required key 'amplitude' in [drive]");
        if (!have_wd) throw ConfigError(line, "missing required key 'omega_d' in [drive]");
        if (!have_tend) throw ConfigError(line, "missing required key 't_end' in [drive]");
        try {
            d.validate();
        } catch (const std::invalid_argument& err) {
            throw ConfigError(line, err.what());
        }
        cfg.drive = d;
    }

    // [sweep]
    if (const auto it = sections.find("sweep"); it != sections.end()) {
        SweepConfig sw;
        for (const ConfigEntry& e : it->second) {
            if (e.key == "kind") {
                if (e.value == "offset_charge") sw.kind = SweepKind::OffsetCharge;
                else if (e.value == "window") sw.kind = SweepKind::Window;
                else throw ConfigError(e.line, "kind must be offset_charge or window");
            }
            else if (e.key == "n_g_values") sw.n_g_values = detail::parse_double_list(e);
            else if (e.key == "delta_values") sw.delta_values = detail::parse_double_list(e);
            else if (e.key == "ladder_starts") {
                sw.ladder_starts.clear();
                for (const auto& tok : detail::split_list(e.value))
                    sw.ladder_starts.push_back(detail::parse_qubit_label({e.key, tok, e.line}));
                if (sw.ladder_starts.empty())
                    throw ConfigError(e.line, "empty list for 'ladder_starts'");
            }
            else if (e.key == "delta_overrides") {
                for (const auto& tok : detail::split_list(e.value)) {
                    const std::size_t c1 = tok.find(':');
                    const std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                                   : tok.find(':', c1 + 1);
                    if (c2 == std::string::npos)
                        throw ConfigError(e.line,
                                          "delta_overrides items must be p:n_g:delta, got '" + tok + "'");
                    DeltaOverride ov;
                    ov.p = detail::parse_qubit_label({e.key, tok.substr(0, c1), e.line});
                    ov.n_g = detail::parse_double({e.key, tok.substr(c1 + 1, c2 - c1 - 1), e.line});
                    ov.delta = detail::parse_double({e.key, tok.substr(c2 + 1), e.line});
                    if (!(ov.delta > 0.0)) throw ConfigError(e.line, "override delta must be > 0");
                    sw.delta_overrides.push_back(ov);
                }
            }
            else throw ConfigError(e.line, "unknown key '" + e.key + "' in [sweep]");
        }
        const int line = section_line("sweep");
        if (!sw.kind) {
            if (!sw.n_g_values.empty() && sw.delta_values.empty()) sw.kind = SweepKind::OffsetCharge;
            else if (sw.n_g_values.empty() && !sw.delta_values.empty()) sw.kind = SweepKind::Window;
            else throw ConfigError(line, "sweep kind is ambiguous; set kind = offset_charge or window");
        }
        if (*sw.kind == SweepKind::OffsetCharge && sw.n_g_values.empty())
            throw ConfigError(line, "offset_charge sweep requires a non-empty n_g_values grid");
        if (*sw.kind == SweepKind::Window && sw.delta_values.empty())
            throw ConfigError(line, "window sweep requires a non-empty delta_values grid");
        cfg.sweep = sw;
    }

    // [output]
    if (const auto it = sections.find("output"); it != sections.end()) {
        for (const ConfigEntry& e : it->second) {
            if (e.key == "directory") cfg.output_dir = e.value;
            else if (e.key == "cache") cfg.cache = detail::parse_bool(e);
            else if (e.key == "workers") {
                cfg.workers = detail::parse_int(e);
                if (cfg.workers < 1) throw ConfigError(e.line, "workers must be >= 1");
            }
            else throw ConfigError(e.line, "unknown key '" + e.key + "' in [output]");
        }
    }
    return cfg;
}

inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "[system]\n";
    os << "e_c = " << fmt_float(cfg.system.e_c) << '\n';
    os << "e_j = " << fmt_float(cfg.system.e_j) << '\n';
    os << "g = " << fmt_float(cfg.system.g) << '\n';
    os << "n_g = " << fmt_float(cfg.system.n_g) << '\n';
    os << "charge_cutoff = " << cfg.system.charge_cutoff << '\n';
    os << "fock_cutoff = " << cfg.system.fock_cutoff << '\n';
    os << "coupling = " << (cfg.system.coupling == CouplingForm::RWA ? "rwa" : "full") << '\n';

    os << "\n[labeling]\n";
    os << "method = " << to_string(cfg.method) << '\n';
    if (!cfg.compare_methods.empty()) {
        os << "methods = ";
        for (std::size_t i = 0; i < cfg.compare_methods.size(); ++i)
            os << (i ? ", " : "") << to_string(cfg.compare_methods[i]);
        os << '\n';
    }
    os << "p = " << cfg.p << '\n';
    os << "n_max = " << cfg.n_max << '\n';
    os << "delta = " << fmt_float(cfg.delta) << '\n';
    os << "first_step = " << (cfg.first_step == FirstStep::Overlap ? "overlap" : "extrapolate") << '\n';
    os << "ignore_truncation_margin = " << (cfg.ignore_truncation_margin ? "true" : "false") << '\n';
    os << "compare_n_lo = " << fmt_float(cfg.compare_n_lo) << '\n';
    os << "compare_n_hi = " << fmt_float(cfg.compare_n_hi) << '\n';

    if (cfg.drive) {
        os << "\n[drive]\n";
        os << "amplitude = " << fmt_float(cfg.drive->amplitude) << '\n';
        os << "omega_d = " << fmt_float(cfg.drive->omega_d) << '\n';
        os << "t_end = " << fmt_float(cfg.drive->t_end) << '\n';
        os << "dt = " << fmt_float(cfg.drive->dt) << '\n';
        os << "fock_cutoff_dyn = " << cfg.drive->fock_cutoff_dyn << '\n';
        os << "sample_stride = " << fmt_float(cfg.drive->sample_stride) << '\n';
        os << "frame = " << (cfg.frame == Frame::Lab ? "lab" : "displaced") << '\n';
    }

    if (cfg.sweep) {
        os << "\n[sweep]\n";
        os << "kind = " << (*cfg.sweep->kind == SweepKind::Window ? "window" : "offset_charge") << '\n';
        auto write_list = [&](const char* key, const std::vector<double>& v) {
            if (v.empty()) return;
            os << key << " = ";
            for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << fmt_float(v[i]);
            os << '\n';
        };
        write_list("n_g_values", cfg.sweep->n_g_values);
        write_list("delta_values", cfg.sweep->delta_values);
        os << "ladder_starts = ";
        for (std::size_t i = 0; i < cfg.sweep->ladder_starts.size(); ++i)
            os << (i ? ", " : "") << cfg.sweep->ladder_starts[i];
        os << '\n';
        if (!cfg.sweep->delta_overrides.empty()) {
            os << "delta_overrides = ";
            for (std::size_t i = 0; i < cfg.sweep->delta_overrides.size(); ++i) {
                const auto& ov = cfg.sweep->delta_overrides[i];
                os << (i ? ", " : "") << ov.p << ':' << fmt_float(ov.n_g) << ':'
                   << fmt_float(ov.delta);
            }
            os << '\n';
        }
    }

    os << "\n[output]\n";
    os << "directory = " << cfg.output_dir << '\n';
    os << "cache = " << (cfg.cache ? "true" : "false") << '\n';
    os << "workers = " << cfg.workers << '\n';
    return os.str();
}

} // namespace qcl
