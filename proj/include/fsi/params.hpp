/**
 * @file params.hpp
 * @brief Physical constants, run settings and the key=value configuration format.
 *
 * All quantities are CGS. A configuration document is a flat list of
 * `key = value` lines, optionally grouped under `[physical]`, `[run]` and
 * `[scheme]` headers. `#` starts a comment.
 */
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fsi {

/// Raised for malformed documents, unknown or missing keys and invalid values.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PhysicalParams {
    double rho_f = 1.0;
    double mu_f = 0.035;
    double rho_m = 1.1;
    double h = 0.02;
    double mu_m = 5.75e5;
    double lambda_m = 1.7e6;
    double rho_s = 1.1;
    double H = 0.1;
    double mu_s = 5.75e5;
    double lambda_s = 1.7e6;
    double gamma = 4e6;
    double R = 0.5;
    double L = 6.0;
    double beta = 1.0;

    bool operator==(const PhysicalParams&) const = default;
};

struct MembraneCoeffs {
    double C0 = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
};

enum class PressureKind { Constant, Pulse };
enum class SchemeMode { Full, Stability };

struct RunSettings {
    double dt = 5e-5;
    double t_end = 0.012;
    int nz = 120;
    int nr_f = 16;
    int nr_s = 6;
    PressureKind pressure = PressureKind::Pulse;
    double p_in = 0.0;     ///< constant inlet value (PressureKind::Constant)
    double p_out = 0.0;    ///< outlet value, both kinds
    double p_max = 1.333e4;
    double t_max = 0.003;
    double tol = 1e-10;
    int output_every = 1;
    SchemeMode mode = SchemeMode::Full;

    bool operator==(const RunSettings&) const = default;
};

/// Table T0: the exact-solution benchmark.
inline PhysicalParams table_t0() {
    PhysicalParams p;
    p.R = 0.5;
    p.L = 6.0;
    p.rho_f = 1.0;
    p.mu_f = 0.35;
    p.rho_m = 1.1;
    p.h = 0.02;
    p.mu_m = 1.07e6;
    p.lambda_m = 4.29e6;
    p.rho_s = 1.1;
    p.H = 0.1;
    p.mu_s = 1.07e6;
    p.lambda_s = 4.29e6;
    p.gamma = 0.0;
    p.beta = 1.0;
    return p;
}

/// Table T1: the pressure-pulse benchmark.
inline PhysicalParams table_t1() {
    PhysicalParams p;
    p.R = 0.5;
    p.L = 6.0;
    p.rho_f = 1.0;
    p.mu_f = 0.035;
    p.rho_m = 1.1;
    p.h = 0.02;
    p.mu_m = 5.75e5;
    p.lambda_m = 1.7e6;
    p.rho_s = 1.1;
    p.H = 0.1;
    p.mu_s = 5.75e5;
    p.lambda_s = 1.7e6;
    p.gamma = 4e6;
    p.beta = 1.0;
    return p;
}

inline MembraneCoeffs membrane_coefficients(const PhysicalParams& p) {
    const double mu = p.mu_m;
    const double lam = p.lambda_m;
    const double lame_part = 2.0 * mu * lam / (lam + 2.0 * mu);
    const double R2 = p.R * p.R;
    MembraneCoeffs c;
    c.C0 = (p.h / R2) * (lame_part + 2.0 * mu);
    // C1 is defined from C0 so that C1 == C0 * R^2 holds bit for bit.
    c.C1 = c.C0 * R2;
    c.C2 = (p.h / p.R) * lame_part;
    return c;
}

/// Same coefficients through Young's modulus and Poisson ratio.
inline MembraneCoeffs membrane_coefficients_young(const PhysicalParams& p) {
    const double mu = p.mu_m;
    const double lam = p.lambda_m;
    const double E = mu * (3.0 * lam + 2.0 * mu) / (lam + mu);
    const double s = lam / (2.0 * (lam + mu));
    const double f = p.h * E / (1.0 - s * s);
    MembraneCoeffs c;
    c.C0 = f / (p.R * p.R);
    c.C1 = f;
    c.C2 = f * s / p.R;
    return c;
}

/// Throws ConfigError naming the first violated invariant.
inline void validate(const PhysicalParams& p) {
    auto positive = [](const char* name, double v) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("invariant violation: ") + name + " must be positive");
    };
    auto nonneg = [](const char* name, double v) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("invariant violation: ") + name + " must be non-negative");
    };
    positive("rho_f", p.rho_f);
    positive("mu_f", p.mu_f);
    positive("rho_m", p.rho_m);
    positive("h", p.h);
    positive("mu_m", p.mu_m);
    nonneg("lambda_m", p.lambda_m);
    positive("rho_s", p.rho_s);
    positive("H", p.H);
    positive("mu_s", p.mu_s);
    nonneg("lambda_s", p.lambda_s);
    nonneg("gamma", p.gamma);
    positive("R", p.R);
    positive("L", p.L);
    if (!(p.beta >= 0.0 && p.beta <= 1.0))
        throw ConfigError("invariant violation: beta must lie in [0,1]");
}

inline void validate(const RunSettings& s) {
    if (!(s.dt > 0.0)) throw ConfigError("invariant violation: dt must be positive");
    if (!(s.t_end >= s.dt)) throw ConfigError("invariant violation: t_end must be >= dt");
    if (s.nz < 2) throw ConfigError("invariant violation: nz must be >= 2");
    if (s.nr_f < 2) throw ConfigError("invariant violation: nr_f must be >= 2");
    if (s.nr_s < 1) throw ConfigError("invariant violation: nr_s must be >= 1");
    if (!(s.tol > 0.0)) throw ConfigError("invariant violation: tol must be positive");
    if (s.output_every < 1) throw ConfigError("invariant violation: output_every must be >= 1");
    if (s.pressure == PressureKind::Pulse && !(s.t_max > 0.0))
        throw ConfigError("invariant violation: t_max must be positive");
}

/// Inlet pressure at time t.
inline double inlet_pressure(const RunSettings& s, double t) {
    if (s.pressure == PressureKind::Constant) return s.p_in;
    if (t > s.t_max) return 0.0;
    const double pi = 3.14159265358979323846;
    return 0.5 * s.p_max * (1.0 - std::cos(2.0 * pi * t / s.t_max));
}

inline double outlet_pressure(const RunSettings& s, double /*t*/) { return s.p_out; }

namespace detail {

inline std::string trim(std::string_view v) {
    const char* ws = " \t\r\n";
    auto b = v.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = v.find_last_not_of(ws);
    return std::string(v.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("invalid number for key '" + key + "': '" + text + "'");
    return v;
}

inline int parse_int(const std::string& key, const std::string& text) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("invalid integer for key '" + key + "': '" + text + "'");
    return v;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Raw document: key -> value, in insertion order of first appearance.
struct ConfigDocument {
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }
};

inline const std::vector<std::string>& physical_keys() {
    static const std::vector<std::string> keys = {
        "rho_f", "mu_f", "rho_m", "h", "mu_m", "lambda_m", "rho_s",
        "H", "mu_s", "lambda_s", "gamma", "R", "L", "beta"};
    return keys;
}

inline const std::vector<std::string>& run_keys() {
    static const std::vector<std::string> keys = {
        "dt", "t_end", "nz", "nr_f", "nr_s", "pressure", "p_in", "p_out",
        "p_max", "t_max", "tol", "output_every", "mode"};
    return keys;
}

/// Keys read by the scheme layer; accepted here so that one document can hold everything.
inline const std::vector<std::string>& scheme_keys() {
    static const std::vector<std::string> keys = {
        "move_mesh", "advection", "radial_only_structure", "radial_only_interface",
        "trace_transfer", "rigid_interface", "orthogonal_ends"};
    return keys;
}

/// Syntax-level parse. Rejects malformed lines, duplicate keys, unknown sections and unknown keys.
inline ConfigDocument parse_document(const std::string& text) {
    ConfigDocument doc;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    std::vector<std::string> unknown;
    auto in_list = [](const std::vector<std::string>& l, const std::string& k) {
        return std::find(l.begin(), l.end(), k) != l.end();
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("parse failure at line " + std::to_string(lineno) + ": unterminated section header");
            section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
            if (section != "physical" && section != "run" && section != "scheme")
                throw ConfigError("parse failure at line " + std::to_string(lineno) + ": unknown section '" + section + "'");
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("parse failure at line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(std::string_view(t).substr(0, eq));
        std::string val = detail::trim(std::string_view(t).substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("parse failure at line " + std::to_string(lineno) + ": empty key or value");
        const bool known = in_list(physical_keys(), key) || in_list(run_keys(), key) || in_list(scheme_keys(), key);
        if (!known) {
            unknown.push_back(key);
            continue;
        }
        if (!section.empty()) {
            const auto& own = in_list(physical_keys(), key) ? physical_keys()
                            : in_list(run_keys(), key)      ? run_keys()
                                                            : scheme_keys();
            const std::string own_name = (&own == &physical_keys()) ? "physical"
                                       : (&own == &run_keys())      ? "run"
                                                                    : "scheme";
            if (own_name != section)
                throw ConfigError("key '" + key + "' belongs to section [" + own_name + "], found in [" + section + "]");
        }
        if (doc.find(key)) throw ConfigError("duplicate key '" + key + "'");
        doc.entries.emplace_back(key, val);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
    return doc;
}

/// Overrides a document entry (used by `--param k=v`); validates the key name.
inline void set_entry(ConfigDocument& doc, const std::string& key, const std::string& value) {
    auto in_list = [](const std::vector<std::string>& l, const std::string& k) {
        return std::find(l.begin(), l.end(), k) != l.end();
    };
    if (!in_list(physical_keys(), key) && !in_list(run_keys(), key) && !in_list(scheme_keys(), key))
        throw ConfigError("unknown keys: " + key);
    for (auto& [k, v] : doc.entries)
        if (k == key) {
            v = value;
            return;
        }
    doc.entries.emplace_back(key, value);
}

struct Config {
    PhysicalParams phys;
    RunSettings run;
    std::map<std::string, std::string> scheme;  ///< raw scheme-layer switches
};

/// Builds validated records from a parsed document. Every physical key except beta is mandatory.
inline Config config_from_document(const ConfigDocument& doc) {
    Config c;
    std::vector<std::string> missing;
    double* slots[] = {&c.phys.rho_f, &c.phys.mu_f, &c.phys.rho_m, &c.phys.h,
                       &c.phys.mu_m, &c.phys.lambda_m, &c.phys.rho_s, &c.phys.H,
                       &c.phys.mu_s, &c.phys.lambda_s, &c.phys.gamma, &c.phys.R,
                       &c.phys.L, &c.phys.beta};
    const auto& pk = physical_keys();
    for (std::size_t i = 0; i < pk.size(); ++i) {
        const std::string* v = doc.find(pk[i]);
        if (!v) {
            if (pk[i] != "beta") missing.push_back(pk[i]);
            continue;
        }
        *slots[i] = detail::parse_double(pk[i], *v);
    }
    if (!missing.empty()) {
        std::string msg = "missing keys:";
        for (const auto& k : missing) msg += " " + k;
        throw ConfigError(msg);
    }
    auto num = [&](const char* key, double& out) {
        if (const std::string* v = doc.find(key)) out = detail::parse_double(key, *v);
    };
    auto integer = [&](const char* key, int& out) {
        if (const std::string* v = doc.find(key)) out = detail::parse_int(key, *v);
    };
    num("dt", c.run.dt);
    num("t_end", c.run.t_end);
    integer("nz", c.run.nz);
    integer("nr_f", c.run.nr_f);
    integer("nr_s", c.run.nr_s);
    num("p_in", c.run.p_in);
    num("p_out", c.run.p_out);
    num("p_max", c.run.p_max);
    num("t_max", c.run.t_max);
    num("tol", c.run.tol);
    integer("output_every", c.run.output_every);
    if (const std::string* v = doc.find("pressure")) {
        if (*v == "constant") c.run.pressure = PressureKind::Constant;
        else if (*v == "pulse") c.run.pressure = PressureKind::Pulse;
        else throw ConfigError("invalid value for key 'pressure': '" + *v + "' (constant|pulse)");
    }
    if (const std::string* v = doc.find("mode")) {
        if (*v == "full") c.run.mode = SchemeMode::Full;
        else if (*v == "stability") c.run.mode = SchemeMode::Stability;
        else throw ConfigError("invalid value for key 'mode': '" + *v + "' (full|stability)");
    }
    // beta defaults to 1 in full mode and 0 in stability mode
    if (!doc.find("beta")) c.phys.beta = (c.run.mode == SchemeMode::Stability) ? 0.0 : 1.0;
    for (const auto& k : scheme_keys())
        if (const std::string* v = doc.find(k)) c.scheme[k] = *v;
    validate(c.phys);
    validate(c.run);
    return c;
}

inline Config load_config(const std::string& text) { return config_from_document(parse_document(text)); }

/// Writes a document that load_config maps back to identical records.
inline std::string serialize(const PhysicalParams& p, const RunSettings& s) {
    using detail::fmt17;
    std::ostringstream o;
    o << "[physical]\n";
    const double vals[] = {p.rho_f, p.mu_f, p.rho_m, p.h, p.mu_m, p.lambda_m, p.rho_s,
                           p.H, p.mu_s, p.lambda_s, p.gamma, p.R, p.L, p.beta};
    for (std::size_t i = 0; i < physical_keys().size(); ++i)
        o << physical_keys()[i] << " = " << fmt17(vals[i]) << "\n";
    o << "\n[run]\n";
    o << "dt = " << fmt17(s.dt) << "\n";
    o << "t_end = " << fmt17(s.t_end) << "\n";
    o << "nz = " << s.nz << "\n";
    o << "nr_f = " << s.nr_f << "\n";
    o << "nr_s = " << s.nr_s << "\n";
    o << "pressure = " << (s.pressure == PressureKind::Constant ? "constant" : "pulse") << "\n";
    o << "p_in = " << fmt17(s.p_in) << "\n";
    o << "p_out = " << fmt17(s.p_out) << "\n";
    o << "p_max = " << fmt17(s.p_max) << "\n";
    o << "t_max = " << fmt17(s.t_max) << "\n";
    o << "tol = " << fmt17(s.tol) << "\n";
    o << "output_every = " << s.output_every << "\n";
    o << "mode = " << (s.mode == SchemeMode::Stability ? "stability" : "full") << "\n";
    return o.str();
}

/// Full configuration document, scheme switches included.
inline std::string serialize(const Config& c) {
    std::string out = serialize(c.phys, c.run);
    if (!c.scheme.empty()) {
        out += "\n[scheme]\n";
        for (const auto& [k, v] : c.scheme) out += k + " = " + v + "\n";
    }
    return out;
}

}  // namespace fsi
