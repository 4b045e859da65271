#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dcl/cart_pendulum.hpp"
#include "dcl/controlled.hpp"
#include "dcl/types.hpp"

namespace dcl {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class SimulationMode { closed_loop_discrete, controlled_lagrangian_side, linearized, mpc, unforced };

inline const char* to_string(SimulationMode m) {
    switch (m) {
        case SimulationMode::closed_loop_discrete: return "closed_loop_discrete";
        case SimulationMode::controlled_lagrangian_side: return "controlled_lagrangian_side";
        case SimulationMode::linearized: return "linearized";
        case SimulationMode::mpc: return "mpc";
        default: return "unforced";
    }
}

/// Fully-resolved experiment description parsed from a flat `key = value` file.
struct SimulationSpec {
    CartPendulumParams params;
    Gains gains;
    double h = 0.05;
    long steps = 1000;
    VelocityState initial{{0.1, 0.0}, 0.0, 0.0};
    SimulationMode mode = SimulationMode::closed_loop_discrete;
    double T_f = 30.0;          // mpc mode
    int plant_substeps = 50;    // mpc mode
    bool realtime_mode = false; // mpc mode
    bool assert_stable = false; // stability subcommand: exit nonzero if Unstable
    std::string out_dir = ".";
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, int line) {
    // Accept "pi/9"-style values for the incline angle.
    if (v == "pi") return M_PI;
    if (v.rfind("pi/", 0) == 0) {
        const double denom = parse_double(v.substr(3), line);
        return M_PI / denom;
    }
    std::size_t pos = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("TypeError: line " + std::to_string(line) + ": not a number: '" + v + "'");
    }
    if (pos != v.size()) {
        throw ConfigError("TypeError: line " + std::to_string(line) + ": trailing characters in '" + v + "'");
    }
    return d;
}

inline bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("TypeError: line " + std::to_string(line) + ": not a boolean: '" + v + "'");
}

inline long parse_long(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const long n = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ConfigError("TypeError: line " + std::to_string(line) + ": not an integer: '" + v + "'");
    }
}

}  // namespace detail

/// Parse the line-oriented `key = value` configuration format. `#` starts a
/// comment; omitted physical keys keep the reference-experiment defaults.
inline SimulationSpec parse_config(const std::string& text) {
    SimulationSpec spec;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("MissingRequired: line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            throw ConfigError("MissingRequired: line " + std::to_string(lineno) + ": empty key or value");
        }
        if (key == "m") spec.params.m = detail::parse_double(val, lineno);
        else if (key == "M") spec.params.M = detail::parse_double(val, lineno);
        else if (key == "l") spec.params.l = detail::parse_double(val, lineno);
        else if (key == "psi") spec.params.psi = detail::parse_double(val, lineno);
        else if (key == "g") spec.params.g = detail::parse_double(val, lineno);
        else if (key == "h") spec.h = detail::parse_double(val, lineno);
        else if (key == "steps") spec.steps = detail::parse_long(val, lineno);
        else if (key == "sigma") spec.gains.sigma = detail::parse_double(val, lineno);
        else if (key == "rho") spec.gains.rho = detail::parse_double(val, lineno);
        else if (key == "c") spec.gains.veps.c = detail::parse_double(val, lineno);
        else if (key == "D") spec.gains.D = detail::parse_double(val, lineno);
        else if (key == "phi_e") spec.gains.phi_e = detail::parse_double(val, lineno);
        else if (key == "s_e") spec.gains.s_e = detail::parse_double(val, lineno);
        else if (key == "phi0") spec.initial.q.phi = detail::parse_double(val, lineno);
        else if (key == "s0") spec.initial.q.s = detail::parse_double(val, lineno);
        else if (key == "phidot0") spec.initial.phidot = detail::parse_double(val, lineno);
        else if (key == "sdot0") spec.initial.sdot = detail::parse_double(val, lineno);
        else if (key == "T_f") spec.T_f = detail::parse_double(val, lineno);
        else if (key == "plant_substeps") spec.plant_substeps = static_cast<int>(detail::parse_long(val, lineno));
        else if (key == "realtime_mode") spec.realtime_mode = detail::parse_bool(val, lineno);
        else if (key == "assert_stable") spec.assert_stable = detail::parse_bool(val, lineno);
        else if (key == "out_dir") spec.out_dir = val;
        else if (key == "mode") {
            if (val == "closed_loop_discrete") spec.mode = SimulationMode::closed_loop_discrete;
            else if (val == "controlled_lagrangian_side") spec.mode = SimulationMode::controlled_lagrangian_side;
            else if (val == "linearized") spec.mode = SimulationMode::linearized;
            else if (val == "mpc") spec.mode = SimulationMode::mpc;
            else if (val == "unforced") spec.mode = SimulationMode::unforced;
            else throw ConfigError("TypeError: line " + std::to_string(lineno) + ": unknown mode '" + val + "'");
        } else {
            throw ConfigError("UnknownKey: line " + std::to_string(lineno) + ": '" + key + "'");
        }
    }
    if (spec.steps < 1) throw ConfigError("TypeError: steps must be >= 1");
    if (spec.h <= 0.0) throw ConfigError("TypeError: h must be > 0");
    if (!spec.params.valid()) throw ConfigError("TypeError: invalid physical parameters");
    return spec;
}

namespace detail {
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

/// Render a spec back to the config format (parse_config(render(spec)) == spec).
inline std::string render(const SimulationSpec& spec) {
    std::ostringstream out;
    using detail::fmt17;
    out << "m = " << fmt17(spec.params.m) << "\n";
    out << "M = " << fmt17(spec.params.M) << "\n";
    out << "l = " << fmt17(spec.params.l) << "\n";
    out << "psi = " << fmt17(spec.params.psi) << "\n";
    out << "g = " << fmt17(spec.params.g) << "\n";
    out << "h = " << fmt17(spec.h) << "\n";
    out << "steps = " << spec.steps << "\n";
    out << "sigma = " << fmt17(spec.gains.sigma) << "\n";
    out << "rho = " << fmt17(spec.gains.rho) << "\n";
    out << "c = " << fmt17(spec.gains.veps.c) << "\n";
    out << "D = " << fmt17(spec.gains.D) << "\n";
    out << "phi_e = " << fmt17(spec.gains.phi_e) << "\n";
    out << "s_e = " << fmt17(spec.gains.s_e) << "\n";
    out << "phi0 = " << fmt17(spec.initial.q.phi) << "\n";
    out << "s0 = " << fmt17(spec.initial.q.s) << "\n";
    out << "phidot0 = " << fmt17(spec.initial.phidot) << "\n";
    out << "sdot0 = " << fmt17(spec.initial.sdot) << "\n";
    out << "T_f = " << fmt17(spec.T_f) << "\n";
    out << "plant_substeps = " << spec.plant_substeps << "\n";
    out << "realtime_mode = " << (spec.realtime_mode ? "true" : "false") << "\n";
    out << "assert_stable = " << (spec.assert_stable ? "true" : "false") << "\n";
    out << "mode = " << to_string(spec.mode) << "\n";
    return out.str();
}

}  // namespace dcl
