#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "minsde/drift.hpp"

namespace minsde {

struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(const std::string& k, const std::string& msg)
        : std::runtime_error(k.empty() ? msg : (msg + " (key: " + k + ")")), key(k) {}
};

enum class Command { Density, ValidateGirsanov, ValidateMalliavin, Perimeter, DumpPaths };

inline const char* command_name(Command c) {
    switch (c) {
        case Command::Density: return "density";
        case Command::ValidateGirsanov: return "validate-girsanov";
        case Command::ValidateMalliavin: return "validate-malliavin";
        case Command::Perimeter: return "perimeter";
        case Command::DumpPaths: return "dump-paths";
    }
    return "?";
}

inline Command parse_command(const std::string& s) {
    if (s == "density") return Command::Density;
    if (s == "validate-girsanov") return Command::ValidateGirsanov;
    if (s == "validate-malliavin") return Command::ValidateMalliavin;
    if (s == "perimeter") return Command::Perimeter;
    if (s == "dump-paths") return Command::DumpPaths;
    throw ConfigError("command", "unknown command '" + s + "'");
}

struct DriftConfig {
    std::string family = "zero";
    std::vector<double> params;       // family parameters in declaration order
    std::string table_file;           // custom family: CSV of (eta, b) rows
    DriftBounds declared_bounds;      // custom family only
};

struct RunConfig {
    Command command = Command::Density;
    DriftConfig drift;
    std::int64_t n_paths = 1'000'000;
    int n_steps = 1024;
    double r_min = -2.5;
    double r_max = -0.05;
    int r_count = 40;
    double delta = 0.01;
    double epsilon = 0.02;
    std::uint64_t seed = 42;
    int workers = 0;  // 0: MINSDE_WORKERS env, else hardware concurrency
    bool refine = true;
    std::string out = "out.csv";
};

inline DriftSpec make_drift_spec(const DriftConfig& cfg) {
    auto need = [&](std::size_t n, const char* what) {
        if (cfg.params.size() != n) {
            throw ConfigError("drift", std::string("family '") + cfg.family + "' needs " + what);
        }
    };
    if (cfg.family == "zero") { need(0, "no parameters"); return DriftSpec::zero(); }
    if (cfg.family == "constant") { need(1, "1 parameter (c)"); return DriftSpec::constant(cfg.params[0]); }
    if (cfg.family == "tanh") { need(1, "1 parameter (scale)"); return DriftSpec::tanh(cfg.params[0]); }
    if (cfg.family == "sine") {
        need(2, "2 parameters (amplitude, frequency)");
        return DriftSpec::sine(cfg.params[0], cfg.params[1]);
    }
    if (cfg.family == "custom") {
        if (cfg.table_file.empty()) throw ConfigError("drift.table", "custom drift needs a table file");
        std::ifstream in(cfg.table_file);
        if (!in) throw ConfigError("drift.table", "cannot open table '" + cfg.table_file + "'");
        std::vector<double> knots, values;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream row(line);
            std::string a, b;
            if (!std::getline(row, a, ',') || !std::getline(row, b, ',')) {
                throw ConfigError("drift.table", "table rows must be 'eta,b'");
            }
            knots.push_back(std::stod(a));
            values.push_back(std::stod(b));
        }
        return DriftSpec::custom(std::move(knots), std::move(values), cfg.declared_bounds);
    }
    throw ConfigError("drift.family", "unknown drift family '" + cfg.family + "'");
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key, "not a number: '" + v + "'");
    }
}

inline std::int64_t to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const std::int64_t x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key, "not an integer: '" + v + "'");
    }
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const std::uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key, "not an unsigned integer: '" + v + "'");
    }
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key, "not a boolean: '" + v + "'");
}

}

// Key-value configuration with nested sections:
//
//   command = density
//   n_paths = 1000000
//   [drift]
//   family = tanh
//   scale = 1.0
//   [r_grid]
//   min = -2.5
//   max = -0.05
//   count = 40
//   [bands]
//   delta = 0.01
//   epsilon = 0.02
//
// Unknown keys are errors; command-line flags override file values.
inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string section;
    std::string line;
    int lineno = 0;
    std::vector<std::pair<std::string, std::string>> drift_kv;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError("", "malformed section at line " + std::to_string(lineno));
            section = detail::trim(t.substr(1, t.size() - 2));
            if (section != "drift" && section != "r_grid" && section != "bands") {
                throw ConfigError(section, "unknown section");
            }
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("", "expected 'key = value' at line " + std::to_string(lineno));
        }
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (section.empty()) {
            if (key == "command") cfg.command = parse_command(value);
            else if (key == "n_paths") cfg.n_paths = detail::to_int(key, value);
            else if (key == "n_steps") cfg.n_steps = static_cast<int>(detail::to_int(key, value));
            else if (key == "seed") cfg.seed = detail::to_uint(key, value);
            else if (key == "workers") cfg.workers = static_cast<int>(detail::to_int(key, value));
            else if (key == "refine") cfg.refine = detail::to_bool(key, value);
            else if (key == "out") cfg.out = value;
            else throw ConfigError(key, "unknown key");
        } else if (section == "drift") {
            if (key == "family") cfg.drift.family = value;
            else if (key == "table") cfg.drift.table_file = value;
            else if (key == "sup_b") cfg.drift.declared_bounds.sup_b = detail::to_double(key, value);
            else if (key == "sup_db") cfg.drift.declared_bounds.sup_db = detail::to_double(key, value);
            else if (key == "sup_d2b") cfg.drift.declared_bounds.sup_d2b = detail::to_double(key, value);
            else if (key == "c" || key == "scale" || key == "amplitude" || key == "frequency") {
                drift_kv.emplace_back(key, value);
            } else {
                throw ConfigError("drift." + key, "unknown key");
            }
        } else if (section == "r_grid") {
            if (key == "min") cfg.r_min = detail::to_double(key, value);
            else if (key == "max") cfg.r_max = detail::to_double(key, value);
            else if (key == "count") cfg.r_count = static_cast<int>(detail::to_int(key, value));
            else throw ConfigError("r_grid." + key, "unknown key");
        } else {  // bands
            if (key == "delta") cfg.delta = detail::to_double(key, value);
            else if (key == "epsilon") cfg.epsilon = detail::to_double(key, value);
            else throw ConfigError("bands." + key, "unknown key");
        }
    }
    // family parameters, in the family's declaration order
    auto take = [&](const char* name) -> bool {
        for (auto& [k, v] : drift_kv) {
            if (k == name) {
                cfg.drift.params.push_back(detail::to_double(k, v));
                return true;
            }
        }
        return false;
    };
    if (cfg.drift.family == "constant") take("c");
    else if (cfg.drift.family == "tanh") take("scale");
    else if (cfg.drift.family == "sine") { take("amplitude"); take("frequency"); }
    for (auto& [k, v] : drift_kv) {
        const bool used = (cfg.drift.family == "constant" && k == "c") ||
                          (cfg.drift.family == "tanh" && k == "scale") ||
                          (cfg.drift.family == "sine" && (k == "amplitude" || k == "frequency"));
        if (!used) throw ConfigError("drift." + k, "parameter not valid for family '" + cfg.drift.family + "'");
        (void)v;
    }
    return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    return parse_config(in);
}

inline bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

// Enforces the cross-field invariants; throws ConfigError naming the
// offending key.
inline void validate(const RunConfig& cfg) {
    if (cfg.command != Command::DumpPaths && cfg.n_paths < 1000) {
        throw ConfigError("n_paths", "estimate commands need n_paths >= 1000");
    }
    if (cfg.n_paths < 1) throw ConfigError("n_paths", "must be >= 1");
    if (!is_power_of_two(cfg.n_steps)) {
        throw ConfigError("n_steps", "must be a power of two (nested refinement)");
    }
    if (!(cfg.r_max < 0.0)) {
        throw ConfigError("r_max", "levels must be negative: the law of the minimum is supported in (-inf, 0]");
    }
    if (cfg.r_count < 1) throw ConfigError("r_count", "must be >= 1");
    if (cfg.r_count > 1 && !(cfg.r_min < cfg.r_max)) {
        throw ConfigError("r_min", "must be < r_max");
    }
    if (!(cfg.delta > 0.0)) throw ConfigError("delta", "must be > 0");
    if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon", "must be > 0");
    if (cfg.workers < 0) throw ConfigError("workers", "must be >= 0");
    if (cfg.out.empty()) throw ConfigError("out", "output path must not be empty");
    make_drift_spec(cfg.drift);  // family/parameter/table errors surface here
}

}
