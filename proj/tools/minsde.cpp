#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "minsde/minsde.hpp"

namespace {

void print_error_record(const char* kind, const std::string& key, const std::string& message) {
    nlohmann::json err;
    err["error"] = kind;
    if (!key.empty()) err["key"] = key;
    err["message"] = message;
    std::fprintf(stderr, "%s\n", err.dump().c_str());
}

}

int main(int argc, char** argv) {
    CLI::App app{"minsde: law of the running minimum of a drifted Brownian path"};
    app.set_version_flag("--version", minsde::kVersion);

    std::string config_file, command, drift_family, drift_table, out;
    std::vector<double> drift_params;
    std::int64_t n_paths = 0;
    int n_steps = 0, r_count = 0, workers = -1;
    double r_min = 0, r_max = 0, delta = 0, epsilon = 0;
    double sup_b = 0, sup_db = 0, sup_d2b = 0;
    std::uint64_t seed = 0;
    bool refine = true;

    app.add_option("--config", config_file, "configuration file (key = value, nested sections)");
    auto* o_command = app.add_option("--command", command,
                                     "density | validate-girsanov | validate-malliavin | "
                                     "perimeter | dump-paths");
    auto* o_drift = app.add_option("--drift", drift_family, "zero | constant | tanh | sine | custom");
    auto* o_params = app.add_option("--drift-param", drift_params,
                                    "drift parameters in family order (repeatable)");
    auto* o_table = app.add_option("--drift-table", drift_table, "custom drift table (eta,b rows)");
    auto* o_supb = app.add_option("--drift-sup-b", sup_b, "declared sup|b| (custom)");
    auto* o_supdb = app.add_option("--drift-sup-db", sup_db, "declared sup|b'| (custom)");
    auto* o_supd2b = app.add_option("--drift-sup-d2b", sup_d2b, "declared sup|b''| (custom)");
    auto* o_npaths = app.add_option("--n-paths", n_paths, "number of sample paths");
    auto* o_nsteps = app.add_option("--n-steps", n_steps, "grid steps (power of two)");
    auto* o_rmin = app.add_option("--r-min", r_min, "lowest level of the r grid");
    auto* o_rmax = app.add_option("--r-max", r_max, "highest level of the r grid (< 0)");
    auto* o_rcount = app.add_option("--r-count", r_count, "number of r levels");
    auto* o_delta = app.add_option("--delta", delta, "differencing bandwidth");
    auto* o_eps = app.add_option("--epsilon", epsilon, "band width for smoothed estimates");
    auto* o_seed = app.add_option("--seed", seed, "master seed");
    auto* o_workers = app.add_option("--workers", workers,
                                     "worker threads (default: MINSDE_WORKERS or hardware)");
    auto* o_refine = app.add_flag("--refine,!--no-refine", refine,
                                  "bridge-refined minima (default on)");
    auto* o_out = app.add_option("--out", out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    minsde::RunConfig cfg;
    try {
        if (!config_file.empty()) cfg = minsde::parse_config_file(config_file);
        if (*o_command) cfg.command = minsde::parse_command(command);
        if (*o_drift) { cfg.drift.family = drift_family; cfg.drift.params.clear(); }
        if (*o_params) cfg.drift.params = drift_params;
        if (*o_table) cfg.drift.table_file = drift_table;
        if (*o_supb) cfg.drift.declared_bounds.sup_b = sup_b;
        if (*o_supdb) cfg.drift.declared_bounds.sup_db = sup_db;
        if (*o_supd2b) cfg.drift.declared_bounds.sup_d2b = sup_d2b;
        if (*o_npaths) cfg.n_paths = n_paths;
        if (*o_nsteps) cfg.n_steps = n_steps;
        if (*o_rmin) cfg.r_min = r_min;
        if (*o_rmax) cfg.r_max = r_max;
        if (*o_rcount) cfg.r_count = r_count;
        if (*o_delta) cfg.delta = delta;
        if (*o_eps) cfg.epsilon = epsilon;
        if (*o_seed) cfg.seed = seed;
        if (*o_workers) cfg.workers = workers;
        if (*o_refine) cfg.refine = refine;
        if (*o_out) cfg.out = out;
        minsde::validate(cfg);
    } catch (const minsde::ConfigError& e) {
        print_error_record("config", e.key, e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error_record("config", "", e.what());
        return 2;
    }

    try {
        const minsde::RunResult res = minsde::run(cfg);
        if (res.exit_code != 0) {
            print_error_record("numeric", "", res.message);
        }
        return res.exit_code;
    } catch (const minsde::NumericError& e) {
        print_error_record("numeric", "", e.what());
        return 3;
    } catch (const std::exception& e) {
        print_error_record("runtime", "", e.what());
        return 3;
    }
}
