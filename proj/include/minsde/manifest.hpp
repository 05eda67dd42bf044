#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "minsde/config.hpp"
#include "minsde/rng.hpp"
#include "minsde/sha256.hpp"
#include "minsde/version.hpp"

namespace minsde {

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["command"] = command_name(cfg.command);
    j["drift"]["family"] = cfg.drift.family;
    j["drift"]["params"] = cfg.drift.params;
    if (!cfg.drift.table_file.empty()) {
        j["drift"]["table"] = cfg.drift.table_file;
        j["drift"]["sup_b"] = cfg.drift.declared_bounds.sup_b;
        j["drift"]["sup_db"] = cfg.drift.declared_bounds.sup_db;
        j["drift"]["sup_d2b"] = cfg.drift.declared_bounds.sup_d2b;
    }
    j["n_paths"] = cfg.n_paths;
    j["n_steps"] = cfg.n_steps;
    j["r_grid"] = {{"min", cfg.r_min}, {"max", cfg.r_max}, {"count", cfg.r_count}};
    j["delta"] = cfg.delta;
    j["epsilon"] = cfg.epsilon;
    j["seed"] = cfg.seed;
    j["refine"] = cfg.refine;
    j["out"] = cfg.out;
    // workers deliberately excluded: results do not depend on it
    return j;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// One manifest per output file: configuration, seed derivation rule and a
// content hash of the result, so any run can be verified and replayed.
inline std::string write_manifest(const RunConfig& cfg, const std::string& output_file,
                                  double wall_time_s) {
    const nlohmann::json cj = config_to_json(cfg);
    nlohmann::json m;
    m["config"] = cj;
    m["config_hash"] = sha256_hex(cj.dump());
    m["seed"] = cfg.seed;
    m["stream_rule"] = kStreamRule;
    m["software_version"] = kVersion;
    m["wall_time_s"] = wall_time_s;
    m["output"]["file"] = output_file;
    m["output"]["content_hash"] = blob_hash(read_file(output_file));
    const std::string manifest_path = output_file + ".manifest.json";
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + manifest_path);
    out << m.dump(2) << '\n';
    return manifest_path;
}

}
