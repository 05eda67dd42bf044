#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "minsde/config.hpp"
#include "minsde/csv.hpp"
#include "minsde/malliavin.hpp"
#include "minsde/manifest.hpp"
#include "minsde/minlaw.hpp"
#include "minsde/sampler.hpp"

namespace minsde {

struct RunResult {
    int exit_code = 0;  // 0 ok, 2 config error, 3 numeric failure
    std::string message;
    std::vector<std::string> output_files;  // result files, each with a manifest
};

namespace detail {

inline void write_density_rows(CsvWriter& csv, const DensityEstimate& est) {
    for (std::size_t i = 0; i < est.r.size(); ++i) {
        csv.field(est.r[i])
            .field(est.f[i])
            .field(est.se_f[i])
            .field(est.cdf[i])
            .field(est.se_cdf[i])
            .field(est.meta.estimator)
            .field(est.meta.n_paths)
            .field(est.meta.dt)
            .field(est.meta.seed);
        csv.end_row();
    }
}

inline RunResult finish(const RunConfig& cfg, CsvWriter& csv,
                        std::chrono::steady_clock::time_point t0, RunResult result) {
    csv.close();
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(cfg, csv.path(), wall);
    result.output_files.push_back(csv.path());
    return result;
}

}

// Executes one validated configuration end to end: dispatches to the module
// operations, writes one CSV result plus its manifest.
inline RunResult run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const DriftSpec spec = make_drift_spec(cfg.drift);
    const Grid grid(cfg.n_steps);
    RunResult result;

    switch (cfg.command) {
        case Command::Density: {
            const auto r_grid = make_r_grid(cfg.r_min, cfg.r_max, cfg.r_count);
            SimulationPlan direct_plan{spec, grid, cfg.n_paths, cfg.seed, cfg.refine,
                                       PathMeasure::SdeDirect, cfg.workers};
            const auto direct_records = simulate_min_records(direct_plan);
            SimulationPlan weighted_plan = direct_plan;
            weighted_plan.measure = PathMeasure::BrownianWeighted;
            const auto weighted_records = simulate_min_records(weighted_plan);

            EstimateMeta meta{"direct", cfg.n_paths, grid.dt(), cfg.seed, spec.description(),
                              0.0, false};
            const auto direct = estimate_from_records(direct_records, r_grid, cfg.delta, true, meta);
            meta.estimator = "weighted";
            const auto weighted =
                estimate_from_records(weighted_records, r_grid, cfg.delta, true, meta);

            // third route: survival functional differencing on the same
            // weighted batch
            meta.estimator = "survival";
            auto survival = estimate_from_records(weighted_records, r_grid, cfg.delta, true, meta);
            const auto sd = survival_density_from_records(weighted_records, r_grid, cfg.delta);
            survival.f = sd.f;
            survival.se_f = sd.se;

            CsvWriter csv(cfg.out);
            csv.header("r,f,stderr_f,cdf,stderr_cdf,estimator,n_paths,dt,seed");
            detail::write_density_rows(csv, direct);
            detail::write_density_rows(csv, weighted);
            detail::write_density_rows(csv, survival);
            return detail::finish(cfg, csv, t0, std::move(result));
        }

        case Command::ValidateGirsanov: {
            std::vector<Grid> grids;
            for (int shift = 6; shift >= 0; shift -= 2) {
                const int n = cfg.n_steps >> shift;
                if (n >= 16) grids.emplace_back(n);
            }
            if (grids.size() < 2) {
                throw ConfigError("n_steps", "validate-girsanov needs n_steps >= 64");
            }
            const auto report = check_prop21(spec, cfg.n_paths, grids, cfg.seed, cfg.workers);
            const MeanSE norm =
                weight_normalization(spec, cfg.n_paths, grids.back(), cfg.seed, cfg.workers);
            CsvWriter csv(cfg.out);
            csv.header("check,dt,rms,mean,stderr");
            for (std::size_t k = 0; k < report.dt.size(); ++k) {
                csv.field("prop21").field(report.dt[k]).field(report.rms[k]).blank().blank();
                csv.end_row();
            }
            csv.field("normalization").blank().blank().field(norm.mean).field(norm.se);
            csv.end_row();
            if (!report.pass) {
                result.message = "prop21 convergence report failed";
            }
            return detail::finish(cfg, csv, t0, std::move(result));
        }

        case Command::ValidateMalliavin: {
            const auto fields = standard_unit_fields(grid);
            CsvWriter csv(cfg.out);
            csv.header("field,lhs,rhs,residual,stderr");
            bool degenerate = false;
            for (const auto& field : fields) {
                const IbpResult res = ibp_residual(spec, field, cfg.r_min, cfg.epsilon,
                                                   cfg.n_paths, grid, cfg.seed, cfg.refine,
                                                   cfg.workers);
                degenerate = degenerate || res.degenerate;
                csv.field(field.id)
                    .field(res.lhs)
                    .field(res.rhs)
                    .field(res.residual)
                    .field(res.se);
                csv.end_row();
            }
            auto out = detail::finish(cfg, csv, t0, std::move(result));
            if (degenerate) {
                out.exit_code = 3;
                out.message = "degenerate band: no minima in [r, r+epsilon]";
            }
            return out;
        }

        case Command::Perimeter: {
            const auto fields = standard_unit_fields(grid);
            const PerimeterReport rep =
                perimeter_bound_check(spec, cfg.r_min, fields, cfg.epsilon, cfg.n_paths, grid,
                                      cfg.seed, cfg.refine, cfg.workers);
            CsvWriter csv(cfg.out);
            csv.header("field,value,stderr,l,l_stderr,within");
            for (const auto& f : rep.fields) {
                csv.field(f.id).field(f.value).field(f.se).field(rep.l).field(rep.l_se)
                    .field(f.within ? "1" : "0");
                csv.end_row();
            }
            csv.field("max_abs").field(rep.max_abs).blank().field(rep.l).field(rep.l_se).blank();
            csv.end_row();
            auto out = detail::finish(cfg, csv, t0, std::move(result));
            if (rep.degenerate) {
                out.exit_code = 3;
                out.message = "degenerate band: no minima in [r, r+epsilon]";
            }
            return out;
        }

        case Command::DumpPaths: {
            CsvWriter csv(cfg.out);
            csv.header("path,t,x,dB");
            Path scratch(grid);
            for (std::int64_t p = 0; p < cfg.n_paths; ++p) {
                RngStream stream(cfg.seed, static_cast<std::uint64_t>(p));
                euler_maruyama_into(scratch, spec, stream);
                for (int i = 0; i <= grid.n_steps; ++i) {
                    csv.field(p).field(grid.time(i)).field(scratch.values[static_cast<std::size_t>(i)]);
                    if (i < grid.n_steps) {
                        csv.field(scratch.noise[static_cast<std::size_t>(i)]);
                    } else {
                        csv.blank();
                    }
                    csv.end_row();
                }
            }
            return detail::finish(cfg, csv, t0, std::move(result));
        }
    }
    result.exit_code = 2;
    result.message = "unknown command";
    return result;
}

}
