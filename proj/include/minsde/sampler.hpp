#pragma once

#include <cstdint>
#include <vector>

#include "minsde/girsanov.hpp"
#include "minsde/parallel.hpp"
#include "minsde/path.hpp"

namespace minsde {

// Which law a batch of minimum records samples: the SDE law directly
// (weights identically 1), or Brownian paths reweighted by Psi.
enum class PathMeasure { SdeDirect, BrownianWeighted };

struct SimulationPlan {
    DriftSpec spec;
    Grid grid;
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    bool refine = true;
    PathMeasure measure = PathMeasure::BrownianWeighted;
    int workers = 0;
};

// One record per path, in path-index order regardless of worker count.
// Path i draws from stream i; batches only partition the work.
inline std::vector<WeightedMin> simulate_min_records(const SimulationPlan& plan) {
    std::vector<WeightedMin> records(static_cast<std::size_t>(plan.n_paths));
    const Batches batches(plan.n_paths, kBatchCount);
    const int nw = resolve_workers(plan.workers);
    run_batches(batches, nw, [&](int, std::int64_t lo, std::int64_t hi) {
        Path scratch(plan.grid);
        for (std::int64_t i = lo; i < hi; ++i) {
            RngStream stream(plan.seed, static_cast<std::uint64_t>(i));
            WeightedMin rec;
            if (plan.measure == PathMeasure::SdeDirect) {
                euler_maruyama_into(scratch, plan.spec, stream);
                rec.log_weight = 0.0;
            } else {
                sample_brownian_into(scratch, stream);
                rec.log_weight = log_psi(plan.spec, scratch);
            }
            rec.min = path_min(scratch, stream, plan.refine);
            rec.terminal = scratch.terminal();
            records[static_cast<std::size_t>(i)] = rec;
        }
    });
    return records;
}

}
