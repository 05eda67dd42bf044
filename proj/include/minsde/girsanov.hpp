#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "minsde/drift.hpp"
#include "minsde/parallel.hpp"
#include "minsde/path.hpp"
#include "minsde/stats.hpp"

namespace minsde {

// Minimum, argmin, log-weight and terminal value of one path; the record an
// estimator needs, nothing else.
struct WeightedMin {
    MinRecord min;
    double log_weight = 0.0;  // log Psi(x); 0 under the sampled SDE law
    double terminal = 0.0;    // x(1)
};

namespace detail {

// Trapezoid sums of b^2 and b' along the path nodes, in one pass.
struct PathDriftIntegrals {
    double int_b2 = 0.0;
    double int_db = 0.0;
};

inline PathDriftIntegrals drift_integrals(const DriftSpec& spec, const Path& path) {
    const int n = path.grid.n_steps;
    double s2 = 0.0, s1 = 0.0;
    for (int i = 0; i <= n; ++i) {
        const DriftTriple t = spec.triple(path.values[i]);
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        s2 += w * t.b * t.b;
        s1 += w * t.db;
    }
    const double dt = path.grid.dt();
    return {dt * s2, dt * s1};
}

}

// log Psi(x) = v(x(1)) - 1/2 int b^2(x) - 1/2 int b'(x), trapezoid rule for
// the time integrals.
inline double log_psi(const DriftSpec& spec, const Path& path) {
    const auto ints = detail::drift_integrals(spec, path);
    return spec.potential(path.terminal()) - 0.5 * ints.int_b2 - 0.5 * ints.int_db;
}

// log q(1) = -1/2 int b^2(x) - int b(x) dB with the left-point (Ito) sum for
// the stochastic integral. Midpoint evaluation would break the identity
// checked by check_prop21.
inline double log_q1_ito(const DriftSpec& spec, const Path& path) {
    const int n = path.grid.n_steps;
    if (static_cast<int>(path.noise.size()) != n) {
        throw std::invalid_argument("log_q1_ito: path carries no driving noise");
    }
    double s2 = 0.0, sto = 0.0;
    for (int i = 0; i < n; ++i) {
        const double b = spec.b(path.values[i]);
        sto += b * path.noise[i];
        const double w = (i == 0) ? 0.5 : 1.0;
        s2 += w * b * b;
    }
    const double bn = spec.b(path.values[n]);
    s2 += 0.5 * bn * bn;
    return -0.5 * path.grid.dt() * s2 - sto;
}

// Closed form of log q(1); the exact negative of log_psi in the shared
// discretization.
inline double log_q1_closed(const DriftSpec& spec, const Path& path) {
    return -log_psi(spec, path);
}

struct ConvergenceReport {
    std::vector<double> dt;
    std::vector<double> rms;
    double final_rms = 0.0;
    double threshold = 0.0;
    bool monotone = false;
    bool pass = false;
};

// RMS of |log_q1_ito + log_psi| over SDE paths for each grid; the residual
// is the discretization error of the Ito identity and must shrink under
// refinement. Grids must be nested (each a refinement by a factor >= 2).
inline ConvergenceReport check_prop21(const DriftSpec& spec, std::int64_t n_paths,
                                      std::span<const Grid> grids, std::uint64_t seed,
                                      int workers = 0) {
    if (grids.empty()) throw std::invalid_argument("check_prop21: no grids");
    for (std::size_t k = 1; k < grids.size(); ++k) {
        const int prev = grids[k - 1].n_steps, cur = grids[k].n_steps;
        if (cur < 2 * prev || cur % prev != 0) {
            throw std::invalid_argument("check_prop21: grids must refine by a factor >= 2");
        }
    }
    ConvergenceReport rep;
    const int nw = resolve_workers(workers);
    for (const Grid& grid : grids) {
        const Batches batches(n_paths, kBatchCount);
        std::vector<double> sumsq(static_cast<std::size_t>(batches.count), 0.0);
        run_batches(batches, nw, [&](int b, std::int64_t lo, std::int64_t hi) {
            Path scratch(grid);
            double acc = 0.0;
            for (std::int64_t i = lo; i < hi; ++i) {
                RngStream stream(seed, static_cast<std::uint64_t>(i));
                euler_maruyama_into(scratch, spec, stream);
                const double r = log_q1_ito(spec, scratch) + log_psi(spec, scratch);
                acc += r * r;
            }
            sumsq[static_cast<std::size_t>(b)] = acc;
        });
        double total = 0.0;
        for (double s : sumsq) total += s;
        rep.dt.push_back(grid.dt());
        rep.rms.push_back(std::sqrt(total / static_cast<double>(n_paths)));
    }
    rep.final_rms = rep.rms.back();
    const DriftBounds& bd = spec.bounds();
    rep.threshold = 0.01 * (1.0 + bd.sup_b * bd.sup_db);
    rep.monotone = true;
    // small absolute slack so sequences already at the rounding floor pass
    for (std::size_t k = 1; k < rep.rms.size(); ++k) {
        if (rep.rms[k] > rep.rms[k - 1] + 1e-9) rep.monotone = false;
    }
    rep.pass = rep.monotone && rep.final_rms < rep.threshold;
    return rep;
}

// Monte Carlo mean of Psi over Brownian paths; 1 in the continuum. Weights
// are carried in log space and exponentiated against the running maximum, so
// batches combine without overflow.
inline MeanSE weight_normalization(const DriftSpec& spec, std::int64_t n_paths, const Grid& grid,
                                   std::uint64_t seed, int workers = 0) {
    const Batches batches(n_paths, kBatchCount);
    struct BatchSums {
        double shift = 0.0;  // max log-weight in the batch
        double s1 = 0.0;     // sum exp(lw - shift)
        double s2 = 0.0;     // sum exp(2(lw - shift))
    };
    std::vector<BatchSums> partial(static_cast<std::size_t>(batches.count));
    const int nw = resolve_workers(workers);
    run_batches(batches, nw, [&](int b, std::int64_t lo, std::int64_t hi) {
        Path scratch(grid);
        std::vector<double> lw(static_cast<std::size_t>(hi - lo));
        for (std::int64_t i = lo; i < hi; ++i) {
            RngStream stream(seed, static_cast<std::uint64_t>(i));
            sample_brownian_into(scratch, stream);
            lw[static_cast<std::size_t>(i - lo)] = log_psi(spec, scratch);
        }
        BatchSums sums;
        for (double v : lw) sums.shift = std::max(sums.shift, v);
        for (double v : lw) {
            const double e = std::exp(v - sums.shift);
            sums.s1 += e;
            sums.s2 += e * e;
        }
        partial[static_cast<std::size_t>(b)] = sums;
    });
    double shift = 0.0;
    for (const auto& p : partial) shift = std::max(shift, p.shift);
    double s1 = 0.0, s2 = 0.0;
    for (const auto& p : partial) {
        const double f = std::exp(p.shift - shift);
        s1 += f * p.s1;
        s2 += f * f * p.s2;
    }
    const double n = static_cast<double>(n_paths);
    const double scale = std::exp(shift);
    const double mean = scale * (s1 / n);
    const double var = scale * scale * std::max(0.0, s2 / n - (s1 / n) * (s1 / n));
    return {mean, std::sqrt(var / n)};
}

}
