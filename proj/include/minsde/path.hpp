#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "minsde/drift.hpp"
#include "minsde/grid.hpp"
#include "minsde/rng.hpp"

namespace minsde {

// Discrete trajectory on a uniform grid of [0,1], x(0) = 0, together with
// the Brownian increments that drove it.
struct Path {
    Grid grid;
    std::vector<double> values;  // n_steps + 1 nodes
    std::vector<double> noise;   // n_steps increments

    explicit Path(const Grid& g)
        : grid(g), values(static_cast<std::size_t>(g.n_nodes()), 0.0),
          noise(static_cast<std::size_t>(g.n_steps), 0.0) {}

    double terminal() const { return values.back(); }
};

struct MinRecord {
    double m = 0.0;
    double tau = 0.0;
    bool refined = false;
};

inline void sample_brownian_into(Path& path, RngStream& stream) {
    const int n = path.grid.n_steps;
    const double sdt = std::sqrt(path.grid.dt());
    path.values[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const double db = sdt * stream.normal();
        path.noise[i] = db;
        path.values[i + 1] = path.values[i] + db;
    }
}

inline Path sample_brownian(const Grid& grid, RngStream& stream) {
    Path path(grid);
    sample_brownian_into(path, stream);
    return path;
}

// Euler-Maruyama step x_{i+1} = x_i + b(x_i) dt + dB_i; exact for constant
// drift. With zero drift this reproduces sample_brownian bit for bit.
inline void euler_maruyama_into(Path& path, const DriftSpec& spec, RngStream& stream) {
    const int n = path.grid.n_steps;
    const double dt = path.grid.dt();
    const double sdt = std::sqrt(dt);
    path.values[0] = 0.0;
    double x = 0.0;
    for (int i = 0; i < n; ++i) {
        const double db = sdt * stream.normal();
        path.noise[i] = db;
        x = (x + spec.b(x) * dt) + db;
        path.values[i + 1] = x;
    }
}

inline Path euler_maruyama(const DriftSpec& spec, const Grid& grid, RngStream& stream) {
    Path path(grid);
    euler_maruyama_into(path, spec, stream);
    return path;
}

// Samples the minimum of a Brownian bridge over a step of length dt with
// endpoints a, b, by inverting P(m <= r | a,b) = exp(-2(r-a)(r-b)/dt).
// The result never exceeds min(a,b).
inline double bridge_min_sample(double a, double b, double dt, RngStream& stream) {
    if (!(dt > 0.0)) throw std::domain_error("bridge_min_sample: dt must be > 0");
    const double u = stream.uniform_open_closed();
    const double d = a - b;
    const double m = 0.5 * (a + b - std::sqrt(d * d - 2.0 * dt * std::log(u)));
    const double floor = a < b ? a : b;
    return m < floor ? m : floor;
}

// Minimum of the path. refine=false: smallest grid value, first index wins
// ties, tau at the grid time. refine=true: per-cell bridge minima, global
// minimum over cells, tau at the winning cell's midpoint.
inline MinRecord path_min(const Path& path, RngStream& stream, bool refine) {
    const int n = path.grid.n_steps;
    const std::vector<double>& x = path.values;
    double gm = x[0];
    int gi = 0;
    for (int i = 1; i <= n; ++i) {
        if (x[i] < gm) { gm = x[i]; gi = i; }
    }
    if (!refine) return {gm, path.grid.time(gi), false};

    const double dt = path.grid.dt();
    double best = 0.0;
    int cell = 0;
    for (int i = 0; i < n; ++i) {
        const double a = x[i];
        const double b = x[i + 1];
        const double u = stream.uniform_open_closed();
        const double d = a - b;
        const double q = d * d - 2.0 * dt * std::log(u);
        if (i == 0) {
            const double m = 0.5 * (a + b - std::sqrt(q));
            const double floor = a < b ? a : b;
            best = m < floor ? m : floor;
            continue;
        }
        // improvement test without the sqrt: m_i < best iff sqrt(q) > s,
        // where s = a + b - 2 best; s < 0 means min(a,b) already beats best
        const double s = a + b - 2.0 * best;
        if (s < 0.0 || q > s * s) {
            const double m = 0.5 * (a + b - std::sqrt(q));
            const double floor = a < b ? a : b;
            const double cand = m < floor ? m : floor;
            if (cand < best) { best = cand; cell = i; }
        }
    }
    const double tau = 0.5 * (path.grid.time(cell) + path.grid.time(cell + 1));
    return {best, tau, true};
}

// Per-cell bridge minima, consuming exactly the same draws as the refined
// path_min; used by the derivative tests that need the second-best cell.
inline std::vector<double> bridge_cell_minima(const Path& path, RngStream& stream) {
    const int n = path.grid.n_steps;
    const double dt = path.grid.dt();
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[i] = bridge_min_sample(path.values[i], path.values[i + 1], dt, stream);
    }
    return out;
}

}
