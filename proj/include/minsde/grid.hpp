#pragma once

#include <stdexcept>

namespace minsde {

// Uniform grid on [0,1]. Times are represented as i/n so that time(0) == 0
// and time(n_steps) == 1 hold exactly.
struct Grid {
    int n_steps;

    explicit Grid(int n) : n_steps(n) {
        if (n < 1) throw std::invalid_argument("Grid: n_steps must be >= 1");
    }

    double dt() const { return 1.0 / n_steps; }
    double time(int i) const { return static_cast<double>(i) / n_steps; }
    int n_nodes() const { return n_steps + 1; }

    bool operator==(const Grid& other) const { return n_steps == other.n_steps; }
    bool operator!=(const Grid& other) const { return n_steps != other.n_steps; }
};

}
