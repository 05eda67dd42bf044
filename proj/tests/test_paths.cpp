#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "minsde/path.hpp"
#include "support/oracles.hpp"

using minsde::DriftSpec;
using minsde::Grid;
using minsde::MinRecord;
using minsde::Path;
using minsde::RngStream;

TEST(PathBrownian, StartsAtZeroAndShapes) {
    const Grid grid(64);
    RngStream s(1, 0);
    const Path p = minsde::sample_brownian(grid, s);
    EXPECT_EQ(p.values.size(), 65u);
    EXPECT_EQ(p.noise.size(), 64u);
    EXPECT_EQ(p.values[0], 0.0);
}

TEST(PathBrownian, TerminalVarianceAndCovariance) {
    const Grid grid(64);
    const int n = 100000;
    double var = 0.0, cov = 0.0;
    Path scratch(grid);
    for (int i = 0; i < n; ++i) {
        RngStream s(7, static_cast<std::uint64_t>(i));
        minsde::sample_brownian_into(scratch, s);
        const double x1 = scratch.values[64];
        const double xh = scratch.values[32];
        var += x1 * x1;
        cov += xh * x1;
    }
    // Var x(1) = 1 and Cov(x(1/2), x(1)) = min{1/2, 1} = 1/2
    EXPECT_NEAR(var / n, 1.0, 0.02);
    EXPECT_NEAR(cov / n, 0.5, 0.02);
}

TEST(PathEuler, ZeroDriftIsBrownianBitForBit) {
    const Grid grid(128);
    RngStream s1(99, 5), s2(99, 5);
    const Path bm = minsde::sample_brownian(grid, s1);
    const Path em = minsde::euler_maruyama(DriftSpec::zero(), grid, s2);
    for (std::size_t i = 0; i < bm.values.size(); ++i) EXPECT_EQ(bm.values[i], em.values[i]);
    for (std::size_t i = 0; i < bm.noise.size(); ++i) EXPECT_EQ(bm.noise[i], em.noise[i]);
}

TEST(PathEuler, ConstantDriftIsExact) {
    const Grid grid(256);
    RngStream s(3, 2);
    const double c = 0.7;
    const Path p = minsde::euler_maruyama(DriftSpec::constant(c), grid, s);
    double acc = 0.0;
    for (int i = 0; i < grid.n_steps; ++i) {
        acc += p.noise[static_cast<std::size_t>(i)];
        EXPECT_NEAR(p.values[static_cast<std::size_t>(i) + 1], c * grid.time(i + 1) + acc, 1e-12);
    }
}

TEST(PathEuler, TanhMeanMatchesFinerGrid) {
    // weak-error sanity at modest budget; the full-budget version runs in
    // the acceptance suite
    const DriftSpec spec = DriftSpec::tanh(1.0);
    auto mean_terminal = [&](int n_steps, int n_paths, std::uint64_t seed) {
        const Grid grid(n_steps);
        Path scratch(grid);
        double acc = 0.0;
        for (int i = 0; i < n_paths; ++i) {
            RngStream s(seed, static_cast<std::uint64_t>(i));
            minsde::euler_maruyama_into(scratch, spec, s);
            acc += scratch.terminal();
        }
        return acc / n_paths;
    };
    const double coarse = mean_terminal(256, 40000, 11);
    const double fine = mean_terminal(4096, 40000, 12);
    EXPECT_NEAR(coarse, fine, 3.0 * std::sqrt(2.0 / 40000.0));
}

TEST(BridgeMin, NeverExceedsEndpoints) {
    RngStream s(5, 0);
    for (int i = 0; i < 20000; ++i) {
        const double a = s.normal(), b = s.normal();
        const double m = minsde::bridge_min_sample(a, b, 0.01, s);
        EXPECT_LE(m, std::min(a, b));
    }
    const double m = minsde::bridge_min_sample(0.3, 0.3, 0.5, s);
    EXPECT_LE(m, 0.3);
}

TEST(BridgeMin, MatchesConditionalLaw) {
    // P(m <= -0.5 | a=b=0, dt=1) = exp(-1/2)
    RngStream s(17, 0);
    const int n = 1000000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        if (minsde::bridge_min_sample(0.0, 0.0, 1.0, s) <= -0.5) ++hits;
    }
    EXPECT_NEAR(static_cast<double>(hits) / n, 0.60653065971263342, 0.002);
}

TEST(BridgeMin, DegenerateAsDtVanishes) {
    RngStream s(23, 0);
    for (int i = 0; i < 1000; ++i) {
        const double m = minsde::bridge_min_sample(0.4, -0.2, 1e-12, s);
        EXPECT_NEAR(m, -0.2, 1e-5);
    }
}

TEST(BridgeMin, RejectsNonpositiveDt) {
    RngStream s(1, 0);
    EXPECT_THROW(minsde::bridge_min_sample(0.0, 0.0, 0.0, s), std::domain_error);
    EXPECT_THROW(minsde::bridge_min_sample(0.0, 0.0, -1.0, s), std::domain_error);
}

TEST(PathMin, GridMinOfMonotonePath) {
    const Grid grid(8);
    Path p(grid);
    for (int i = 0; i <= 8; ++i) p.values[static_cast<std::size_t>(i)] = 0.1 * i;
    RngStream s(1, 0);
    const MinRecord rec = minsde::path_min(p, s, false);
    EXPECT_EQ(rec.m, 0.0);
    EXPECT_EQ(rec.tau, 0.0);
    EXPECT_FALSE(rec.refined);
}

TEST(PathMin, FirstArgminWinsTies) {
    const Grid grid(4);
    Path p(grid);
    p.values = {0.0, -1.0, 0.5, -1.0, 0.2};
    RngStream s(1, 0);
    const MinRecord rec = minsde::path_min(p, s, false);
    EXPECT_EQ(rec.tau, grid.time(1));
}

TEST(PathMin, RefinedDominatesGridMin) {
    const Grid grid(64);
    Path scratch(grid);
    for (int i = 0; i < 2000; ++i) {
        RngStream s(31, static_cast<std::uint64_t>(i));
        minsde::sample_brownian_into(scratch, s);
        RngStream for_grid = s;
        const MinRecord g = minsde::path_min(scratch, for_grid, false);
        const MinRecord r = minsde::path_min(scratch, s, true);
        EXPECT_LE(r.m, g.m);
        EXPECT_LE(r.m, 0.0);
        EXPECT_GE(r.tau, 0.0);
        EXPECT_LE(r.tau, 1.0);
        EXPECT_TRUE(r.refined);
    }
}

TEST(PathMin, RefinedEqualsCellwiseBridgeSamples) {
    const Grid grid(128);
    Path scratch(grid);
    for (int i = 0; i < 500; ++i) {
        RngStream s(77, static_cast<std::uint64_t>(i));
        minsde::sample_brownian_into(scratch, s);
        RngStream s_cells = s;
        const MinRecord rec = minsde::path_min(scratch, s, true);
        const auto cells = minsde::bridge_cell_minima(scratch, s_cells);
        const auto it = std::min_element(cells.begin(), cells.end());
        EXPECT_EQ(rec.m, *it);
        const int cell = static_cast<int>(it - cells.begin());
        EXPECT_EQ(rec.tau, 0.5 * (grid.time(cell) + grid.time(cell + 1)));
    }
}

TEST(PathMin, ReproducibleAcrossRuns) {
    const Grid grid(256);
    RngStream s1(123456789, 42), s2(123456789, 42);
    Path a = minsde::euler_maruyama(DriftSpec::tanh(1.0), grid, s1);
    Path b = minsde::euler_maruyama(DriftSpec::tanh(1.0), grid, s2);
    for (std::size_t i = 0; i < a.values.size(); ++i) ASSERT_EQ(a.values[i], b.values[i]);
    const MinRecord ra = minsde::path_min(a, s1, true);
    const MinRecord rb = minsde::path_min(b, s2, true);
    EXPECT_EQ(ra.m, rb.m);
    EXPECT_EQ(ra.tau, rb.tau);
}

TEST(PathMin, GridBiasShrinksWithDt) {
    const int n_paths = 20000;
    auto mean_min = [&](int n_steps, bool refine) {
        const Grid grid(n_steps);
        Path scratch(grid);
        double acc = 0.0;
        for (int i = 0; i < n_paths; ++i) {
            RngStream s(555, static_cast<std::uint64_t>(i));
            minsde::sample_brownian_into(scratch, s);
            acc += minsde::path_min(scratch, s, refine).m;
        }
        return acc / n_paths;
    };
    const double g6 = mean_min(64, false);
    const double g8 = mean_min(256, false);
    const double g10 = mean_min(1024, false);
    const double refined = mean_min(1024, true);
    EXPECT_GT(g6, g8);
    EXPECT_GT(g8, g10);
    EXPECT_GT(g10, refined);  // grid minimum is biased upward at every dt
}
