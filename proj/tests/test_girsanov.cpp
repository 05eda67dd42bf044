#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "minsde/girsanov.hpp"
#include "minsde/sampler.hpp"

using minsde::DriftSpec;
using minsde::Grid;
using minsde::Path;
using minsde::RngStream;

namespace {

// Deterministic path: straight line from 0 to terminal, matching noise.
Path line_path(int n_steps, double terminal) {
    Path p{Grid(n_steps)};
    for (int i = 0; i <= n_steps; ++i) {
        p.values[static_cast<std::size_t>(i)] = terminal * i / n_steps;
    }
    for (int i = 0; i < n_steps; ++i) {
        p.noise[static_cast<std::size_t>(i)] =
            p.values[static_cast<std::size_t>(i) + 1] - p.values[static_cast<std::size_t>(i)];
    }
    return p;
}

}

TEST(GirsanovLogPsi, ZeroDriftIsExactlyZero) {
    RngStream s(1, 0);
    const Path p = minsde::sample_brownian(Grid(64), s);
    EXPECT_EQ(minsde::log_psi(DriftSpec::zero(), p), 0.0);
}

TEST(GirsanovLogPsi, ConstantDriftClosedForm) {
    // v(x(1)) - c^2/2 = 0.5 - 0.125 = 0.375 for c = 1/2, x(1) = 1
    const Path p = line_path(128, 1.0);
    EXPECT_NEAR(minsde::log_psi(DriftSpec::constant(0.5), p), 0.375, 1e-12);
}

TEST(GirsanovLogPsi, UnitTanhHasGridFreeWeight) {
    // for tanh with scale 1, b^2 + b' == 1 pointwise, so
    // log Psi = v(x(1)) - 1/2 on every grid
    const DriftSpec spec = DriftSpec::tanh(1.0);
    RngStream s(4, 0);
    for (int k = 0; k < 20; ++k) {
        const Path p = minsde::euler_maruyama(spec, Grid(128), s);
        EXPECT_NEAR(minsde::log_psi(spec, p), spec.potential(p.terminal()) - 0.5, 1e-12);
    }
}

TEST(GirsanovLogPsi, CoarseningTrendOnRefinedPath) {
    // log_psi on a fine path versus its subsampled copies; the difference
    // must shrink under refinement (roughly first order in dt for rough
    // paths). Scale 2 keeps b^2 + b' nonconstant.
    const DriftSpec spec = DriftSpec::tanh(2.0);
    const int fine_steps = 16384;
    const Grid fine(fine_steps);
    Path fine_path(fine);
    double prev_mean = 0.0;
    std::vector<double> mean_abs;
    for (int level = 0; level < 3; ++level) mean_abs.push_back(0.0);
    const int n_paths = 50;
    for (int k = 0; k < n_paths; ++k) {
        RngStream s(2718, static_cast<std::uint64_t>(k));
        minsde::euler_maruyama_into(fine_path, spec, s);
        const double ref = minsde::log_psi(spec, fine_path);
        const int coarse_steps[3] = {1024, 2048, 4096};
        for (int level = 0; level < 3; ++level) {
            const int n = coarse_steps[level];
            const int stride = fine_steps / n;
            Path coarse{Grid(n)};
            for (int i = 0; i <= n; ++i) {
                coarse.values[static_cast<std::size_t>(i)] =
                    fine_path.values[static_cast<std::size_t>(i * stride)];
            }
            mean_abs[static_cast<std::size_t>(level)] +=
                std::abs(minsde::log_psi(spec, coarse) - ref) / n_paths;
        }
    }
    EXPECT_GT(mean_abs[0], mean_abs[1]);
    EXPECT_GT(mean_abs[1], mean_abs[2]);
    (void)prev_mean;
}

TEST(GirsanovLogQ1, ZeroDriftIsZero) {
    RngStream s(2, 0);
    const Path p = minsde::sample_brownian(Grid(64), s);
    EXPECT_EQ(minsde::log_q1_ito(DriftSpec::zero(), p), 0.0);
}

TEST(GirsanovLogQ1, ConstantDriftClosedForm) {
    // log q(1) = -c^2/2 - c B(1); B(1) = 1 here
    const Path p = line_path(128, 1.0);
    EXPECT_NEAR(minsde::log_q1_ito(DriftSpec::constant(0.5), p), -0.625, 1e-12);
}

TEST(GirsanovLogQ1, MissingNoiseIsContractError) {
    Path p = line_path(16, 0.5);
    p.noise.clear();
    EXPECT_THROW(minsde::log_q1_ito(DriftSpec::constant(0.5), p), std::invalid_argument);
}

TEST(GirsanovLogQ1, ClosedFormIsExactNegativeOfLogPsi) {
    RngStream s(3, 0);
    for (const auto& spec :
         {DriftSpec::zero(), DriftSpec::constant(0.5), DriftSpec::tanh(1.0),
          DriftSpec::sine(0.5, 2.0)}) {
        const Path p = minsde::euler_maruyama(spec, Grid(128), s);
        EXPECT_EQ(minsde::log_q1_closed(spec, p), -minsde::log_psi(spec, p));
    }
}

TEST(GirsanovProp21, ZeroDriftResidualIsIdenticallyZero) {
    const std::vector<Grid> grids{Grid(64), Grid(256)};
    const auto rep = minsde::check_prop21(DriftSpec::zero(), 500, grids, 7);
    EXPECT_EQ(rep.rms[0], 0.0);
    EXPECT_EQ(rep.rms[1], 0.0);
    EXPECT_TRUE(rep.pass);
}

TEST(GirsanovProp21, ConstantDriftResidualIsRoundoffOnly) {
    const std::vector<Grid> grids{Grid(256), Grid(1024), Grid(4096)};
    const auto rep = minsde::check_prop21(DriftSpec::constant(0.5), 300, grids, 8);
    for (double r : rep.rms) EXPECT_LT(r, 1e-10);
    EXPECT_TRUE(rep.pass);
}

TEST(GirsanovProp21, TanhResidualShrinksAtExpectedRate) {
    const std::vector<Grid> grids{Grid(256), Grid(512), Grid(1024), Grid(2048)};
    const auto rep = minsde::check_prop21(DriftSpec::tanh(1.0), 2000, grids, 9);
    EXPECT_TRUE(rep.monotone);
    for (std::size_t k = 1; k < rep.rms.size(); ++k) {
        const double ratio = rep.rms[k - 1] / rep.rms[k];
        EXPECT_GE(ratio, 1.2) << "k=" << k;
        EXPECT_LE(ratio, 3.0) << "k=" << k;
    }
}

TEST(GirsanovProp21, RejectsNonNestedGrids) {
    const std::vector<Grid> grids{Grid(100), Grid(150)};
    EXPECT_THROW(minsde::check_prop21(DriftSpec::zero(), 10, grids, 1), std::invalid_argument);
}

TEST(GirsanovNormalization, ZeroDriftIsExactlyOne) {
    const auto [mean, se] = minsde::weight_normalization(DriftSpec::zero(), 2000, Grid(64), 4);
    EXPECT_EQ(mean, 1.0);
    EXPECT_EQ(se, 0.0);
}

TEST(GirsanovNormalization, MeanPsiIsOneWithinError) {
    for (const auto& spec :
         {DriftSpec::constant(0.5), DriftSpec::tanh(1.0), DriftSpec::sine(0.5, 2.0)}) {
        const auto [mean, se] = minsde::weight_normalization(spec, 20000, Grid(256), 5);
        EXPECT_NEAR(mean, 1.0, 3.0 * se + 1e-3) << spec.description();
        EXPECT_GT(se, 0.0);
    }
}

TEST(GirsanovWeights, PathwiseBounds) {
    // log Psi <= v(x(1)) + sup|b'|/2 and Psi <= C1 exp(C2 ||x||_inf) with
    // C1 = exp(sup|b'|/2), C2 = sup|b|
    const DriftSpec spec = DriftSpec::tanh(1.0);
    const Grid grid(128);
    Path scratch(grid);
    for (int i = 0; i < 2000; ++i) {
        RngStream s(41, static_cast<std::uint64_t>(i));
        minsde::sample_brownian_into(scratch, s);
        const double lw = minsde::log_psi(spec, scratch);
        EXPECT_TRUE(std::isfinite(lw));
        EXPECT_LE(lw, spec.potential(scratch.terminal()) + 0.5 * spec.bounds().sup_db + 1e-9);
        double sup = 0.0;
        for (double v : scratch.values) sup = std::max(sup, std::abs(v));
        EXPECT_LE(lw, 0.5 * spec.bounds().sup_db + spec.bounds().sup_b * sup + 1e-9);
    }
}

TEST(GirsanovWeights, RecordsMatchComposedOps) {
    // the batch sampler must agree bitwise with composing the operations
    const DriftSpec spec = DriftSpec::sine(0.5, 2.0);
    const Grid grid(64);
    minsde::SimulationPlan plan{spec, grid, 50, 2024, true, minsde::PathMeasure::BrownianWeighted, 1};
    const auto records = minsde::simulate_min_records(plan);
    for (int i = 0; i < 50; ++i) {
        RngStream s(2024, static_cast<std::uint64_t>(i));
        const Path p = minsde::sample_brownian(grid, s);
        const double lw = minsde::log_psi(spec, p);
        const auto rec = minsde::path_min(p, s, true);
        EXPECT_EQ(records[static_cast<std::size_t>(i)].log_weight, lw);
        EXPECT_EQ(records[static_cast<std::size_t>(i)].min.m, rec.m);
        EXPECT_EQ(records[static_cast<std::size_t>(i)].min.tau, rec.tau);
        EXPECT_EQ(records[static_cast<std::size_t>(i)].terminal, p.terminal());
    }
}
