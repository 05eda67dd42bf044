#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "minsde/drift.hpp"
#include "support/oracles.hpp"

using minsde::DriftBounds;
using minsde::DriftSpec;
using minsde::DriftTriple;

namespace {

std::vector<DriftSpec> builtin_specs() {
    return {DriftSpec::zero(), DriftSpec::constant(0.5), DriftSpec::tanh(1.0),
            DriftSpec::sine(0.5, 2.0)};
}

// Smooth custom table sampled from tanh on [-4, 4].
DriftSpec tanh_table_spec(double corruption = 0.0) {
    std::vector<double> knots, values;
    for (int i = 0; i <= 160; ++i) {
        const double eta = -4.0 + 0.05 * i;
        knots.push_back(eta);
        values.push_back(std::tanh(eta));
    }
    if (corruption != 0.0) values[80] += corruption;  // knot at eta = 0
    // small slack over the exact tanh bounds for interpolation overshoot
    return DriftSpec::custom(knots, values, DriftBounds{1.01, 1.01, 0.85});
}

}

TEST(DriftTriples, ExampleValues) {
    const auto z = minsde::drift_triple(DriftSpec::zero(), 1.7);
    EXPECT_EQ(z.b, 0.0);
    EXPECT_EQ(z.db, 0.0);
    EXPECT_EQ(z.d2b, 0.0);

    const auto c = minsde::drift_triple(DriftSpec::constant(0.5), -2.0);
    EXPECT_EQ(c.b, 0.5);
    EXPECT_EQ(c.db, 0.0);
    EXPECT_EQ(c.d2b, 0.0);

    const auto t = minsde::drift_triple(DriftSpec::tanh(1.0), 0.0);
    EXPECT_EQ(t.b, 0.0);
    EXPECT_EQ(t.db, 1.0);
    EXPECT_EQ(t.d2b, 0.0);
}

TEST(DriftPotential, ClosedForms) {
    EXPECT_EQ(minsde::potential(DriftSpec::zero(), 3.2), 0.0);
    EXPECT_NEAR(minsde::potential(DriftSpec::constant(0.5), 2.0), 1.0, 1e-15);
    // ln cosh 1
    EXPECT_NEAR(minsde::potential(DriftSpec::tanh(1.0), 1.0), 0.43378083048302719, 1e-12);
}

TEST(DriftPotential, AtZeroIsExactlyZero) {
    for (const auto& spec : builtin_specs()) EXPECT_EQ(spec.potential(0.0), 0.0);
    EXPECT_EQ(tanh_table_spec().potential(0.0), 0.0);
}

TEST(DriftPotential, MatchesQuadratureOracle) {
    for (const auto& spec : builtin_specs()) {
        for (double eta : {-3.0, -1.0, 0.5, 1.0, 2.5}) {
            const double oracle =
                oracles::gauss_legendre([&](double t) { return spec.b(t); }, 0.0, eta);
            EXPECT_NEAR(spec.potential(eta), oracle, 1e-10) << spec.description();
        }
    }
}

TEST(DriftPotential, AdditiveOverIntervals) {
    for (const auto& spec : builtin_specs()) {
        const double zeta = -0.7, eta = 1.9;
        const double inc = oracles::gauss_legendre([&](double t) { return spec.b(t); }, zeta, eta);
        EXPECT_NEAR(spec.potential(eta), spec.potential(zeta) + inc, 1e-9) << spec.description();
    }
}

TEST(DriftPotential, CustomUsesQuadrature) {
    const auto spec = tanh_table_spec();
    const double oracle =
        oracles::gauss_legendre([&](double t) { return spec.b(t); }, 0.0, 1.0, 256);
    EXPECT_NEAR(spec.potential(1.0), oracle, 1e-8);
    EXPECT_NEAR(spec.potential(1.0), 0.43378083048302719, 1e-4);  // near ln cosh 1
}

TEST(DriftDerivatives, FiniteDifferenceInvariant) {
    auto specs = builtin_specs();
    specs.push_back(tanh_table_spec());
    for (const auto& spec : specs) {
        auto [lo, hi] = spec.domain();
        if (!std::isfinite(lo)) lo = -10.0;
        if (!std::isfinite(hi)) hi = 10.0;
        for (double delta : {1e-3, 1e-4}) {
            double worst = 0.0;
            for (double eta = lo + 2 * delta; eta <= hi - 2 * delta; eta += 0.37) {
                const double fd = (spec.b(eta + delta) - spec.b(eta - delta)) / (2 * delta);
                worst = std::max(worst, std::abs(spec.triple(eta).db - fd));
            }
            EXPECT_LE(worst, 1.0 * delta * delta) << spec.description() << " delta=" << delta;
        }
    }
}

TEST(DriftValidate, ZeroPassesWithZeroResiduals) {
    const auto rep = minsde::validate_spec(DriftSpec::zero());
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.max_resid_db, 0.0);
    EXPECT_EQ(rep.max_resid_d2b, 0.0);
}

TEST(DriftValidate, TanhPassesWithinBounds) {
    const auto rep = minsde::validate_spec(DriftSpec::tanh(1.0));
    EXPECT_TRUE(rep.pass);
    EXPECT_LE(rep.sup_b, 1.0 + 1e-9);
    EXPECT_LE(rep.sup_db, 1.0 + 1e-9);
}

TEST(DriftValidate, BuiltinsAllPass) {
    for (const auto& spec : builtin_specs()) {
        EXPECT_TRUE(minsde::validate_spec(spec).pass) << spec.description();
    }
    EXPECT_TRUE(minsde::validate_spec(tanh_table_spec()).pass);
}

TEST(DriftValidate, CorruptedTableFailsAndIsLocated) {
    const auto rep = minsde::validate_spec(tanh_table_spec(0.8));
    EXPECT_FALSE(rep.pass);
    EXPECT_FALSE(rep.bounds_ok);
    // the spike sits at eta = 0; the largest bound violation must be nearby
    const double where = std::abs(rep.sup_b - rep.declared.sup_b) >
                                 std::abs(rep.sup_d2b - rep.declared.sup_d2b)
                             ? rep.at_sup_b
                             : rep.at_sup_d2b;
    EXPECT_NEAR(where, 0.0, 0.2);
}

TEST(DriftCustom, DomainErrorOutsideTable) {
    const auto spec = tanh_table_spec();
    EXPECT_THROW(spec.b(4.5), std::domain_error);
    EXPECT_THROW(spec.triple(-4.01), std::domain_error);
}

TEST(DriftCustom, SplineTracksTabulatedFunction) {
    const auto spec = tanh_table_spec();
    for (double eta = -3.9; eta <= 3.9; eta += 0.013) {
        EXPECT_NEAR(spec.b(eta), std::tanh(eta), 1e-5);
    }
}

TEST(DriftQuadrature, NonConvergenceIsNumericError) {
    const auto wild = [](double x) { return std::sin(1.0 / (x * x + 1e-12)); };
    EXPECT_THROW(minsde::adaptive_simpson(wild, 0.0, 1.0, 1e-12, 4), minsde::NumericError);
    EXPECT_NEAR(minsde::adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0, 1e-10),
                1.0 / 3.0, 1e-12);
}
