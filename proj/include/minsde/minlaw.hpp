#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "minsde/sampler.hpp"
#include "minsde/stats.hpp"

namespace minsde {

// Density of the Brownian minimum on [0,1]: sqrt(2/pi) exp(-r^2/2) on r <= 0.
inline double brownian_min_density(double r) {
    if (r > 0.0) return 0.0;
    return 0.79788456080286536 * std::exp(-0.5 * r * r);
}

// P(min <= r) for ct + B(t) on [0,1], by the reflection formula
// Phi(r - c) + exp(2cr) Phi(r + c); the minimum of a path started at 0 is
// never positive, so r > 0 yields 1.
inline double drifted_min_cdf(double c, double r) {
    if (r > 0.0) return 1.0;
    return normal_cdf(r - c) + std::exp(2.0 * c * r) * normal_cdf(r + c);
}

struct EstimateMeta {
    std::string estimator;
    std::int64_t n_paths = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::string drift;
    double ess = 0.0;
    bool low_ess_warning = false;
};

// Law of the minimum on an ascending grid of negative levels: density,
// CDF and their standard errors.
struct DensityEstimate {
    std::vector<double> r;
    std::vector<double> f, se_f;
    std::vector<double> cdf, se_cdf;
    EstimateMeta meta;
};

struct SurvivalEstimate {
    std::vector<double> r;
    std::vector<double> F, se;
    EstimateMeta meta;
};

struct SurvivalDensity {
    std::vector<double> r;
    std::vector<double> f, se;
};

struct SmoothedDensity {
    double value = 0.0;
    double se = 0.0;
    std::int64_t hits = 0;
    bool degenerate = false;
};

inline void check_r_grid(std::span<const double> r_grid) {
    if (r_grid.empty()) throw std::invalid_argument("r_grid: empty");
    for (std::size_t i = 1; i < r_grid.size(); ++i) {
        if (!(r_grid[i] > r_grid[i - 1])) {
            throw std::invalid_argument("r_grid: must be strictly ascending");
        }
    }
    if (!(r_grid.back() < 0.0)) throw std::invalid_argument("r_grid: all levels must be < 0");
}

inline std::vector<double> make_r_grid(double r_min, double r_max, int count) {
    if (count < 1) throw std::invalid_argument("r_grid: count must be >= 1");
    if (count == 1) return {r_min};
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] = r_min + (r_max - r_min) * i / (count - 1);
    }
    return out;
}

namespace detail {

// Records sorted by minimum with prefix sums of (shifted) weights; every
// threshold statistic and its variance then comes from two lookups. The
// max-shift keeps the exponentials tame; self-normalized ratios cancel it.
class RecordIndex {
public:
    explicit RecordIndex(std::span<const WeightedMin> records) {
        const std::size_t n = records.size();
        if (n == 0) throw std::invalid_argument("RecordIndex: no records");
        shift_ = records[0].log_weight;
        for (const auto& rec : records) shift_ = std::max(shift_, rec.log_weight);
        std::vector<std::pair<double, double>> mw(n);
        weights_path_order_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = std::exp(records[i].log_weight - shift_);
            weights_path_order_[i] = w;
            mw[i] = {records[i].min.m, w};
        }
        std::sort(mw.begin(), mw.end());
        m_.resize(n);
        pw_.resize(n + 1);
        pww_.resize(n + 1);
        pw_[0] = pww_[0] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m_[i] = mw[i].first;
            pw_[i + 1] = pw_[i] + mw[i].second;
            pww_[i + 1] = pww_[i] + mw[i].second * mw[i].second;
        }
    }

    std::size_t size() const { return m_.size(); }
    double shift() const { return shift_; }
    double sum_w() const { return pw_.back(); }
    double sum_ww() const { return pww_.back(); }
    double ess() const { return sum_w() * sum_w() / sum_ww(); }
    std::span<const double> weights_path_order() const { return weights_path_order_; }

    // Sums over {m <= r} / {m < r}.
    double w_le(double r) const { return pw_[idx_le(r)]; }
    double ww_le(double r) const { return pww_[idx_le(r)]; }
    double w_lt(double r) const { return pw_[idx_lt(r)]; }
    double ww_lt(double r) const { return pww_[idx_lt(r)]; }
    std::int64_t count_le(double r) const { return static_cast<std::int64_t>(idx_le(r)); }

    // Self-normalized ratio sum(w 1A)/sum(w) with its delta-method standard
    // error; for unit weights this is the binomial error exactly.
    MeanSE ratio(double sa, double saa) const {
        const double sb = sum_w();
        const double ratio = sa / sb;
        const double var_num = (1.0 - 2.0 * ratio) * saa + ratio * ratio * sum_ww();
        return {ratio, std::sqrt(std::max(0.0, var_num)) / sb};
    }

    // Unnormalized mean of Psi 1A with iid standard error.
    MeanSE plain_mean(double sa, double saa) const {
        const double n = static_cast<double>(size());
        const double scale = std::exp(shift_);
        const double mean = sa / n;
        const double var = std::max(0.0, saa / n - mean * mean);
        return {scale * mean, scale * std::sqrt(var / n)};
    }

private:
    std::size_t idx_le(double r) const {
        return static_cast<std::size_t>(
            std::upper_bound(m_.begin(), m_.end(), r) - m_.begin());
    }
    std::size_t idx_lt(double r) const {
        return static_cast<std::size_t>(
            std::lower_bound(m_.begin(), m_.end(), r) - m_.begin());
    }

    std::vector<double> m_;
    std::vector<double> pw_, pww_;
    std::vector<double> weights_path_order_;
    double shift_ = 0.0;
};

inline void fill_ess(const RecordIndex& index, EstimateMeta& meta) {
    meta.ess = index.ess();
    meta.low_ess_warning = meta.ess < 0.01 * static_cast<double>(index.size());
}

}

// CDF by (weighted) threshold counts, density by central differences of the
// CDF with bandwidth delta (one-sided at the upper edge where r + delta
// would cross 0). normalize=true divides by the empirical mean of Psi.
inline DensityEstimate estimate_from_records(std::span<const WeightedMin> records,
                                             std::span<const double> r_grid, double delta,
                                             bool normalize, EstimateMeta meta) {
    check_r_grid(r_grid);
    if (!(delta > 0.0)) throw std::domain_error("estimate: delta must be > 0");
    const detail::RecordIndex index(records);
    DensityEstimate est;
    est.r.assign(r_grid.begin(), r_grid.end());
    detail::fill_ess(index, meta);
    est.meta = std::move(meta);
    for (double r : r_grid) {
        const double sa = index.w_le(r);
        const double saa = index.ww_le(r);
        const MeanSE cdf = normalize ? index.ratio(sa, saa) : index.plain_mean(sa, saa);
        est.cdf.push_back(cdf.mean);
        est.se_cdf.push_back(cdf.se);

        double lo = r - delta, hi = r + delta, width = 2.0 * delta;
        if (hi >= 0.0) { hi = r; width = delta; }  // one-sided at the edge
        const double ba = index.w_le(hi) - index.w_le(lo);
        const double baa = index.ww_le(hi) - index.ww_le(lo);
        const MeanSE band = normalize ? index.ratio(ba, baa) : index.plain_mean(ba, baa);
        est.f.push_back(band.mean / width);
        est.se_f.push_back(band.se / width);
    }
    return est;
}

inline DensityEstimate estimate_direct(const DriftSpec& spec, std::int64_t n_paths,
                                       const Grid& grid, std::span<const double> r_grid,
                                       std::uint64_t seed, bool refine, double delta = 0.01,
                                       int workers = 0) {
    SimulationPlan plan{spec, grid, n_paths, seed, refine, PathMeasure::SdeDirect, workers};
    const auto records = simulate_min_records(plan);
    EstimateMeta meta{"direct", n_paths, grid.dt(), seed, spec.description(), 0.0, false};
    return estimate_from_records(records, r_grid, delta, true, std::move(meta));
}

inline DensityEstimate estimate_weighted(const DriftSpec& spec, std::int64_t n_paths,
                                         const Grid& grid, std::span<const double> r_grid,
                                         std::uint64_t seed, bool refine, double delta = 0.01,
                                         bool normalize = true, int workers = 0) {
    SimulationPlan plan{spec, grid, n_paths, seed, refine, PathMeasure::BrownianWeighted,
                        workers};
    const auto records = simulate_min_records(plan);
    EstimateMeta meta{"weighted", n_paths, grid.dt(), seed, spec.description(), 0.0, false};
    return estimate_from_records(records, r_grid, delta, normalize, std::move(meta));
}

// Survival functional F(r) = E[Psi 1{m >= r}] over Brownian paths, one path
// batch shared across all levels; batch-means standard errors.
inline SurvivalEstimate estimate_F_from_records(std::span<const WeightedMin> records,
                                                std::span<const double> r_grid,
                                                EstimateMeta meta) {
    check_r_grid(r_grid);
    const std::size_t n = records.size();
    if (n == 0) throw std::invalid_argument("estimate_F: no records");
    double shift = records[0].log_weight;
    for (const auto& rec : records) shift = std::max(shift, rec.log_weight);
    const double scale = std::exp(shift);
    std::vector<double> w(n);
    double sum_w = 0.0, sum_ww = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::exp(records[i].log_weight - shift);
        sum_w += w[i];
        sum_ww += w[i] * w[i];
    }
    SurvivalEstimate est;
    est.r.assign(r_grid.begin(), r_grid.end());
    const Batches batches(static_cast<std::int64_t>(n), kBatchCount);
    std::vector<double> batch_mean(static_cast<std::size_t>(batches.count));
    for (double r : r_grid) {
        double total = 0.0;
        for (int b = 0; b < batches.count; ++b) {
            double acc = 0.0;
            const std::int64_t lo = batches.lo(b), hi = batches.hi(b);
            for (std::int64_t i = lo; i < hi; ++i) {
                if (records[static_cast<std::size_t>(i)].min.m >= r) {
                    acc += w[static_cast<std::size_t>(i)];
                }
            }
            total += acc;
            batch_mean[static_cast<std::size_t>(b)] =
                scale * acc / static_cast<double>(hi - lo);
        }
        est.F.push_back(scale * total / static_cast<double>(n));
        est.se.push_back(batch_means(batch_mean).se);
    }
    meta.ess = sum_w * sum_w / sum_ww;
    meta.low_ess_warning = meta.ess < 0.01 * static_cast<double>(n);
    est.meta = std::move(meta);
    return est;
}

inline SurvivalEstimate estimate_F(const DriftSpec& spec, std::span<const double> r_grid,
                                   std::int64_t n_paths, const Grid& grid, std::uint64_t seed,
                                   bool refine = true, int workers = 0) {
    SimulationPlan plan{spec, grid, n_paths, seed, refine, PathMeasure::BrownianWeighted,
                        workers};
    const auto records = simulate_min_records(plan);
    EstimateMeta meta{"survival", n_paths, grid.dt(), seed, spec.description(), 0.0, false};
    return estimate_F_from_records(records, r_grid, std::move(meta));
}

// f(r) = (F(r - delta) - F(r + delta)) / (2 delta); inputs must come from a
// common path batch for the pairing to make sense.
inline std::vector<double> density_from_F(std::span<const double> F_minus,
                                          std::span<const double> F_plus, double delta) {
    if (!(delta > 0.0)) throw std::domain_error("density_from_F: delta must be > 0");
    if (F_minus.size() != F_plus.size()) {
        throw std::invalid_argument("density_from_F: mismatched F samples");
    }
    std::vector<double> f(F_minus.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = (F_minus[i] - F_plus[i]) / (2.0 * delta);
    }
    return f;
}

// Same differencing computed per path: the differenced indicator
// Psi 1{r-delta <= m < r+delta} has low variance under common paths, and its
// sample variance gives the standard error.
inline SurvivalDensity survival_density_from_records(std::span<const WeightedMin> records,
                                                     std::span<const double> r_grid,
                                                     double delta) {
    check_r_grid(r_grid);
    if (!(delta > 0.0)) throw std::domain_error("density_from_F: delta must be > 0");
    const detail::RecordIndex index(records);
    const double n = static_cast<double>(index.size());
    const double scale = std::exp(index.shift());
    SurvivalDensity out;
    out.r.assign(r_grid.begin(), r_grid.end());
    for (double r : r_grid) {
        double lo = r - delta, hi = r + delta, width = 2.0 * delta;
        if (hi >= 0.0) { hi = r; width = delta; }
        const double sa = index.w_lt(hi) - index.w_lt(lo);
        const double saa = index.ww_lt(hi) - index.ww_lt(lo);
        const double mean = sa / n;
        const double var = std::max(0.0, saa / n - mean * mean);
        out.f.push_back(scale * mean / width);
        out.se.push_back(scale * std::sqrt(var / n) / width);
    }
    return out;
}

// One-sided band estimate (1/eps) E[Psi 1{r <= m <= r+eps}]; converges to
// the density as eps -> 0. Flags a degenerate estimate when the band is
// empty.
inline SmoothedDensity smoothed_density_from_records(std::span<const WeightedMin> records,
                                                     double r, double eps) {
    if (!(eps > 0.0)) throw std::domain_error("smoothed_density: eps must be > 0");
    if (!(r + eps < 0.0)) throw std::domain_error("smoothed_density: need r + eps < 0");
    const std::size_t n = records.size();
    if (n == 0) throw std::invalid_argument("smoothed_density: no records");
    double shift = records[0].log_weight;
    for (const auto& rec : records) shift = std::max(shift, rec.log_weight);
    const double scale = std::exp(shift);
    const Batches batches(static_cast<std::int64_t>(n), kBatchCount);
    std::vector<double> batch_mean(static_cast<std::size_t>(batches.count));
    SmoothedDensity out;
    double total = 0.0;
    for (int b = 0; b < batches.count; ++b) {
        double acc = 0.0;
        const std::int64_t lo = batches.lo(b), hi = batches.hi(b);
        for (std::int64_t i = lo; i < hi; ++i) {
            const auto& rec = records[static_cast<std::size_t>(i)];
            if (rec.min.m >= r && rec.min.m <= r + eps) {
                acc += std::exp(rec.log_weight - shift);
                ++out.hits;
            }
        }
        total += acc;
        batch_mean[static_cast<std::size_t>(b)] =
            scale * acc / static_cast<double>(hi - lo) / eps;
    }
    out.value = scale * total / static_cast<double>(n) / eps;
    out.se = batch_means(batch_mean).se;
    out.degenerate = (out.hits == 0);
    return out;
}


inline SmoothedDensity smoothed_density(const DriftSpec& spec, double r, double eps,
                                        std::int64_t n_paths, const Grid& grid,
                                        std::uint64_t seed, bool refine = true,
                                        int workers = 0) {
    SimulationPlan plan{spec, grid, n_paths, seed, refine, PathMeasure::BrownianWeighted,
                        workers};
    const auto records = simulate_min_records(plan);
    return smoothed_density_from_records(records, r, eps);
}

}
