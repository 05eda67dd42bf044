#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace minsde {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

inline double normal_pdf(double x) {
    return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSE mean_and_se(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n == 0) throw std::invalid_argument("mean_and_se: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    const double mean = s / static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        ss += d * d;
    }
    const double var = (n > 1) ? ss / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

// Nonoverlapping batch partition: batch b covers [lo(b), hi(b)). Used both
// as the unit of parallel work and for batch-means standard errors.
struct Batches {
    std::int64_t n_items;
    int count;

    Batches(std::int64_t n, int requested) : n_items(n) {
        count = requested;
        if (count > n) count = static_cast<int>(n);
        if (count < 1) count = 1;
    }

    std::int64_t lo(int b) const { return n_items * b / count; }
    std::int64_t hi(int b) const { return n_items * (b + 1) / count; }
};

inline constexpr int kBatchCount = 100;

// Standard error of the grand mean from per-batch means (batches of equal
// size up to one item).
inline MeanSE batch_means(std::span<const double> batch_mean) {
    return mean_and_se(batch_mean);
}

}
