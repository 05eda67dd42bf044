#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "minsde/girsanov.hpp"
#include "minsde/parallel.hpp"
#include "minsde/path.hpp"
#include "minsde/sampler.hpp"
#include "minsde/stats.hpp"

namespace minsde {

// Cameron-Martin direction: h piecewise linear on the grid, h(0) = 0, stored
// by cell slopes; the H-norm is the L^2 norm of the slope.
class CMVector {
public:
    CMVector(const Grid& grid, std::vector<double> slopes) : grid_(grid), slopes_(std::move(slopes)) {
        if (static_cast<int>(slopes_.size()) != grid_.n_steps) {
            throw std::invalid_argument("CMVector: one slope per grid cell required");
        }
        nodes_.resize(static_cast<std::size_t>(grid_.n_nodes()));
        nodes_[0] = 0.0;
        const double dt = grid_.dt();
        double nsq = 0.0;
        for (int i = 0; i < grid_.n_steps; ++i) {
            nodes_[static_cast<std::size_t>(i) + 1] =
                nodes_[static_cast<std::size_t>(i)] + slopes_[static_cast<std::size_t>(i)] * dt;
            nsq += slopes_[static_cast<std::size_t>(i)] * slopes_[static_cast<std::size_t>(i)] * dt;
        }
        norm_h_ = std::sqrt(nsq);
    }

    // h sampled from a function of t (h(0) is forced to 0).
    static CMVector from_function(const Grid& grid, const std::function<double(double)>& h) {
        std::vector<double> slopes(static_cast<std::size_t>(grid.n_steps));
        double prev = 0.0;
        for (int i = 0; i < grid.n_steps; ++i) {
            const double next = h(grid.time(i + 1));
            slopes[static_cast<std::size_t>(i)] = (next - prev) / grid.dt();
            prev = next;
        }
        return CMVector(grid, std::move(slopes));
    }

    static CMVector linear(const Grid& grid) {
        return CMVector(grid, std::vector<double>(static_cast<std::size_t>(grid.n_steps), 1.0));
    }

    const Grid& grid() const { return grid_; }
    std::span<const double> slopes() const { return slopes_; }
    double norm_h() const { return norm_h_; }
    double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    double terminal() const { return nodes_.back(); }

    double value(double t) const {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return nodes_.back();
        const double pos = t * grid_.n_steps;
        int cell = static_cast<int>(pos);
        if (cell >= grid_.n_steps) cell = grid_.n_steps - 1;
        return nodes_[static_cast<std::size_t>(cell)] +
               slopes_[static_cast<std::size_t>(cell)] * (t - grid_.time(cell));
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : nodes_) m = std::max(m, std::abs(v));
        return m;
    }

    CMVector resampled(const Grid& grid) const {
        return from_function(grid, [this](double t) { return value(t); });
    }

    CMVector scaled(double factor) const {
        std::vector<double> s(slopes_);
        for (double& v : s) v *= factor;
        return CMVector(grid_, std::move(s));
    }

private:
    Grid grid_;
    std::vector<double> slopes_;
    std::vector<double> nodes_;
    double norm_h_ = 0.0;
};

// Discrete Wiener integral of h' against the path increments; the
// Paley-Wiener random variable pairing h with the path.
inline double paley_wiener(const CMVector& h, const Path& path) {
    if (h.grid() != path.grid) {
        throw std::invalid_argument("paley_wiener: direction and path live on different grids");
    }
    double acc = 0.0;
    const auto slopes = h.slopes();
    for (int i = 0; i < path.grid.n_steps; ++i) {
        acc += slopes[static_cast<std::size_t>(i)] *
               (path.values[static_cast<std::size_t>(i) + 1] -
                path.values[static_cast<std::size_t>(i)]);
    }
    return acc;
}

// <h,k>_H = int h' k'.
inline double cm_inner(const CMVector& h, const CMVector& k) {
    if (h.grid() != k.grid()) {
        throw std::invalid_argument("cm_inner: directions live on different grids");
    }
    double acc = 0.0;
    const auto hs = h.slopes(), ks = k.slopes();
    for (std::size_t i = 0; i < hs.size(); ++i) acc += hs[i] * ks[i];
    return acc * h.grid().dt();
}

// Directional derivative of the minimum functional: the gradient profile is
// the indicator of [0, tau], so the pairing is h(tau).
inline double grad_g_pairing(const Path&, const MinRecord& min_rec, const CMVector& h) {
    return h.value(min_rec.tau);
}

// Gradient of log Psi at one path, cached as node coefficients so that
// pairings with many directions cost one dot product each:
//   <grad log Psi, h>_H = b(x(1)) h(1) - dt sum_i c_i h(t_i),
//   c_i = w_i ( (b b')(x_i) + b''(x_i)/2 ),  w_i trapezoid weights.
struct LogPsiGradient {
    double b_terminal = 0.0;
    double dt = 0.0;
    std::vector<double> coeff;  // one per grid node

    double pairing(const CMVector& h) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < coeff.size(); ++i) {
            acc += coeff[i] * h.node(static_cast<int>(i));
        }
        return b_terminal * h.terminal() - dt * acc;
    }
};

inline void fill_log_psi_gradient(LogPsiGradient& g, const DriftSpec& spec, const Path& path) {
    const int n = path.grid.n_steps;
    g.dt = path.grid.dt();
    g.coeff.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        const DriftTriple t = spec.triple(path.values[static_cast<std::size_t>(i)]);
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        g.coeff[static_cast<std::size_t>(i)] = w * (t.b * t.db + 0.5 * t.d2b);
    }
    g.b_terminal = spec.b(path.terminal());
}

inline LogPsiGradient make_log_psi_gradient(const DriftSpec& spec, const Path& path) {
    LogPsiGradient g;
    fill_log_psi_gradient(g, spec, path);
    return g;
}

// Directional derivative of log Psi along h; the exact derivative of the
// discrete log_psi under the node shift x_i -> x_i + eps h(t_i).
inline double grad_log_psi_pairing(const DriftSpec& spec, const Path& path, const CMVector& h) {
    if (h.grid() != path.grid) {
        throw std::invalid_argument("grad_log_psi_pairing: grid mismatch");
    }
    return make_log_psi_gradient(spec, path).pairing(h);
}

// Scalar profile for cylindrical fields: bounded with bounded derivative.
struct Profile {
    enum class Kind { Constant, AffineClamped, TanhShaped };

    Kind kind = Kind::Constant;
    double a = 1.0;   // constant value / affine slope / tanh amplitude
    double b = 0.0;   // affine intercept / tanh argument scale
    double lo = -1.0, hi = 1.0;  // clamp levels (affine only)

    static Profile constant(double value) { return {Kind::Constant, value, 0.0, 0.0, 0.0}; }
    static Profile affine_clamped(double slope, double intercept, double lo, double hi) {
        if (!(lo < hi)) throw std::invalid_argument("Profile: clamp levels must satisfy lo < hi");
        return {Kind::AffineClamped, slope, intercept, lo, hi};
    }
    static Profile tanh_shaped(double amplitude, double scale) {
        return {Kind::TanhShaped, amplitude, scale, 0.0, 0.0};
    }

    double value(double t) const {
        switch (kind) {
            case Kind::Constant: return a;
            case Kind::AffineClamped: {
                const double v = a * t + b;
                return v < lo ? lo : (v > hi ? hi : v);
            }
            case Kind::TanhShaped: return a * std::tanh(b * t);
        }
        return 0.0;
    }

    double slope(double t) const {
        switch (kind) {
            case Kind::Constant: return 0.0;
            case Kind::AffineClamped: {
                const double v = a * t + b;
                return (v < lo || v > hi) ? 0.0 : a;
            }
            case Kind::TanhShaped: {
                const double th = std::tanh(b * t);
                return a * b * (1.0 - th * th);
            }
        }
        return 0.0;
    }

    double sup_abs() const {
        switch (kind) {
            case Kind::Constant: return std::abs(a);
            case Kind::AffineClamped: return std::max(std::abs(lo), std::abs(hi));
            case Kind::TanhShaped: return std::abs(a);
        }
        return 0.0;
    }
};

// Cylindrical vector field F(x) = sum_i phi_i(k_i^(x)) h_i with test
// directions k_i and value directions h_i.
struct CylindricalField {
    struct Term {
        Profile phi;
        CMVector k;
        CMVector h;
    };

    std::string id;
    std::vector<Term> terms;

    // Upper bound for sup_x ||F(x)||_H.
    double sup_budget() const {
        double s = 0.0;
        for (const auto& t : terms) s += t.phi.sup_abs() * t.h.norm_h();
        return s;
    }

    CylindricalField scaled(double factor) const {
        CylindricalField out{id, {}};
        out.terms.reserve(terms.size());
        for (const auto& t : terms) {
            Profile p = t.phi;
            p.a *= factor;
            if (p.kind == Profile::Kind::AffineClamped) {
                p.b *= factor;
                p.lo *= factor;
                p.hi *= factor;
            }
            out.terms.push_back({p, t.k, t.h});
        }
        return out;
    }
};

// Pathwise divergence of a cylindrical field under nu = Psi P^W:
//   sum_i [ phi_i'(k_i^) <k_i,h_i>_H - phi_i(k_i^) h_i^(x) ]
//   + sum_i phi_i(k_i^) <grad log Psi, h_i>_H.
inline double divergence_nu(const CylindricalField& field, const LogPsiGradient& grad,
                            const Path& path) {
    double acc = 0.0;
    for (const auto& term : field.terms) {
        const double khat = paley_wiener(term.k, path);
        const double phi = term.phi.value(khat);
        const double dphi = term.phi.slope(khat);
        acc += dphi * cm_inner(term.k, term.h);
        acc -= phi * paley_wiener(term.h, path);
        acc += phi * grad.pairing(term.h);
    }
    return acc;
}

inline double divergence_nu(const CylindricalField& field, const DriftSpec& spec,
                            const Path& path) {
    return divergence_nu(field, make_log_psi_gradient(spec, path), path);
}

// <grad g, F(x)>_H = sum_i phi_i(k_i^) h_i(tau).
inline double grad_g_field_pairing(const CylindricalField& field, const Path& path,
                                   const MinRecord& min_rec) {
    double acc = 0.0;
    for (const auto& term : field.terms) {
        const double khat = paley_wiener(term.k, path);
        acc += term.phi.value(khat) * term.h.value(min_rec.tau);
    }
    return acc;
}

// Ramp approximation of the indicator of {xi >= r}.
inline double theta_eps(double xi, double r, double eps) {
    if (xi <= r) return 0.0;
    if (xi >= r + eps) return 1.0;
    return (xi - r) / eps;
}

struct IbpResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double se = 0.0;          // batch-means error of the residual
    std::int64_t band_hits = 0;
    bool degenerate = false;
};

// Both sides of the band integration-by-parts identity on one shared path
// batch:
//   lhs = (1/eps) E[ Psi 1{m in [r, r+eps]} <grad g, F>_H ]
//   rhs = -E[ Psi theta_eps(m) div_nu F ].
inline IbpResult ibp_residual(const DriftSpec& spec, const CylindricalField& field, double r,
                              double eps, std::int64_t n_paths, const Grid& grid,
                              std::uint64_t seed, bool refine = true, int workers = 0) {
    if (!(eps > 0.0)) throw std::domain_error("ibp_residual: eps must be > 0");
    if (!(r + eps < 0.0)) throw std::domain_error("ibp_residual: need r + eps < 0");
    const Batches batches(n_paths, kBatchCount);
    struct BatchAcc {
        double lhs = 0.0, rhs = 0.0;
        std::int64_t hits = 0;
        std::int64_t count = 0;
    };
    std::vector<BatchAcc> partial(static_cast<std::size_t>(batches.count));
    const int nw = resolve_workers(workers);
    run_batches(batches, nw, [&](int b, std::int64_t lo, std::int64_t hi) {
        Path scratch(grid);
        LogPsiGradient grad;
        BatchAcc acc;
        for (std::int64_t i = lo; i < hi; ++i) {
            RngStream stream(seed, static_cast<std::uint64_t>(i));
            sample_brownian_into(scratch, stream);
            const double weight = std::exp(log_psi(spec, scratch));
            const MinRecord rec = path_min(scratch, stream, refine);
            if (rec.m >= r && rec.m <= r + eps) {
                acc.lhs += weight * grad_g_field_pairing(field, scratch, rec) / eps;
                ++acc.hits;
            }
            const double th = theta_eps(rec.m, r, eps);
            if (th != 0.0) {
                fill_log_psi_gradient(grad, spec, scratch);
                acc.rhs -= weight * th * divergence_nu(field, grad, scratch);
            }
        }
        acc.count = hi - lo;
        partial[static_cast<std::size_t>(b)] = acc;
    });
    IbpResult out;
    std::vector<double> batch_resid(partial.size());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t b = 0; b < partial.size(); ++b) {
        lhs += partial[b].lhs;
        rhs += partial[b].rhs;
        out.band_hits += partial[b].hits;
        batch_resid[b] = (partial[b].lhs - partial[b].rhs) / static_cast<double>(partial[b].count);
    }
    const double n = static_cast<double>(n_paths);
    out.lhs = lhs / n;
    out.rhs = rhs / n;
    out.residual = out.lhs - out.rhs;
    out.se = batch_means(batch_resid).se;
    out.degenerate = (out.band_hits == 0);
    return out;
}

struct PerimeterFieldResult {
    std::string id;
    double value = 0.0;  // estimate of int_{O_r} div_nu F dnu
    double se = 0.0;
    bool within = false;
};

struct PerimeterReport {
    double l = 0.0;     // band limit l(r) from the smoothed density
    double l_se = 0.0;
    std::int64_t band_hits = 0;
    bool degenerate = false;
    std::vector<PerimeterFieldResult> fields;
    double max_abs = 0.0;  // max attained |value|: a lower bound for the perimeter
    bool all_within = false;
};

// Estimates int_{O_r} div_nu F dnu for each unit-budget field and checks
// |value| <= l(r) + 3 * combined error, l(r) estimated on the same batch.
inline PerimeterReport perimeter_bound_check(const DriftSpec& spec, double r,
                                             std::span<const CylindricalField> fields,
                                             double eps, std::int64_t n_paths, const Grid& grid,
                                             std::uint64_t seed, bool refine = true,
                                             int workers = 0) {
    if (!(r < 0.0)) throw std::domain_error("perimeter_bound_check: need r < 0");
    if (!(eps > 0.0 && r + eps < 0.0)) {
        throw std::domain_error("perimeter_bound_check: need eps > 0 and r + eps < 0");
    }
    for (const auto& f : fields) {
        if (f.sup_budget() > 1.0 + 1e-12) {
            throw std::invalid_argument("perimeter_bound_check: field budget exceeds 1");
        }
    }
    const std::size_t nf = fields.size();
    const Batches batches(n_paths, kBatchCount);
    struct BatchAcc {
        std::vector<double> value;
        double band = 0.0;
        std::int64_t hits = 0;
        std::int64_t count = 0;
    };
    std::vector<BatchAcc> partial(static_cast<std::size_t>(batches.count));
    const int nw = resolve_workers(workers);
    run_batches(batches, nw, [&](int b, std::int64_t lo, std::int64_t hi) {
        Path scratch(grid);
        LogPsiGradient grad;
        BatchAcc acc;
        acc.value.assign(nf, 0.0);
        for (std::int64_t i = lo; i < hi; ++i) {
            RngStream stream(seed, static_cast<std::uint64_t>(i));
            sample_brownian_into(scratch, stream);
            const double weight = std::exp(log_psi(spec, scratch));
            const MinRecord rec = path_min(scratch, stream, refine);
            if (rec.m > r) {
                fill_log_psi_gradient(grad, spec, scratch);
                for (std::size_t j = 0; j < nf; ++j) {
                    acc.value[j] += weight * divergence_nu(fields[j], grad, scratch);
                }
            }
            if (rec.m >= r && rec.m <= r + eps) {
                acc.band += weight;
                ++acc.hits;
            }
        }
        acc.count = hi - lo;
        partial[static_cast<std::size_t>(b)] = acc;
    });

    PerimeterReport rep;
    const double n = static_cast<double>(n_paths);
    std::vector<double> batch_stat(partial.size());
    for (std::size_t b = 0; b < partial.size(); ++b) {
        batch_stat[b] = partial[b].band / static_cast<double>(partial[b].count) / eps;
        rep.band_hits += partial[b].hits;
    }
    double band_total = 0.0;
    for (const auto& p : partial) band_total += p.band;
    rep.l = band_total / n / eps;
    rep.l_se = batch_means(batch_stat).se;
    rep.degenerate = (rep.band_hits == 0);

    rep.all_within = true;
    for (std::size_t j = 0; j < nf; ++j) {
        PerimeterFieldResult fr;
        fr.id = fields[j].id;
        double total = 0.0;
        for (std::size_t b = 0; b < partial.size(); ++b) {
            batch_stat[b] = partial[b].value[j] / static_cast<double>(partial[b].count);
            total += partial[b].value[j];
        }
        fr.value = total / n;
        fr.se = batch_means(batch_stat).se;
        fr.within = std::abs(fr.value) <=
                    rep.l + 3.0 * std::sqrt(fr.se * fr.se + rep.l_se * rep.l_se);
        rep.max_abs = std::max(rep.max_abs, std::abs(fr.value));
        rep.all_within = rep.all_within && fr.within;
        rep.fields.push_back(std::move(fr));
    }
    return rep;
}

// Five unit-budget cylindrical fields exercising all profile kinds.
inline std::vector<CylindricalField> standard_unit_fields(const Grid& grid) {
    const CMVector lin = CMVector::linear(grid);  // ||h||_H = 1
    const CMVector sine = CMVector::from_function(
        grid, [](double t) { return std::sin(1.5707963267948966 * t); });
    const double sn = sine.norm_h();
    const CMVector sine_unit = sine.scaled(1.0 / sn);
    std::vector<CylindricalField> fields;
    fields.push_back({"const_linear", {{Profile::constant(1.0), lin, lin}}});
    fields.push_back({"const_sine", {{Profile::constant(1.0), lin, sine_unit}}});
    fields.push_back({"tanh_linear", {{Profile::tanh_shaped(1.0, 1.0), lin, lin}}});
    fields.push_back({"clamp_sine", {{Profile::affine_clamped(1.0, 0.0, -1.0, 1.0), sine_unit, lin}}});
    fields.push_back({"mixed_pair",
                      {{Profile::constant(0.5), lin, lin},
                       {Profile::tanh_shaped(0.5, 2.0), sine_unit, sine_unit}}});
    return fields;
}

}
