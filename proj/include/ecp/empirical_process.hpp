#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ecp/copula/model.hpp"
#include "ecp/grid.hpp"
#include "ecp/sample.hpp"

namespace ecp {

// --- pointwise operations ---------------------------------------------

namespace detail {
inline void check_unit_point(const SampleMatrix& s, std::span<const double> u) {
    if (static_cast<int>(u.size()) != s.d)
        throw std::invalid_argument("point dimension does not match the sample");
    for (double x : u)
        if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("coordinate outside [0,1]");
}
}  // namespace detail

// G_n(u) = (1/n) #{i : U_i <= u componentwise}.
inline double ecdf_joint(const SampleMatrix& s, std::span<const double> u) {
    s.require_unit();
    detail::check_unit_point(s, u);
    int count = 0;
    for (int i = 0; i < s.n; ++i) {
        bool in = true;
        for (int j = 0; j < s.d && in; ++j) in = s(i, j) <= u[j];
        count += in;
    }
    return static_cast<double>(count) / s.n;
}
inline double ecdf_joint(const SampleMatrix& s, std::initializer_list<double> u) {
    return ecdf_joint(s, std::span<const double>(u.begin(), u.size()));
}

// G_nj^{-1}(p): the k-th ascending order statistic for (k-1)/n < p <= k/n,
// and 0 at p = 0.
inline double marginal_quantile(const SampleMatrix& s, int j, double p) {
    s.require_unit();
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("marginal_quantile: p outside [0,1]");
    if (p == 0.0) return 0.0;
    const auto col = s.sorted_column(j);
    const auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(s.n) * p));
    return col[std::min(k, static_cast<std::size_t>(s.n)) - 1];
}

inline double marginal_ecdf(const SampleMatrix& s, int j, double p) {
    s.require_unit();
    int count = 0;
    for (int i = 0; i < s.n; ++i) count += s(i, j) <= p;
    return static_cast<double>(count) / s.n;
}

// Empirical copula C_n(u) = G_n(G_n1^{-1}(u_1), ..., G_nd^{-1}(u_d)).
inline double empirical_copula(const SampleMatrix& s, std::span<const double> u) {
    s.require_unit();
    detail::check_unit_point(s, u);
    std::vector<double> t(s.d);
    for (int j = 0; j < s.d; ++j) t[j] = marginal_quantile(s, j, u[j]);
    return ecdf_joint(s, t);
}
inline double empirical_copula(const SampleMatrix& s, std::initializer_list<double> u) {
    return empirical_copula(s, std::span<const double>(u.begin(), u.size()));
}

// alpha_n(u) = sqrt(n) (G_n(u) - C(u)).
inline double empirical_process_alpha(const SampleMatrix& s, const CopulaModel& model,
                                      std::span<const double> u) {
    return std::sqrt(static_cast<double>(s.n)) * (ecdf_joint(s, u) - model.cdf(u));
}
inline double empirical_process_alpha(const SampleMatrix& s, const CopulaModel& model,
                                      std::initializer_list<double> u) {
    return empirical_process_alpha(s, model, std::span<const double>(u.begin(), u.size()));
}

// alpha_nj(p) = sqrt(n) (G_nj(p) - p); vanishes at p = 0 and p = 1.
inline double marginal_alpha(const SampleMatrix& s, int j, double p) {
    return std::sqrt(static_cast<double>(s.n)) * (marginal_ecdf(s, j, p) - p);
}

// --- grid fields --------------------------------------------------------

namespace detail {

// Scatter per-observation weights into grid bins given per-axis thresholds
// (first node whose threshold is >= the value), then accumulate.
inline std::vector<double> cumulative_count_field(const SampleMatrix& s, const Grid& g,
                                                  const std::vector<std::vector<double>>& thresholds,
                                                  std::span<const double> weights) {
    std::vector<double> field(g.node_count(), 0.0);
    for (int i = 0; i < s.n; ++i) {
        std::size_t flat = 0;
        bool inside = true;
        for (int j = 0; j < s.d && inside; ++j) {
            const auto& t = thresholds[j];
            const auto it = std::lower_bound(t.begin(), t.end(), s(i, j));
            if (it == t.end()) inside = false;
            else flat += g.stride(j) * static_cast<std::size_t>(it - t.begin());
        }
        if (inside) field[flat] += weights.empty() ? 1.0 : weights[i];
    }
    cumulative_sums_in_place(field, g);
    return field;
}

}  // namespace detail

// G_n on every grid node.
inline std::vector<double> ecdf_field(const SampleMatrix& s, const Grid& g) {
    s.require_unit();
    std::vector<std::vector<double>> thresholds(s.d);
    for (int j = 0; j < s.d; ++j) thresholds[j] = g.axis(j);
    auto field = detail::cumulative_count_field(s, g, thresholds, {});
    for (double& v : field) v /= s.n;
    return field;
}

// Per-axis empirical-quantile thresholds v_n at the grid's axis values.
inline std::vector<std::vector<double>> quantile_thresholds(const SampleMatrix& s, const Grid& g) {
    s.require_unit();
    std::vector<std::vector<double>> thresholds(s.d);
    for (int j = 0; j < s.d; ++j) {
        const auto col = s.sorted_column(j);
        const auto& ax = g.axis(j);
        auto& t = thresholds[j];
        t.resize(ax.size());
        for (std::size_t a = 0; a < ax.size(); ++a) {
            if (ax[a] == 0.0) {
                t[a] = 0.0;
                continue;
            }
            const auto k = static_cast<std::size_t>(std::ceil(s.n * ax[a]));
            t[a] = col[std::min(k, static_cast<std::size_t>(s.n)) - 1];
        }
    }
    return thresholds;
}

// C_n on every grid node; agrees exactly with empirical_copula pointwise.
inline std::vector<double> empirical_copula_field(const SampleMatrix& s, const Grid& g) {
    auto field = detail::cumulative_count_field(s, g, quantile_thresholds(s, g), {});
    for (double& v : field) v /= s.n;
    return field;
}

// sum_i w_i 1{U_i <= v_n(node)} on every node (the multiplier numerator).
inline std::vector<double> weighted_copula_count_field(const SampleMatrix& s, const Grid& g,
                                                       std::span<const double> w) {
    if (static_cast<int>(w.size()) != s.n)
        throw std::invalid_argument("weighted_copula_count_field: weight length != n");
    return detail::cumulative_count_field(s, g, quantile_thresholds(s, g), w);
}

// --- model-on-grid cache -------------------------------------------------

// True cdf and extended first partials tabulated once per grid; experiments
// reuse this across replicates so quadrature-based models stay cheap.
struct ModelGridCache {
    GridPtr grid;
    std::vector<double> cdf;
    std::vector<std::vector<double>> deriv;  // [axis][node]

    static ModelGridCache build(const CopulaModel& model, GridPtr grid, bool with_derivs = true) {
        ModelGridCache c;
        c.grid = std::move(grid);
        const auto& g = *c.grid;
        const std::size_t n = g.node_count();
        c.cdf.resize(n);
        std::vector<double> u(g.dim());
        for (std::size_t f = 0; f < n; ++f) {
            g.node(f, u);
            c.cdf[f] = model.cdf(u);
        }
        if (with_derivs) {
            c.deriv.assign(g.dim(), std::vector<double>(n));
            for (int j = 0; j < g.dim(); ++j) {
                for (std::size_t f = 0; f < n; ++f) {
                    g.node(f, u);
                    c.deriv[j][f] = model.partial_derivative(j, u);
                }
            }
        }
        return c;
    }
};

// --- process fields -------------------------------------------------------

// CC_n = sqrt(n) (C_n - C) on the grid.
inline ProcessField empirical_copula_process(const SampleMatrix& s, const ModelGridCache& cache) {
    ProcessField f(cache.grid, FieldLabel::CC_n);
    const auto cn = empirical_copula_field(s, *cache.grid);
    const double rn = std::sqrt(static_cast<double>(s.n));
    for (std::size_t i = 0; i < cn.size(); ++i) f.values[i] = rn * (cn[i] - cache.cdf[i]);
    return f;
}
inline ProcessField empirical_copula_process(const SampleMatrix& s, const CopulaModel& model,
                                             GridPtr grid) {
    return empirical_copula_process(s, ModelGridCache::build(model, std::move(grid), false));
}

// Oracle approximation tildeCC_n(u) = alpha_n(u) - sum_j dC_j(u) alpha_nj(u_j),
// using the model's true (extended) partial derivatives.
inline ProcessField oracle_tilde_process(const SampleMatrix& s, const ModelGridCache& cache) {
    if (cache.deriv.empty())
        throw std::invalid_argument("oracle_tilde_process: cache built without derivatives");
    const Grid& g = *cache.grid;
    ProcessField f(cache.grid, FieldLabel::tildeCC_n);
    const auto gn = ecdf_field(s, g);
    const double rn = std::sqrt(static_cast<double>(s.n));

    // alpha_nj at the axis nodes, per axis
    std::vector<std::vector<double>> axis_alpha(s.d);
    for (int j = 0; j < s.d; ++j) {
        const auto col = s.sorted_column(j);
        const auto& ax = g.axis(j);
        axis_alpha[j].resize(ax.size());
        for (std::size_t a = 0; a < ax.size(); ++a) {
            const auto count = std::upper_bound(col.begin(), col.end(), ax[a]) - col.begin();
            axis_alpha[j][a] = rn * (static_cast<double>(count) / s.n - ax[a]);
        }
    }

    std::vector<std::size_t> idx(g.dim());
    for (std::size_t fnode = 0; fnode < g.node_count(); ++fnode) {
        g.unravel(fnode, idx);
        double v = rn * (gn[fnode] - cache.cdf[fnode]);
        for (int j = 0; j < g.dim(); ++j) v -= cache.deriv[j][fnode] * axis_alpha[j][idx[j]];
        f.values[fnode] = v;
    }
    return f;
}
inline ProcessField oracle_tilde_process(const SampleMatrix& s, const CopulaModel& model,
                                         GridPtr grid) {
    return oracle_tilde_process(s, ModelGridCache::build(model, std::move(grid)));
}

// Grid supremum of |CC_n - tildeCC_n| (Stute remainder); nondecreasing under
// grid refinement.
inline double sup_remainder(const SampleMatrix& s, const ModelGridCache& cache) {
    const auto cc = empirical_copula_process(s, cache);
    const auto tilde = oracle_tilde_process(s, cache);
    double m = 0.0;
    for (std::size_t i = 0; i < cc.values.size(); ++i)
        m = std::max(m, std::abs(cc.values[i] - tilde.values[i]));
    return m;
}
inline double sup_remainder(const SampleMatrix& s, const CopulaModel& model, GridPtr grid) {
    return sup_remainder(s, ModelGridCache::build(model, std::move(grid)));
}

}  // namespace ecp
