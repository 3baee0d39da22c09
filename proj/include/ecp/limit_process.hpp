#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecp/copula/model.hpp"
#include "ecp/empirical_process.hpp"
#include "ecp/grid.hpp"
#include "ecp/rng.hpp"

namespace ecp {

struct SingularCovariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// cov(alpha(u), alpha(v)) = C(u ^ v) - C(u) C(v), the C-Brownian bridge.
inline double bridge_covariance(const CopulaModel& model, std::span<const double> u,
                                std::span<const double> v) {
    std::vector<double> m(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) m[j] = std::min(u[j], v[j]);
    return model.cdf(m) - model.cdf(u) * model.cdf(v);
}
inline double bridge_covariance(const CopulaModel& model, std::initializer_list<double> u,
                                std::initializer_list<double> v) {
    return bridge_covariance(model, std::span<const double>(u.begin(), u.size()),
                             std::span<const double>(v.begin(), v.size()));
}

// Dense lower-triangular factor of the node covariance of the C-Brownian
// bridge. Nodes with zero variance (C(u) in {0,1}, i.e. the grounded faces
// and the all-ones corner) are pinned to exactly zero and excluded; the
// factorization runs on the remaining block with escalating diagonal jitter
// 0, 1e-12, ..., 1e-8 until it succeeds.
class CovarianceFactor {
public:
    static constexpr std::size_t kMaxNodes = 10000;  // dense budget

    static CovarianceFactor build(const CopulaModel& model, GridPtr grid) {
        CovarianceFactor cf;
        cf.grid_ = std::move(grid);
        const Grid& g = *cf.grid_;
        const std::size_t n = g.node_count();
        if (n > kMaxNodes)
            throw std::invalid_argument("CovarianceFactor: grid exceeds dense budget of 10^4 nodes");

        // cdf per node and per-node axis indices for min-node lookups
        cf.cdf_.resize(n);
        std::vector<double> u(g.dim());
        for (std::size_t f = 0; f < n; ++f) {
            g.node(f, u);
            cf.cdf_[f] = model.cdf(u);
        }
        std::vector<std::uint32_t> idx(n * g.dim());
        {
            std::vector<std::size_t> tmp(g.dim());
            for (std::size_t f = 0; f < n; ++f) {
                g.unravel(f, tmp);
                for (int j = 0; j < g.dim(); ++j)
                    idx[f * g.dim() + j] = static_cast<std::uint32_t>(tmp[j]);
            }
        }

        cf.slot_.assign(n, -1);
        for (std::size_t f = 0; f < n; ++f) {
            if (cf.cdf_[f] > 0.0 && cf.cdf_[f] < 1.0) {
                cf.slot_[f] = static_cast<std::ptrdiff_t>(cf.active_.size());
                cf.active_.push_back(f);
            }
        }
        const std::size_t k = cf.active_.size();
        if (k == 0) {
            cf.jitter_ = 0.0;
            return cf;
        }

        const auto cov_entry = [&](std::size_t a, std::size_t b) {
            std::size_t fmin = 0;
            for (int j = 0; j < g.dim(); ++j) {
                const auto ia = idx[a * g.dim() + j];
                const auto ib = idx[b * g.dim() + j];
                fmin += g.stride(j) * static_cast<std::size_t>(std::min(ia, ib));
            }
            return cf.cdf_[fmin] - cf.cdf_[a] * cf.cdf_[b];
        };

        static constexpr double jitters[] = {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8};
        cf.chol_.resize(k * k);
        for (double jit : jitters) {
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c <= r; ++c)
                    cf.chol_[r * k + c] = cov_entry(cf.active_[r], cf.active_[c]) +
                                          (r == c ? jit : 0.0);
            if (cholesky_in_place(cf.chol_, k)) {
                cf.jitter_ = jit;
                return cf;
            }
        }
        throw SingularCovariance("bridge covariance not factorizable at maximum jitter 1e-8");
    }

    const GridPtr& grid() const { return grid_; }
    double jitter() const { return jitter_; }
    std::size_t active_count() const { return active_.size(); }
    const std::vector<double>& node_cdf() const { return cdf_; }

    // factor . factor^T for two flat node indices (0 for pinned nodes).
    double reproduce(std::size_t a, std::size_t b) const {
        const auto sa = slot_[a], sb = slot_[b];
        if (sa < 0 || sb < 0) return 0.0;
        const std::size_t k = active_.size();
        const std::size_t lo = static_cast<std::size_t>(std::min(sa, sb));
        double s = 0.0;
        for (std::size_t t = 0; t <= lo; ++t)
            s += chol_[static_cast<std::size_t>(sa) * k + t] *
                 chol_[static_cast<std::size_t>(sb) * k + t];
        return s;
    }

    // Centered Gaussian field with the bridge covariance; pinned nodes are
    // exactly zero in every draw.
    ProcessField sample(Rng& rng) const {
        ProcessField f(grid_, FieldLabel::bridge_alpha);
        const std::size_t k = active_.size();
        if (k == 0) return f;
        std::vector<double> z(k);
        for (double& v : z) v = rng.normal();
        for (std::size_t r = 0; r < k; ++r) {
            double s = 0.0;
            const double* row = &chol_[r * k];
            for (std::size_t t = 0; t <= r; ++t) s += row[t] * z[t];
            f.values[active_[r]] = s;
        }
        return f;
    }

private:
    static bool cholesky_in_place(std::vector<double>& a, std::size_t k) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = a[i * k + j];
                const double* ri = &a[i * k];
                const double* rj = &a[j * k];
                for (std::size_t t = 0; t < j; ++t) s -= ri[t] * rj[t];
                if (i == j) {
                    if (s <= 0.0) return false;
                    a[i * k + j] = std::sqrt(s);
                } else {
                    a[i * k + j] = s / a[j * k + j];
                }
            }
            for (std::size_t j = i + 1; j < k; ++j) a[i * k + j] = 0.0;
        }
        return true;
    }

    GridPtr grid_;
    std::vector<double> cdf_;
    std::vector<std::size_t> active_;
    std::vector<std::ptrdiff_t> slot_;
    std::vector<double> chol_;
    double jitter_ = 0.0;
};

inline ProcessField sample_bridge(const CovarianceFactor& factor, Rng& rng) {
    return factor.sample(rng);
}
inline ProcessField sample_bridge(const CopulaModel& model, GridPtr grid, Rng& rng) {
    return CovarianceFactor::build(model, std::move(grid)).sample(rng);
}

// CC(u) = alpha(u) - sum_j dC_j(u) alpha_j(u_j), with alpha_j read off the
// bridge field at the edge nodes (1,...,u_j,...,1).
inline ProcessField limit_process_field(const ModelGridCache& cache, const ProcessField& bridge) {
    if (cache.grid != bridge.grid)
        throw std::invalid_argument("limit_process_field: cache and bridge use different grids");
    if (cache.deriv.empty())
        throw std::invalid_argument("limit_process_field: cache built without derivatives");
    const Grid& g = *cache.grid;
    ProcessField out(cache.grid, FieldLabel::limit_CC);
    std::vector<std::vector<std::size_t>> edge(g.dim());
    for (int j = 0; j < g.dim(); ++j) {
        edge[j].resize(g.axis_size(j));
        for (std::size_t a = 0; a < g.axis_size(j); ++a) edge[j][a] = g.edge_index(j, a);
    }
    std::vector<std::size_t> idx(g.dim());
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.unravel(f, idx);
        double v = bridge.values[f];
        for (int j = 0; j < g.dim(); ++j)
            v -= cache.deriv[j][f] * bridge.values[edge[j][idx[j]]];
        out.values[f] = v;
    }
    return out;
}

}  // namespace ecp
