#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ecp/empirical_process.hpp"
#include "ecp/grid.hpp"
#include "ecp/rng.hpp"
#include "ecp/sample.hpp"

namespace ecp {

enum class MultiplierLaw { standard_normal, rademacher };

// i.i.d. multipliers xi_1..xi_n, zero mean and unit variance; both offered
// laws satisfy the integrability condition of the multiplier CLT.
struct MultiplierDraw {
    std::vector<double> xi;
    MultiplierLaw law = MultiplierLaw::standard_normal;

    static MultiplierDraw generate(int n, MultiplierLaw law, Rng& rng) {
        MultiplierDraw d;
        d.law = law;
        d.xi.resize(n);
        for (double& x : d.xi) {
            x = (law == MultiplierLaw::standard_normal) ? rng.normal()
                                                        : (rng.uniform() < 0.5 ? -1.0 : 1.0);
        }
        return d;
    }

    // Test hook: identically zero multipliers.
    static MultiplierDraw zeros(int n) {
        MultiplierDraw d;
        d.xi.assign(n, 0.0);
        return d;
    }
};

// Finite-difference estimator settings: spacing h = c n^{-1/2}, estimates
// clamped to [0, K] so the uniform-boundedness hypothesis holds by
// construction.
struct DerivativeEstimatorConfig {
    double spacing_constant = 1.0;
    double clamp = 1.0;  // K >= 1

    double spacing(int n) const {
        if (!(spacing_constant > 0.0) || !(clamp >= 1.0))
            throw std::invalid_argument("DerivativeEstimatorConfig: need c > 0 and K >= 1");
        return spacing_constant / std::sqrt(static_cast<double>(n));
    }
};

// alpha'_n(u) = n^{-1/2} sum_i xi_i (1{U_i <= v_n(u)} - C_n(u)), with the
// indicator thresholded at the empirical quantiles (rank form).
inline double multiplier_alpha(const SampleMatrix& s, const MultiplierDraw& draw,
                               std::span<const double> u) {
    s.require_unit();
    if (static_cast<int>(draw.xi.size()) != s.n)
        throw std::invalid_argument("multiplier_alpha: draw length != n");
    std::vector<double> t(s.d);
    for (int j = 0; j < s.d; ++j) t[j] = marginal_quantile(s, j, u[j]);
    int count = 0;
    double wsum = 0.0;
    for (int i = 0; i < s.n; ++i) {
        bool in = true;
        for (int j = 0; j < s.d && in; ++j) in = s(i, j) <= t[j];
        if (in) {
            ++count;
            wsum += draw.xi[i];
        }
    }
    const double cn = static_cast<double>(count) / s.n;
    double xsum = 0.0;
    for (double x : draw.xi) xsum += x;
    return (wsum - cn * xsum) / std::sqrt(static_cast<double>(s.n));
}
inline double multiplier_alpha(const SampleMatrix& s, const MultiplierDraw& draw,
                               std::initializer_list<double> u) {
    return multiplier_alpha(s, draw, std::span<const double>(u.begin(), u.size()));
}

// Finite difference of an arbitrary copula-like evaluator; `cn` is called
// with the shifted points. Division is by the actual (possibly one-sided)
// window width, and the estimate is clamped to [0, K].
template <typename Eval>
double fd_partial_estimate(const Eval& cn, int n, int j, std::span<const double> u,
                           const DerivativeEstimatorConfig& cfg) {
    const double h = cfg.spacing(n);
    std::vector<double> hi(u.begin(), u.end()), lo(u.begin(), u.end());
    hi[j] = std::min(u[j] + h, 1.0);
    lo[j] = std::max(u[j] - h, 0.0);
    const double width = hi[j] - lo[j];
    const double est = (cn(std::span<const double>(hi)) - cn(std::span<const double>(lo))) / width;
    return std::clamp(est, 0.0, cfg.clamp);
}

inline double fd_partial_estimate(const SampleMatrix& s, int j, std::span<const double> u,
                                  const DerivativeEstimatorConfig& cfg) {
    return fd_partial_estimate(
        [&](std::span<const double> v) { return empirical_copula(s, v); }, s.n, j, u, cfg);
}
inline double fd_partial_estimate(const SampleMatrix& s, int j, std::initializer_list<double> u,
                                  const DerivativeEstimatorConfig& cfg) {
    return fd_partial_estimate(s, j, std::span<const double>(u.begin(), u.size()), cfg);
}

enum class Functional { sup_abs, cvm };

inline const char* to_string(Functional f) {
    return f == Functional::sup_abs ? "sup_abs" : "cvm";
}

inline double apply_functional(const ProcessField& f, Functional which) {
    return which == Functional::sup_abs ? f.sup_abs() : f.cvm();
}

// Per-sample precomputation shared by all multiplier replicates: the C_n
// field, the clamped finite-difference derivative fields, the rank-form
// binning thresholds and the edge-node indices.
class MultiplierContext {
public:
    MultiplierContext(const SampleMatrix& s, GridPtr grid, DerivativeEstimatorConfig cfg)
        : s_(&s), grid_(std::move(grid)), cfg_(cfg) {
        s.require_unit();
        const Grid& g = *grid_;
        thresholds_ = quantile_thresholds(s, g);
        cn_ = empirical_copula_field(s, g);

        // point evaluator against cached sorted columns
        std::vector<std::vector<double>> sorted(s.d);
        for (int j = 0; j < s.d; ++j) sorted[j] = s.sorted_column(j);
        const auto cn_point = [&](std::span<const double> u) {
            std::vector<double> t(s.d);
            for (int j = 0; j < s.d; ++j) {
                if (u[j] == 0.0) {
                    t[j] = 0.0;
                    continue;
                }
                const auto k = static_cast<std::size_t>(std::ceil(s.n * u[j]));
                t[j] = sorted[j][std::min(k, static_cast<std::size_t>(s.n)) - 1];
            }
            int count = 0;
            for (int i = 0; i < s.n; ++i) {
                bool in = true;
                for (int j = 0; j < s.d && in; ++j) in = s(i, j) <= t[j];
                count += in;
            }
            return static_cast<double>(count) / s.n;
        };

        dhat_.assign(g.dim(), std::vector<double>(g.node_count()));
        std::vector<double> u(g.dim());
        for (int j = 0; j < g.dim(); ++j) {
            for (std::size_t f = 0; f < g.node_count(); ++f) {
                g.node(f, u);
                dhat_[j][f] = fd_partial_estimate(cn_point, s.n, j, u, cfg_);
            }
        }
        edge_.resize(g.dim());
        for (int j = 0; j < g.dim(); ++j) {
            edge_[j].resize(g.axis_size(j));
            for (std::size_t a = 0; a < g.axis_size(j); ++a) edge_[j][a] = g.edge_index(j, a);
        }
    }

    const std::vector<std::vector<double>>& derivative_fields() const { return dhat_; }
    const GridPtr& grid() const { return grid_; }

    // CC'_n(u) = alpha'_n(u) - sum_j hat-dC_nj(u) alpha'_nj(u_j).
    ProcessField process(const MultiplierDraw& draw) const {
        if (static_cast<int>(draw.xi.size()) != s_->n)
            throw std::invalid_argument("multiplier process: draw length != n");
        const Grid& g = *grid_;
        double xsum = 0.0;
        for (double x : draw.xi) xsum += x;
        auto w = detail::cumulative_count_field(*s_, g, thresholds_, draw.xi);
        const double rn = std::sqrt(static_cast<double>(s_->n));

        ProcessField alpha(grid_, FieldLabel::alpha_n);
        for (std::size_t f = 0; f < w.size(); ++f)
            alpha.values[f] = (w[f] - cn_[f] * xsum) / rn;

        ProcessField out(grid_, FieldLabel::CC_n_prime);
        std::vector<std::size_t> idx(g.dim());
        for (std::size_t f = 0; f < w.size(); ++f) {
            g.unravel(f, idx);
            double v = alpha.values[f];
            for (int j = 0; j < g.dim(); ++j)
                v -= dhat_[j][f] * alpha.values[edge_[j][idx[j]]];
            out.values[f] = v;
        }
        return out;
    }

private:
    const SampleMatrix* s_;
    GridPtr grid_;
    DerivativeEstimatorConfig cfg_;
    std::vector<std::vector<double>> thresholds_;
    std::vector<double> cn_;
    std::vector<std::vector<double>> dhat_;
    std::vector<std::vector<std::size_t>> edge_;
};

inline ProcessField multiplier_copula_process(const SampleMatrix& s, const MultiplierDraw& draw,
                                              GridPtr grid, const DerivativeEstimatorConfig& cfg) {
    return MultiplierContext(s, std::move(grid), cfg).process(draw);
}

// Functional values across B multiplier replicates; replicate k is
// reproducible in isolation from (master seed, k).
struct ReplicateSet {
    std::vector<double> values;
    std::uint64_t master_seed = 0;
    Functional functional = Functional::sup_abs;
    MultiplierLaw law = MultiplierLaw::standard_normal;
};

inline MultiplierDraw replicate_draw(int n, MultiplierLaw law, std::uint64_t master_seed, int k) {
    Rng rng = Rng::derive(master_seed, {static_cast<std::uint64_t>(k)});
    return MultiplierDraw::generate(n, law, rng);
}

inline ReplicateSet replicate_batch(const SampleMatrix& s, int B, GridPtr grid,
                                    const DerivativeEstimatorConfig& cfg, Functional functional,
                                    std::uint64_t master_seed,
                                    MultiplierLaw law = MultiplierLaw::standard_normal) {
    if (B < 1) throw std::invalid_argument("replicate_batch: B >= 1 required");
    MultiplierContext ctx(s, std::move(grid), cfg);
    ReplicateSet set;
    set.master_seed = master_seed;
    set.functional = functional;
    set.law = law;
    set.values.resize(B);
    for (int k = 0; k < B; ++k) {
        const auto draw = replicate_draw(s.n, law, master_seed, k);
        set.values[k] = apply_functional(ctx.process(draw), functional);
    }
    return set;
}

}  // namespace ecp
