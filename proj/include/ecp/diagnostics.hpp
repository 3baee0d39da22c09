#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ecp/copula/extreme_value.hpp"
#include "ecp/copula/model.hpp"
#include "ecp/empirical_process.hpp"
#include "ecp/grid.hpp"
#include "ecp/rng.hpp"

namespace ecp {

enum class ConditionId { first_order_c21, second_order_c41, pickands_52 };
enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(ConditionId id) {
    switch (id) {
        case ConditionId::first_order_c21: return "C2.1";
        case ConditionId::second_order_c41: return "C4.1";
        case ConditionId::pickands_52: return "P5.2";
    }
    return "?";
}
inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct ScaleEvidence {
    int axis = -1;      // -1 when not axis-specific
    double scale = 0;   // probe scale (layer epsilon or weight epsilon)
    double spacing = 0; // finest node spacing used at this scale
    double value = 0;   // max oscillation or K-hat at this scale
};

struct ConditionReport {
    ConditionId id = ConditionId::first_order_c21;
    Verdict verdict = Verdict::inconclusive;
    std::vector<ScaleEvidence> evidence;
    std::vector<double> witness;  // located witness point; empty if none
    bool declared = false;
    bool matches_declaration = false;
    std::string detail;
};

// --- Condition 2.1 probe ---------------------------------------------------

struct FirstOrderProbeSchedule {
    std::vector<double> epsilons{0.1, 0.05, 0.01};
    std::vector<int> resolutions{21, 41, 81};  // spacing halves between entries
};

namespace detail {

struct LayerJump {
    double value = 0.0;
    std::vector<double> where;
};

// Max |dC_j| difference between adjacent nodes of the lattice
// [eps,1-eps] (axis j) x [0,1]^{d-1}, m nodes per axis.
inline LayerJump layer_max_jump(const CopulaModel& model, int j, double eps, int m) {
    const int d = model.dim();
    std::vector<std::vector<double>> axes(d);
    for (int k = 0; k < d; ++k) {
        axes[k].resize(m);
        const double lo = (k == j) ? eps : 0.0;
        const double hi = (k == j) ? 1.0 - eps : 1.0;
        for (int i = 0; i < m; ++i)
            axes[k][i] = lo + (hi - lo) * static_cast<double>(i) / (m - 1);
    }
    std::vector<std::size_t> strides(d, 1);
    for (int k = d - 1; k > 0; --k) strides[k - 1] = strides[k] * m;
    const std::size_t total = strides[0] * m;

    std::vector<double> vals(total);
    std::vector<double> u(d);
    for (std::size_t f = 0; f < total; ++f) {
        for (int k = 0; k < d; ++k) u[k] = axes[k][(f / strides[k]) % m];
        vals[f] = model.partial_derivative(j, u);
    }

    LayerJump best;
    for (std::size_t f = 0; f < total; ++f) {
        for (int k = 0; k < d; ++k) {
            const std::size_t ik = (f / strides[k]) % m;
            if (ik + 1 >= static_cast<std::size_t>(m)) continue;
            const double jump = std::abs(vals[f + strides[k]] - vals[f]);
            if (jump > best.value) {
                best.value = jump;
                best.where.resize(d);
                for (int t = 0; t < d; ++t) best.where[t] = axes[t][(f / strides[t]) % m];
                best.where[k] = 0.5 * (axes[k][ik] + axes[k][ik + 1]);
            }
        }
    }
    return best;
}

}  // namespace detail

// Continuity probe for the first partial derivatives on the layers
// {eps <= u_j <= 1-eps}. Within each fixed layer the lattice is refined
// (spacing halves per resolution step); a derivative continuous on the layer
// has adjacent-node jumps shrinking proportionally to the spacing, while a
// genuine discontinuity leaves a located jump that does not shrink.
inline ConditionReport probe_condition_first_order(
    const CopulaModel& model, const FirstOrderProbeSchedule& schedule = {}) {
    ConditionReport rep;
    rep.id = ConditionId::first_order_c21;
    rep.declared = model.caps().condition_2_1;
    bool any_fail = false, any_inconclusive = false;
    std::ostringstream notes;

    for (int j = 0; j < model.dim(); ++j) {
        for (double eps : schedule.epsilons) {
            std::vector<detail::LayerJump> jumps;
            for (int m : schedule.resolutions)
                jumps.push_back(detail::layer_max_jump(model, j, eps, m));
            const double first = jumps.front().value;
            const double last = jumps.back().value;

            ScaleEvidence ev;
            ev.axis = j;
            ev.scale = eps;
            ev.spacing = 1.0 / (schedule.resolutions.back() - 1);
            ev.value = last;
            rep.evidence.push_back(ev);
            notes << "axis " << j << " eps " << eps << " jumps";
            for (const auto& jv : jumps) notes << ' ' << jv.value;
            notes << '\n';

            if (last < 1e-6 || last <= 0.6 * first) continue;  // shrinking: layer passes
            if (last >= 0.85 * first && last > 0.02) {
                any_fail = true;
                if (rep.witness.empty()) rep.witness = jumps.back().where;
            } else {
                any_inconclusive = true;
            }
        }
    }
    rep.verdict = any_fail ? Verdict::fail
                           : (any_inconclusive ? Verdict::inconclusive : Verdict::pass);
    rep.matches_declaration = (rep.verdict == Verdict::pass && rep.declared) ||
                              (rep.verdict == Verdict::fail && !rep.declared);
    rep.detail = notes.str();
    return rep;
}

// --- Condition 4.1 estimate ------------------------------------------------

namespace detail {

// Mesh on [eps, 1-eps]: uniform backbone plus 1-2-5 geometric points near
// both edges, to catch boundary explosion of the second derivatives.
inline std::vector<double> weighted_axis_mesh(double eps) {
    std::vector<double> pts;
    for (int i = 0; i <= 20; ++i) pts.push_back(eps + (1.0 - 2.0 * eps) * i / 20.0);
    for (double base = eps; base < 0.2; base *= 10.0) {
        for (double mult : {1.0, 2.0, 5.0}) {
            const double x = base * mult;
            if (x >= eps && x <= 0.5) {
                pts.push_back(x);
                pts.push_back(1.0 - x);
            }
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace detail

// K-hat(eps) = max over the [eps,1-eps]^d mesh and all (i,j) of
// |d2C_ij(u)| / min(1/(u_i(1-u_i)), 1/(u_j(1-u_j))). Pass when K-hat
// stabilizes across the epsilon decades, fail when it keeps growing 10x per
// decade.
inline ConditionReport estimate_K_condition_second_order(
    const CopulaModel& model, const std::vector<double>& eps_schedule = {1e-1, 1e-2, 1e-3}) {
    if (!model.caps().analytic_second_derivs)
        throw UnsupportedOperation(model.name() + ": second derivatives unavailable for C4.1");
    ConditionReport rep;
    rep.id = ConditionId::second_order_c41;
    rep.declared = model.caps().condition_4_1;

    const int d = model.dim();
    std::vector<double> khat;
    std::vector<std::vector<double>> argmaxes;
    std::ostringstream notes;
    for (double eps : eps_schedule) {
        const auto mesh = detail::weighted_axis_mesh(eps);
        const std::size_t m = mesh.size();
        std::size_t total = 1;
        for (int k = 0; k < d; ++k) total *= m;
        double best = 0.0;
        std::vector<double> best_at(d);
        std::vector<double> u(d);
        for (std::size_t f = 0; f < total; ++f) {
            std::size_t rem = f;
            for (int k = d - 1; k >= 0; --k) {
                u[k] = mesh[rem % m];
                rem /= m;
            }
            for (int i = 0; i < d; ++i) {
                for (int j = i; j < d; ++j) {
                    const double wi = u[i] * (1.0 - u[i]);
                    const double wj = u[j] * (1.0 - u[j]);
                    const double ratio =
                        std::abs(model.second_partial(i, j, u)) * std::max(wi, wj);
                    if (ratio > best) {
                        best = ratio;
                        best_at = u;
                    }
                }
            }
        }
        ScaleEvidence ev;
        ev.scale = eps;
        ev.spacing = mesh[1] - mesh[0];
        ev.value = best;
        rep.evidence.push_back(ev);
        khat.push_back(best);
        argmaxes.push_back(best_at);
        notes << "eps " << eps << " K-hat " << best << '\n';
    }

    bool grows = false;
    for (std::size_t k = 1; k < khat.size(); ++k)
        if (khat[k] >= 10.0 * std::max(khat[k - 1], 1e-300)) grows = true;
    const bool stabilized = khat.back() <= 2.0 * khat[khat.size() - 2] + 1e-12;
    rep.verdict = grows ? Verdict::fail : (stabilized ? Verdict::pass : Verdict::inconclusive);
    if (rep.verdict == Verdict::fail && !argmaxes.empty()) rep.witness = argmaxes.back();
    rep.matches_declaration = (rep.verdict == Verdict::pass && rep.declared) ||
                              (rep.verdict == Verdict::fail && !rep.declared);
    rep.detail = notes.str();
    return rep;
}

inline double estimated_K(const ConditionReport& rep) {
    if (rep.evidence.empty()) throw std::invalid_argument("estimated_K: empty evidence");
    double k = 0.0;
    for (const auto& ev : rep.evidence) k = std::max(k, ev.value);
    return k;
}

// --- Pickands condition (5.2) ----------------------------------------------

struct PickandsM {
    double value = 0.0;
    bool finite = true;  // refinement-stable
};

// M = sup_t t (1-t) A''(t), evaluated on a 10^4+1-point grid and refined
// once around the argmax; flagged non-finite when the refined sup runs away.
inline PickandsM pickands_M(const PickandsFunction& a) {
    if (!a.has_second()) throw UnsupportedOperation("pickands_M: A'' unavailable");
    const auto weighted = [&](double t) { return t * (1.0 - t) * a.d2A(t); };
    const int m = 10000;
    double coarse = 0.0, argmax = 0.5;
    for (int k = 1; k < m; ++k) {
        const double t = static_cast<double>(k) / m;
        const double v = weighted(t);
        if (v > coarse) {
            coarse = v;
            argmax = t;
        }
    }
    const double lo = std::max(argmax - 2.0 / m, 1e-12);
    const double hi = std::min(argmax + 2.0 / m, 1.0 - 1e-12);
    double refined = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double t = lo + (hi - lo) * k / m;
        refined = std::max(refined, weighted(t));
    }
    PickandsM out;
    out.value = std::max(coarse, refined);
    out.finite = coarse == 0.0 ? true : refined < 10.0 * coarse;
    return out;
}

// --- Lemma 4.1 increment inequality ----------------------------------------

struct IncrementCheckReport {
    bool pass = true;
    int checked = 0;
    int violations = 0;
    double max_ratio = 0.0;  // max lhs / rhs observed
    std::vector<double> witness_u, witness_v;
    int witness_axis = -1;
};

// |dC_j(v) - dC_j(u)| <= K max(1/(u_j(1-u_j)), 1/(v_j(1-v_j))) |v - u|_1
// over random interior pairs.
inline IncrementCheckReport increment_bound_check(const CopulaModel& model, double K,
                                                  int pair_budget, Rng& rng) {
    IncrementCheckReport rep;
    const int d = model.dim();
    std::vector<double> u(d), v(d);
    for (int p = 0; p < pair_budget; ++p) {
        for (int k = 0; k < d; ++k) {
            u[k] = rng.uniform();
            v[k] = rng.uniform();
        }
        double l1 = 0.0;
        for (int k = 0; k < d; ++k) l1 += std::abs(v[k] - u[k]);
        for (int j = 0; j < d; ++j) {
            const double lhs = std::abs(model.partial_derivative(j, v) -
                                        model.partial_derivative(j, u));
            const double w =
                std::max(1.0 / (u[j] * (1.0 - u[j])), 1.0 / (v[j] * (1.0 - v[j])));
            const double rhs = K * w * l1;
            ++rep.checked;
            const double ratio = lhs / std::max(rhs, 1e-300);
            rep.max_ratio = std::max(rep.max_ratio, ratio);
            if (lhs > rhs * (1.0 + 1e-9) + 1e-12) {
                ++rep.violations;
                if (rep.witness_u.empty()) {
                    rep.witness_u = u;
                    rep.witness_v = v;
                    rep.witness_axis = j;
                }
            }
        }
    }
    rep.pass = rep.violations == 0;
    return rep;
}

// --- Oscillation modulus and the exponential bound --------------------------

struct OscillationEstimate {
    double window = 0.0;  // a
    double value = 0.0;   // grid-restricted M_n(a)
    GridPtr grid;
};

// Grid-restricted M_n(a) = sup |alpha_n(u) - alpha_n(v)| over node pairs
// with |u_j - v_j| <= a on every axis. Brute force over pairs; grids capped
// at 41^2 nodes for this operation.
inline OscillationEstimate oscillation_modulus(const SampleMatrix& s, const CopulaModel& model,
                                               double a, GridPtr grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::domain_error("oscillation_modulus: a in [0,1]");
    const Grid& g = *grid;
    if (g.node_count() > 41 * 41)
        throw std::invalid_argument("oscillation_modulus: grid capped at 41^2 nodes");
    const std::size_t n = g.node_count();
    const int d = g.dim();

    std::vector<double> alpha(n);
    const auto gn = ecdf_field(s, g);
    std::vector<double> u(d);
    const double rn = std::sqrt(static_cast<double>(s.n));
    for (std::size_t f = 0; f < n; ++f) {
        g.node(f, u);
        alpha[f] = rn * (gn[f] - model.cdf(u));
    }

    std::vector<double> coords(n * d);
    for (std::size_t f = 0; f < n; ++f) {
        g.node(f, u);
        for (int k = 0; k < d; ++k) coords[f * d + k] = u[k];
    }

    OscillationEstimate est;
    est.window = a;
    est.grid = std::move(grid);
    for (std::size_t f1 = 0; f1 < n; ++f1) {
        for (std::size_t f2 = f1 + 1; f2 < n; ++f2) {
            bool within = true;
            for (int k = 0; k < d && within; ++k)
                within = std::abs(coords[f1 * d + k] - coords[f2 * d + k]) <= a;
            if (within) est.value = std::max(est.value, std::abs(alpha[f1] - alpha[f2]));
        }
    }
    return est;
}

// psi(x) = 2 x^-2 {(1+x) log(1+x) - x}, with psi(-1) = 2 and psi(0) = 1;
// decreasing and continuous on [-1, inf).
inline double psi(double x) {
    if (x < -1.0) throw std::domain_error("psi: domain is x >= -1");
    if (x == -1.0) return 2.0;
    if (std::abs(x) < 1e-4)
        return 1.0 - x / 3.0 + x * x / 6.0 - x * x * x / 10.0;  // series around 0
    return 2.0 * ((1.0 + x) * std::log1p(x) - x) / (x * x);
}

// Exponential bound of the oscillation-modulus inequality:
// (K1/a) exp(-K2 lambda^2 psi(lambda / (sqrt(n) a)) / a).
inline double einmahl_bound(double a, double lambda, int n, double K1, double K2) {
    if (!(a > 0.0 && a <= 0.5)) throw std::domain_error("einmahl_bound: a in (0, 1/2]");
    if (lambda < 0.0) throw std::domain_error("einmahl_bound: lambda >= 0");
    if (n < 1) throw std::domain_error("einmahl_bound: n >= 1");
    const double arg = lambda / (std::sqrt(static_cast<double>(n)) * a);
    return (K1 / a) * std::exp(-K2 * lambda * lambda * psi(arg) / a);
}

}  // namespace ecp
