#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "ecp/copula/model.hpp"

namespace ecp {

struct TailDependence {
    double lambda_lower = 0.0;
    double lambda_upper = 0.0;
    bool lower_converged = false;
    bool upper_converged = false;
};

namespace detail {

// Aitken delta-squared stabilization of the estimator sequence x_k,
// converged when successive stabilized values differ by < tol.
inline std::pair<double, bool> stabilized_limit(const std::vector<double>& x, double tol) {
    double prev = std::numeric_limits<double>::quiet_NaN();
    double last = x.back();
    bool converged = false;
    for (std::size_t k = 2; k < x.size(); ++k) {
        const double denom = x[k] - 2.0 * x[k - 1] + x[k - 2];
        const double num = x[k] - x[k - 1];
        const double acc =
            (std::abs(denom) > 1e-14) ? x[k] - num * num / denom : x[k];
        if (!std::isnan(prev) && std::abs(acc - prev) < tol) {
            last = acc;
            converged = true;
            break;
        }
        prev = acc;
        last = acc;
    }
    // lambda lives in [0,1]; extrapolation may undershoot slightly
    last = std::min(std::max(last, 0.0), 1.0);
    return {last, converged};
}

}  // namespace detail

// Numeric limits lambda_L = lim C(u,u)/u (u -> 0) and
// lambda_U = lim (1-2u+C(u,u))/(1-u) (u -> 1), both evaluated along the
// dyadic ladder 2^-k, k = 10..30, with Aitken stabilization. Convergence is
// declared when successive stabilized values differ by < 1e-6; otherwise the
// last value is reported with the converged flag down.
inline TailDependence tail_dependence_coefficients(const CopulaModel& model) {
    if (model.dim() != 2)
        throw std::invalid_argument("tail_dependence_coefficients: d = 2 required");
    std::vector<double> lower, upper;
    lower.reserve(21);
    upper.reserve(21);
    for (int k = 10; k <= 30; ++k) {
        const double eps = std::ldexp(1.0, -k);  // 2^-k
        lower.push_back(model.cdf({eps, eps}) / eps);
        upper.push_back(model.survival2(1.0 - eps, 1.0 - eps) / eps);
    }
    TailDependence td;
    auto [lo, lo_ok] = detail::stabilized_limit(lower, 1e-6);
    auto [up, up_ok] = detail::stabilized_limit(upper, 1e-6);
    td.lambda_lower = lo;
    td.lambda_upper = up;
    td.lower_converged = lo_ok;
    td.upper_converged = up_ok;
    return td;
}

}  // namespace ecp
