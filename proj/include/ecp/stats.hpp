#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace ecp {

// Empirical quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7, the usual default).
inline double quantile(std::span<const double> sample, double p) {
    if (sample.empty()) throw std::invalid_argument("quantile: empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile: p outside [0,1]");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    if (s.size() == 1) return s[0];
    const double h = p * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, s.size() - 1);
    const double w = h - static_cast<double>(lo);
    return (1.0 - w) * s[lo] + w * s[hi];
}

inline double median(std::span<const double> sample) { return quantile(sample, 0.5); }

inline double mean(std::span<const double> sample) {
    if (sample.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double v : sample) s += v;
    return s / static_cast<double>(sample.size());
}

inline double variance(std::span<const double> sample) {
    if (sample.size() < 2) throw std::invalid_argument("variance: need n >= 2");
    const double m = mean(sample);
    double s = 0.0;
    for (double v : sample) s += (v - m) * (v - m);
    return s / static_cast<double>(sample.size() - 1);
}

// Two-sample Kolmogorov-Smirnov distance sup_x |F1(x) - F2(x)|.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// One-sample KS against a continuous cdf.
template <typename Cdf>
double ks_one_sample(std::span<const double> sample, Cdf cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
    }
    return d;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;  // NaN when fewer than 3 points
};

// Ordinary least squares of y on x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need matching n >= 2");
    const double n = static_cast<double>(x.size());
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate x");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            ssr += r * r;
        }
        fit.slope_se = std::sqrt(ssr / (n - 2.0) / sxx);
    } else {
        fit.slope_se = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

// Kendall's tau by pairwise concordance count, O(n^2). Ties count as zero.
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("kendall_tau: need matching n >= 2");
    long long s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double dx = x[i] - x[j], dy = y[i] - y[j];
            const double p = dx * dy;
            if (p > 0.0) ++s;
            else if (p < 0.0) --s;
        }
    }
    const double n = static_cast<double>(x.size());
    return 2.0 * static_cast<double>(s) / (n * (n - 1.0));
}

}  // namespace ecp
