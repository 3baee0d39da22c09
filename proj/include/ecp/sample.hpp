#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ecp {

enum class Scale { raw, unit };

// n x d observation matrix, row-major. Unit-scale entries live in [0,1];
// per-column tie flags are set by pseudo_observations.
struct SampleMatrix {
    int n = 0;
    int d = 0;
    Scale scale = Scale::raw;
    std::vector<double> data;       // n * d
    std::vector<bool> column_ties;  // d flags

    SampleMatrix() = default;
    SampleMatrix(int n_, int d_, Scale s)
        : n(n_), d(d_), scale(s), data(static_cast<std::size_t>(n_) * d_, 0.0),
          column_ties(d_, false) {
        if (n_ < 1 || d_ < 1) throw std::invalid_argument("SampleMatrix: need n >= 1, d >= 1");
    }

    double operator()(int i, int j) const {
        return data[static_cast<std::size_t>(i) * d + j];
    }
    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * d + j]; }

    std::vector<double> column(int j) const {
        std::vector<double> c(n);
        for (int i = 0; i < n; ++i) c[i] = (*this)(i, j);
        return c;
    }

    // Column values in ascending order; the k-th order statistic is
    // sorted_column(j)[k-1].
    std::vector<double> sorted_column(int j) const {
        auto c = column(j);
        std::sort(c.begin(), c.end());
        return c;
    }

    void require_unit() const {
        if (scale != Scale::unit)
            throw std::invalid_argument("sample must be on the unit scale (run pseudo_observations)");
    }

    // Full value check; used where external data enters.
    void validate_unit_values() const {
        require_unit();
        for (double x : data)
            if (!(x >= 0.0 && x <= 1.0))
                throw std::invalid_argument("unit-scale sample has entries outside [0,1]");
    }
};

// Rank transform: column j of the output is rank_ij / n with maximal ranks
// for ties. Invariant under strictly increasing marginal transforms, so
// downstream empirical-copula values depend on the data only through ranks.
inline SampleMatrix pseudo_observations(const SampleMatrix& raw) {
    SampleMatrix out(raw.n, raw.d, Scale::unit);
    std::vector<int> order(raw.n);
    for (int j = 0; j < raw.d; ++j) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return raw(a, j) < raw(b, j); });
        bool ties = false;
        int i = 0;
        while (i < raw.n) {
            int k = i;
            while (k + 1 < raw.n && raw(order[k + 1], j) == raw(order[i], j)) ++k;
            if (k > i) ties = true;
            const double r = static_cast<double>(k + 1) / raw.n;  // maximal rank
            for (int t = i; t <= k; ++t) out.at(order[t], j) = r;
            i = k + 1;
        }
        out.column_ties[j] = ties;
    }
    return out;
}

}  // namespace ecp
