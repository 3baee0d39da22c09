#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecp {

// Finite lattice in [0,1]^d: per-axis sorted node vectors, each containing
// both endpoints. Node enumeration is row-major with the last axis fastest.
class Grid {
public:
    explicit Grid(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {
        if (axes_.size() < 1) throw std::invalid_argument("Grid: need at least one axis");
        for (const auto& ax : axes_) {
            if (ax.size() < 2 || ax.front() != 0.0 || ax.back() != 1.0)
                throw std::invalid_argument("Grid: each axis must run from 0 to 1");
            if (!std::is_sorted(ax.begin(), ax.end(), std::less_equal<double>()))
                throw std::invalid_argument("Grid: axis nodes must be strictly increasing");
        }
        strides_.assign(axes_.size(), 1);
        for (std::size_t j = axes_.size(); j-- > 1;)
            strides_[j - 1] = strides_[j] * axes_[j].size();
        count_ = strides_[0] * axes_[0].size();
    }

    // m equally spaced nodes per axis, endpoints included.
    static Grid uniform(int dim, int m) {
        if (dim < 1 || m < 2) throw std::invalid_argument("Grid::uniform: dim >= 1, m >= 2");
        std::vector<double> ax(m);
        for (int i = 0; i < m; ++i) ax[i] = static_cast<double>(i) / (m - 1);
        ax.back() = 1.0;
        return Grid(std::vector<std::vector<double>>(dim, ax));
    }

    int dim() const { return static_cast<int>(axes_.size()); }
    std::size_t node_count() const { return count_; }
    const std::vector<double>& axis(int j) const { return axes_.at(j); }
    std::size_t stride(int j) const { return strides_.at(j); }

    std::size_t axis_size(int j) const { return axes_.at(j).size(); }

    // Multi-index of a flat node index, written into `idx`.
    void unravel(std::size_t flat, std::span<std::size_t> idx) const {
        for (std::size_t j = 0; j < axes_.size(); ++j) {
            idx[j] = (flat / strides_[j]) % axes_[j].size();
        }
    }

    // Coordinates of a flat node index, written into `u`.
    void node(std::size_t flat, std::span<double> u) const {
        for (std::size_t j = 0; j < axes_.size(); ++j) {
            u[j] = axes_[j][(flat / strides_[j]) % axes_[j].size()];
        }
    }

    std::vector<double> node(std::size_t flat) const {
        std::vector<double> u(axes_.size());
        node(flat, u);
        return u;
    }

    // Flat index of the edge node (1,...,1, u = axis_j[a], 1,...,1).
    std::size_t edge_index(int j, std::size_t a) const {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < axes_.size(); ++k)
            flat += strides_[k] * (static_cast<int>(k) == j ? a : axes_[k].size() - 1);
        return flat;
    }

    // Index of the axis node equal to v, or npos.
    std::size_t find_axis_node(int j, double v) const {
        const auto& ax = axes_.at(j);
        auto it = std::lower_bound(ax.begin(), ax.end(), v);
        if (it != ax.end() && *it == v) return static_cast<std::size_t>(it - ax.begin());
        return npos;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<std::vector<double>> axes_;
    std::vector<std::size_t> strides_;
    std::size_t count_ = 0;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_uniform_grid(int dim, int m) {
    return std::make_shared<const Grid>(Grid::uniform(dim, m));
}

enum class FieldLabel { alpha_n, C_n, CC_n, tildeCC_n, CC_n_prime, limit_CC, bridge_alpha };

inline std::string to_string(FieldLabel label) {
    switch (label) {
        case FieldLabel::alpha_n: return "alpha_n";
        case FieldLabel::C_n: return "C_n";
        case FieldLabel::CC_n: return "CC_n";
        case FieldLabel::tildeCC_n: return "tildeCC_n";
        case FieldLabel::CC_n_prime: return "CC_n_prime";
        case FieldLabel::limit_CC: return "limit_CC";
        case FieldLabel::bridge_alpha: return "bridge_alpha";
    }
    return "?";
}

// One scalar per grid node.
struct ProcessField {
    GridPtr grid;
    std::vector<double> values;
    FieldLabel label = FieldLabel::alpha_n;

    ProcessField() = default;
    ProcessField(GridPtr g, FieldLabel l)
        : grid(std::move(g)), values(grid->node_count(), 0.0), label(l) {}

    double sup_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    // Mean of squared values over nodes (grid Cramer-von Mises functional).
    double cvm() const {
        double s = 0.0;
        for (double v : values) s += v * v;
        return s / static_cast<double>(values.size());
    }
};

// Per-axis prefix sums over the tensor layout, turning per-node bin masses
// into cumulative counts N(u) = sum over nodes <= u componentwise.
inline void cumulative_sums_in_place(std::vector<double>& v, const Grid& g) {
    for (int j = 0; j < g.dim(); ++j) {
        const std::size_t s = g.stride(j);
        const std::size_t m = g.axis_size(j);
        for (std::size_t flat = 0; flat < v.size(); ++flat) {
            const std::size_t idx = (flat / s) % m;
            if (idx > 0) v[flat] += v[flat - s];
        }
    }
}

}  // namespace ecp
