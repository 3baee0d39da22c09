#pragma once

#include <algorithm>
#include <cmath>

#include "ecp/copula/model.hpp"

namespace ecp {

// Comonotone copula M(u,v) = min(u,v). Condition 2.1 fails on the diagonal;
// kept as a counterexample with capability flags off.
class FrechetUpperCopula final : public CopulaModel {
public:
    FrechetUpperCopula()
        : CopulaModel(2, "frechet_upper",
                      {.analytic_first_derivs = false,
                       .analytic_second_derivs = false,
                       .condition_2_1 = false,
                       .condition_4_1 = false,
                       .boundary_extension_closed_form = true}) {}

    std::string spec() const override { return "family=frechet_upper,dim=2"; }

protected:
    double cdf_impl(std::span<const double> u) const override { return std::min(u[0], u[1]); }

    double partial_interior(int j, std::span<const double> u) const override {
        const double a = u[j], b = u[1 - j];
        if (a < b) return 1.0;
        if (a == 1.0 && b == 1.0) return 1.0;
        return 0.0;
    }
    double partial_boundary(int j, std::span<const double> u) const override {
        return partial_interior(j, u);
    }

    void sample_into(SampleMatrix& out, Rng& rng) const override {
        for (int i = 0; i < out.n; ++i) {
            const double u = rng.uniform();
            out.at(i, 0) = u;
            out.at(i, 1) = u;
        }
    }
};

// Countermonotone copula W(u,v) = max(u+v-1, 0).
class FrechetLowerCopula final : public CopulaModel {
public:
    FrechetLowerCopula()
        : CopulaModel(2, "frechet_lower",
                      {.analytic_first_derivs = false,
                       .analytic_second_derivs = false,
                       .condition_2_1 = false,
                       .condition_4_1 = false,
                       .boundary_extension_closed_form = true}) {}

    std::string spec() const override { return "family=frechet_lower,dim=2"; }

protected:
    double cdf_impl(std::span<const double> u) const override {
        return std::max(u[0] + u[1] - 1.0, 0.0);
    }

    double partial_interior(int j, std::span<const double> u) const override {
        return (u[j] + u[1 - j] > 1.0 || u[1 - j] >= 1.0) ? 1.0 : 0.0;
    }
    double partial_boundary(int j, std::span<const double> u) const override {
        return partial_interior(j, u);
    }

    void sample_into(SampleMatrix& out, Rng& rng) const override {
        for (int i = 0; i < out.n; ++i) {
            const double u = rng.uniform();
            out.at(i, 0) = u;
            out.at(i, 1) = 1.0 - u;
        }
    }
};

// Checkerboard copula with Lebesgue density 2 on [0,1/2]^2 union [1/2,1]^2.
// The first partials jump across the interior lines u = 1/2 and v = 1/2.
class CheckerboardCopula final : public CopulaModel {
public:
    CheckerboardCopula()
        : CopulaModel(2, "checkerboard",
                      {.analytic_first_derivs = false,
                       .analytic_second_derivs = false,
                       .condition_2_1 = false,
                       .condition_4_1 = false,
                       .boundary_extension_closed_form = true}) {}

    std::string spec() const override { return "family=checkerboard,dim=2"; }

protected:
    double cdf_impl(std::span<const double> u) const override {
        const double x = u[0], y = u[1];
        if (x <= 0.5 && y <= 0.5) return 2.0 * x * y;
        if (x <= 0.5) return x;
        if (y <= 0.5) return y;
        return 0.5 + 2.0 * (x - 0.5) * (y - 0.5);
    }

    double partial_interior(int j, std::span<const double> u) const override {
        const double a = u[j], b = u[1 - j];
        if (a <= 0.5) return b <= 0.5 ? 2.0 * b : 1.0;
        return b <= 0.5 ? 0.0 : 2.0 * b - 1.0;
    }
    double partial_boundary(int j, std::span<const double> u) const override {
        return partial_interior(j, u);
    }

    void sample_into(SampleMatrix& out, Rng& rng) const override {
        for (int i = 0; i < out.n; ++i) {
            const double base = (rng.uniform() < 0.5) ? 0.0 : 0.5;
            out.at(i, 0) = base + 0.5 * rng.uniform();
            out.at(i, 1) = base + 0.5 * rng.uniform();
        }
    }
};

}  // namespace ecp
