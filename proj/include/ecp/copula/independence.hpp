#pragma once

#include "ecp/copula/model.hpp"

namespace ecp {

// Product copula Pi(u) = u_1 ... u_d.
class IndependenceCopula final : public CopulaModel {
public:
    explicit IndependenceCopula(int d = 2)
        : CopulaModel(d, "independence",
                      {.analytic_first_derivs = true,
                       .analytic_second_derivs = true,
                       .condition_2_1 = true,
                       .condition_4_1 = true,
                       .boundary_extension_closed_form = true}) {}

    std::string spec() const override {
        return "family=independence,dim=" + std::to_string(dim());
    }

protected:
    double cdf_impl(std::span<const double> u) const override {
        double p = 1.0;
        for (double x : u) p *= x;
        return p;
    }

    double partial_interior(int j, std::span<const double> u) const override {
        double p = 1.0;
        for (int i = 0; i < dim(); ++i)
            if (i != j) p *= u[i];
        return p;
    }

    // The product formula is the directional limit on the faces as well.
    double partial_boundary(int j, std::span<const double> u) const override {
        return partial_interior(j, u);
    }

    double second_interior(int i, int j, std::span<const double> u) const override {
        if (i == j) return 0.0;
        double p = 1.0;
        for (int k = 0; k < dim(); ++k)
            if (k != i && k != j) p *= u[k];
        return p;
    }

    void sample_into(SampleMatrix& out, Rng& rng) const override { fill_uniform(out, rng); }
};

}  // namespace ecp
