#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <utility>

#include "ecp/copula/archimedean.hpp"  // detail::invert_increasing
#include "ecp/copula/model.hpp"

namespace ecp {

// Pickands dependence function A on [0,1]: convex, max(t,1-t) <= A <= 1.
// d2A may be left empty when the second derivative is unavailable.
struct PickandsFunction {
    std::function<double(double)> A;
    std::function<double(double)> dA;
    std::function<double(double)> d2A;
    std::string name = "custom";
    double theta = std::numeric_limits<double>::quiet_NaN();

    bool has_second() const { return static_cast<bool>(d2A); }

    double mu(double t) const { return A(t) - t * dA(t); }          // = l_x
    double nu(double t) const { return A(t) + (1.0 - t) * dA(t); }  // = l_y
};

// Logistic (Gumbel) family, A(t) = (t^{1/theta} + (1-t)^{1/theta})^theta,
// theta in (0,1]; theta = 1 is independence.
inline PickandsFunction logistic_pickands(double theta) {
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::invalid_argument("logistic: theta must lie in (0,1]");
    PickandsFunction p;
    p.name = "logistic";
    p.theta = theta;
    const double a = 1.0 / theta;
    p.A = [theta, a](double t) {
        if (t <= 0.0 || t >= 1.0) return 1.0;
        return std::pow(std::pow(t, a) + std::pow(1.0 - t, a), theta);
    };
    p.dA = [theta, a](double t) {
        const double s = std::pow(t, a) + std::pow(1.0 - t, a);
        return std::pow(s, theta - 1.0) * (std::pow(t, a - 1.0) - std::pow(1.0 - t, a - 1.0));
    };
    p.d2A = [theta, a](double t) {
        if (theta == 1.0) return 0.0;
        const double s = std::pow(t, a) + std::pow(1.0 - t, a);
        const double s1 = a * (std::pow(t, a - 1.0) - std::pow(1.0 - t, a - 1.0));
        const double s2 = a * (a - 1.0) * (std::pow(t, a - 2.0) + std::pow(1.0 - t, a - 2.0));
        return theta * std::pow(s, theta - 2.0) * ((theta - 1.0) * s1 * s1 + s * s2);
    };
    return p;
}

// Stable tail dependence function l(x,y) = (x+y) A(y/(x+y)); homogeneous of
// order 1 with max(x,y) <= l(x,y) <= x+y.
class TailDependenceFunction {
public:
    explicit TailDependenceFunction(const PickandsFunction& a) : a_(&a) {}
    double operator()(double x, double y) const {
        if (x < 0.0 || y < 0.0) throw std::domain_error("tail dependence function: x >= 0 required");
        const double s = x + y;
        if (s == 0.0) return 0.0;
        return s * a_->A(y / s);
    }

private:
    const PickandsFunction* a_;
};

// Bivariate extreme-value copula C(u,v) = exp(-l(-log u, -log v)).
class ExtremeValueCopula final : public CopulaModel {
public:
    explicit ExtremeValueCopula(PickandsFunction pickands)
        : CopulaModel(2, pickands.name == "logistic" ? "logistic" : "extreme_value",
                      {.analytic_first_derivs = true,
                       .analytic_second_derivs = pickands.has_second(),
                       .condition_2_1 = true,
                       .condition_4_1 = pickands.has_second(),
                       .boundary_extension_closed_form = false}),
          a_(std::move(pickands)) {
        validate_pickands();
    }

    const PickandsFunction& pickands() const { return a_; }
    TailDependenceFunction tail_function() const { return TailDependenceFunction(a_); }

    std::string spec() const override {
        std::ostringstream os;
        os << "family=" << (a_.name == "logistic" ? "logistic" : "ev-custom") << ",dim=2";
        if (!std::isnan(a_.theta)) os << ",theta=" << a_.theta;
        return os.str();
    }

    double survival2(double u, double v) const override {
        if (u >= 1.0 || v >= 1.0) return 0.0;
        if (u <= 0.0 && v <= 0.0) return 1.0;
        const double au = 1.0 - u, av = 1.0 - v;
        if (u <= 0.0) return av;
        if (v <= 0.0) return au;
        // a + b - (1 - C), with 1 - C = -expm1(-l); exact in the upper tail
        const double l = TailDependenceFunction(a_)(-std::log(u), -std::log(v));
        return au + av + std::expm1(-l);
    }

protected:
    double cdf_impl(std::span<const double> u) const override {
        return std::exp(-TailDependenceFunction(a_)(-std::log(u[0]), -std::log(u[1])));
    }

    double partial_interior(int j, std::span<const double> u) const override {
        const int o = 1 - j;
        if (u[o] == 1.0) return 1.0;  // C(u,1) = u
        const double lu = std::log(u[0]), lv = std::log(u[1]);
        const double t = lv / (lu + lv);
        const double c = cdf(u);
        return (j == 0) ? (c / u[0]) * a_.mu(t) : (c / u[1]) * a_.nu(t);
    }

    double second_interior(int i, int j, std::span<const double> u) const override {
        const double x = u[0], y = u[1];
        if (i == j) {
            const int o = 1 - i;
            if (u[o] == 0.0 || u[o] == 1.0) return 0.0;
            const double luv = std::log(x * y);
            const double t = std::log(y) / luv;
            const double c = cdf(u);
            if (i == 0) {
                const double m = a_.mu(t);
                return (c / (x * x)) *
                       (-m * (1.0 - m) + t * t * (1.0 - t) * a_.d2A(t) / std::log(x));
            }
            const double nv = a_.nu(t);
            return (c / (y * y)) *
                   (-nv * (1.0 - nv) + (1.0 - t) * (1.0 - t) * t * a_.d2A(t) / std::log(y));
        }
        const double luv = std::log(x * y);
        const double t = std::log(y) / luv;
        const double c = cdf(u);
        return (c / (x * y)) * (a_.mu(t) * a_.nu(t) - t * (1.0 - t) * a_.d2A(t) / luv);
    }

    void sample_into(SampleMatrix& out, Rng& rng) const override {
        // conditional inversion on the second coordinate, tolerance 1e-10
        for (int i = 0; i < out.n; ++i) {
            const double u = rng.uniform();
            const double w = rng.uniform();
            out.at(i, 0) = u;
            out.at(i, 1) = detail::invert_increasing(
                [&](double v) {
                    const double uv[2] = {u, v};
                    return partial_interior(0, std::span<const double>(uv, 2));
                },
                w);
        }
    }

private:
    void validate_pickands() const {
        if (!a_.A || !a_.dA)
            throw std::invalid_argument("extreme_value: A and A' evaluators required");
        for (int k = 1; k < 64; ++k) {
            const double t = static_cast<double>(k) / 64.0;
            const double v = a_.A(t);
            if (!(v <= 1.0 + 1e-12 && v >= std::max(t, 1.0 - t) - 1e-12))
                throw std::invalid_argument("extreme_value: A violates max(t,1-t) <= A <= 1");
        }
    }

    PickandsFunction a_;
};

inline ExtremeValueCopula make_logistic_ev(double theta) {
    return ExtremeValueCopula(logistic_pickands(theta));
}

}  // namespace ecp
