#pragma once

#include <cmath>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecp/rng.hpp"
#include "ecp/sample.hpp"

namespace ecp {

struct UnsupportedOperation : std::logic_error {
    using std::logic_error::logic_error;
};

// What a concrete family can and claims to do. The condition flags are
// declarations checked against the numerical probes in diagnostics.
struct Capabilities {
    bool analytic_first_derivs = false;
    bool analytic_second_derivs = false;
    bool condition_2_1 = false;
    bool condition_4_1 = false;
    // True when the directional-limit extension of the derivative at
    // u_j in {0,1} has a closed form; otherwise a one-sided difference at
    // spacing 1e-6 is used (an approximation of the lim sup).
    bool boundary_extension_closed_form = false;
};

// Evaluatable d-variate copula. Immutable after construction; all
// evaluations are pure and reentrant, sampling mutates only the caller's
// random stream.
class CopulaModel {
public:
    virtual ~CopulaModel() = default;

    int dim() const { return d_; }
    const std::string& name() const { return name_; }
    const Capabilities& caps() const { return caps_; }

    // Model specification string in the CLI grammar, e.g.
    // "family=gaussian,dim=2,rho=0.5".
    virtual std::string spec() const = 0;

    double cdf(std::span<const double> u) const {
        check_point(u);
        for (int j = 0; j < d_; ++j)
            if (u[j] == 0.0) return 0.0;
        // uniform margins: all coordinates 1 except possibly one
        int free_axis = -1;
        for (int j = 0; j < d_; ++j) {
            if (u[j] < 1.0) {
                if (free_axis >= 0) { free_axis = -2; break; }
                free_axis = j;
            }
        }
        if (free_axis == -1) return 1.0;
        if (free_axis >= 0) return u[free_axis];
        return clamp01(cdf_impl(u));
    }
    double cdf(std::initializer_list<double> u) const {
        return cdf(std::span<const double>(u.begin(), u.size()));
    }

    // Extended first-order partial derivative: family formula on
    // 0 < u_j < 1, directional-limit extension on the faces, and exactly 0
    // as soon as u_i = 0 for some i != j.
    double partial_derivative(int j, std::span<const double> u) const {
        check_point(u);
        check_axis(j);
        for (int i = 0; i < d_; ++i)
            if (i != j && u[i] == 0.0) return 0.0;
        if (u[j] > 0.0 && u[j] < 1.0) return clamp01(partial_interior(j, u));
        return clamp01(partial_boundary(j, u));
    }
    double partial_derivative(int j, std::initializer_list<double> u) const {
        return partial_derivative(j, std::span<const double>(u.begin(), u.size()));
    }

    // Second-order partial derivative on the interior of axes i and j.
    double second_partial(int i, int j, std::span<const double> u) const {
        check_point(u);
        check_axis(i);
        check_axis(j);
        if (!caps_.analytic_second_derivs)
            throw UnsupportedOperation(name_ + ": analytic second derivatives unavailable");
        if (u[i] <= 0.0 || u[i] >= 1.0 || u[j] <= 0.0 || u[j] >= 1.0)
            throw std::domain_error("second_partial: point must be interior on axes i and j");
        return second_interior(i, j, u);
    }
    double second_partial(int i, int j, std::initializer_list<double> u) const {
        return second_partial(i, j, std::span<const double>(u.begin(), u.size()));
    }

    SampleMatrix sample(int n, Rng& rng) const {
        if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
        SampleMatrix s(n, d_, Scale::unit);
        sample_into(s, rng);
        return s;
    }

    // Joint survival P(U > u, V > v), d = 2 only. The default form loses
    // precision near (1,1); families with a stable representation override.
    virtual double survival2(double u, double v) const {
        if (d_ != 2) throw UnsupportedOperation("survival2 requires d = 2");
        const double uv[2] = {u, v};
        return 1.0 - u - v + cdf(std::span<const double>(uv, 2));
    }

protected:
    CopulaModel(int d, std::string name, Capabilities caps)
        : d_(d), name_(std::move(name)), caps_(caps) {
        if (d < 2) throw std::invalid_argument(name_ + ": dimension must be >= 2");
    }

    virtual double cdf_impl(std::span<const double> u) const = 0;
    virtual double partial_interior(int j, std::span<const double> u) const = 0;

    // One-sided difference quotient at spacing 1e-6; overridden where the
    // directional limit has a closed form.
    virtual double partial_boundary(int j, std::span<const double> u) const {
        constexpr double h = 1e-6;
        std::vector<double> v(u.begin(), u.end());
        if (u[j] == 0.0) {
            v[j] = h;
            return cdf(v) / h;
        }
        v[j] = 1.0 - h;
        std::vector<double> w(u.begin(), u.end());
        return (cdf(w) - cdf(v)) / h;
    }

    virtual double second_interior(int, int, std::span<const double>) const {
        throw UnsupportedOperation(name_ + ": second_partial not implemented");
    }

    virtual void sample_into(SampleMatrix& out, Rng& rng) const = 0;

    void check_point(std::span<const double> u) const {
        if (static_cast<int>(u.size()) != d_)
            throw std::invalid_argument(name_ + ": point dimension mismatch");
        for (double x : u)
            if (!(x >= 0.0 && x <= 1.0))
                throw std::domain_error(name_ + ": coordinate outside [0,1]");
    }
    void check_axis(int j) const {
        if (j < 0 || j >= d_) throw std::invalid_argument("axis index out of range");
    }
    static double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

private:
    int d_;
    std::string name_;
    Capabilities caps_;
};

// Fills every row with independent uniforms; shared by samplers that first
// draw the conditioning coordinate.
inline void fill_uniform(SampleMatrix& s, Rng& rng) {
    for (double& v : s.data) v = rng.uniform();
}

}  // namespace ecp
