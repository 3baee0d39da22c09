#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "ecp/copula/model.hpp"

namespace ecp {

namespace detail {

// Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
inline double sample_gamma(Rng& rng, double shape) {
    if (shape < 1.0) {
        const double u = rng.uniform();
        return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

// Positive alpha-stable with Laplace transform exp(-t^alpha), alpha in (0,1)
// (Chambers-Mallows-Stuck construction).
inline double sample_positive_stable(Rng& rng, double alpha) {
    const double u = std::numbers::pi * rng.uniform();
    const double w = rng.exponential();
    const double t1 = std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha);
    const double t2 = std::sin((1.0 - alpha) * u) / w;
    return t1 * std::pow(t2, (1.0 - alpha) / alpha);
}

// Logarithmic series on {1,2,...} with P(k) proportional to p^k / k,
// sampled by chop-down inversion.
inline double sample_log_series(Rng& rng, double p) {
    double r = rng.uniform();
    double pk = -p / std::log1p(-p);
    double k = 1.0;
    while (r > pk && k < 1e9) {
        r -= pk;
        pk *= p * k / (k + 1.0);
        k += 1.0;
    }
    return k;
}

// Solve f(v) = w for f increasing on (0,1): bisection to bracket, then
// secant refinement to tolerance 1e-10.
template <typename F>
double invert_increasing(const F& f, double w, double tol = 1e-10) {
    double lo = 0.0, hi = 1.0;
    double flo = 0.0, fhi = 1.0;
    for (int it = 0; it < 24; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm < w) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    double a = lo, b = hi, fa = flo - w, fb = fhi - w;
    for (int it = 0; it < 64 && b - a > tol; ++it) {
        const double denom = fb - fa;
        double v = (std::abs(denom) > 1e-300) ? b - fb * (b - a) / denom : 0.5 * (a + b);
        if (!(v > a && v < b)) v = 0.5 * (a + b);
        const double fv = f(v) - w;
        if (fv < 0.0) {
            a = v;
            fa = fv;
        } else {
            b = v;
            fb = fv;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

// Generator of an Archimedean copula: phi convex, decreasing, finite on
// (0,1], phi(1) = 0, with generalized inverse phi_inv on [0,inf).
class ArchimedeanGenerator {
public:
    virtual ~ArchimedeanGenerator() = default;

    virtual double phi(double t) const = 0;
    virtual double phi_inv(double x) const = 0;
    virtual double dphi(double t) const = 0;
    virtual double d2phi(double /*t*/) const {
        throw UnsupportedOperation(family() + ": generator not twice differentiable");
    }
    virtual bool twice_differentiable() const { return false; }
    // Complete monotonicity of phi_inv; sufficient for C to be a copula in
    // every dimension d >= 3.
    virtual bool completely_monotone() const = 0;

    virtual double theta() const = 0;
    virtual std::string family() const = 0;

    // Closed-form solution v of dC/du (u,v) = w for d = 2, when available.
    virtual bool has_conditional_inverse2() const { return false; }
    virtual double conditional_inverse2(double /*u*/, double /*w*/) const {
        throw UnsupportedOperation(family() + ": no closed-form conditional inverse");
    }

    // Frailty V with Laplace transform phi_inv, when available.
    virtual bool has_frailty() const { return false; }
    virtual double sample_frailty(Rng& /*rng*/) const {
        throw UnsupportedOperation(family() + ": no frailty representation");
    }
};

class ClaytonGenerator final : public ArchimedeanGenerator {
public:
    explicit ClaytonGenerator(double theta) : theta_(theta) {
        if (!(theta > 0.0)) throw std::invalid_argument("clayton: theta must be > 0");
    }
    double phi(double t) const override { return (std::pow(t, -theta_) - 1.0) / theta_; }
    double phi_inv(double x) const override { return std::pow(1.0 + theta_ * x, -1.0 / theta_); }
    double dphi(double t) const override { return -std::pow(t, -theta_ - 1.0); }
    double d2phi(double t) const override { return (theta_ + 1.0) * std::pow(t, -theta_ - 2.0); }
    bool twice_differentiable() const override { return true; }
    bool completely_monotone() const override { return true; }
    double theta() const override { return theta_; }
    std::string family() const override { return "clayton"; }

    bool has_conditional_inverse2() const override { return true; }
    double conditional_inverse2(double u, double w) const override {
        const double a = std::pow(w, -theta_ / (1.0 + theta_)) - 1.0;
        return std::pow(a * std::pow(u, -theta_) + 1.0, -1.0 / theta_);
    }

    bool has_frailty() const override { return true; }
    double sample_frailty(Rng& rng) const override {
        return theta_ * detail::sample_gamma(rng, 1.0 / theta_);
    }

private:
    double theta_;
};

class GumbelGenerator final : public ArchimedeanGenerator {
public:
    explicit GumbelGenerator(double theta) : theta_(theta) {
        if (!(theta >= 1.0)) throw std::invalid_argument("gumbel: theta must be >= 1");
    }
    double phi(double t) const override { return std::pow(-std::log(t), theta_); }
    double phi_inv(double x) const override { return std::exp(-std::pow(x, 1.0 / theta_)); }
    double dphi(double t) const override {
        return -theta_ * std::pow(-std::log(t), theta_ - 1.0) / t;
    }
    double d2phi(double t) const override {
        const double l = -std::log(t);
        return (theta_ / (t * t)) * ((theta_ - 1.0) * std::pow(l, theta_ - 2.0) + std::pow(l, theta_ - 1.0));
    }
    bool twice_differentiable() const override { return true; }
    bool completely_monotone() const override { return true; }
    double theta() const override { return theta_; }
    std::string family() const override { return "gumbel"; }

    bool has_frailty() const override { return true; }
    double sample_frailty(Rng& rng) const override {
        if (theta_ == 1.0) return 1.0;  // independence, degenerate frailty
        return detail::sample_positive_stable(rng, 1.0 / theta_);
    }

private:
    double theta_;
};

class FrankGenerator final : public ArchimedeanGenerator {
public:
    explicit FrankGenerator(double theta) : theta_(theta) {
        if (theta == 0.0) throw std::invalid_argument("frank: theta must be nonzero");
    }
    double phi(double t) const override {
        return -std::log(std::expm1(-theta_ * t) / std::expm1(-theta_));
    }
    double phi_inv(double x) const override {
        return -std::log1p(std::exp(-x) * std::expm1(-theta_)) / theta_;
    }
    double dphi(double t) const override { return -theta_ / std::expm1(theta_ * t); }
    double d2phi(double t) const override {
        const double e = std::expm1(theta_ * t);
        return theta_ * theta_ * (e + 1.0) / (e * e);
    }
    bool twice_differentiable() const override { return true; }
    bool completely_monotone() const override { return theta_ > 0.0; }
    double theta() const override { return theta_; }
    std::string family() const override { return "frank"; }

    bool has_conditional_inverse2() const override { return true; }
    double conditional_inverse2(double u, double w) const override {
        const double A = std::exp(-theta_ * u);
        const double D = std::expm1(-theta_);
        const double B = w * D / (A * (1.0 - w) + w);
        return -std::log1p(B) / theta_;
    }

    bool has_frailty() const override { return theta_ > 0.0; }
    double sample_frailty(Rng& rng) const override {
        return detail::sample_log_series(rng, -std::expm1(-theta_));
    }

private:
    double theta_;
};

// C(u) = phi_inv(phi(u_1) + ... + phi(u_d)).
class ArchimedeanCopula final : public CopulaModel {
public:
    ArchimedeanCopula(std::shared_ptr<const ArchimedeanGenerator> gen, int d = 2)
        : CopulaModel(d, gen->family(),
                      {.analytic_first_derivs = true,
                       .analytic_second_derivs = gen->twice_differentiable(),
                       .condition_2_1 = true,
                       .condition_4_1 = d == 2 && gen->twice_differentiable(),
                       .boundary_extension_closed_form = false}),
          gen_(std::move(gen)) {
        if (d >= 3 && !gen_->completely_monotone())
            throw std::invalid_argument(name() +
                                        ": d >= 3 requires a completely monotone generator");
    }

    const ArchimedeanGenerator& generator() const { return *gen_; }

    std::string spec() const override {
        std::ostringstream os;
        os << "family=" << gen_->family() << ",dim=" << dim() << ",theta=" << gen_->theta();
        return os.str();
    }

protected:
    double cdf_impl(std::span<const double> u) const override {
        double s = 0.0;
        for (double x : u) s += gen_->phi(x);
        return gen_->phi_inv(s);
    }

    double partial_interior(int j, std::span<const double> u) const override {
        const double c = cdf(u);
        if (c <= 0.0) return 0.0;
        return gen_->dphi(u[j]) / gen_->dphi(c);
    }

    double second_interior(int i, int j, std::span<const double> u) const override {
        const double c = cdf(u);
        if (c <= 0.0) return 0.0;
        const double dc = gen_->dphi(c);
        const double d2c = gen_->d2phi(c);
        if (i != j)
            return -d2c * gen_->dphi(u[i]) * gen_->dphi(u[j]) / (dc * dc * dc);
        const double di = gen_->dphi(u[i]);
        return gen_->d2phi(u[i]) / dc - d2c * di * di / (dc * dc * dc);
    }

    void sample_into(SampleMatrix& out, Rng& rng) const override {
        if (dim() == 2 && gen_->has_conditional_inverse2()) {
            for (int i = 0; i < out.n; ++i) {
                const double u = rng.uniform();
                const double w = rng.uniform();
                out.at(i, 0) = u;
                out.at(i, 1) = gen_->conditional_inverse2(u, w);
            }
            return;
        }
        if (gen_->has_frailty()) {
            for (int i = 0; i < out.n; ++i) {
                const double v = gen_->sample_frailty(rng);
                for (int j = 0; j < dim(); ++j)
                    out.at(i, j) = gen_->phi_inv(rng.exponential() / v);
            }
            return;
        }
        if (dim() == 2) {
            // numeric conditional inversion on the second coordinate
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
            return;
        }
        throw UnsupportedOperation(name() + ": no sampler for d >= 3 without frailty");
    }

private:
    std::shared_ptr<const ArchimedeanGenerator> gen_;
};

inline ArchimedeanCopula make_clayton(double theta, int d = 2) {
    return ArchimedeanCopula(std::make_shared<ClaytonGenerator>(theta), d);
}
inline ArchimedeanCopula make_gumbel(double theta, int d = 2) {
    return ArchimedeanCopula(std::make_shared<GumbelGenerator>(theta), d);
}
inline ArchimedeanCopula make_frank(double theta, int d = 2) {
    return ArchimedeanCopula(std::make_shared<FrankGenerator>(theta), d);
}

}  // namespace ecp
