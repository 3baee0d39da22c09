#pragma once

#include <cmath>
#include <sstream>
#include <utility>

#include "ecp/copula/model.hpp"
#include "ecp/normal.hpp"

namespace ecp {

// Symmetric positive definite correlation matrix; positive definiteness is
// established by a successful Cholesky factorization at construction.
class CorrelationMatrix {
public:
    CorrelationMatrix(int d, std::vector<double> entries) : d_(d), m_(std::move(entries)) {
        if (d < 2 || m_.size() != static_cast<std::size_t>(d) * d)
            throw std::invalid_argument("CorrelationMatrix: bad shape");
        for (int i = 0; i < d; ++i) {
            if ((*this)(i, i) != 1.0)
                throw std::invalid_argument("CorrelationMatrix: diagonal must be 1");
            for (int j = 0; j < i; ++j) {
                if ((*this)(i, j) != (*this)(j, i))
                    throw std::invalid_argument("CorrelationMatrix: not symmetric");
                if (!(std::abs((*this)(i, j)) < 1.0))
                    throw std::invalid_argument("CorrelationMatrix: |rho| must be < 1");
            }
        }
        chol_ = factorize();
    }

    static CorrelationMatrix exchangeable(int d, double rho) {
        std::vector<double> m(static_cast<std::size_t>(d) * d, rho);
        for (int i = 0; i < d; ++i) m[static_cast<std::size_t>(i) * d + i] = 1.0;
        return CorrelationMatrix(d, std::move(m));
    }

    int dim() const { return d_; }
    double operator()(int i, int j) const { return m_[static_cast<std::size_t>(i) * d_ + j]; }
    const std::vector<double>& chol() const { return chol_; }

    bool is_exchangeable() const {
        const double r = d_ >= 2 ? (*this)(0, 1) : 0.0;
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < i; ++j)
                if ((*this)(i, j) != r) return false;
        return true;
    }

private:
    std::vector<double> factorize() const {
        std::vector<double> L(static_cast<std::size_t>(d_) * d_, 0.0);
        for (int i = 0; i < d_; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = (*this)(i, j);
                for (int k = 0; k < j; ++k)
                    s -= L[static_cast<std::size_t>(i) * d_ + k] * L[static_cast<std::size_t>(j) * d_ + k];
                if (i == j) {
                    if (s <= 1e-12)
                        throw std::invalid_argument("CorrelationMatrix: not strictly positive definite");
                    L[static_cast<std::size_t>(i) * d_ + j] = std::sqrt(s);
                } else {
                    L[static_cast<std::size_t>(i) * d_ + j] =
                        s / L[static_cast<std::size_t>(j) * d_ + j];
                }
            }
        }
        return L;
    }

    int d_;
    std::vector<double> m_;
    std::vector<double> chol_;
};

// Gaussian copula. d = 2 uses one-dimensional adaptive quadrature for the
// cdf (absolute tolerance 1e-10) and closed forms for both derivative
// orders; d >= 3 evaluates the cdf by low-discrepancy cubature (declared
// tolerance 1e-6) and first derivatives through the conditional normal,
// with no analytic second derivatives.
class GaussianCopula final : public CopulaModel {
public:
    explicit GaussianCopula(CorrelationMatrix R, std::string spec_hint = "")
        : CopulaModel(R.dim(), "gaussian",
                      {.analytic_first_derivs = true,
                       .analytic_second_derivs = R.dim() == 2,
                       .condition_2_1 = true,
                       .condition_4_1 = R.dim() == 2,
                       .boundary_extension_closed_form = R.dim() == 2}),
          R_(std::move(R)), spec_hint_(std::move(spec_hint)) {
        if (dim() == 2) {
            rho_ = R_(0, 1);
            s_ = std::sqrt((1.0 - rho_) * (1.0 + rho_));
        }
        build_conditionals();
    }

    GaussianCopula(int d, double rho) : GaussianCopula(CorrelationMatrix::exchangeable(d, rho)) {}

    double rho() const {
        if (dim() != 2) throw UnsupportedOperation("rho(): scalar parameter only for d = 2");
        return rho_;
    }
    const CorrelationMatrix& correlation() const { return R_; }

    std::string spec() const override {
        if (!spec_hint_.empty()) return spec_hint_;
        std::ostringstream os;
        os << "family=gaussian,dim=" << dim();
        if (R_.is_exchangeable()) os << ",rho=" << R_(0, 1);
        return os.str();
    }

    double survival2(double u, double v) const override {
        if (dim() != 2) throw UnsupportedOperation("survival2 requires d = 2");
        // (X,Y) and (-X,-Y) share the correlation, so the survival copula
        // equals the copula itself; this keeps full relative accuracy in
        // the upper tail.
        return cdf({1.0 - u, 1.0 - v});
    }

protected:
    double cdf_impl(std::span<const double> u) const override {
        if (dim() == 2) return binorm_cdf(norm_quantile(u[0]), norm_quantile(u[1]), rho_);
        std::vector<double> x(u.size());
        for (std::size_t j = 0; j < u.size(); ++j) x[j] = norm_quantile(u[j]);
        return mvn_cdf_qmc(x, R_.chol());
    }

    double partial_interior(int j, std::span<const double> u) const override {
        if (dim() == 2) {
            const int o = 1 - j;
            if (u[o] == 1.0) return 1.0;
            const double x = norm_quantile(u[j]);
            const double y = norm_quantile(u[o]);
            return norm_cdf((y - rho_ * x) / s_);
        }
        return conditional_cdf(j, u);
    }

    double partial_boundary(int j, std::span<const double> u) const override {
        if (dim() == 2) {
            const int o = 1 - j;
            if (u[o] == 1.0) return 1.0;
            // directional limits of Phi((y - rho x)/s) as x -> -inf/+inf
            if (rho_ == 0.0) return u[o];
            if (u[j] == 0.0) return rho_ > 0.0 ? 1.0 : 0.0;
            return rho_ > 0.0 ? 0.0 : 1.0;
        }
        // Evaluate the conditional form just inside the face; the limit
        // exists and the nudged closed form avoids differencing noise on
        // the cubature-based cdf.
        std::vector<double> v(u.begin(), u.end());
        v[j] = (u[j] == 0.0) ? 1e-9 : 1.0 - 1e-9;
        return conditional_cdf(j, v);
    }

    double second_interior(int i, int j, std::span<const double> u) const override {
        if (i != j) {
            // copula density phi2(x,y;rho) / (phi(x) phi(y))
            const double x = norm_quantile(u[0]);
            const double y = norm_quantile(u[1]);
            const double q = rho_ * (rho_ * x * x - 2.0 * x * y + rho_ * y * y);
            return std::exp(-q / (2.0 * s_ * s_)) / s_;
        }
        const double x = norm_quantile(u[i]);
        const double y = norm_quantile(u[1 - i]);
        const double w = (y - rho_ * x) / s_;
        return -(rho_ / s_) * norm_pdf(w) / norm_pdf(x);
    }

    void sample_into(SampleMatrix& out, Rng& rng) const override {
        const auto& L = R_.chol();
        const int d = dim();
        std::vector<double> z(d);
        for (int i = 0; i < out.n; ++i) {
            for (int j = 0; j < d; ++j) z[j] = rng.normal();
            for (int j = d - 1; j >= 0; --j) {
                double s = 0.0;
                for (int k = 0; k <= j; ++k) s += L[static_cast<std::size_t>(j) * d + k] * z[k];
                out.at(i, j) = norm_cdf(s);
            }
        }
    }

private:
    struct Conditional {
        std::vector<double> r;      // rho_{i j} for i != j
        std::vector<double> scale;  // 1/sqrt of conditional variances
        std::vector<double> chol;   // conditional correlation factor, (d-1)^2
    };

    void build_conditionals() {
        if (dim() == 2) return;
        const int d = dim();
        conditionals_.resize(d);
        for (int j = 0; j < d; ++j) {
            Conditional c;
            std::vector<int> rest;
            for (int i = 0; i < d; ++i)
                if (i != j) rest.push_back(i);
            const int k = d - 1;
            std::vector<double> sigma(static_cast<std::size_t>(k) * k);
            c.r.resize(k);
            c.scale.resize(k);
            for (int a = 0; a < k; ++a) c.r[a] = R_(rest[a], j);
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b)
                    sigma[static_cast<std::size_t>(a) * k + b] =
                        R_(rest[a], rest[b]) - c.r[a] * c.r[b];
            for (int a = 0; a < k; ++a)
                c.scale[a] = 1.0 / std::sqrt(sigma[static_cast<std::size_t>(a) * k + a]);
            std::vector<double> corr(static_cast<std::size_t>(k) * k, 1.0);
            for (int a = 0; a < k; ++a) {
                for (int b = 0; b < a; ++b) {
                    const double r =
                        sigma[static_cast<std::size_t>(a) * k + b] * c.scale[a] * c.scale[b];
                    corr[static_cast<std::size_t>(a) * k + b] = r;
                    corr[static_cast<std::size_t>(b) * k + a] = r;
                }
            }
            CorrelationMatrix cm(k, std::move(corr));
            c.chol = cm.chol();
            conditionals_[j] = std::move(c);
        }
    }

    // P(X_i <= x_i for i != j | X_j = x_j), the first partial for d >= 3.
    double conditional_cdf(int j, std::span<const double> u) const {
        const auto& c = conditionals_[j];
        const double xj = norm_quantile(u[j]);
        const int k = dim() - 1;
        std::vector<double> t(k);
        int a = 0;
        for (int i = 0; i < dim(); ++i) {
            if (i == j) continue;
            if (u[i] == 1.0) t[a] = std::numeric_limits<double>::infinity();
            else t[a] = (norm_quantile(u[i]) - c.r[a] * xj) * c.scale[a];
            ++a;
        }
        if (k == 1) return norm_cdf(t[0]);
        if (k == 2) return binorm_cdf(t[0], t[1], c.chol[2]);  // L(1,0) = conditional corr
        return mvn_cdf_qmc(t, c.chol);
    }

    CorrelationMatrix R_;
    std::string spec_hint_;
    double rho_ = 0.0;
    double s_ = 1.0;
    std::vector<Conditional> conditionals_;
};

}  // namespace ecp
