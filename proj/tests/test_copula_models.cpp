#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "ecp/copula/factory.hpp"
#include "ecp/copula/tail_dependence.hpp"
#include "ecp/empirical_process.hpp"
#include "ecp/diagnostics.hpp"
#include "ecp/normal.hpp"
#include "ecp/stats.hpp"
#include "support/oracles.hpp"

using namespace ecp;

namespace {

std::vector<std::unique_ptr<CopulaModel>> smooth_zoo() {
    std::vector<std::unique_ptr<CopulaModel>> zoo;
    zoo.push_back(make_model("family=independence,dim=2"));
    zoo.push_back(make_model("family=gaussian,dim=2,rho=0.5"));
    zoo.push_back(make_model("family=gaussian,dim=2,rho=-0.7"));
    zoo.push_back(make_model("family=clayton,dim=2,theta=1"));
    zoo.push_back(make_model("family=gumbel,dim=2,theta=2"));
    zoo.push_back(make_model("family=frank,dim=2,theta=5"));
    zoo.push_back(make_model("family=logistic,dim=2,theta=0.5"));
    return zoo;
}

std::vector<std::unique_ptr<CopulaModel>> full_zoo() {
    auto zoo = smooth_zoo();
    zoo.push_back(make_model("family=frechet_upper,dim=2"));
    zoo.push_back(make_model("family=frechet_lower,dim=2"));
    zoo.push_back(make_model("family=checkerboard,dim=2"));
    return zoo;
}

std::vector<double> halton_point(std::size_t i, int d, double margin = 0.0) {
    static constexpr unsigned primes[] = {2, 3, 5, 7};
    std::vector<double> u(d);
    for (int j = 0; j < d; ++j) u[j] = margin + (1.0 - 2.0 * margin) * halton(i + 1, primes[j]);
    return u;
}

}  // namespace

TEST_CASE("construction rejects invalid parameters") {
    CHECK_THROWS_AS(make_model("family=gaussian,dim=2,rho=1.0"), std::invalid_argument);
    CHECK_THROWS_AS(make_model("family=gaussian,dim=2,rho=-1.2"), std::invalid_argument);
    CHECK_THROWS_AS(make_model("family=clayton,dim=2,theta=0"), std::invalid_argument);
    CHECK_THROWS_AS(make_model("family=clayton,dim=2,theta=-1"), std::invalid_argument);
    CHECK_THROWS_AS(make_model("family=gumbel,dim=2,theta=0.8"), std::invalid_argument);
    CHECK_THROWS_AS(make_model("family=frank,dim=2,theta=0"), std::invalid_argument);
    CHECK_THROWS_AS(make_model("family=logistic,dim=2,theta=1.5"), std::invalid_argument);
    CHECK_THROWS_AS(make_model("family=logistic,dim=2,theta=0"), std::invalid_argument);
    CHECK_THROWS_AS(make_model("family=nosuch,dim=2"), std::invalid_argument);
    CHECK_THROWS_AS(make_model("dim=2"), std::invalid_argument);
    // d >= 3 Frank requires complete monotonicity (theta > 0)
    CHECK_THROWS_AS(make_model("family=frank,dim=3,theta=-2"), std::invalid_argument);
    CHECK_NOTHROW(make_model("family=frank,dim=2,theta=-2"));
    // exchangeable rho must keep R positive definite
    CHECK_THROWS_AS(make_model("family=gaussian,dim=3,rho=-0.6"), std::invalid_argument);
}

TEST_CASE("cdf point examples") {
    const auto pi2 = make_model("family=independence,dim=2");
    CHECK(pi2->cdf({0.5, 0.5}) == 0.25);

    const auto gauss = make_model("family=gaussian,dim=2,rho=0.5");
    CHECK(gauss->cdf({0.5, 0.5}) == Catch::Approx(1.0 / 3.0).margin(1e-6));

    const auto clayton = make_model("family=clayton,dim=2,theta=1");
    // (u^-1 + v^-1 - 1)^-1 evaluated directly
    CHECK(clayton->cdf({0.5, 0.5}) == Catch::Approx(1.0 / 3.0).margin(1e-14));

    const auto gauss3 = make_model("family=gaussian,dim=3,rho=0.5");
    // exchangeable trivariate orthant probability: 1/8 + 3 asin(1/2)/(4 pi) = 1/4
    CHECK(gauss3->cdf({0.5, 0.5, 0.5}) == Catch::Approx(0.25).margin(2e-5));
}

TEST_CASE("Frechet-Hoeffding and Lipschitz bounds on the zoo") {
    for (const auto& m : full_zoo()) {
        const bool quadrature = m->name() == "gaussian";
        const double tol = quadrature ? 1e-8 : 1e-12;
        std::vector<std::vector<double>> pts;
        for (std::size_t i = 0; i < 1000; ++i) pts.push_back(halton_point(i, m->dim()));
        for (const auto& u : pts) {
            const double c = m->cdf(u);
            double sum = 0.0, mn = 1.0;
            for (double x : u) {
                sum += x;
                mn = std::min(mn, x);
            }
            REQUIRE(c >= std::max(sum - m->dim() + 1.0, 0.0) - tol);
            REQUIRE(c <= mn + tol);
        }
        for (std::size_t i = 0; i + 1 < 200; ++i) {
            const auto u = pts[i], v = pts[i + 1];
            double l1 = 0.0;
            for (int j = 0; j < m->dim(); ++j) l1 += std::abs(u[j] - v[j]);
            REQUIRE(std::abs(m->cdf(u) - m->cdf(v)) <= l1 + tol);
        }
    }
}

TEST_CASE("grounded cdf and uniform margins") {
    for (const auto& m : full_zoo()) {
        CHECK(m->cdf({0.0, 0.7}) == 0.0);
        CHECK(m->cdf({0.3, 0.0}) == 0.0);
        CHECK(m->cdf({0.37, 1.0}) == 0.37);
        CHECK(m->cdf({1.0, 0.81}) == 0.81);
        CHECK(m->cdf({1.0, 1.0}) == 1.0);
    }
}

TEST_CASE("partial derivative point examples") {
    const auto pi2 = make_model("family=independence,dim=2");
    CHECK(pi2->partial_derivative(0, {0.3, 0.7}) == Catch::Approx(0.7).margin(1e-15));

    const auto clayton = make_model("family=clayton,dim=2,theta=1");
    CHECK(clayton->partial_derivative(0, {0.5, 0.5}) == Catch::Approx(4.0 / 9.0).margin(1e-12));
    CHECK(clayton->partial_derivative(0, {0.5, 0.5}) ==
          Catch::Approx(oracles::fd_first(*clayton, 0, {0.5, 0.5})).margin(1e-4));

    const auto gauss = make_model("family=gaussian,dim=2,rho=0.5");
    CHECK(gauss->partial_derivative(0, {0.5, 0.5}) == Catch::Approx(0.5).margin(1e-12));
    CHECK(gauss->partial_derivative(0, {0.5, 0.5}) ==
          Catch::Approx(oracles::fd_first(*gauss, 0, {0.5, 0.5})).margin(1e-4));

    CHECK_THROWS_AS(pi2->partial_derivative(2, {0.3, 0.7}), std::invalid_argument);
}

TEST_CASE("analytic first partials agree with finite differences") {
    for (const auto& m : smooth_zoo()) {
        REQUIRE(m->caps().analytic_first_derivs);
        for (std::size_t i = 0; i < 1000; ++i) {
            const auto u = halton_point(i, m->dim(), 0.05);
            for (int j = 0; j < m->dim(); ++j) {
                const double analytic = m->partial_derivative(j, u);
                const double fd = oracles::fd_first(*m, j, u);
                REQUIRE(analytic == Catch::Approx(fd).margin(1e-4));
            }
        }
    }
}

TEST_CASE("partial derivatives stay in [0,1] and respect grounding") {
    for (const auto& m : full_zoo()) {
        for (std::size_t i = 0; i < 500; ++i) {
            auto u = halton_point(i, m->dim());
            if (i % 5 == 1) u[0] = 0.0;
            if (i % 5 == 2) u[0] = 1.0;
            if (i % 5 == 3) u[1] = 0.0;
            if (i % 5 == 4) u[1] = 1.0;
            for (int j = 0; j < m->dim(); ++j) {
                const double v = m->partial_derivative(j, u);
                REQUIRE(v >= 0.0);
                REQUIRE(v <= 1.0);
                for (int o = 0; o < m->dim(); ++o) {
                    if (o != j && u[o] == 0.0) REQUIRE(v == 0.0);
                }
            }
        }
    }
}

TEST_CASE("boundary extension closed forms (gaussian d=2)") {
    const auto pos = make_model("family=gaussian,dim=2,rho=0.5");
    CHECK(pos->partial_derivative(0, {0.0, 0.5}) == 1.0);
    CHECK(pos->partial_derivative(0, {1.0, 0.5}) == 0.0);
    const auto neg = make_model("family=gaussian,dim=2,rho=-0.7");
    CHECK(neg->partial_derivative(0, {0.0, 0.5}) == 0.0);
    CHECK(neg->partial_derivative(0, {1.0, 0.5}) == 1.0);
    // margin: dC/du (u, 1) = 1
    CHECK(pos->partial_derivative(0, {0.7, 1.0}) == 1.0);
}

TEST_CASE("second partial examples and finite-difference agreement") {
    const auto pi2 = make_model("family=independence,dim=2");
    CHECK(pi2->second_partial(0, 1, {0.3, 0.8}) == 1.0);
    CHECK(pi2->second_partial(0, 0, {0.3, 0.8}) == 0.0);

    // logistic theta=1 reduces to independence: density is 1 everywhere
    const auto ev1 = make_model("family=logistic,dim=2,theta=1");
    for (double u : {0.2, 0.5, 0.9}) {
        for (double v : {0.1, 0.6, 0.8}) {
            CHECK(ev1->second_partial(0, 1, {u, v}) == Catch::Approx(1.0).margin(1e-12));
        }
    }

    for (const auto& m : smooth_zoo()) {
        if (!m->caps().analytic_second_derivs) continue;
        for (std::size_t i = 0; i < 120; ++i) {
            const auto u = halton_point(i, 2, 0.08);
            for (int a = 0; a < 2; ++a) {
                for (int b = a; b < 2; ++b) {
                    const double analytic = m->second_partial(a, b, u);
                    const double fd = oracles::fd_second(*m, a, b, u);
                    REQUIRE(analytic == Catch::Approx(fd).margin(1e-3));
                }
            }
        }
    }

    // capability flag absent -> unsupported
    const auto frechet = make_model("family=frechet_upper,dim=2");
    CHECK_THROWS_AS(frechet->second_partial(0, 1, {0.4, 0.6}), UnsupportedOperation);
}

TEST_CASE("extreme-value density boundary cases and bound") {
    const auto ev = make_logistic_ev(0.5);
    // second u-derivative vanishes on the v-faces
    CHECK(ev.second_partial(0, 0, {0.4, 0.0}) == 0.0);
    CHECK(ev.second_partial(0, 0, {0.4, 1.0}) == 0.0);

    // analytic: A'' = 1/A^3 for theta=1/2, so M = (1/4) 2^{3/2} = 2^{-1/2}
    const double M = pickands_M(ev.pickands()).value;
    CHECK(M == Catch::Approx(std::pow(2.0, -0.5)).margin(1e-6));
    for (int i = 1; i < 100; ++i) {
        for (int j = 1; j < 100; ++j) {
            const double u = i / 100.0, v = j / 100.0;
            const double dens = ev.second_partial(0, 1, {u, v});
            const double bound =
                (1.0 + M) * std::min(1.0 / (u * (1.0 - u)), 1.0 / (v * (1.0 - v)));
            REQUIRE(dens >= -1e-12);
            REQUIRE(dens <= bound + 1e-9);
        }
    }
}

TEST_CASE("user-supplied Pickands function (mixed model)") {
    // A(t) = theta t^2 - theta t + 1, valid for theta in [0,1]
    const double theta = 0.8;
    PickandsFunction mixed;
    mixed.name = "mixed";
    mixed.A = [theta](double t) { return theta * t * t - theta * t + 1.0; };
    mixed.dA = [theta](double t) { return theta * (2.0 * t - 1.0); };
    mixed.d2A = [theta](double) { return 2.0 * theta; };
    const ExtremeValueCopula ev{mixed};

    SECTION("copula properties and derivative agreement") {
        for (std::size_t i = 0; i < 300; ++i) {
            const auto u = halton_point(i, 2, 0.05);
            const double c = ev.cdf(u);
            REQUIRE(c <= std::min(u[0], u[1]) + 1e-12);
            REQUIRE(c >= std::max(u[0] + u[1] - 1.0, 0.0) - 1e-12);
            for (int j = 0; j < 2; ++j)
                REQUIRE(ev.partial_derivative(j, u) ==
                        Catch::Approx(oracles::fd_first(ev, j, u)).margin(1e-4));
            REQUIRE(ev.second_partial(0, 1, u) ==
                    Catch::Approx(oracles::fd_second(ev, 0, 1, u)).margin(1e-3));
        }
    }

    SECTION("pickands M is the exact sup of t(1-t) A''") {
        CHECK(pickands_M(mixed).value == Catch::Approx(2.0 * theta * 0.25).margin(1e-8));
    }

    SECTION("sampler is consistent (rosenblatt)") {
        Rng rng(100);
        const auto s = ev.sample(1200, rng);
        std::vector<double> w(s.n);
        for (int i = 0; i < s.n; ++i) w[i] = ev.partial_derivative(0, {s(i, 0), s(i, 1)});
        CHECK(ks_one_sample(w, [](double x) { return x; }) <= 1.63 / std::sqrt(1200.0));
    }

    SECTION("invalid A is rejected") {
        PickandsFunction bad = mixed;
        bad.A = [](double) { return 0.2; };  // violates A >= max(t, 1-t)
        CHECK_THROWS_AS(ExtremeValueCopula{bad}, std::invalid_argument);
    }
}

TEST_CASE("gumbel archimedean coincides with logistic extreme-value") {
    // same copula through two unrelated evaluation routes
    const auto gumbel = make_model("family=gumbel,dim=2,theta=2");
    const auto logistic = make_model("family=logistic,dim=2,theta=0.5");
    for (std::size_t i = 0; i < 200; ++i) {
        const auto u = halton_point(i, 2, 0.02);
        REQUIRE(gumbel->cdf(u) == Catch::Approx(logistic->cdf(u)).margin(1e-12));
        REQUIRE(gumbel->partial_derivative(0, u) ==
                Catch::Approx(logistic->partial_derivative(0, u)).margin(1e-10));
        REQUIRE(gumbel->second_partial(0, 1, u) ==
                Catch::Approx(logistic->second_partial(0, 1, u)).margin(1e-8));
    }
}

TEST_CASE("generator identities") {
    for (double theta : {0.5, 1.0, 3.0}) {
        ClaytonGenerator g(theta);
        for (double t : {0.01, 0.2, 0.5, 0.9, 1.0})
            CHECK(g.phi_inv(g.phi(t)) == Catch::Approx(t).margin(1e-12));
    }
    for (double theta : {1.0, 1.7, 4.0}) {
        GumbelGenerator g(theta);
        for (double t : {0.01, 0.2, 0.5, 0.9})
            CHECK(g.phi_inv(g.phi(t)) == Catch::Approx(t).margin(1e-12));
    }
    for (double theta : {-3.0, 0.5, 5.0}) {
        FrankGenerator g(theta);
        for (double t : {0.01, 0.2, 0.5, 0.9})
            CHECK(g.phi_inv(g.phi(t)) == Catch::Approx(t).margin(1e-12));
        CHECK(g.phi(1.0) == Catch::Approx(0.0).margin(1e-14));
    }
}

TEST_CASE("samplers: margins, dependence, determinism") {
    SECTION("independence margins (KS, 95% critical value)") {
        const auto m = make_model("family=independence,dim=2");
        Rng rng(20240901);
        const auto s = m->sample(1000, rng);
        for (int j = 0; j < 2; ++j) {
            const auto col = s.column(j);
            const double ks = ks_one_sample(col, [](double x) { return x; });
            CHECK(ks <= 0.0608);  // spec ceiling
            CHECK(ks <= 1.358 / std::sqrt(1000.0));
        }
    }

    SECTION("comonotone rows are equal") {
        const auto m = make_model("family=frechet_upper,dim=2");
        Rng rng(7);
        const auto s = m->sample(64, rng);
        for (int i = 0; i < s.n; ++i) CHECK(s(i, 0) == s(i, 1));
    }

    SECTION("countermonotone rows sum to one") {
        const auto m = make_model("family=frechet_lower,dim=2");
        Rng rng(7);
        const auto s = m->sample(64, rng);
        for (int i = 0; i < s.n; ++i) CHECK(s(i, 0) + s(i, 1) == Catch::Approx(1.0));
    }

    SECTION("clayton kendall tau near theta/(theta+2)") {
        const auto m = make_model("family=clayton,dim=2,theta=1");
        Rng rng(99);
        const auto s = m->sample(10000, rng);
        const double tau = kendall_tau(s.column(0), s.column(1));
        CHECK(tau == Catch::Approx(1.0 / 3.0).margin(0.03));
    }

    SECTION("gumbel frailty sampler: tau = 1 - 1/theta") {
        const auto m = make_model("family=gumbel,dim=2,theta=2");
        Rng rng(123);
        const auto s = m->sample(4000, rng);
        const double tau = kendall_tau(s.column(0), s.column(1));
        CHECK(tau == Catch::Approx(0.5).margin(0.035));
    }

    SECTION("extreme-value sampler: tau = 1 - theta for the logistic family") {
        const auto m = make_model("family=logistic,dim=2,theta=0.5");
        Rng rng(321);
        const auto s = m->sample(4000, rng);
        const double tau = kendall_tau(s.column(0), s.column(1));
        CHECK(tau == Catch::Approx(0.5).margin(0.035));
    }

    SECTION("rosenblatt residuals are uniform for frailty and root-finding samplers") {
        for (const char* spec :
             {"family=gumbel,dim=2,theta=2", "family=logistic,dim=2,theta=0.5",
              "family=gaussian,dim=2,rho=0.5", "family=frank,dim=2,theta=5"}) {
            const auto m = make_model(spec);
            Rng rng(fnv1a64(spec));
            const int n = 1500;
            const auto s = m->sample(n, rng);
            std::vector<double> w(n);
            for (int i = 0; i < n; ++i)
                w[i] = m->partial_derivative(0, {s(i, 0), s(i, 1)});
            const double ks = ks_one_sample(w, [](double x) { return x; });
            INFO(spec);
            CHECK(ks <= 1.63 / std::sqrt(static_cast<double>(n)));  // 99% critical value
        }
    }

    SECTION("gaussian d=3 sampler matches exchangeable correlation") {
        const auto m = make_model("family=gaussian,dim=3,rho=0.5");
        Rng rng(5150);
        const auto s = m->sample(4000, rng);
        for (int a = 0; a < 3; ++a) {
            for (int b = a + 1; b < 3; ++b) {
                double acc = 0.0;  // normal-scores correlation
                for (int i = 0; i < s.n; ++i)
                    acc += norm_quantile(s(i, a)) * norm_quantile(s(i, b));
                CHECK(acc / s.n == Catch::Approx(0.5).margin(0.05));
            }
        }
    }

    SECTION("clayton d=3 frailty sampler: pairwise tau") {
        const auto m = make_model("family=clayton,dim=3,theta=1");
        Rng rng(8080);
        const auto s = m->sample(3000, rng);
        for (int a = 0; a < 3; ++a) {
            for (int b = a + 1; b < 3; ++b) {
                const double tau = kendall_tau(s.column(a), s.column(b));
                CHECK(tau == Catch::Approx(1.0 / 3.0).margin(0.04));
            }
        }
    }

    SECTION("frank d=3 log-series frailty sampler: uniform margins") {
        const auto m = make_model("family=frank,dim=3,theta=3");
        Rng rng(512);
        const auto s = m->sample(2000, rng);
        for (int j = 0; j < 3; ++j) {
            const double ks = ks_one_sample(s.column(j), [](double x) { return x; });
            CHECK(ks <= 1.63 / std::sqrt(2000.0));
        }
    }

    SECTION("d=3 frailty samplers match the joint cdf pointwise") {
        for (const char* spec : {"family=clayton,dim=3,theta=1", "family=gumbel,dim=3,theta=2",
                                 "family=frank,dim=3,theta=3"}) {
            const auto m = make_model(spec);
            Rng rng(fnv1a64(spec) ^ 0xf00d);
            const int n = 4000;
            const auto s = m->sample(n, rng);
            for (std::size_t i = 0; i < 12; ++i) {
                const auto u = halton_point(7 * i + 1, 3, 0.15);
                const double truth = m->cdf(u);
                const double emp = ecdf_joint(s, u);
                const double se = std::sqrt(truth * (1.0 - truth) / n);
                INFO(spec << " at point " << i);
                REQUIRE(std::abs(emp - truth) <= 4.0 * se + 1e-9);
            }
        }
    }

    SECTION("checkerboard sampler fills the two diagonal squares") {
        const auto m = make_model("family=checkerboard,dim=2");
        Rng rng(2222);
        const auto s = m->sample(2000, rng);
        int diag = 0;
        for (int i = 0; i < s.n; ++i) {
            const bool low = s(i, 0) <= 0.5 && s(i, 1) <= 0.5;
            const bool high = s(i, 0) >= 0.5 && s(i, 1) >= 0.5;
            diag += (low || high);
        }
        CHECK(diag == s.n);
    }

    SECTION("same seed, same sample") {
        const auto m = make_model("family=gumbel,dim=2,theta=3");
        Rng a(42), b(42);
        const auto s1 = m->sample(100, a);
        const auto s2 = m->sample(100, b);
        CHECK(s1.data == s2.data);
    }

    SECTION("n < 1 rejected") {
        const auto m = make_model("family=independence,dim=2");
        Rng rng(1);
        CHECK_THROWS_AS(m->sample(0, rng), std::invalid_argument);
    }
}

TEST_CASE("tail dependence coefficients") {
    SECTION("independence: both zero") {
        const auto td = tail_dependence_coefficients(*make_model("family=independence,dim=2"));
        CHECK(td.lambda_lower == Catch::Approx(0.0).margin(1e-9));
        CHECK(td.lambda_upper == Catch::Approx(0.0).margin(1e-9));
        CHECK(td.lower_converged);
        CHECK(td.upper_converged);
    }
    SECTION("clayton theta=1: lower 1/2, upper 0") {
        const auto td = tail_dependence_coefficients(*make_model("family=clayton,dim=2,theta=1"));
        CHECK(td.lambda_lower == Catch::Approx(0.5).margin(1e-4));
        CHECK(td.lambda_upper == Catch::Approx(0.0).margin(1e-4));
    }
    SECTION("logistic theta=1/2: upper 2 - sqrt(2)") {
        const auto td =
            tail_dependence_coefficients(*make_model("family=logistic,dim=2,theta=0.5"));
        CHECK(td.lambda_upper == Catch::Approx(2.0 - std::sqrt(2.0)).margin(1e-4));
        CHECK(td.lambda_lower == Catch::Approx(0.0).margin(1e-4));
    }
    SECTION("gaussian rho=0.5: both limits zero at 1e-3 scale") {
        const auto td = tail_dependence_coefficients(*make_model("family=gaussian,dim=2,rho=0.5"));
        CHECK(td.lambda_lower <= 1e-3);
        CHECK(td.lambda_upper <= 1e-3);
    }
    SECTION("comonotone: both one") {
        const auto td = tail_dependence_coefficients(*make_model("family=frechet_upper,dim=2"));
        CHECK(td.lambda_lower == Catch::Approx(1.0).margin(1e-9));
        CHECK(td.lambda_upper == Catch::Approx(1.0).margin(1e-9));
    }
    SECTION("d=2 precondition") {
        CHECK_THROWS_AS(tail_dependence_coefficients(*make_model("family=gaussian,dim=3,rho=0.5")),
                        std::invalid_argument);
    }
}

TEST_CASE("model factory") {
    CHECK(make_model("family=gaussian,dim=2,rho=0.5")->spec() == "family=gaussian,dim=2,rho=0.5");
    CHECK(make_model("family=clayton, dim=2, theta=1")->name() == "clayton");
    CHECK(make_model("family=independence,dim=4")->dim() == 4);
    CHECK_THROWS_AS(make_model("family=gaussian,dim=2"), std::invalid_argument);  // missing rho
    CHECK_THROWS_AS(make_model("gaussian"), std::invalid_argument);

    SECTION("correlation matrix from file") {
        const auto path = std::filesystem::temp_directory_path() / "ecp_test_corr.txt";
        {
            std::ofstream out(path);
            out << "1 0.3 0.2\n0.3 1 0.1\n0.2 0.1 1\n";
        }
        const auto m = make_model("family=gaussian,dim=3,corr=" + path.string());
        CHECK(m->dim() == 3);
        const auto* g = dynamic_cast<const GaussianCopula*>(m.get());
        REQUIRE(g != nullptr);
        CHECK(g->correlation()(0, 1) == 0.3);
        std::filesystem::remove(path);
    }
}

TEST_CASE("gaussian d=3 derivatives through the conditional normal") {
    const auto g3 = make_model("family=gaussian,dim=3,rho=0.5");
    REQUIRE(g3->caps().analytic_first_derivs);

    SECTION("agrees with a coarse finite difference of the cubature cdf") {
        // wide stencil keeps the deterministic cubature bias out of the quotient
        for (std::size_t i = 0; i < 20; ++i) {
            const auto u = halton_point(3 * i + 1, 3, 0.15);
            for (int j = 0; j < 3; ++j) {
                const double fd = oracles::fd_first(*g3, j, u, 1e-2);
                REQUIRE(g3->partial_derivative(j, u) == Catch::Approx(fd).margin(2e-3));
            }
        }
    }

    SECTION("boundary extension stays in range and respects grounding") {
        CHECK(g3->partial_derivative(0, {0.0, 0.5, 0.6}) >= 0.0);
        CHECK(g3->partial_derivative(0, {0.0, 0.5, 0.6}) <= 1.0);
        CHECK(g3->partial_derivative(0, {1.0, 0.5, 0.6}) <= 1.0);
        CHECK(g3->partial_derivative(0, {0.3, 0.0, 0.6}) == 0.0);
        // rho > 0: conditioning coordinate at 0 pushes the others to certainty
        CHECK(g3->partial_derivative(0, {0.0, 0.9, 0.9}) > 0.8);
    }
}

TEST_CASE("capability declarations across the zoo") {
    CHECK(make_model("family=gaussian,dim=2,rho=0.5")->caps().condition_2_1);
    CHECK(make_model("family=gaussian,dim=2,rho=0.5")->caps().condition_4_1);
    CHECK(make_model("family=gaussian,dim=3,rho=0.5")->caps().analytic_second_derivs == false);
    CHECK(make_model("family=clayton,dim=2,theta=1")->caps().condition_2_1);
    CHECK(make_model("family=frechet_upper,dim=2")->caps().condition_2_1 == false);
    CHECK(make_model("family=checkerboard,dim=2")->caps().condition_2_1 == false);
    CHECK(make_model("family=logistic,dim=2,theta=0.5")->caps().analytic_second_derivs);
}
