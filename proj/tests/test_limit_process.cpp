#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ecp/copula/factory.hpp"
#include "ecp/limit_process.hpp"
#include "ecp/stats.hpp"

using namespace ecp;

namespace {

// Deliberately not a copula: non-monotone cdf makes the bridge "covariance"
// indefinite, which must defeat the jitter ladder.
class BrokenModel final : public CopulaModel {
public:
    BrokenModel() : CopulaModel(2, "broken", {}) {}
    std::string spec() const override { return "family=broken,dim=2"; }

protected:
    double cdf_impl(std::span<const double> u) const override {
        return (u[0] <= 0.5 && u[1] <= 0.5) ? 0.9 : 0.1;
    }
    double partial_interior(int, std::span<const double>) const override { return 0.0; }
    void sample_into(SampleMatrix& out, Rng& rng) const override { fill_uniform(out, rng); }
};

double limit_variance_oracle(const CopulaModel& m, const std::vector<double>& u) {
    // Var[alpha(u) - sum_j dC_j(u) alpha_j(u_j)] expanded through the bridge
    // covariance function
    const int d = m.dim();
    std::vector<std::vector<double>> edges(d, std::vector<double>(d, 1.0));
    std::vector<double> c(d);
    for (int j = 0; j < d; ++j) {
        edges[j][j] = u[j];
        c[j] = m.partial_derivative(j, u);
    }
    double var = bridge_covariance(m, u, u);
    for (int j = 0; j < d; ++j) {
        var += c[j] * c[j] * bridge_covariance(m, edges[j], edges[j]);
        var -= 2.0 * c[j] * bridge_covariance(m, u, edges[j]);
        for (int i = 0; i < j; ++i)
            var += 2.0 * c[i] * c[j] * bridge_covariance(m, edges[i], edges[j]);
    }
    return var;
}

}  // namespace

TEST_CASE("bridge covariance") {
    const auto pi2 = make_model("family=independence,dim=2");
    CHECK(bridge_covariance(*pi2, {1.0, 1.0}, {1.0, 1.0}) == 0.0);
    CHECK(bridge_covariance(*pi2, {0.5, 0.5}, {0.5, 0.5}) == Catch::Approx(0.1875));
    CHECK(bridge_covariance(*pi2, {0.0, 0.3}, {0.4, 0.9}) == 0.0);

    const auto g = make_model("family=gaussian,dim=2,rho=0.5");
    for (int k = 0; k < 32; ++k) {
        Rng rng(k);
        std::vector<double> u{rng.uniform(), rng.uniform()}, v{rng.uniform(), rng.uniform()};
        REQUIRE(bridge_covariance(*g, u, v) == bridge_covariance(*g, v, u));
    }
}

TEST_CASE("covariance factor") {
    const auto grid = make_uniform_grid(2, 9);

    SECTION("factor reproduces the covariance entrywise (independence)") {
        const auto pi2 = make_model("family=independence,dim=2");
        const auto f = CovarianceFactor::build(*pi2, grid);
        CHECK(f.jitter() == 0.0);
        std::vector<double> u(2), v(2);
        for (std::size_t a = 0; a < grid->node_count(); a += 3) {
            for (std::size_t b = a; b < grid->node_count(); b += 5) {
                grid->node(a, u);
                grid->node(b, v);
                const double expected = bridge_covariance(*pi2, u, v) + (a == b ? f.jitter() : 0.0);
                REQUIRE(f.reproduce(a, b) == Catch::Approx(expected).margin(1e-8));
            }
        }
    }

    SECTION("rank-deficient comonotone covariance succeeds with recorded jitter") {
        const auto m = make_model("family=frechet_upper,dim=2");
        const auto f = CovarianceFactor::build(*m, grid);
        CHECK(f.jitter() > 0.0);
        CHECK(f.jitter() <= 1e-8);
        std::vector<double> u(2), v(2);
        for (std::size_t a = 0; a < grid->node_count(); a += 2) {
            for (std::size_t b = a; b < grid->node_count(); b += 3) {
                grid->node(a, u);
                grid->node(b, v);
                const double expected = bridge_covariance(*m, u, v) + (a == b ? f.jitter() : 0.0);
                REQUIRE(f.reproduce(a, b) == Catch::Approx(expected).margin(1e-8));
            }
        }
    }

    SECTION("indefinite covariance fails at maximum jitter") {
        BrokenModel broken;
        CHECK_THROWS_AS(CovarianceFactor::build(broken, grid), SingularCovariance);
    }

    SECTION("dense budget enforced") {
        const auto pi2 = make_model("family=independence,dim=2");
        CHECK_THROWS_AS(CovarianceFactor::build(*pi2, make_uniform_grid(2, 101)),
                        std::invalid_argument);
    }
}

TEST_CASE("bridge sampling") {
    const auto pi2 = make_model("family=independence,dim=2");
    const auto grid = make_uniform_grid(2, 5);
    const auto factor = CovarianceFactor::build(*pi2, grid);

    SECTION("grounded nodes are exactly zero in every draw") {
        Rng rng(17);
        for (int k = 0; k < 50; ++k) {
            const auto f = factor.sample(rng);
            std::vector<double> u(2);
            for (std::size_t i = 0; i < grid->node_count(); ++i) {
                grid->node(i, u);
                if (u[0] == 0.0 || u[1] == 0.0) REQUIRE(f.values[i] == 0.0);
            }
            REQUIRE(f.values[grid->node_count() - 1] == 0.0);  // (1,1) has zero variance
        }
    }

    SECTION("fixed seed reproduces the field bitwise") {
        Rng a(5), b(5);
        CHECK(factor.sample(a).values == factor.sample(b).values);
    }

    SECTION("sample variance at the center matches the covariance (3 SE)") {
        const auto g9 = make_uniform_grid(2, 9);
        const auto f9 = CovarianceFactor::build(*pi2, g9);
        const std::size_t center = g9->stride(0) * 4 + 4;  // (0.5, 0.5)
        const int N = 10000;
        std::vector<double> vals(N);
        Rng rng(99);
        for (int k = 0; k < N; ++k) vals[k] = f9.sample(rng).values[center];
        const double se = 0.1875 * std::sqrt(2.0 / (N - 1.0));
        CHECK(variance(vals) == Catch::Approx(0.1875).margin(3.0 * se));
        CHECK(mean(vals) == Catch::Approx(0.0).margin(3.0 * std::sqrt(0.1875 / N)));
    }
}

TEST_CASE("limit process field") {
    const auto pi2 = make_model("family=independence,dim=2");
    const auto grid = make_uniform_grid(2, 9);
    const auto cache = ModelGridCache::build(*pi2, grid);
    const auto factor = CovarianceFactor::build(*pi2, grid);

    SECTION("boundary structure") {
        Rng rng(31);
        for (int k = 0; k < 25; ++k) {
            const auto bridge = factor.sample(rng);
            const auto cc = limit_process_field(cache, bridge);
            std::vector<double> u(2);
            for (std::size_t i = 0; i < grid->node_count(); ++i) {
                grid->node(i, u);
                if (u[0] == 0.0 || u[1] == 0.0)
                    REQUIRE(cc.values[i] == Catch::Approx(0.0).margin(1e-12));
            }
            // at edge nodes (u_j, 1): dC_j = 1 for the product copula, so the
            // limit field vanishes there identically
            for (int j = 0; j < 2; ++j) {
                for (std::size_t a = 0; a < grid->axis_size(j); ++a) {
                    REQUIRE(cc.values[grid->edge_index(j, a)] ==
                            Catch::Approx(0.0).margin(1e-12));
                }
            }
        }
    }

    SECTION("variance of the limit field matches the covariance-algebra oracle") {
        const std::vector<double> u{0.5, 0.5};
        const double expected = limit_variance_oracle(*pi2, u);
        CHECK(expected == Catch::Approx(0.0625).margin(1e-12));  // u v (1-u)(1-v)

        const std::size_t center = grid->stride(0) * 4 + 4;
        const int N = 10000;
        std::vector<double> vals(N);
        Rng rng(2025);
        for (int k = 0; k < N; ++k)
            vals[k] = limit_process_field(cache, factor.sample(rng)).values[center];
        const double se = expected * std::sqrt(2.0 / (N - 1.0));
        CHECK(variance(vals) == Catch::Approx(expected).margin(3.0 * se));
    }

    SECTION("gaussian model: oracle variance at an off-center node") {
        const auto g = make_model("family=gaussian,dim=2,rho=0.5");
        const auto gcache = ModelGridCache::build(*g, grid);
        const auto gfactor = CovarianceFactor::build(*g, grid);
        const std::vector<double> u{0.25, 0.625};
        const double expected = limit_variance_oracle(*g, u);
        const std::size_t node = grid->stride(0) * 2 + 5;  // (0.25, 0.625)
        const int N = 8000;
        std::vector<double> vals(N);
        Rng rng(77);
        for (int k = 0; k < N; ++k)
            vals[k] = limit_process_field(gcache, gfactor.sample(rng)).values[node];
        const double se = expected * std::sqrt(2.0 / (N - 1.0));
        CHECK(variance(vals) == Catch::Approx(expected).margin(3.5 * se));
    }

    SECTION("grid mismatch raises") {
        Rng rng(1);
        const auto other = make_uniform_grid(2, 5);
        const auto bridge = CovarianceFactor::build(*pi2, other).sample(rng);
        CHECK_THROWS_AS(limit_process_field(cache, bridge), std::invalid_argument);
    }
}

TEST_CASE("trajectory continuity proxy distinguishes smooth and failing models") {
    // average (over draws) of the max per-axis adjacent increment of the
    // limit field; halving the spacing shrinks it for a model with
    // continuous trajectories and leaves the comonotone jump in place
    const auto adjacent_max = [](const ProcessField& f) {
        const Grid& g = *f.grid;
        double best = 0.0;
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            for (int j = 0; j < g.dim(); ++j) {
                const std::size_t idx = (i / g.stride(j)) % g.axis_size(j);
                if (idx + 1 < g.axis_size(j))
                    best = std::max(best, std::abs(f.values[i + g.stride(j)] - f.values[i]));
            }
        }
        return best;
    };

    const auto avg_increment = [&](const CopulaModel& m, int grid_m, int draws) {
        const auto grid = make_uniform_grid(2, grid_m);
        const auto cache = ModelGridCache::build(m, grid);
        const auto factor = CovarianceFactor::build(m, grid);
        Rng rng(fnv1a64("continuity") + grid_m);
        double acc = 0.0;
        for (int k = 0; k < draws; ++k)
            acc += adjacent_max(limit_process_field(cache, factor.sample(rng)));
        return acc / draws;
    };

    const auto pi2 = make_model("family=independence,dim=2");
    const double pi_coarse = avg_increment(*pi2, 21, 100);
    const double pi_fine = avg_increment(*pi2, 41, 100);
    CHECK(pi_fine < pi_coarse);

    const auto m = make_model("family=frechet_upper,dim=2");
    const double m_coarse = avg_increment(*m, 21, 100);
    const double m_fine = avg_increment(*m, 41, 100);
    CHECK(m_fine >= 0.8 * m_coarse);

    // the smooth model contracts markedly more than the failing one
    CHECK(pi_fine / pi_coarse < m_fine / m_coarse);
}
