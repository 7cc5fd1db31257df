#include "doctest.h"

#include "polymag/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace polymag;

TEST_CASE("known low-order rules") {
    const GaussLegendre& g2 = gauss_legendre(2);
    CHECK(g2.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(g2.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(g2.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

    const GaussLegendre& g3 = gauss_legendre(3);
    CHECK(std::abs(g3.nodes[1]) <= 1e-15);
    CHECK(g3.weights[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
    CHECK(g3.nodes[2] == doctest::Approx(std::sqrt(0.6)).epsilon(1e-15));
    CHECK(g3.weights[2] == doctest::Approx(5.0 / 9.0).epsilon(1e-15));

    CHECK_THROWS_AS(GaussLegendre(1), std::invalid_argument);
}

TEST_CASE("an n-point rule integrates monomials up to degree 2n - 1 exactly") {
    for (int n : {2, 5, 8, 16, 24}) {
        const GaussLegendre& g = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : g.weights) wsum += w;
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double q = 0.0;
            for (std::size_t i = 0; i < g.nodes.size(); ++i) q += g.weights[i] * std::pow(g.nodes[i], p);
            const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
            CHECK(std::abs(q - exact) <= 1e-14);
        }
        double q = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) q += g.weights[i] * std::pow(g.nodes[i], 2 * n);
        CHECK(std::abs(q - 2.0 / (2 * n + 1)) > 1e-15);
        QuadratureConfig cfg;
        cfg.gl_order = n;
        CHECK(cfg.exact_for(2 * n - 1));
        CHECK_FALSE(cfg.exact_for(2 * n));
    }
}

TEST_CASE("composite nodes split at breakpoints inside the interval") {
    const auto nodes = composite_nodes(0.0, 1.0, {-1.0, 0.25, 0.5, 2.0}, 2, 4);
    CHECK(nodes.size() == 3 * 2 * 4);
    double total = 0.0;
    double below = 0.0;
    for (const auto& n : nodes) {
        total += n.w;
        if (n.x < 0.25) below += n.w;
        CHECK(n.x > 0.0);
        CHECK(n.x < 1.0);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(below == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(composite_nodes(0.3, 0.3, {}, 1, 8).empty());

    // |t - 0.25| is integrated exactly once the kink is a panel boundary.
    double q = 0.0;
    for (const auto& n : composite_nodes(0.0, 1.0, {0.25}, 1, 4)) q += n.w * std::abs(n.x - 0.25);
    CHECK(q == doctest::Approx(0.25 * 0.25 / 2 + 0.75 * 0.75 / 2).epsilon(1e-14));
}

TEST_CASE("smooth integrands converge") {
    double q = 0.0;
    for (const auto& n : composite_nodes(0.0, std::numbers::pi, {}, 4, 16)) q += n.w * std::sin(n.x);
    CHECK(q == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("configuration validation") {
    QuadratureConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.gl_order = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.rtol = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
