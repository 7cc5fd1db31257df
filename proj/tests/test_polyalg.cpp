#include "doctest.h"

#include "polymag/errors.hpp"
#include "polymag/polyalg.hpp"
#include "support.hpp"

#include <cmath>

using namespace polymag;
using polymag::testing::Gen;

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST_CASE("graded order: degree ascending, lexicographically descending inside a degree") {
    const auto b1 = enumerate_basis(2, 1);
    REQUIRE(b1->size() == 3);
    CHECK((*b1)[0] == MultiIndex{0, 0});
    CHECK((*b1)[1] == MultiIndex{1, 0});
    CHECK((*b1)[2] == MultiIndex{0, 1});

    const auto b2 = enumerate_basis(2, 2);
    const std::vector<MultiIndex> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    CHECK(b2->order() == expected);

    const auto b3 = enumerate_basis(3, 2);
    CHECK((*b3)[4] == MultiIndex{2, 0, 0});
    CHECK((*b3)[5] == MultiIndex{1, 1, 0});
    CHECK((*b3)[9] == MultiIndex{0, 0, 2});
}

TEST_CASE("basis size is C(d + m, d) and index_of inverts the order") {
    for (std::size_t d = 1; d <= 4; ++d) {
        for (int m = 0; m <= 6; ++m) {
            const auto b = enumerate_basis(d, m);
            CHECK(b->size() == binomial(d + static_cast<std::size_t>(m), d));
            CHECK(basis_size(d, m) == b->size());
            for (std::size_t i = 0; i < b->size(); ++i) {
                CHECK(b->index_of((*b)[i]) == i);
                if (i > 0) CHECK((*b)[i - 1].degree() <= (*b)[i].degree());
            }
            MultiIndex too_high(d);
            too_high[0] = m + 1;
            CHECK(b->index_of(too_high) == b->size());
            CHECK(b->degree_end(m) == b->size());
        }
    }
    CHECK_THROWS_AS(enumerate_basis(0, 2), std::invalid_argument);
}

TEST_CASE("multi-index arithmetic and text form") {
    const MultiIndex k{2, 0, 3};
    CHECK(k.degree() == 5);
    CHECK(k.factorial() == doctest::Approx(12.0));
    CHECK(k.to_string() == "2,0,3");
    CHECK(MultiIndex::parse("2,0,3") == k);
    CHECK(MultiIndex::parse("4") == MultiIndex{4});
    CHECK_THROWS_AS(MultiIndex::parse("1,-1"), std::invalid_argument);
    CHECK_THROWS_AS(MultiIndex::parse("a"), std::invalid_argument);
    const double x[] = {2.0, 5.0, -1.0};
    CHECK(k.monomial(x) == doctest::Approx(-4.0));
    CHECK(MultiIndex{12}.factorial() == 479001600.0);
}

TEST_CASE("product agrees with pointwise multiplication") {
    Gen g(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = static_cast<std::size_t>(g.integer(1, 3));
        const int mp = g.integer(0, 3);
        const int mq = g.integer(0, 3);
        const Polynomial p = g.polynomial(d, mp);
        const Polynomial q = g.polynomial(d, mq);
        const Polynomial pq = multiply(p, q, mp + mq);
        for (int k = 0; k < 5; ++k) {
            const auto x = g.point(d);
            CHECK(pq.eval(x) == doctest::Approx(p.eval(x) * q.eval(x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("product past the target degree raises DegreeOverflow") {
    const auto b = enumerate_basis(1, 1);
    const Polynomial x = Polynomial::coordinate(b, 0);
    CHECK_THROWS_AS(multiply(x, x, 1), DegreeOverflow);
    // Cancellation above the target is fine.
    const auto b2 = enumerate_basis(1, 2);
    Polynomial p = Polynomial::monomial(b2, MultiIndex{2});
    p -= Polynomial::monomial(b2, MultiIndex{2});
    CHECK_NOTHROW(multiply(p, x, 1));
    CHECK_THROWS_AS(Polynomial::monomial(b2, MultiIndex{2}).on_degree(1), DegreeOverflow);
}

TEST_CASE("partial derivatives match central differences") {
    Gen g(12);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = static_cast<std::size_t>(g.integer(1, 3));
        const Polynomial p = g.polynomial(d, g.integer(1, 5));
        const std::size_t i = static_cast<std::size_t>(g.integer(0, static_cast<int>(d) - 1));
        const Polynomial dp = partial_derivative(p, i);
        auto x = g.point(d);
        const double h = 1e-5;
        auto xp = x;
        auto xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (p.eval(xp) - p.eval(xm)) / (2 * h);
        CHECK(dp.eval(x) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("D^l is the composition of first derivatives") {
    Gen g(13);
    for (int trial = 0; trial < 50; ++trial) {
        const Polynomial p = g.polynomial(2, 5);
        const MultiIndex l{g.integer(0, 3), g.integer(0, 3)};
        Polynomial expected = p;
        for (int a = 0; a < l[0]; ++a) expected = partial_derivative(expected, 0);
        for (int a = 0; a < l[1]; ++a) expected = partial_derivative(expected, 1);
        CHECK(derivative(p, l) == expected);
    }
}

TEST_CASE("degree and norm") {
    const auto b = enumerate_basis(2, 3);
    Polynomial p(b);
    CHECK(p.degree() == Polynomial::kZeroDegree);
    CHECK(p.is_zero());
    p += Polynomial::monomial(b, MultiIndex{1, 1}, -3.0);
    p += Polynomial::constant(b, 2.0);
    CHECK(p.degree() == 2);
    CHECK(p.norm() == 3.0);
    CHECK(p.coeff(MultiIndex{1, 1}) == -3.0);
    CHECK(p.on_degree(2).degree() == 2);
}
