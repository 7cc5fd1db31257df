#include "doctest.h"

#include "polymag/builtins.hpp"
#include "polymag/errors.hpp"
#include "polymag/expression.hpp"
#include "polymag/generator.hpp"
#include "polymag/jump_kernels.hpp"
#include "polymag/spec_document.hpp"
#include "support.hpp"

#include <cmath>

using namespace polymag;
using polymag::testing::Gen;

namespace {

int error_line(const std::string& text) {
    try {
        parse_spec(text);
    } catch (const SpecError& e) {
        return e.line();
    }
    return -1;
}

std::pair<int, int> expr_error(const std::string& text, std::size_t d = 1) {
    try {
        parse_expression(text, d, 1, 0);
    } catch (const SpecError& e) {
        return {e.line(), e.column()};
    }
    return {-1, -1};
}

// Simpson on [lo, hi] of xi^l * density(xi); the densities are smooth there.
template <class F>
double integrate(F density, double lo, double hi, int l) {
    const int n = 20000;
    const double h = (hi - lo) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double xi = lo + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * std::pow(xi, l) * density(xi);
    }
    return acc * h / 3;
}

const char* kOu = R"(# mean reversion towards theta t
[meta]
name = ou
m = 4
T = 2

[drift]
1: 0.5*t - x

[diffusion]
1,1: 1
)";

}  // namespace

TEST_CASE("a small document parses into the expected characteristics") {
    const ProcessSpec spec = parse_spec(kOu);
    CHECK(spec.name == "ou");
    CHECK(spec.d == 1);
    CHECK(spec.m == 4);
    CHECK(spec.horizon == 2.0);
    CHECK(spec.same_characteristics(builtin("ou-theta-t", {{"theta", "0.5"}, {"T", "2"}})));
}

TEST_CASE("two-dimensional document with every section") {
    const std::string text = R"([diffusion]
11: 1
12: 0.5*x1
22: x1^2 + 1
[drift]
1: piecewise(1, 0.5, 2*t)
2: -x2 + x1
[meta]
d = 2
m = 4
state_space = positive 1
[jump_moments]
(2,0): 0.1
(1,1): 0.2*x1
(0,4): x2^4
)";
    const ProcessSpec spec = parse_spec(text);
    CHECK(spec.d == 2);
    CHECK(spec.state_space == StateSpace::positive(1));
    CHECK(spec.c(1, 0).eval(0.3, std::vector{2.0, 1.0}) == doctest::Approx(1.0));
    CHECK(spec.c(1, 1).eval(0.3, std::vector{2.0, 1.0}) == doctest::Approx(5.0));
    CHECK(spec.drift[0].eval(0.75, std::vector{0.0, 0.0}) == doctest::Approx(1.5));
    CHECK(spec.jump_moments.size() == 3);
    CHECK(spec.breaks() == std::vector<double>{0.5});
    CHECK(parse_spec(serialize_spec(spec)).same_characteristics(spec));
}

TEST_CASE("parse errors carry line and column") {
    CHECK(error_line("[meta]\nm = 3\n") == 2);
    CHECK(error_line("[meta]\nd = 1\n[drift]\n1: x^2\n") == 4);
    CHECK(error_line("[drift]\n1: t\n1: x\n") == 3);
    CHECK(error_line("[meta]\n[meta]\n") == 2);
    CHECK(error_line("[nonsense]\n") == 1);
    CHECK(error_line("1: x\n") == 1);
    CHECK(error_line("[diffusion]\n2,1: 1\n") == 2);
    CHECK(error_line("[meta]\nm = 2\n[jump_moments]\n(3): x\n") == 4);
    CHECK(error_line("[meta]\nfoo = 1\n") == 2);
    CHECK(error_line("[meta]\nd = 2\n[sampler]\nlog-uniform-down a=-0.5 b=-0.1\n") == 3);
    CHECK(error_line("[sampler]\nlog-uniform-down a=-0.5 b=0.1\n") == 2);
    CHECK(error_line("[meta]\nstate_space = box 1 0\n") == 2);

    try {
        parse_spec("[drift]\n1:  t + * x\n");
        FAIL("expected a SpecError");
    } catch (const SpecError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 9);
        CHECK(std::string(e.what()).starts_with("line 2, column 9: "));
    }
    CHECK(expr_error("1 + (x") == std::pair{1, 7});
    CHECK(expr_error("x3", 2).first == 1);
}

TEST_CASE("the grammar cannot express non-polynomial characteristics") {
    // Cauchy-type coefficients (|x|, sqrt, 1/x, exp) have no spelling: only
    // +, -, *, constant division and non-negative integer powers exist.
    for (const char* text : {"abs(x)", "sqrt(1 + x^2)", "x^-1", "x^0.5", "1/x", "1/(1 + x^2)", "exp(x)", "log(x)",
                             "x^(1/2)", "inf", "nan", "1e400", "t/x", "piecewise(1, x, 2)", "piecewise(1, 0.5, 2)",
                             "piecewise(t, 0.7, 1, 0.2, t)"}) {
        CHECK_THROWS_AS(parse_expression(text, 1), SpecError);
    }
    // Division by constant expressions is fine.
    CHECK(parse_expression("x/(2*2)", 1) == parse_expression("0.25*x", 1));
    CHECK(parse_constant("1/3") == doctest::Approx(1.0 / 3));
    CHECK_THROWS_AS(parse_constant("t"), SpecError);
}

TEST_CASE("expressions evaluate like the arithmetic they spell") {
    Gen g(61);
    const TimePolynomial p = parse_expression("(1 + t)^2 * x1 - x2*(x1 - 3)/2 + -t^3", 2);
    for (int i = 0; i < 20; ++i) {
        const double t = g.uniform(0, 1);
        const auto x = g.point(2);
        const double expected = (1 + t) * (1 + t) * x[0] - x[1] * (x[0] - 3) / 2 - t * t * t;
        CHECK(p.eval(t, x) == doctest::Approx(expected));
    }
    const TimeCoefficient pw = parse_time_coefficient("piecewise(1, 0.5, 2*t, 0.75, 3 - 2*t)");
    CHECK(pw(0.25) == 1.0);
    CHECK(pw(0.6) == doctest::Approx(1.2));
    CHECK(pw(0.9) == doctest::Approx(1.2));
}

TEST_CASE("every builtin survives serialization") {
    for (const auto& info : builtin_catalog()) {
        const ProcessSpec spec = builtin(info.name);
        const std::string text = serialize_spec(spec);
        const ProcessSpec back = parse_spec(text);
        CHECK_MESSAGE(back.same_characteristics(spec), text);
        CHECK(back.state_space == spec.state_space);
        CHECK(back.name == spec.name);
        CHECK(spec.state_space.contains(builtin_initial_state(info.name)));
    }
    const ProcessSpec mixed = builtin("jacobi-jumps", {{"alpha", "0.25"}, {"kappa", "3"}, {"T", "2"}});
    CHECK(parse_spec(serialize_spec(mixed)).same_characteristics(mixed));
}

TEST_CASE("builtin parameter checking") {
    CHECK_THROWS_AS(builtin("no-such-process"), SpecError);
    CHECK_THROWS_AS(builtin("bm-drift", {{"b", "1"}}), SpecError);
    CHECK_THROWS_AS(builtin("bm-drift", {{"m", "3"}}), SpecError);
    CHECK_THROWS_AS(builtin("bm-drift", {{"m", "14"}}), SpecError);
    CHECK_THROWS_AS(builtin("bm-drift", {{"T", "0"}}), SpecError);
    CHECK_THROWS_AS(builtin("bm-drift", {{"a", "x"}}), SpecError);
    CHECK_THROWS_AS(builtin("jacobi", {{"b", "-1"}}), SpecError);
    CHECK_THROWS_AS(builtin("jacobi-jumps", {{"a", "-2"}}), SpecError);
    CHECK_THROWS_AS(builtin("jacobi-jumps", {{"b", "0.1"}}), SpecError);
    CHECK_THROWS_AS(builtin("jacobi-jumps", {{"alpha", "1"}}), SpecError);
    CHECK_THROWS_AS(builtin("ou-theta-t", {{"theta", "t"}}), SpecError);
    CHECK_NOTHROW(builtin("bm-drift", {{"m", "12"}, {"T", "3"}}));
    CHECK(builtin("quadratic-drift-counterexample").violations(true).size() == 1);
}

TEST_CASE("fuzzed documents fail only with SpecError") {
    Gen g(62);
    std::vector<std::string> seeds{kOu};
    for (const auto& info : builtin_catalog()) seeds.push_back(serialize_spec(builtin(info.name)));
    const std::string alphabet = "[]():,=#+-*/^.0123456789 txe\n";
    int accepted = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        std::string text = seeds[static_cast<std::size_t>(g.integer(0, static_cast<int>(seeds.size()) - 1))];
        const int edits = g.integer(1, 4);
        for (int e = 0; e < edits && !text.empty(); ++e) {
            const auto pos = static_cast<std::size_t>(g.integer(0, static_cast<int>(text.size()) - 1));
            const char c = alphabet[static_cast<std::size_t>(g.integer(0, static_cast<int>(alphabet.size()) - 1))];
            switch (g.integer(0, 2)) {
                case 0: text[pos] = c; break;
                case 1: text.insert(pos, 1, c); break;
                default: text.erase(pos, 1); break;
            }
        }
        try {
            const ProcessSpec spec = parse_spec(text);
            ++accepted;
            // Anything accepted must also survive a round trip.
            CHECK(parse_spec(serialize_spec(spec)).same_characteristics(spec));
        } catch (const SpecError&) {
        } catch (const std::exception& e) {
            FAIL_CHECK("unexpected exception type for input:\n", text, "\n", e.what());
        }
    }
    CHECK(accepted > 0);
}

TEST_CASE("log-uniform kernel moments against numerical integration") {
    const LogUniformDown down(-0.5, -0.1);
    const LogUniformUp up(0.3);
    for (double x : {0.2, 0.5, 0.9}) {
        const double a = -0.5 * x;
        const double b = -0.1 * x;
        const double lo_up = 0.3 * (1 - x);
        const double hi_up = 1 - x;
        for (int l = 1; l <= 6; ++l) {
            // Down kernel density -1 / (xi log(a / b)) is positive for negative xi.
            const double expected_down = integrate([&](double xi) { return -1.0 / (xi * std::log(0.5 / 0.1)); }, a, b, l);
            CHECK(down.moment(0, std::span(&x, 1), MultiIndex{l}) == doctest::Approx(expected_down).epsilon(1e-10));
            const double expected_up = integrate([&](double xi) { return 1.0 / (xi * std::log(1 / 0.3)); }, lo_up, hi_up, l);
            CHECK(up.moment(0, std::span(&x, 1), MultiIndex{l}) == doctest::Approx(expected_up).epsilon(1e-10));
        }
        CHECK(integrate([&](double xi) { return -1.0 / (xi * std::log(0.5 / 0.1)); }, a, b, 0) == doctest::Approx(1.0));
        double mean = 0.0;
        down.mean_jump(0, std::span(&x, 1), std::span(&mean, 1));
        CHECK(mean == doctest::Approx(down.moment(0, std::span(&x, 1), MultiIndex{1})));
    }
}

TEST_CASE("declared jump-moment polynomials match the kernels pointwise") {
    const ProcessSpec spec = builtin("jacobi-jumps", {{"alpha", "0.4"}, {"m", "8"}});
    for (double x : {0.0, 0.3, 1.0}) {
        for (const auto& [l, p] : spec.jump_moments) {
            CHECK(p.eval(0.5, std::span(&x, 1)) == doctest::Approx(spec.jump_sampler->moment(0.5, std::span(&x, 1), l)).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(make_sampler("log-uniform-down", {{"a", -0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(make_sampler("gaussian", {}), std::invalid_argument);
    CHECK_THROWS_AS(make_sampler("log-uniform-up", {{"alpha", 0.5}, {"beta", 1.0}}), std::invalid_argument);
}

TEST_CASE("state spaces") {
    const StateSpace box = StateSpace::box(0.0, 2.0);
    std::vector<double> x{-1.0};
    CHECK_FALSE(box.contains(x));
    box.project(x);
    CHECK(x[0] == 0.0);
    const StateSpace pos = StateSpace::positive(1);
    CHECK(pos.contains(std::vector{0.5, -3.0}));
    CHECK_FALSE(pos.contains(std::vector{-0.5, 3.0}));
    CHECK(StateSpace::real().contains(std::vector{-1e9}));
}
