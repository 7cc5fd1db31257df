#include "polymag/expression.hpp"

#include "polymag/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace polymag {

namespace {

// Bounds that keep hostile input from building huge polynomials.
constexpr int kMaxXDegree = 24;
constexpr int kMaxTDegree = 32;
constexpr int kMaxExponent = 64;
constexpr int kMaxNesting = 64;

const std::set<std::string, std::less<>> kFunctions = {"exp", "log", "ln", "sin", "cos", "tan", "sqrt", "abs", "pow",
                                                       "sinh", "cosh", "tanh", "atan", "min", "max"};

class ExpressionParser {
public:
    ExpressionParser(std::string_view text, std::size_t d, int line, int column0)
        : src_(text), d_(d), line_(line), column0_(column0) {}

    TimePolynomial parse() {
        TimePolynomial p = expr();
        skip_ws();
        if (pos_ < src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw SpecError(msg, line_ > 0 ? line_ : 1, column0_ + static_cast<int>(at) + 1);
    }
    [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

    void skip_ws() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(pos_ < src_.size() ? "expected '" + std::string(1, c) + "'" : "expected '" + std::string(1, c) + "' before end of expression");
    }

    static bool is_constant(const TimePolynomial& p) {
        return p.degree() <= 0 && p[0].is_constant();
    }
    static double constant_value(const TimePolynomial& p) { return p.degree() == Polynomial::kZeroDegree ? 0.0 : p[0](0.0); }

    void check_size(const TimePolynomial& p, std::size_t at) const {
        if (p.degree() > kMaxXDegree) fail("expression degree in x exceeds " + std::to_string(kMaxXDegree), at);
        for (const auto& c : p.coeffs()) {
            if (c.degree() > kMaxTDegree) fail("expression degree in t exceeds " + std::to_string(kMaxTDegree), at);
        }
    }

    TimePolynomial expr() {
        if (++depth_ > kMaxNesting) fail("expression nested too deeply");
        TimePolynomial lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs += term();
            } else if (accept('-')) {
                lhs -= term();
            } else {
                break;
            }
        }
        --depth_;
        return lhs;
    }

    TimePolynomial term() {
        TimePolynomial lhs = unary();
        for (;;) {
            skip_ws();
            const std::size_t at = pos_;
            if (accept('*')) {
                lhs = lhs * unary();
                check_size(lhs, at);
            } else if (accept('/')) {
                const std::size_t rhs_at = pos_;
                const TimePolynomial rhs = unary();
                if (!is_constant(rhs)) fail("division is only allowed by a constant", rhs_at);
                const double c = constant_value(rhs);
                if (c == 0.0) fail("division by zero", rhs_at);
                lhs = TimeCoefficient(1.0 / c) * lhs;
            } else {
                break;
            }
        }
        return lhs;
    }

    TimePolynomial unary() {
        if (++depth_ > kMaxNesting) fail("expression nested too deeply");
        TimePolynomial out = accept('-') ? -unary() : (accept('+') ? unary() : power());
        --depth_;
        return out;
    }

    TimePolynomial power() {
        TimePolynomial base = primary();
        skip_ws();
        const std::size_t at = pos_;
        if (!accept('^')) return base;
        skip_ws();
        const std::size_t exp_at = pos_;
        std::size_t end = pos_;
        while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
        if (end == pos_) {
            if (pos_ < src_.size() && src_[pos_] == '-') fail("negative powers are not polynomial", exp_at);
            fail("expected a non-negative integer exponent after '^'", exp_at);
        }
        if (end < src_.size() && (src_[end] == '.' || src_[end] == 'e' || src_[end] == 'E')) {
            fail("exponent must be an integer", exp_at);
        }
        int n = 0;
        const auto res = std::from_chars(src_.data() + pos_, src_.data() + end, n);
        if (res.ec != std::errc() || n > kMaxExponent) fail("exponent too large", exp_at);
        pos_ = end;
        TimePolynomial out = TimePolynomial::constant(d_, 1.0);
        for (int i = 0; i < n; ++i) {
            out = out * base;
            check_size(out, at);
        }
        return out;
    }

    double number() {
        const std::size_t start = pos_;
        std::size_t end = pos_;
        auto digits = [&] {
            const std::size_t from = end;
            while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
            return end > from;
        };
        bool any = digits();
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            any = digits() || any;
        }
        if (!any) fail("malformed number", start);
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t mark = end++;
            if (end < src_.size() && (src_[end] == '+' || src_[end] == '-')) ++end;
            if (!digits()) end = mark;
        }
        double v = 0.0;
        const auto res = std::from_chars(src_.data() + start, src_.data() + end, v);
        if (res.ec != std::errc() || !std::isfinite(v)) fail("number out of range", start);
        pos_ = end;
        return v;
    }

    TimePolynomial primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of expression");
        const char c = src_[pos_];
        const std::size_t at = pos_;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return TimePolynomial::constant(d_, number());
        if (c == '(') {
            ++pos_;
            TimePolynomial inner = expr();
            expect(')');
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) ++end;
            const std::string name(src_.substr(pos_, end - pos_));
            pos_ = end;
            if (name == "t") return TimePolynomial::constant(d_, TimeCoefficient::polynomial({0.0, 1.0}));
            if (name == "x") {
                if (d_ != 1) fail("'x' is ambiguous for d = " + std::to_string(d_) + "; use x1..x" + std::to_string(d_), at);
                return TimePolynomial::coordinate(1, 0);
            }
            if (name.size() > 1 && name[0] == 'x' && name.find_first_not_of("0123456789", 1) == std::string::npos) {
                const unsigned long i = name.size() > 4 ? 0 : std::stoul(name.substr(1));
                if (i < 1 || i > d_) fail("unknown variable '" + name + "' (d = " + std::to_string(d_) + ")", at);
                return TimePolynomial::coordinate(d_, i - 1);
            }
            if (name == "piecewise") return piecewise(at);
            if (kFunctions.contains(name)) {
                fail("function '" + name + "' is not supported; coefficients must be polynomial or piecewise polynomial", at);
            }
            if (name == "inf" || name == "nan" || name == "infinity") fail("non-finite constant '" + name + "'", at);
            fail("unknown identifier '" + name + "'", at);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    TimePolynomial piecewise(std::size_t at) {
        expect('(');
        std::vector<TimePolynomial> parts{expr()};
        std::vector<double> breaks;
        while (accept(',')) {
            skip_ws();
            const std::size_t bat = pos_;
            const TimePolynomial b = expr();
            if (!is_constant(b)) fail("piecewise breakpoints must be constants", bat);
            breaks.push_back(constant_value(b));
            if (breaks.size() > 1 && !(breaks.back() > breaks[breaks.size() - 2])) {
                fail("piecewise breakpoints must be strictly increasing", bat);
            }
            expect(',');
            parts.push_back(expr());
        }
        expect(')');
        if (breaks.empty()) fail("piecewise needs at least one breakpoint", at);
        int deg = 0;
        for (const auto& p : parts) deg = std::max(deg, p.degree());
        std::vector<TimePolynomial> lifted;
        for (const auto& p : parts) lifted.push_back(p.on_degree(deg));
        TimePolynomial out(lifted.front().basis());
        for (std::size_t i = 0; i < out.coeffs().size(); ++i) {
            std::vector<TimeCoefficient> coefs;
            for (const auto& p : lifted) coefs.push_back(p[i]);
            try {
                out[i] = TimeCoefficient::splice(breaks, coefs);
            } catch (const std::invalid_argument& e) {
                fail(e.what(), at);
            }
        }
        return out;
    }

    std::string_view src_;
    std::size_t d_;
    int line_;
    int column0_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

}  // namespace

TimePolynomial parse_expression(std::string_view text, std::size_t d, int line, int column0) {
    if (d == 0) throw std::invalid_argument("parse_expression: d must be positive");
    return ExpressionParser(text, d, line, column0).parse();
}

TimeCoefficient parse_time_coefficient(std::string_view text, int line, int column0) {
    const TimePolynomial p = parse_expression(text, 1, line, column0);
    if (p.degree() > 0) throw SpecError("expected an expression in t only", line > 0 ? line : 1, column0 + 1);
    return p.degree() == Polynomial::kZeroDegree ? TimeCoefficient(0.0) : p[0];
}

double parse_constant(std::string_view text, int line, int column0) {
    const TimeCoefficient c = parse_time_coefficient(text, line, column0);
    if (!c.is_constant()) throw SpecError("expected a constant", line > 0 ? line : 1, column0 + 1);
    return c(0.0);
}

}  // namespace polymag
