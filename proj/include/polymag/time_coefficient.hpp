#pragma once

#include "polymag/polyalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace polymag {

/// Continuous piecewise polynomial in t.
///
/// Interior breakpoints b_1 < ... < b_n split the real line into n + 1 pieces;
/// piece i holds ascending power coefficients of t. A plain polynomial has no
/// breakpoints. Evaluation is right-continuous at breakpoints, which is
/// immaterial because pieces must agree there.
///
/// Values are kept normalized: trailing zero powers are dropped and
/// breakpoints separating identical pieces are removed, so structurally
/// equal coefficients compare equal.
class TimeCoefficient {
public:
    TimeCoefficient() : pieces_{{}} {}
    TimeCoefficient(double c);  // NOLINT: implicit constant promotion is intended

    /// Polynomial sum_p powers[p] * t^p.
    static TimeCoefficient polynomial(std::vector<double> powers);

    /// Piecewise polynomial; pieces.size() must equal breaks.size() + 1.
    /// Throws std::invalid_argument for unsorted breakpoints or a jump.
    static TimeCoefficient piecewise(std::vector<double> breaks, std::vector<std::vector<double>> pieces);

    /// Splices whole coefficients: on [breaks[i-1], breaks[i]) the result
    /// equals parts[i]. Continuity at the splice points is checked.
    static TimeCoefficient splice(const std::vector<double>& breaks, const std::vector<TimeCoefficient>& parts);

    double operator()(double t) const;

    const std::vector<double>& breaks() const noexcept { return breaks_; }
    const std::vector<std::vector<double>>& pieces() const noexcept { return pieces_; }

    /// Power coefficients of the piece in force at t.
    const std::vector<double>& piece_at(double t) const;

    bool is_zero() const;
    bool is_constant() const;
    /// Largest polynomial degree over all pieces (-1 for zero).
    int degree() const;

    TimeCoefficient& operator+=(const TimeCoefficient& o);
    TimeCoefficient& operator-=(const TimeCoefficient& o);
    TimeCoefficient& operator*=(const TimeCoefficient& o);
    TimeCoefficient operator-() const;
    friend TimeCoefficient operator+(TimeCoefficient a, const TimeCoefficient& b) { return a += b; }
    friend TimeCoefficient operator-(TimeCoefficient a, const TimeCoefficient& b) { return a -= b; }
    friend TimeCoefficient operator*(TimeCoefficient a, const TimeCoefficient& b) { return a *= b; }

    bool operator==(const TimeCoefficient&) const = default;

    /// Re-parseable text: a polynomial in t, or piecewise(p0, b1, p1, ...).
    std::string to_string() const;

    /// Keeps only the coefficient of t^power in every piece (as a constant
    /// per piece; the result may be discontinuous, which is fine for the
    /// internal uses that expand H_t in powers of t).
    TimeCoefficient power_part(std::size_t power) const;

private:
    using Op = std::function<std::vector<double>(const std::vector<double>&, const std::vector<double>&)>;
    static TimeCoefficient combine(const TimeCoefficient& a, const TimeCoefficient& b, const Op& op);
    void normalize();

    std::vector<double> breaks_;
    std::vector<std::vector<double>> pieces_;
};

/// Maximum relative mismatch tolerated between adjacent pieces at a breakpoint.
inline constexpr double kContinuityTolerance = 1e-10;

/// Polynomial in x whose coefficients are TimeCoefficients.
class TimePolynomial {
public:
    TimePolynomial() = default;
    explicit TimePolynomial(BasisPtr basis);

    static TimePolynomial constant(std::size_t d, const TimeCoefficient& c);
    static TimePolynomial coordinate(std::size_t d, std::size_t i);
    /// Lifts a constant-in-time polynomial.
    static TimePolynomial from(const Polynomial& p);

    const BasisPtr& basis() const noexcept { return basis_; }
    std::size_t dim() const { return basis_->dim(); }
    const std::vector<TimeCoefficient>& coeffs() const noexcept { return coeffs_; }
    TimeCoefficient& operator[](std::size_t i) { return coeffs_[i]; }
    const TimeCoefficient& operator[](std::size_t i) const { return coeffs_[i]; }
    TimeCoefficient coeff(const MultiIndex& k) const;

    /// Degree in x (Polynomial::kZeroDegree for zero).
    int degree() const;
    bool is_zero() const { return degree() == Polynomial::kZeroDegree; }

    /// Freeze time.
    Polynomial at(double t) const;
    double eval(double t, std::span<const double> x) const { return at(t).eval(x); }

    /// Union of all breakpoints.
    std::vector<double> breaks() const;

    /// Re-expand on the degree-m basis (DegreeOverflow if it does not fit).
    TimePolynomial on_degree(int m) const;

    /// Applies f to every coefficient.
    TimePolynomial map(const std::function<TimeCoefficient(const TimeCoefficient&)>& f) const;

    TimePolynomial& operator+=(const TimePolynomial& o);
    TimePolynomial& operator-=(const TimePolynomial& o);
    TimePolynomial operator-() const;
    friend TimePolynomial operator+(TimePolynomial a, const TimePolynomial& b) { return a += b; }
    friend TimePolynomial operator-(TimePolynomial a, const TimePolynomial& b) { return a -= b; }
    /// Exact product; the result basis has degree deg(a) + deg(b).
    friend TimePolynomial operator*(const TimePolynomial& a, const TimePolynomial& b);
    friend TimePolynomial operator*(const TimeCoefficient& c, const TimePolynomial& p);

    /// Equal after lifting both to a common degree.
    bool operator==(const TimePolynomial& o) const;

    /// Re-parseable expression over t and x1..xd (x when d == 1).
    std::string to_string() const;

private:
    BasisPtr basis_;
    std::vector<TimeCoefficient> coeffs_;
};

/// Formats a double so that it parses back to the same value.
std::string format_number(double v);

}  // namespace polymag
