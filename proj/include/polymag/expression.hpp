#pragma once

#include "polymag/time_coefficient.hpp"

#include <cstddef>
#include <string_view>

namespace polymag {

/// Polynomial expression in x_1..x_d whose coefficients are (piecewise)
/// polynomials in t.
///
///   expr    = term *( ("+" / "-") term )
///   term    = unary *( ("*" / "/") unary )      ; "/" only by a constant
///   unary   = ("-" / "+") unary / power
///   power   = primary [ "^" integer ]
///   primary = number / "t" / "x" / "x" digits / "(" expr ")"
///           / "piecewise(" expr *( "," number "," expr ) ")"
///
/// "x" alone is only valid when d = 1. Errors are SpecError with the
/// 1-based line and a column offset by `column0`.
TimePolynomial parse_expression(std::string_view text, std::size_t d, int line = 0, int column0 = 0);

/// An expression in t alone, e.g. "0.3 + 0.1*t" or "piecewise(1, 0.5, 2*t)".
TimeCoefficient parse_time_coefficient(std::string_view text, int line = 0, int column0 = 0);

/// A constant expression ("-0.5", "1/3"). Throws SpecError otherwise.
double parse_constant(std::string_view text, int line = 0, int column0 = 0);

}  // namespace polymag
