#pragma once

#include <stdexcept>
#include <string>

namespace polymag {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A product or generator image left the polynomial space it was meant to
/// stay in. For a generator this certifies the process is not polynomial.
class DegreeOverflow : public Error {
public:
    using Error::Error;
};

/// Malformed or inadmissible process description.
class SpecError : public Error {
public:
    SpecError(const std::string& msg, int line = 0, int column = 0)
        : Error(line > 0 ? format(msg, line, column) : msg), line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    static std::string format(const std::string& msg, int line, int column) {
        return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg;
    }

    int line_;
    int column_;
};

/// Quadrature or ODE failure, non-finite input, and similar numerical faults.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Diffusion matrix could not be factored as sigma * sigma^T.
class DiffusionNotPsd : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The spec has jump moments but no kernel sampler to simulate them.
class MissingSampler : public Error {
public:
    using Error::Error;
};

}  // namespace polymag
