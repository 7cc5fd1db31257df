#pragma once

// Hand-rolled generators for the property tests.

#include "polymag/polyalg.hpp"
#include "polymag/process_spec.hpp"
#include "polymag/time_coefficient.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace polymag::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    bool coin() { return integer(0, 1) == 1; }

    std::vector<double> point(std::size_t d, double lo = -1.5, double hi = 1.5) {
        std::vector<double> x(d);
        for (double& v : x) v = uniform(lo, hi);
        return x;
    }

    /// Dense random polynomial of degree <= m; coefficients in [-1, 1].
    Polynomial polynomial(std::size_t d, int m) {
        const BasisPtr b = enumerate_basis(d, m);
        Eigen::VectorXd c(static_cast<Eigen::Index>(b->size()));
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = uniform(-1.0, 1.0);
        return Polynomial(b, c);
    }

    /// Polynomial in t of degree <= 2, optionally with one continuous breakpoint.
    TimeCoefficient coefficient(double horizon, bool allow_piecewise = true) {
        std::vector<double> p0{uniform(-1, 1), uniform(-1, 1), uniform(-0.5, 0.5)};
        if (!allow_piecewise || !coin()) return TimeCoefficient::polynomial(p0);
        const double b = uniform(0.2, 0.8) * horizon;
        const double v = p0[0] + p0[1] * b + p0[2] * b * b;
        const double slope = uniform(-1, 1);
        return TimeCoefficient::piecewise({b}, {p0, {v - slope * b, slope}});
    }

    /// Sorted triple 0 <= r <= s <= t <= horizon.
    std::array<double, 3> times(double horizon) {
        std::array<double, 3> x{uniform(0, horizon), uniform(0, horizon), uniform(0, horizon)};
        std::sort(x.begin(), x.end());
        return x;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

/// Random admissible one-dimensional spec on R: affine drift, diffusion
/// sigma^2 + gamma x^2, no jumps.
inline ProcessSpec random_diffusion(Gen& g, int m = 4, double horizon = 1.0) {
    ProcessSpec spec = ProcessSpec::zero(1, m, horizon);
    const TimePolynomial x = TimePolynomial::coordinate(1, 0);
    spec.drift[0] = TimePolynomial::constant(1, g.coefficient(horizon)) + g.coefficient(horizon) * x;
    const double sigma2 = g.uniform(0.1, 1.0);
    const double gamma = g.uniform(0.0, 0.5);
    spec.set_diffusion(0, 0, TimePolynomial::constant(1, sigma2) + TimeCoefficient(gamma) * (x * x));
    spec.name = "random";
    return spec;
}

inline double max_abs(const Eigen::MatrixXd& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace polymag::testing
