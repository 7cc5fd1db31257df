#pragma once

#include <vector>

namespace polymag {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int order);
};

/// Shared rule for the given order (computed once, then cached).
const GaussLegendre& gauss_legendre(int order);

/// One quadrature node mapped to a physical interval.
struct QuadNode {
    double x;
    double w;
};

/// Composite Gauss-Legendre nodes on [a, b]: the interval is first cut at
/// every breakpoint strictly inside it, then each segment into `panels`
/// equal panels. Empty when a == b.
std::vector<QuadNode> composite_nodes(double a, double b, const std::vector<double>& breaks, int panels, int order);

/// Settings shared by every iterated-integral evaluation.
struct QuadratureConfig {
    int gl_order = 16;        ///< nodes per panel, >= 2
    double rtol = 1e-10;      ///< panels double until successive estimates agree to rtol
    int max_refinements = 8;  ///< doublings before giving up

    /// True when a polynomial integrand of this degree is integrated exactly
    /// by one panel, so refinement can only move roundoff.
    bool exact_for(int degree) const { return degree <= 2 * gl_order - 1; }

    void validate() const;
};

}  // namespace polymag
