#include "polymag/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace polymag {

GaussLegendre::GaussLegendre(int order) {
    if (order < 2) throw std::invalid_argument("Gauss-Legendre order must be at least 2");
    const auto n = static_cast<std::size_t>(order);
    nodes.resize(n);
    weights.resize(n);
    // Newton iteration on P_n from the Chebyshev-like initial guess; roots are symmetric.
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Final derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = p2;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

const GaussLegendre& gauss_legendre(int order) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussLegendre>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<GaussLegendre>(order);
    return *slot;
}

std::vector<QuadNode> composite_nodes(double a, double b, const std::vector<double>& breaks, int panels, int order) {
    std::vector<QuadNode> out;
    if (!(b > a)) return out;
    const GaussLegendre& rule = gauss_legendre(order);
    std::vector<double> cuts{a};
    for (double c : breaks) {
        if (c > a && c < b) cuts.push_back(c);
    }
    cuts.push_back(b);
    out.reserve((cuts.size() - 1) * static_cast<std::size_t>(panels) * rule.nodes.size());
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double h = (cuts[s + 1] - cuts[s]) / panels;
        for (int p = 0; p < panels; ++p) {
            const double lo = cuts[s] + p * h;
            const double mid = lo + 0.5 * h;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                out.push_back({mid + 0.5 * h * rule.nodes[i], 0.5 * h * rule.weights[i]});
            }
        }
    }
    return out;
}

void QuadratureConfig::validate() const {
    if (gl_order < 2) throw std::invalid_argument("QuadratureConfig: gl_order must be at least 2");
    if (!(rtol > 0.0)) throw std::invalid_argument("QuadratureConfig: rtol must be positive");
    if (max_refinements < 1) throw std::invalid_argument("QuadratureConfig: max_refinements must be positive");
}

}  // namespace polymag
