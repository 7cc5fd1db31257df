#include "polymag/generator.hpp"

#include "polymag/errors.hpp"
#include "polymag/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polymag {

namespace {

void require_time(const ProcessSpec& spec, double t) {
    if (!(t >= 0.0 && t <= spec.horizon)) {
        throw std::invalid_argument("time " + format_number(t) + " outside [0, " + format_number(spec.horizon) + "]");
    }
}

}  // namespace

Polynomial apply_generator(const ProcessSpec& spec, double t, const Polynomial& f) {
    if (f.dim() != spec.d) throw std::invalid_argument("apply_generator: polynomial dimension does not match spec");
    require_time(spec, t);
    const int deg = f.degree();
    if (deg > spec.m) throw std::invalid_argument("apply_generator: deg f exceeds the spec's moment degree m");
    if (deg <= 0) return Polynomial(f.basis());

    Polynomial out(enumerate_basis(spec.d, deg));
    for (std::size_t i = 0; i < spec.d; ++i) {
        const Polynomial di = partial_derivative(f, i);
        if (di.is_zero()) continue;
        out += multiply(di, spec.drift[i].at(t), deg);
        for (std::size_t j = 0; j < spec.d; ++j) {
            const Polynomial dij = partial_derivative(di, j);
            if (dij.is_zero()) continue;
            out += 0.5 * multiply(dij, spec.c(i, j).at(t), deg);
        }
    }
    for (const auto& [l, moment] : spec.jump_moments) {
        if (l.degree() > deg) continue;
        const Polynomial dl = derivative(f, l);
        if (dl.is_zero()) continue;
        out += (1.0 / l.factorial()) * multiply(dl, moment.at(t), deg);
    }
    return out.on_degree(f.basis()->max_degree());
}

GeneratorMatrix generator_matrix(const ProcessSpec& spec, double t, int k) {
    if (k < 0 || k > spec.m) throw std::invalid_argument("generator_matrix: degree k must lie in [0, m]");
    GeneratorMatrix h{t, enumerate_basis(spec.d, k), {}};
    const auto n = static_cast<Eigen::Index>(h.basis->size());
    h.entries = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < h.basis->size(); ++j) {
        const Polynomial image = apply_generator(spec, t, Polynomial::monomial(h.basis, (*h.basis)[j]));
        h.entries.col(static_cast<Eigen::Index>(j)) = image.coeffs();
    }
    return h;
}

CommutatorReport commutator_probe(const ProcessSpec& spec, double s, double t, int k, int grid, double tol) {
    if (grid < 2) throw std::invalid_argument("commutator_probe: grid must be at least 2");
    if (!(s <= t)) throw std::invalid_argument("commutator_probe: need s <= t");
    require_time(spec, s);
    require_time(spec, t);
    const GeneratorFamily family(spec, k);
    std::vector<Eigen::MatrixXd> h;
    h.reserve(static_cast<std::size_t>(grid));
    CommutatorReport report;
    for (int i = 0; i < grid; ++i) {
        h.push_back(family(s + (t - s) * i / (grid - 1)));
        report.max_h_norm = std::max(report.max_h_norm, spectral_norm(h.back()));
    }
    for (int i = 0; i < grid; ++i) {
        for (int j = i + 1; j < grid; ++j) {
            report.max_norm = std::max(report.max_norm, spectral_norm(commutator(h[i], h[j])));
        }
    }
    report.commuting = report.max_norm <= tol;
    return report;
}

GeneratorFamily::GeneratorFamily(const ProcessSpec& spec, int k)
    : basis_(enumerate_basis(spec.d, k)), k_(k), horizon_(spec.horizon), breaks_(spec.breaks()) {
    if (k < 0 || k > spec.m) throw std::invalid_argument("GeneratorFamily: degree k must lie in [0, m]");
    const auto n = size();
    for (std::size_t piece = 0; piece <= breaks_.size(); ++piece) {
        double tau = 0.0;
        if (!breaks_.empty()) {
            if (piece == 0) tau = breaks_.front() - 1.0;
            else if (piece == breaks_.size()) tau = breaks_.back() + 1.0;
            else tau = 0.5 * (breaks_[piece - 1] + breaks_[piece]);
        }
        int max_power = 0;
        auto scan = [&](const TimePolynomial& poly) {
            for (const auto& c : poly.coeffs()) max_power = std::max(max_power, static_cast<int>(c.piece_at(tau).size()) - 1);
        };
        for (const auto& p : spec.drift) scan(p);
        for (const auto& p : spec.diffusion) scan(p);
        for (const auto& [l, p] : spec.jump_moments) scan(p);
        std::vector<Eigen::MatrixXd> mats;
        for (int p = 0; p <= max_power; ++p) {
            ProcessSpec part = spec.map_coefficients([&](const TimeCoefficient& c) {
                const auto& piece_coeffs = c.piece_at(tau);
                return TimeCoefficient(static_cast<std::size_t>(p) < piece_coeffs.size() ? piece_coeffs[static_cast<std::size_t>(p)] : 0.0);
            });
            mats.push_back(generator_matrix(part, 0.0, k).entries);
        }
        if (mats.empty()) mats.push_back(Eigen::MatrixXd::Zero(n, n));
        powers_.push_back(std::move(mats));
    }
}

Eigen::MatrixXd GeneratorFamily::operator()(double t) const {
    const auto piece = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin());
    const auto& mats = powers_[piece];
    Eigen::MatrixXd h = mats.back();
    for (std::size_t p = mats.size() - 1; p-- > 0;) h = h * t + mats[p];
    return h;
}

Eigen::MatrixXd GeneratorFamily::integral(double a, double b) const {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(size(), size());
    if (!(a < b)) return sum;
    auto piece_of = [&](double t) {
        return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin());
    };
    double lo = a;
    while (lo < b) {
        const std::size_t piece = piece_of(lo);
        const double hi = piece < breaks_.size() ? std::min(b, breaks_[piece]) : b;
        // Horner on the antiderivative sum_p G_p u^{p+1} / (p + 1).
        const auto& mats = powers_[piece];
        auto antiderivative = [&](double u) {
            Eigen::MatrixXd acc = mats.back() / static_cast<double>(mats.size());
            for (std::size_t p = mats.size() - 1; p-- > 0;) acc = acc * u + mats[p] / static_cast<double>(p + 1);
            return Eigen::MatrixXd(acc * u);
        };
        sum += antiderivative(hi) - antiderivative(lo);
        lo = hi;
    }
    return sum;
}

int GeneratorFamily::time_degree() const {
    std::size_t most = 1;
    for (const auto& mats : powers_) most = std::max(most, mats.size());
    return static_cast<int>(most) - 1;
}

double below_degree_blocks(const Eigen::MatrixXd& a, const MonomialBasis& basis) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (basis[static_cast<std::size_t>(i)].degree() > basis[static_cast<std::size_t>(j)].degree()) {
                worst = std::max(worst, std::abs(a(i, j)));
            }
        }
    }
    return worst;
}

}  // namespace polymag
