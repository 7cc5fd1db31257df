#include "polymag/process_spec.hpp"

#include "polymag/errors.hpp"
#include "polymag/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace polymag {

bool StateSpace::contains(std::span<const double> x) const {
    switch (kind) {
        case Kind::Real:
            return true;
        case Kind::PositiveOrthant:
            for (std::size_t i = 0; i < std::min(positive_dims, x.size()); ++i) {
                if (x[i] < 0.0) return false;
            }
            return true;
        case Kind::Box:
            for (double v : x) {
                if (v < lower || v > upper) return false;
            }
            return true;
    }
    return true;
}

void StateSpace::project(std::span<double> x) const {
    switch (kind) {
        case Kind::Real:
            return;
        case Kind::PositiveOrthant:
            for (std::size_t i = 0; i < std::min(positive_dims, x.size()); ++i) x[i] = std::max(x[i], 0.0);
            return;
        case Kind::Box:
            for (double& v : x) v = std::clamp(v, lower, upper);
            return;
    }
}

std::string StateSpace::to_string() const {
    switch (kind) {
        case Kind::Real:
            return "real";
        case Kind::PositiveOrthant:
            return "positive " + std::to_string(positive_dims);
        case Kind::Box:
            return "box " + format_number(lower) + " " + format_number(upper);
    }
    return "real";
}

// ---------------------------------------------------------------------------

ProcessSpec ProcessSpec::zero(std::size_t d, int m, double horizon) {
    ProcessSpec spec;
    spec.d = d;
    spec.m = m;
    spec.horizon = horizon;
    spec.drift.assign(d, TimePolynomial::constant(d, 0.0));
    spec.diffusion.assign(d * d, TimePolynomial::constant(d, 0.0));
    return spec;
}

void ProcessSpec::set_diffusion(std::size_t i, std::size_t j, const TimePolynomial& p) {
    diffusion[i * d + j] = p;
    diffusion[j * d + i] = p;
}

std::vector<double> ProcessSpec::breaks() const {
    std::vector<double> out;
    auto absorb = [&out](const TimePolynomial& p) {
        for (double b : p.breaks()) out.push_back(b);
    };
    for (const auto& p : drift) absorb(p);
    for (const auto& p : diffusion) absorb(p);
    for (const auto& [l, p] : jump_moments) absorb(p);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool ProcessSpec::has_jumps() const {
    return std::any_of(jump_moments.begin(), jump_moments.end(), [](const auto& kv) { return !kv.second.is_zero(); });
}

namespace {

// Deterministic sample of points inside the state space for the PSD check.
std::vector<double> sample_state(const StateSpace& space, std::size_t d, RandomStream& rng) {
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double u = rng.uniform();
        switch (space.kind) {
            case StateSpace::Kind::Real:
                x[i] = -3.0 + 6.0 * u;
                break;
            case StateSpace::Kind::PositiveOrthant:
                x[i] = i < space.positive_dims ? 4.0 * u : -3.0 + 6.0 * u;
                break;
            case StateSpace::Kind::Box:
                x[i] = space.lower + (space.upper - space.lower) * u;
                break;
        }
    }
    return x;
}

}  // namespace

std::vector<std::string> ProcessSpec::violations(bool check_degrees) const {
    std::vector<std::string> out;
    if (d == 0) out.push_back("dimension d must be positive");
    if (m < 2 || m % 2 != 0) out.push_back("moment degree m must be even and at least 2");
    if (m > kMaxDegree) out.push_back("moment degree m must not exceed " + std::to_string(kMaxDegree));
    if (!(horizon > 0.0) || !std::isfinite(horizon)) out.push_back("horizon T must be positive and finite");
    if (drift.size() != d) out.push_back("drift must have d entries");
    if (diffusion.size() != d * d) out.push_back("diffusion must have d*d entries");
    if (!out.empty()) return out;

    auto check_dim = [&](const TimePolynomial& p, const std::string& what) {
        if (!p.basis() || p.dim() != d) out.push_back(what + " has the wrong state dimension");
    };
    for (std::size_t i = 0; i < d; ++i) check_dim(drift[i], "drift " + std::to_string(i + 1));
    for (std::size_t i = 0; i < d * d; ++i) check_dim(diffusion[i], "diffusion entry");
    for (const auto& [l, p] : jump_moments) check_dim(p, "jump moment (" + l.to_string() + ")");
    if (!out.empty()) return out;

    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            if (!(c(i, j) == c(j, i))) {
                out.push_back("diffusion is not symmetric at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
            }
        }
    }
    for (const auto& [l, p] : jump_moments) {
        if (l.size() != d) {
            out.push_back("jump moment key (" + l.to_string() + ") has the wrong dimension");
        } else if (l.degree() < 2 || l.degree() > m) {
            out.push_back("jump moment order |l| = " + std::to_string(l.degree()) + " outside [2, m]");
        } else if (check_degrees && p.degree() > l.degree()) {
            out.push_back("jump moment (" + l.to_string() + ") has degree " + std::to_string(p.degree()) +
                          " > |l| = " + std::to_string(l.degree()));
        }
    }
    if (state_space.kind == StateSpace::Kind::Box && !(state_space.lower < state_space.upper)) {
        out.push_back("box state space needs lower < upper");
    }
    if (state_space.kind == StateSpace::Kind::PositiveOrthant && state_space.positive_dims > d) {
        out.push_back("positive orthant dimension exceeds d");
    }
    if (check_degrees) {
        for (std::size_t i = 0; i < d; ++i) {
            if (drift[i].degree() > 1) {
                out.push_back("drift " + std::to_string(i + 1) + " has degree " + std::to_string(drift[i].degree()) + " > 1 in x");
            }
            for (std::size_t j = i; j < d; ++j) {
                if (c(i, j).degree() > 2) {
                    out.push_back("diffusion (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") has degree " +
                                  std::to_string(c(i, j).degree()) + " > 2 in x");
                }
            }
        }
    }
    if (!out.empty()) return out;

    // a = c + int xi xi^T K must be positive semi-definite on the state space.
    RandomStream rng(0x5eedULL, 0);
    for (int ti = 0; ti < 5; ++ti) {
        const double t = horizon * ti / 4.0;
        for (int xi = 0; xi < 24; ++xi) {
            const std::vector<double> x = sample_state(state_space, d, rng);
            Eigen::MatrixXd a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    double v = c(i, j).eval(t, x);
                    MultiIndex l(d);
                    l[i] += 1;
                    l[j] += 1;
                    if (auto it = jump_moments.find(l); it != jump_moments.end()) v += it->second.eval(t, x);
                    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                }
            }
            const double scale = 1.0 + a.cwiseAbs().maxCoeff();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
            if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
                out.push_back("a = c + jump second moments is not positive semi-definite at t = " + format_number(t));
                return out;
            }
        }
    }
    return out;
}

void ProcessSpec::validate(bool check_degrees) const {
    const auto v = violations(check_degrees);
    if (v.empty()) return;
    std::string msg = "inadmissible process spec";
    for (const auto& s : v) msg += "; " + s;
    throw SpecError(msg);
}

ProcessSpec ProcessSpec::map_coefficients(const std::function<TimeCoefficient(const TimeCoefficient&)>& f) const {
    ProcessSpec r = *this;
    for (auto& p : r.drift) p = p.map(f);
    for (auto& p : r.diffusion) p = p.map(f);
    for (auto& [l, p] : r.jump_moments) p = p.map(f);
    return r;
}

bool ProcessSpec::same_characteristics(const ProcessSpec& o) const {
    if (d != o.d || m != o.m || horizon != o.horizon || !(state_space == o.state_space)) return false;
    if (drift != o.drift || diffusion != o.diffusion) return false;
    auto nonzero = [](const std::map<MultiIndex, TimePolynomial>& jm) {
        std::map<MultiIndex, TimePolynomial> r;
        for (const auto& [l, p] : jm) {
            if (!p.is_zero()) r.emplace(l, p);
        }
        return r;
    };
    if (nonzero(jump_moments) != nonzero(o.jump_moments)) return false;
    const auto da = jump_sampler ? jump_sampler->describe() : std::vector<std::string>{};
    const auto db = o.jump_sampler ? o.jump_sampler->describe() : std::vector<std::string>{};
    return da == db;
}

}  // namespace polymag
