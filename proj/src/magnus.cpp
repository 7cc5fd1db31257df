#include "polymag/magnus.hpp"

#include "polymag/errors.hpp"
#include "polymag/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace polymag {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxMagnusPieces = 1 << 14;

void require_interval(double horizon, double s, double t) {
    if (!(s >= 0.0 && s <= t && t <= horizon)) {
        throw std::invalid_argument("need 0 <= s <= t <= T, got s = " + format_number(s) + ", t = " + format_number(t));
    }
}

double max_abs(const Eigen::MatrixXd& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

struct TermEstimate {
    Eigen::MatrixXd o1, o2, o3;
    double h_max = 0.0;
};

// Omega1 and the innermost integral I(v) = int_s^v H are exact (H is a
// polynomial between breakpoints), which leaves a single quadrature for
// Omega2 = -1/2 int [H_u, I(u)] du and a double one for Omega3.
TermEstimate estimate_terms(const GeneratorFamily& h, double s, double t, int panels, int order) {
    const Eigen::Index n = h.size();
    TermEstimate e{h.integral(s, t), Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), 0.0};
    for (const QuadNode& un : composite_nodes(s, t, h.breaks(), panels, order)) {
        const Eigen::MatrixXd hu = h(un.x);
        e.h_max = std::max(e.h_max, max_abs(hu));
        e.o2 += un.w * commutator(hu, h.integral(s, un.x));
        Eigen::MatrixXd inner3 = Eigen::MatrixXd::Zero(n, n);
        for (const QuadNode& vn : composite_nodes(s, un.x, h.breaks(), panels, order)) {
            const Eigen::MatrixXd hv = h(vn.x);
            const Eigen::MatrixXd iv = h.integral(s, vn.x);
            inner3 += vn.w * (commutator(hu, commutator(hv, iv)) + commutator(iv, commutator(hv, hu)));
        }
        e.o3 += un.w * inner3;
    }
    e.o2 *= -0.5;
    e.o3 /= 6.0;
    return e;
}

bool settled(const Eigen::MatrixXd& prev, const Eigen::MatrixXd& next, double rtol, double scale) {
    return max_abs(next - prev) <= rtol * max_abs(next) + 64.0 * kEps * scale;
}

Eigen::MatrixXd rk4(const GeneratorFamily& h, double s, double t, int steps) {
    const Eigen::Index n = h.size();
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    if (t == s) return p;
    const double dt = (t - s) / steps;
    for (int i = 0; i < steps; ++i) {
        const double u = s + dt * i;
        const Eigen::MatrixXd h0 = h(u);
        const Eigen::MatrixXd hm = h(u + 0.5 * dt);
        const Eigen::MatrixXd h1 = h(i + 1 == steps ? t : u + dt);
        const Eigen::MatrixXd k1 = p * h0;
        const Eigen::MatrixXd k2 = (p + 0.5 * dt * k1) * hm;
        const Eigen::MatrixXd k3 = (p + 0.5 * dt * k2) * hm;
        const Eigen::MatrixXd k4 = (p + dt * k3) * h1;
        p += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!p.allFinite()) throw NumericalError("RK4 integration produced non-finite values");
    return p;
}

int magnus_subintervals(const GeneratorFamily& h, double s, double t, const TransitionOptions& opts, double total) {
    const double limit = opts.safety * std::numbers::pi;
    int n = std::max({1, opts.min_subintervals, static_cast<int>(std::ceil(total / limit))});
    for (; n <= 100000; ++n) {
        const double step = (t - s) / n;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            const double a = s + step * i;
            const double b = i + 1 == n ? t : a + step;
            ok = norm_integral(h, a, b, opts.quadrature) < limit;
        }
        if (ok) return n;
    }
    throw NumericalError("Magnus gate: could not reach int ||H|| < safety * pi on subintervals");
}

struct Solve {
    Eigen::MatrixXd matrix;
    Method method;
    int subintervals = 0;
    double norm_integral = 0.0;
    std::optional<double> error_estimate;
};

// Fixed-parameter solve; `subintervals` > 0 pins the Magnus partition so
// that nearby intervals are solved with the same discretization.
Solve solve(const GeneratorFamily& h, double s, double t, Method method, const TransitionOptions& opts, int subintervals) {
    const Eigen::Index n = h.size();
    Solve out{Eigen::MatrixXd::Identity(n, n), method, 0, 0.0, std::nullopt};
    if (t == s) return out;
    switch (method) {
        case Method::Exact: {
            out.matrix = matrix_exp(h.integral(s, t));
            out.subintervals = 1;
            return out;
        }
        case Method::Magnus3: {
            auto compose = [&](int pieces) {
                Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
                const double step = (t - s) / pieces;
                for (int i = 0; i < pieces; ++i) {
                    const double a = s + step * i;
                    const double b = i + 1 == pieces ? t : a + step;
                    p = p * matrix_exp(magnus_terms(h, a, b, opts.quadrature).sum());
                }
                return p;
            };
            if (subintervals > 0) {
                out.matrix = compose(subintervals);
                out.subintervals = subintervals;
                return out;
            }
            int pieces = magnus_subintervals(h, s, t, opts, norm_integral(h, s, t, opts.quadrature));
            out.matrix = compose(pieces);
            // Step doubling: the truncated series is fourth order, so the
            // difference of successive compositions over-estimates the error by 15.
            while (opts.magnus_rtol > 0.0) {
                if (pieces > kMaxMagnusPieces / 2) {
                    throw NumericalError("magnus3: step doubling did not reach rtol " + format_number(opts.magnus_rtol) +
                                         " with " + std::to_string(pieces) + " subintervals");
                }
                Eigen::MatrixXd finer = compose(2 * pieces);
                const double err = max_abs(finer - out.matrix) / 15.0;
                pieces *= 2;
                out.matrix = std::move(finer);
                out.error_estimate = err;
                if (err <= opts.magnus_rtol * std::max(1.0, max_abs(out.matrix))) break;
            }
            out.subintervals = pieces;
            return out;
        }
        case Method::Ode: {
            if (opts.ode_steps < 2) throw std::invalid_argument("ode_steps must be at least 2");
            out.matrix = rk4(h, s, t, opts.ode_steps);
            const Eigen::MatrixXd coarse = rk4(h, s, t, opts.ode_steps / 2);
            const double err = max_abs(out.matrix - coarse) / 15.0;
            out.error_estimate = err;
            out.subintervals = opts.ode_steps;
            if (err > opts.ode_max_error * std::max(1.0, max_abs(out.matrix))) {
                throw NumericalError("RK4 step count exhausted: halving check " + format_number(err) +
                                     " exceeds tolerance with " + std::to_string(opts.ode_steps) + " steps");
            }
            return out;
        }
        case Method::Auto:
            break;
    }
    throw std::logic_error("solve: unresolved method");
}

Method resolve_method(const GeneratorFamily& h, double s, double t, const TransitionOptions& opts) {
    if (opts.method != Method::Auto) return opts.method;
    if (t == s) return Method::Exact;
    const int grid = std::max(2, opts.probe_grid);
    double max_h = 0.0;
    double max_c = 0.0;
    std::vector<Eigen::MatrixXd> mats;
    for (int i = 0; i < grid; ++i) {
        mats.push_back(h(s + (t - s) * i / (grid - 1)));
        max_h = std::max(max_h, spectral_norm(mats.back()));
    }
    for (int i = 0; i < grid; ++i) {
        for (int j = i + 1; j < grid; ++j) max_c = std::max(max_c, spectral_norm(commutator(mats[i], mats[j])));
    }
    return max_c <= opts.commutator_rtol * max_h * max_h ? Method::Exact : Method::Magnus3;
}

// Fourth-order finite difference of f at x using samples inside [lo, hi]:
// centred when there is room on both sides, one-sided otherwise.
template <typename F>
Eigen::MatrixXd derivative_in(F&& f, double x, double lo, double hi, double h0) {
    double h = h0;
    for (int attempt = 0; attempt < 60; ++attempt) {
        const double ahead = hi - x;
        const double behind = x - lo;
        if (ahead >= 2.0 * h && behind >= 2.0 * h) {
            return (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
        }
        if (ahead >= 4.0 * h) {
            return (-25.0 * f(x) + 48.0 * f(x + h) - 36.0 * f(x + 2.0 * h) + 16.0 * f(x + 3.0 * h) - 3.0 * f(x + 4.0 * h)) /
                   (12.0 * h);
        }
        if (behind >= 4.0 * h) {
            return (25.0 * f(x) - 48.0 * f(x - h) + 36.0 * f(x - 2.0 * h) - 16.0 * f(x - 3.0 * h) + 3.0 * f(x - 4.0 * h)) /
                   (12.0 * h);
        }
        h = 0.25 * std::max(ahead, behind) * (attempt == 0 ? 1.0 : 0.99);
        if (!(h > 0.0)) break;
    }
    return Eigen::MatrixXd();
}

double fd_step(double horizon) { return 1e-3 * std::max(1.0, horizon); }

}  // namespace

double norm_integral(const GeneratorFamily& h, double s, double t, const QuadratureConfig& q) {
    q.validate();
    if (!(s <= t)) throw std::invalid_argument("norm_integral: need s <= t");
    if (t == s) return 0.0;
    auto estimate = [&](int panels, double& peak) {
        double sum = 0.0;
        for (const QuadNode& n : composite_nodes(s, t, h.breaks(), panels, q.gl_order)) {
            const double v = spectral_norm(h(n.x));
            peak = std::max(peak, v);
            sum += n.w * v;
        }
        return sum;
    };
    // ||H_u||_2 has kinks where the top singular values cross, which caps
    // Gauss-Legendre at second order there. The value only feeds the
    // convergence gate, which keeps a 10% margin, so a loose settle suffices.
    const double rtol = std::max(q.rtol, 1e-8);
    constexpr double kGateRtol = 1e-4;
    double peak = 0.0;
    int panels = 1;
    double prev = estimate(panels, peak);
    double change = 0.0;
    double next = prev;
    for (int r = 0; r < q.max_refinements; ++r) {
        panels *= 2;
        next = estimate(panels, peak);
        change = std::abs(next - prev);
        if (change <= rtol * std::abs(next) + 64.0 * kEps * (t - s) * peak) return next;
        prev = next;
    }
    if (change <= kGateRtol * std::abs(next)) return next;
    throw NumericalError("norm_integral: quadrature did not settle (last change " + format_number(change) + ")");
}

double norm_integral(const ProcessSpec& spec, double s, double t, int k, const QuadratureConfig& q) {
    require_interval(spec.horizon, s, t);
    return norm_integral(GeneratorFamily(spec, k), s, t, q);
}

MagnusTerms magnus_terms(const GeneratorFamily& h, double s, double t, const QuadratureConfig& q) {
    q.validate();
    if (!(s <= t)) throw std::invalid_argument("magnus_terms: need s <= t");
    const Eigen::Index n = h.size();
    MagnusTerms out{s, t, Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
    if (t == s) return out;
    int panels = 1;
    TermEstimate prev = estimate_terms(h, s, t, panels, q.gl_order);
    // Between breakpoints the outermost integrand has degree 3 q + 2 in u.
    if (q.exact_for(3 * h.time_degree() + 2)) {
        out.omega1 = std::move(prev.o1);
        out.omega2 = std::move(prev.o2);
        out.omega3 = std::move(prev.o3);
        return out;
    }
    for (int r = 0; r < q.max_refinements; ++r) {
        panels *= 2;
        TermEstimate next = estimate_terms(h, s, t, panels, q.gl_order);
        const double scale = (t - s) * std::max(prev.h_max, next.h_max);
        if (settled(prev.o1, next.o1, q.rtol, scale) && settled(prev.o2, next.o2, q.rtol, scale * scale) &&
            settled(prev.o3, next.o3, q.rtol, scale * scale * scale)) {
            out.omega1 = std::move(next.o1);
            out.omega2 = std::move(next.o2);
            out.omega3 = std::move(next.o3);
            return out;
        }
        prev = std::move(next);
    }
    throw NumericalError("magnus_terms: nested quadrature did not converge to rtol " + format_number(q.rtol));
}

MagnusTerms magnus_terms(const ProcessSpec& spec, double s, double t, int k, const QuadratureConfig& q) {
    require_interval(spec.horizon, s, t);
    return magnus_terms(GeneratorFamily(spec, k), s, t, q);
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Auto: return "auto";
        case Method::Exact: return "exact-commuting";
        case Method::Magnus3: return "magnus3";
        case Method::Ode: return "rk4-ode";
    }
    return "auto";
}

Method parse_method(const std::string& text) {
    if (text == "auto") return Method::Auto;
    if (text == "exact" || text == "exact-commuting") return Method::Exact;
    if (text == "magnus3") return Method::Magnus3;
    if (text == "ode" || text == "rk4-ode") return Method::Ode;
    throw std::invalid_argument("unknown method '" + text + "' (expected auto, exact, magnus3 or ode)");
}

TransitionResult transition_matrix(const GeneratorFamily& h, double s, double t, const TransitionOptions& opts) {
    require_interval(h.horizon(), s, t);
    TransitionResult r;
    r.s = s;
    r.t = t;
    r.basis = h.basis();
    const Method method = resolve_method(h, s, t, opts);
    Solve main = solve(h, s, t, method, opts, 0);
    r.matrix = std::move(main.matrix);
    r.method = method;
    r.subintervals = main.subintervals;
    r.error_estimate = main.error_estimate;
    r.norm_integral = norm_integral(h, s, t, opts.quadrature);
    r.residual = std::numeric_limits<double>::quiet_NaN();
    if (opts.compute_residual) {
        const int pinned = method == Method::Magnus3 ? main.subintervals : 0;
        auto p_of_t = [&](double u) -> Eigen::MatrixXd {
            if (u == t) return r.matrix;
            return solve(h, s, u, method, opts, pinned).matrix;
        };
        const Eigen::MatrixXd dp = derivative_in(p_of_t, t, s, h.horizon(), fd_step(h.horizon()));
        r.residual = dp.size() ? max_abs(dp - r.matrix * h(t)) : 0.0;
    }
    return r;
}

TransitionResult transition_matrix(const ProcessSpec& spec, double s, double t, int k, const TransitionOptions& opts) {
    require_interval(spec.horizon, s, t);
    return transition_matrix(GeneratorFamily(spec, k), s, t, opts);
}

EquationDefects equation_defects(const GeneratorFamily& h, double s, double t, const TransitionOptions& opts) {
    require_interval(h.horizon(), s, t);
    const Method method = resolve_method(h, s, t, opts);
    const Solve main = solve(h, s, t, method, opts, 0);
    const int pinned = method == Method::Magnus3 ? main.subintervals : 0;
    const double step = fd_step(h.horizon());
    EquationDefects out;
    auto forward = [&](double u) -> Eigen::MatrixXd { return u == t ? main.matrix : solve(h, s, u, method, opts, pinned).matrix; };
    const Eigen::MatrixXd dt = derivative_in(forward, t, s, h.horizon(), step);
    out.forward = dt.size() ? max_abs(dt - main.matrix * h(t)) : 0.0;
    auto backward = [&](double u) -> Eigen::MatrixXd { return u == s ? main.matrix : solve(h, u, t, method, opts, pinned).matrix; };
    const Eigen::MatrixXd ds = derivative_in(backward, s, 0.0, t, step);
    out.backward = ds.size() ? max_abs(ds + h(s) * main.matrix) : 0.0;
    return out;
}

EvolutionCheck check_evolution(const GeneratorFamily& h, double r, double s, double t, const TransitionOptions& opts) {
    if (!(r <= s && s <= t)) throw std::invalid_argument("check_evolution: need r <= s <= t");
    TransitionOptions quiet = opts;
    quiet.compute_residual = false;
    const Eigen::Index n = h.size();
    EvolutionCheck out;
    out.identity = max_abs(transition_matrix(h, s, s, quiet).matrix - Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd rt = transition_matrix(h, r, t, quiet).matrix;
    const Eigen::MatrixXd rs = transition_matrix(h, r, s, quiet).matrix;
    const Eigen::MatrixXd st = transition_matrix(h, s, t, quiet).matrix;
    out.composition = max_abs(rs * st - rt) / std::max(1.0, max_abs(rt));
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(n);
    e0[0] = 1.0;
    out.constant = (rt.col(0) - e0).cwiseAbs().maxCoeff();
    out.block = below_degree_blocks(rt, *h.basis());
    out.defects = equation_defects(h, r, t, quiet);
    return out;
}

MomentResult moment_detailed(const ProcessSpec& spec, double s, double t, std::span<const double> x,
                             const MultiIndex& kidx, const TransitionOptions& opts) {
    if (x.size() != spec.d) throw std::invalid_argument("moment: state has the wrong dimension");
    if (kidx.size() != spec.d) throw std::invalid_argument("moment: multi-index has the wrong dimension");
    if (kidx.degree() > spec.m) throw std::invalid_argument("moment: |k| exceeds the spec's moment degree m");
    MomentResult out;
    out.inside_state_space = spec.state_space.contains(x);
    out.transition = transition_matrix(spec, s, t, kidx.degree(), opts);
    const MonomialBasis& basis = *out.transition.basis;
    const auto col = static_cast<Eigen::Index>(basis.index_of(kidx));
    out.value = basis.evaluate(x).dot(out.transition.matrix.col(col));
    return out;
}

double moment(const ProcessSpec& spec, double s, double t, std::span<const double> x, const MultiIndex& kidx,
              const TransitionOptions& opts) {
    return moment_detailed(spec, s, t, x, kidx, opts).value;
}

}  // namespace polymag
