#include "polymag/mc.hpp"

#include "polymag/errors.hpp"
#include "polymag/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace polymag {

namespace {

// Polynomial frozen at one time point, as sparse terms over a shared basis.
struct FrozenPoly {
    std::vector<std::pair<std::size_t, double>> terms;

    double operator()(const std::vector<double>& monomials) const {
        double v = 0.0;
        for (const auto& [j, c] : terms) v += c * monomials[j];
        return v;
    }
};

// Evaluates every basis monomial at x with one multiplication each.
struct MonomialTable {
    BasisPtr basis;
    std::vector<std::size_t> parent;
    std::vector<std::size_t> coord;

    explicit MonomialTable(BasisPtr b) : basis(std::move(b)), parent(basis->size(), 0), coord(basis->size(), 0) {
        for (std::size_t j = 1; j < basis->size(); ++j) {
            MultiIndex k = (*basis)[j];
            std::size_t i = 0;
            while (k[i] == 0) ++i;
            --k[i];
            parent[j] = basis->index_of(k);
            coord[j] = i;
        }
    }

    void fill(std::span<const double> x, std::vector<double>& out) const {
        out[0] = 1.0;
        for (std::size_t j = 1; j < out.size(); ++j) out[j] = out[parent[j]] * x[coord[j]];
    }

    FrozenPoly freeze(const Polynomial& p) const {
        FrozenPoly f;
        for (std::size_t j = 0; j < p.basis()->size(); ++j) {
            if (p[j] == 0.0) continue;
            const std::size_t idx = basis->index_of((*p.basis())[j]);
            if (idx >= basis->size()) throw std::logic_error("simulate_paths: coefficient degree exceeds the table");
            f.terms.emplace_back(idx, p[j]);
        }
        return f;
    }
};

// Lower-triangular L with L L^T = c, allowing zero pivots within tolerance.
void psd_cholesky(const std::vector<double>& c, std::size_t d, std::vector<double>& l, double t) {
    double scale = 1.0;
    for (std::size_t i = 0; i < d; ++i) scale = std::max(scale, std::abs(c[i * d + i]));
    const double tol = 1e-10 * scale;
    std::fill(l.begin(), l.end(), 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double pivot = c[j * d + j];
        for (std::size_t k = 0; k < j; ++k) pivot -= l[j * d + k] * l[j * d + k];
        if (pivot < -tol) {
            throw DiffusionNotPsd("diffusion matrix is not positive semi-definite at t = " + format_number(t) +
                                  " (pivot " + format_number(pivot) + ")");
        }
        if (pivot <= tol) {
            for (std::size_t i = j + 1; i < d; ++i) {
                double v = c[i * d + j];
                for (std::size_t k = 0; k < j; ++k) v -= l[i * d + k] * l[j * d + k];
                if (std::abs(v) > 1e-6 * scale) {
                    throw DiffusionNotPsd("diffusion matrix is not positive semi-definite at t = " + format_number(t));
                }
            }
            continue;
        }
        const double ljj = std::sqrt(pivot);
        l[j * d + j] = ljj;
        for (std::size_t i = j + 1; i < d; ++i) {
            double v = c[i * d + j];
            for (std::size_t k = 0; k < j; ++k) v -= l[i * d + k] * l[j * d + k];
            l[i * d + j] = v / ljj;
        }
    }
}

struct StepCoefficients {
    double t;
    std::vector<FrozenPoly> drift;
    std::vector<FrozenPoly> diffusion;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::Euler ? "euler" : "euler-projected"; }

Scheme parse_scheme(const std::string& text) {
    if (text == "euler") return Scheme::Euler;
    if (text == "euler-projected") return Scheme::EulerProjected;
    throw std::invalid_argument("unknown scheme '" + text + "' (expected euler or euler-projected)");
}

void SimConfig::validate() const {
    if (n_paths < 2) throw std::invalid_argument("n_paths must be at least 2");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be positive");
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("POLYMAG_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min<long>(v, 1024));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SampleSet simulate_paths(const ProcessSpec& spec, double s, double t, std::span<const double> x0, const SimConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    cfg.validate();
    spec.validate(false);
    if (!(s >= 0.0 && s < t && t <= spec.horizon)) throw std::invalid_argument("simulate_paths: need 0 <= s < t <= T");
    if (x0.size() != spec.d) throw std::invalid_argument("simulate_paths: x0 has the wrong dimension");
    if (!spec.state_space.contains(x0)) throw std::invalid_argument("simulate_paths: x0 lies outside the state space");
    if (spec.has_jumps() && !spec.jump_sampler) {
        throw MissingSampler("no sampler: the spec declares jump moments but no kernel to simulate them");
    }

    const std::size_t d = spec.d;
    int degree = 1;
    for (const auto& p : spec.drift) degree = std::max(degree, p.degree());
    for (const auto& p : spec.diffusion) degree = std::max(degree, p.degree());
    const MonomialTable table(enumerate_basis(d, degree));

    const double dt = (t - s) / cfg.n_steps;
    std::vector<StepCoefficients> steps(static_cast<std::size_t>(cfg.n_steps));
    for (int k = 0; k < cfg.n_steps; ++k) {
        auto& st = steps[static_cast<std::size_t>(k)];
        st.t = s + dt * k;
        for (const auto& p : spec.drift) st.drift.push_back(table.freeze(p.at(st.t)));
        for (const auto& p : spec.diffusion) st.diffusion.push_back(table.freeze(p.at(st.t)));
    }

    SampleSet out;
    out.d = d;
    out.states.assign(cfg.n_paths * d, 0.0);
    const JumpKernelSampler* sampler = spec.has_jumps() ? spec.jump_sampler.get() : nullptr;
    const double sqrt_dt = std::sqrt(dt);

    auto run_path = [&](std::size_t p, std::vector<double>& mono, std::vector<double>& c, std::vector<double>& l,
                        std::vector<double>& z, std::vector<double>& dx, std::vector<double>& xi) {
        RandomStream rng(cfg.seed, p);
        std::span<double> x(out.states.data() + p * d, d);
        std::copy(x0.begin(), x0.end(), x.begin());
        for (const auto& st : steps) {
            table.fill(x, mono);
            for (std::size_t i = 0; i < d * d; ++i) c[i] = st.diffusion[i](mono);
            psd_cholesky(c, d, l, st.t);
            for (std::size_t i = 0; i < d; ++i) z[i] = rng.normal();
            for (std::size_t i = 0; i < d; ++i) {
                double noise = 0.0;
                for (std::size_t k = 0; k <= i; ++k) noise += l[i * d + k] * z[k];
                dx[i] = st.drift[i](mono) * dt + noise * sqrt_dt;
            }
            if (sampler) {
                sampler->mean_jump(st.t, x, xi);
                for (std::size_t i = 0; i < d; ++i) dx[i] -= xi[i] * dt;
                const unsigned jumps = rng.poisson(sampler->intensity(st.t, x) * dt);
                for (unsigned j = 0; j < jumps; ++j) {
                    sampler->draw(st.t, x, rng, xi);
                    for (std::size_t i = 0; i < d; ++i) dx[i] += xi[i];
                }
            }
            for (std::size_t i = 0; i < d; ++i) x[i] += dx[i];
            if (cfg.scheme == Scheme::EulerProjected) spec.state_space.project(x);
        }
        for (double v : x) {
            if (!std::isfinite(v)) throw NumericalError("simulate_paths: path " + std::to_string(p) + " diverged");
        }
    };

    const unsigned workers = std::min<std::size_t>(resolve_threads(cfg.threads), cfg.n_paths);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&](std::size_t begin, std::size_t end) {
        std::vector<double> mono(table.basis->size()), c(d * d), l(d * d), z(d), dx(d), xi(d);
        try {
            for (std::size_t p = begin; p < end; ++p) run_path(p, mono, c, l, z, dx, xi);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    if (workers <= 1) {
        worker(0, cfg.n_paths);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (cfg.n_paths + workers - 1) / workers;
        for (std::size_t begin = 0; begin < cfg.n_paths; begin += chunk) {
            pool.emplace_back(worker, begin, std::min(cfg.n_paths, begin + chunk));
        }
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    out.seconds = seconds_since(start);
    return out;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

MomentEstimate moment_from_samples(const SampleSet& samples, const MultiIndex& kidx) {
    if (kidx.size() != samples.d) throw std::invalid_argument("moment_from_samples: multi-index has the wrong dimension");
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("moment_from_samples: need at least two samples");
    std::vector<double> f(n);
    for (std::size_t p = 0; p < n; ++p) f[p] = kidx.monomial(samples.path(p));
    MomentEstimate e;
    e.n_paths = n;
    e.mean = pairwise_sum(f) / static_cast<double>(n);
    for (double& v : f) v = (v - e.mean) * (v - e.mean);
    const double var = pairwise_sum(f) / static_cast<double>(n - 1);
    e.std_error = std::sqrt(var / static_cast<double>(n));
    e.seconds = samples.seconds;
    return e;
}

MomentEstimate estimate_moment(const ProcessSpec& spec, double s, double t, std::span<const double> x0,
                               const MultiIndex& kidx, const SimConfig& cfg) {
    return estimate_moments(spec, s, t, x0, {kidx}, cfg).front();
}

std::vector<MomentEstimate> estimate_moments(const ProcessSpec& spec, double s, double t, std::span<const double> x0,
                                             const std::vector<MultiIndex>& kidx, const SimConfig& cfg) {
    for (const auto& k : kidx) {
        if (k.size() != spec.d) throw std::invalid_argument("estimate_moment: multi-index has the wrong dimension");
    }
    const SampleSet samples = simulate_paths(spec, s, t, x0, cfg);
    std::vector<MomentEstimate> out;
    for (const auto& k : kidx) out.push_back(moment_from_samples(samples, k));
    return out;
}

KernelReport kernel_consistency_check(const JumpKernelSampler* sampler, const ProcessSpec& spec, double t,
                                      std::span<const double> x, std::size_t n, std::uint64_t seed) {
    if (n < 10000) throw std::invalid_argument("kernel_consistency_check: need n >= 10^4 draws");
    if (x.size() != spec.d) throw std::invalid_argument("kernel_consistency_check: x has the wrong dimension");
    KernelReport report;
    report.draws = n;
    report.intensity = sampler ? sampler->intensity(t, x) : 0.0;

    std::vector<std::vector<double>> values(spec.jump_moments.size(), std::vector<double>(n, 0.0));
    if (report.intensity > 0.0) {
        RandomStream rng(seed, 0);
        std::vector<double> xi(spec.d);
        for (std::size_t i = 0; i < n; ++i) {
            sampler->draw(t, x, rng, xi);
            std::size_t j = 0;
            for (const auto& [l, poly] : spec.jump_moments) values[j++][i] = l.monomial(xi);
        }
    }
    std::size_t j = 0;
    for (const auto& [l, poly] : spec.jump_moments) {
        KernelMomentCheck check;
        check.l = l;
        check.declared = poly.eval(t, x);
        auto& v = values[j++];
        const double mean = pairwise_sum(v) / static_cast<double>(n);
        for (double& e : v) e = (e - mean) * (e - mean);
        const double sd = std::sqrt(pairwise_sum(v) / static_cast<double>(n - 1));
        check.empirical = report.intensity * mean;
        check.std_error = report.intensity * sd / std::sqrt(static_cast<double>(n));
        check.consistent = std::abs(check.empirical - check.declared) <=
                           4.0 * check.std_error + 1e-12 * std::max(1.0, std::abs(check.declared));
        report.consistent = report.consistent && check.consistent;
        report.moments.push_back(std::move(check));
    }
    return report;
}

}  // namespace polymag
