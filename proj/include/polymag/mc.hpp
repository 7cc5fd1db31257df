#pragma once

#include "polymag/polyalg.hpp"
#include "polymag/process_spec.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace polymag {

enum class Scheme { Euler, EulerProjected };

std::string to_string(Scheme s);
/// Accepts euler and euler-projected.
Scheme parse_scheme(const std::string& text);

struct SimConfig {
    std::size_t n_paths = 100000;
    int n_steps = 500;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::Euler;
    /// Worker threads; 0 reads POLYMAG_THREADS and falls back to the
    /// hardware concurrency. Results do not depend on this value.
    unsigned threads = 0;

    void validate() const;
};

/// Worker count actually used for `requested` (see SimConfig::threads).
unsigned resolve_threads(unsigned requested);

/// Terminal states, row-major: path p occupies states[p * d, (p + 1) * d).
struct SampleSet {
    std::size_t d = 0;
    std::vector<double> states;
    double seconds = 0.0;

    std::size_t size() const { return d ? states.size() / d : 0; }
    std::span<const double> path(std::size_t p) const { return {states.data() + p * d, d}; }
};

struct MomentEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double seconds = 0.0;
};

/// Euler (optionally clipped to the state space) with compound-Poisson
/// jumps. Coefficients are frozen at the left end of every step and the
/// compensator of the jump measure is subtracted from the drift.
/// Path p uses RandomStream(cfg.seed, p), so the output is bit-identical
/// for any worker count.
SampleSet simulate_paths(const ProcessSpec& spec, double s, double t, std::span<const double> x0, const SimConfig& cfg);

/// Sample mean and standard error of x^kidx; pairwise summation.
MomentEstimate moment_from_samples(const SampleSet& samples, const MultiIndex& kidx);

MomentEstimate estimate_moment(const ProcessSpec& spec, double s, double t, std::span<const double> x0,
                               const MultiIndex& kidx, const SimConfig& cfg);

/// Several moments from one simulated sample set.
std::vector<MomentEstimate> estimate_moments(const ProcessSpec& spec, double s, double t, std::span<const double> x0,
                                             const std::vector<MultiIndex>& kidx, const SimConfig& cfg);

/// Sum of values by recursive halving; order fixed by the input order.
double pairwise_sum(std::span<const double> values);

struct KernelMomentCheck {
    MultiIndex l;
    double empirical = 0.0;  ///< intensity * sample mean of xi^l
    double declared = 0.0;   ///< jump_moments[l](t, x)
    double std_error = 0.0;
    bool consistent = true;  ///< |empirical - declared| <= 4 std_error (+ roundoff)
};

struct KernelReport {
    double intensity = 0.0;
    std::size_t draws = 0;
    std::vector<KernelMomentCheck> moments;
    bool consistent = true;
};

/// Compares intensity-weighted empirical moments of n kernel draws at (t, x)
/// with the declared jump-moment polynomials. A null sampler is the zero
/// kernel. Requires n >= 10^4.
KernelReport kernel_consistency_check(const JumpKernelSampler* sampler, const ProcessSpec& spec, double t,
                                      std::span<const double> x, std::size_t n, std::uint64_t seed = 0);

}  // namespace polymag
