#pragma once

#include "polymag/process_spec.hpp"

#include <map>
#include <string>
#include <vector>

namespace polymag {

/// Downward kernel on [a x, b x] with density -xi^{-1} / log(a / b),
/// -1 <= a < b < 0. Unit intensity; |xi| is log-uniform. One-dimensional.
class LogUniformDown final : public JumpKernelSampler {
public:
    LogUniformDown(double a, double b);

    double intensity(double t, std::span<const double> x) const override;
    void draw(double t, std::span<const double> x, RandomStream& rng, std::span<double> xi) const override;
    void mean_jump(double t, std::span<const double> x, std::span<double> out) const override;
    double moment(double t, std::span<const double> x, const MultiIndex& l) const override;
    std::vector<std::string> describe() const override;

    /// Closed form of int xi^l K(x, d xi) as a coefficient of x^l.
    double moment_coefficient(int l) const;

private:
    double a_;
    double b_;
};

/// Upward kernel on [alpha (1 - x), 1 - x] with density xi^{-1} / log(1 / alpha),
/// 0 < alpha < 1. Unit intensity. One-dimensional.
class LogUniformUp final : public JumpKernelSampler {
public:
    explicit LogUniformUp(double alpha);

    double intensity(double t, std::span<const double> x) const override;
    void draw(double t, std::span<const double> x, RandomStream& rng, std::span<double> xi) const override;
    void mean_jump(double t, std::span<const double> x, std::span<double> out) const override;
    double moment(double t, std::span<const double> x, const MultiIndex& l) const override;
    std::vector<std::string> describe() const override;

    /// Closed form of int xi^l K'(x, d xi) as a coefficient of (1 - x)^l.
    double moment_coefficient(int l) const;

private:
    double alpha_;
};

/// Sum of kernels; a draw picks a component with probability proportional
/// to its intensity at (t, x).
class KernelMixture final : public JumpKernelSampler {
public:
    explicit KernelMixture(std::vector<SamplerPtr> parts);

    double intensity(double t, std::span<const double> x) const override;
    void draw(double t, std::span<const double> x, RandomStream& rng, std::span<double> xi) const override;
    void mean_jump(double t, std::span<const double> x, std::span<double> out) const override;
    double moment(double t, std::span<const double> x, const MultiIndex& l) const override;
    std::vector<std::string> describe() const override;

    const std::vector<SamplerPtr>& parts() const { return parts_; }

private:
    std::vector<SamplerPtr> parts_;
};

/// Builds a kernel from its document name ("log-uniform-down" with a, b or
/// "log-uniform-up" with alpha). Throws std::invalid_argument on unknown
/// names, missing or unknown parameters, or parameters out of range.
SamplerPtr make_sampler(const std::string& name, const std::map<std::string, double>& params);

/// Jump-moment polynomials x -> int xi^l K(x, d xi) of a one-dimensional
/// log-uniform kernel (or mixture of them) for 2 <= l <= m.
std::map<MultiIndex, TimePolynomial> kernel_moment_polynomials(const JumpKernelSampler& kernel, int m);

}  // namespace polymag
