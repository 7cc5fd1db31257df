#include "polymag/jump_kernels.hpp"

#include "polymag/rng.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace polymag {

namespace {

void require_scalar(std::span<const double> x, const char* who) {
    if (x.size() != 1) throw std::invalid_argument(std::string(who) + ": kernel is one-dimensional");
}

int scalar_order(const MultiIndex& l) {
    if (l.size() != 1) throw std::invalid_argument("jump kernel moments are one-dimensional");
    return l[0];
}

std::string param_line(const std::string& name, const std::vector<std::pair<std::string, double>>& params) {
    std::string line = name;
    for (const auto& [k, v] : params) line += " " + k + "=" + format_number(v);
    return line;
}

}  // namespace

LogUniformDown::LogUniformDown(double a, double b) : a_(a), b_(b) {
    if (!(a >= -1.0 && a < b && b < 0.0)) {
        throw std::invalid_argument("log-uniform-down needs -1 <= a < b < 0, got a = " + format_number(a) +
                                    ", b = " + format_number(b));
    }
}

double LogUniformDown::intensity(double, std::span<const double> x) const {
    require_scalar(x, "log-uniform-down");
    return 1.0;
}

void LogUniformDown::draw(double, std::span<const double> x, RandomStream& rng, std::span<double> xi) const {
    require_scalar(x, "log-uniform-down");
    // |xi| / x is log-uniform on [-b, -a].
    const double lo = std::log(-b_);
    const double hi = std::log(-a_);
    xi[0] = -x[0] * std::exp(lo + (hi - lo) * rng.uniform());
}

void LogUniformDown::mean_jump(double, std::span<const double> x, std::span<double> out) const {
    out[0] = moment_coefficient(1) * x[0];
}

double LogUniformDown::moment(double, std::span<const double> x, const MultiIndex& l) const {
    require_scalar(x, "log-uniform-down");
    const int k = scalar_order(l);
    return moment_coefficient(k) * std::pow(x[0], k);
}

double LogUniformDown::moment_coefficient(int l) const {
    if (l == 0) return 1.0;
    return (std::pow(b_, l) - std::pow(a_, l)) / (-l * std::log(a_ / b_));
}

std::vector<std::string> LogUniformDown::describe() const {
    return {param_line("log-uniform-down", {{"a", a_}, {"b", b_}})};
}

LogUniformUp::LogUniformUp(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("log-uniform-up needs 0 < alpha < 1, got " + format_number(alpha));
    }
}

double LogUniformUp::intensity(double, std::span<const double> x) const {
    require_scalar(x, "log-uniform-up");
    return 1.0;
}

void LogUniformUp::draw(double, std::span<const double> x, RandomStream& rng, std::span<double> xi) const {
    require_scalar(x, "log-uniform-up");
    xi[0] = (1.0 - x[0]) * std::exp(std::log(alpha_) * rng.uniform());
}

void LogUniformUp::mean_jump(double, std::span<const double> x, std::span<double> out) const {
    out[0] = moment_coefficient(1) * (1.0 - x[0]);
}

double LogUniformUp::moment(double, std::span<const double> x, const MultiIndex& l) const {
    require_scalar(x, "log-uniform-up");
    const int k = scalar_order(l);
    return moment_coefficient(k) * std::pow(1.0 - x[0], k);
}

double LogUniformUp::moment_coefficient(int l) const {
    if (l == 0) return 1.0;
    return (1.0 - std::pow(alpha_, l)) / (l * std::log(1.0 / alpha_));
}

std::vector<std::string> LogUniformUp::describe() const {
    return {param_line("log-uniform-up", {{"alpha", alpha_}})};
}

KernelMixture::KernelMixture(std::vector<SamplerPtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw std::invalid_argument("kernel mixture needs at least one component");
    for (const auto& p : parts_) {
        if (!p) throw std::invalid_argument("kernel mixture component is null");
    }
}

double KernelMixture::intensity(double t, std::span<const double> x) const {
    double total = 0.0;
    for (const auto& p : parts_) total += p->intensity(t, x);
    return total;
}

void KernelMixture::draw(double t, std::span<const double> x, RandomStream& rng, std::span<double> xi) const {
    double target = rng.uniform() * intensity(t, x);
    for (const auto& p : parts_) {
        target -= p->intensity(t, x);
        if (target <= 0.0 || &p == &parts_.back()) {
            p->draw(t, x, rng, xi);
            return;
        }
    }
}

void KernelMixture::mean_jump(double t, std::span<const double> x, std::span<double> out) const {
    std::vector<double> part(out.size());
    for (double& v : out) v = 0.0;
    for (const auto& p : parts_) {
        p->mean_jump(t, x, part);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += part[i];
    }
}

double KernelMixture::moment(double t, std::span<const double> x, const MultiIndex& l) const {
    double total = 0.0;
    for (const auto& p : parts_) total += p->moment(t, x, l);
    return total;
}

std::vector<std::string> KernelMixture::describe() const {
    std::vector<std::string> lines;
    for (const auto& p : parts_) {
        for (auto& line : p->describe()) lines.push_back(std::move(line));
    }
    return lines;
}

SamplerPtr make_sampler(const std::string& name, const std::map<std::string, double>& params) {
    auto take = [&](const std::set<std::string>& allowed) {
        for (const auto& [k, v] : params) {
            if (!allowed.contains(k)) throw std::invalid_argument("sampler " + name + ": unknown parameter '" + k + "'");
        }
        for (const auto& k : allowed) {
            if (!params.contains(k)) throw std::invalid_argument("sampler " + name + ": missing parameter '" + k + "'");
        }
    };
    if (name == "log-uniform-down") {
        take({"a", "b"});
        return std::make_shared<LogUniformDown>(params.at("a"), params.at("b"));
    }
    if (name == "log-uniform-up") {
        take({"alpha"});
        return std::make_shared<LogUniformUp>(params.at("alpha"));
    }
    throw std::invalid_argument("unknown sampler '" + name + "' (expected log-uniform-down or log-uniform-up)");
}

std::map<MultiIndex, TimePolynomial> kernel_moment_polynomials(const JumpKernelSampler& kernel, int m) {
    std::map<MultiIndex, TimePolynomial> out;
    for (int l = 2; l <= m; ++l) {
        const BasisPtr basis = enumerate_basis(1, l);
        Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->size()));
        auto add = [&](const JumpKernelSampler& part, auto&& self) -> void {
            if (const auto* down = dynamic_cast<const LogUniformDown*>(&part)) {
                coeffs[l] += down->moment_coefficient(l);
            } else if (const auto* up = dynamic_cast<const LogUniformUp*>(&part)) {
                // c_l (1 - x)^l expanded binomially.
                double binom = 1.0;
                for (int j = 0; j <= l; ++j) {
                    coeffs[j] += up->moment_coefficient(l) * binom * (j % 2 ? -1.0 : 1.0);
                    binom = binom * (l - j) / (j + 1);
                }
            } else if (const auto* mix = dynamic_cast<const KernelMixture*>(&part)) {
                for (const auto& p : mix->parts()) self(*p, self);
            } else {
                throw std::invalid_argument("kernel_moment_polynomials: unsupported kernel type");
            }
        };
        add(kernel, add);
        out.emplace(MultiIndex{l}, TimePolynomial::from(Polynomial(basis, coeffs)));
    }
    return out;
}

}  // namespace polymag
