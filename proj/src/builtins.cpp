#include "polymag/builtins.hpp"

#include "polymag/errors.hpp"
#include "polymag/expression.hpp"
#include "polymag/jump_kernels.hpp"

#include <set>
#include <stdexcept>

namespace polymag {

namespace {

// Parameter lookup with defaults from the catalog and strict key checking.
class Params {
public:
    Params(const BuiltinInfo& info, const BuiltinParams& given) : info_(info), given_(given) {
        std::set<std::string> known{"m", "T"};
        for (const auto& p : info.params) known.insert(p.name);
        for (const auto& [k, v] : given) {
            if (!known.contains(k)) throw SpecError("builtin " + info.name + ": unknown parameter '" + k + "'");
        }
    }

    bool has(const std::string& key) const { return given_.contains(key) || !default_of(key).empty(); }

    std::string raw(const std::string& key) const {
        if (auto it = given_.find(key); it != given_.end()) return it->second;
        return default_of(key);
    }

    double number(const std::string& key) const {
        try {
            return parse_constant(raw(key));
        } catch (const SpecError& e) {
            throw SpecError("builtin " + info_.name + ": parameter " + key + ": " + e.what());
        }
    }

    TimeCoefficient coefficient(const std::string& key) const {
        try {
            return parse_time_coefficient(raw(key));
        } catch (const SpecError& e) {
            throw SpecError("builtin " + info_.name + ": parameter " + key + ": " + e.what());
        }
    }

    int m() const {
        const double v = number("m");
        if (v != static_cast<int>(v)) throw SpecError("builtin " + info_.name + ": m must be an integer");
        return static_cast<int>(v);
    }

private:
    std::string default_of(const std::string& key) const {
        if (key == "m") return "4";
        if (key == "T") return "1";
        for (const auto& p : info_.params) {
            if (p.name == key) return p.default_value;
        }
        return {};
    }

    const BuiltinInfo& info_;
    const BuiltinParams& given_;
};

const BuiltinInfo& lookup(const std::string& name) {
    for (const auto& info : builtin_catalog()) {
        if (info.name == name) return info;
    }
    std::string names;
    for (const auto& info : builtin_catalog()) names += (names.empty() ? "" : ", ") + info.name;
    throw SpecError("unknown builtin '" + name + "' (known: " + names + ")");
}

TimePolynomial constant1(const TimeCoefficient& c) { return TimePolynomial::constant(1, c); }
TimePolynomial x1() { return TimePolynomial::coordinate(1, 0); }
TimeCoefficient t_times(double c) { return TimeCoefficient::polynomial({0.0, c}); }

ProcessSpec base(const Params& p, std::size_t d) {
    const int m = p.m();
    const double horizon = p.number("T");
    if (m < 2 || m > kMaxDegree || m % 2) throw SpecError("m must be even and lie in [2, " + std::to_string(kMaxDegree) + "]");
    if (!(horizon > 0.0)) throw SpecError("T must be positive");
    return ProcessSpec::zero(d, m, horizon);
}

}  // namespace

const std::vector<BuiltinInfo>& builtin_catalog() {
    static const std::vector<BuiltinInfo> catalog = {
        {"bm-drift", "Brownian motion with drift: dX = a(t) dt + dW", {{"a", "0", "drift a(t)"}}},
        {"ou-theta-t", "Ornstein-Uhlenbeck type: dX = (theta t - X) dt + dW", {{"theta", "1", "slope of the mean level"}}},
        {"ou-tx", "dX = t X dt + dW; generators do not commute on degree 2", {}},
        {"jacobi",
         "Jacobi diffusion on [0, b]: dX = a(t) dt + sqrt(X (b - X)) dW",
         {{"a", "0", "drift a(t)"}, {"b", "1", "barrier level, > 0"}}},
        {"jacobi-jumps",
         "Jacobi process with log-uniform jumps on [0, 1]: dX = kappa (theta - X) dt + sqrt(X (1 - X)) dW + dJ",
         {{"kappa", "2", "mean reversion speed"},
          {"theta", "0.5", "mean level"},
          {"a", "-0.5", "downward kernel lower factor, -1 <= a < b"},
          {"b", "-0.1", "downward kernel upper factor, b < 0"},
          {"alpha", "", "if set, adds the upward kernel on [alpha (1 - x), 1 - x]"}}},
        {"affine-square",
         "(X, Y) with X = int a + W and Y = A0 + A1 X + A2 X^2; polynomial but not affine",
         {{"A0", "0", "constant term of Y"}, {"A1", "1", "linear term of Y"}, {"A2", "0.5", "quadratic term of Y"},
          {"a", "1", "drift a(t) of X"}}},
        {"quadratic-drift-counterexample",
         "dX = (a(t) + b(t) X + X^2) dt + dW; raises the degree, so it is not polynomial",
         {{"a", "0", "constant drift term a(t)"}, {"b", "0", "linear drift term b(t)"}}},
    };
    return catalog;
}

ProcessSpec builtin(const std::string& name, const BuiltinParams& params) {
    const BuiltinInfo& info = lookup(name);
    const Params p(info, params);
    ProcessSpec spec;
    bool check_degrees = true;

    if (name == "bm-drift") {
        spec = base(p, 1);
        spec.drift[0] = constant1(p.coefficient("a"));
        spec.set_diffusion(0, 0, constant1(1.0));
    } else if (name == "ou-theta-t") {
        spec = base(p, 1);
        spec.drift[0] = constant1(t_times(p.number("theta"))) - x1();
        spec.set_diffusion(0, 0, constant1(1.0));
    } else if (name == "ou-tx") {
        spec = base(p, 1);
        spec.drift[0] = t_times(1.0) * x1();
        spec.set_diffusion(0, 0, constant1(1.0));
    } else if (name == "jacobi") {
        spec = base(p, 1);
        const double b = p.number("b");
        if (!(b > 0.0)) throw SpecError("builtin jacobi: barrier b must be positive, got " + format_number(b));
        spec.drift[0] = constant1(p.coefficient("a"));
        spec.set_diffusion(0, 0, x1() * (constant1(b) - x1()));
        spec.state_space = StateSpace::box(0.0, b);
    } else if (name == "jacobi-jumps") {
        spec = base(p, 1);
        const double kappa = p.number("kappa");
        const double theta = p.number("theta");
        spec.drift[0] = TimeCoefficient(kappa) * (constant1(theta) - x1());
        spec.set_diffusion(0, 0, x1() * (constant1(1.0) - x1()));
        spec.state_space = StateSpace::box(0.0, 1.0);
        try {
            SamplerPtr down = std::make_shared<LogUniformDown>(p.number("a"), p.number("b"));
            spec.jump_sampler = down;
            if (p.has("alpha")) {
                spec.jump_sampler = std::make_shared<KernelMixture>(
                    std::vector<SamplerPtr>{down, std::make_shared<LogUniformUp>(p.number("alpha"))});
            }
        } catch (const std::invalid_argument& e) {
            throw SpecError(std::string("builtin jacobi-jumps: ") + e.what());
        }
        spec.jump_moments = kernel_moment_polynomials(*spec.jump_sampler, spec.m);
    } else if (name == "affine-square") {
        spec = base(p, 2);
        const double a1 = p.number("A1");
        const double a2 = p.number("A2");
        p.number("A0");  // validated; Y's starting point only
        const TimeCoefficient a = p.coefficient("a");
        const TimePolynomial x = TimePolynomial::coordinate(2, 0);
        const TimePolynomial one = TimePolynomial::constant(2, 1.0);
        spec.drift[0] = TimePolynomial::constant(2, a);
        spec.drift[1] = (a * TimeCoefficient(a1 + a2)) * one + (a * TimeCoefficient(2.0 * a2)) * x;
        const TimePolynomial vol = TimeCoefficient(a1) * one + TimeCoefficient(2.0 * a2) * x;
        spec.set_diffusion(0, 0, one);
        spec.set_diffusion(0, 1, vol);
        spec.set_diffusion(1, 1, vol * vol);
    } else if (name == "quadratic-drift-counterexample") {
        spec = base(p, 1);
        spec.drift[0] = constant1(p.coefficient("a")) + p.coefficient("b") * x1() + x1() * x1();
        spec.set_diffusion(0, 0, constant1(1.0));
        check_degrees = false;
    }
    spec.name = name;
    spec.validate(check_degrees);
    return spec;
}

std::vector<double> builtin_initial_state(const std::string& name, const BuiltinParams& params) {
    const BuiltinInfo& info = lookup(name);
    const Params p(info, params);
    if (name == "jacobi") return {0.3 * p.number("b")};
    if (name == "jacobi-jumps") return {0.5};
    if (name == "affine-square") {
        const double x = 0.5;
        return {x, p.number("A0") + p.number("A1") * x + p.number("A2") * x * x};
    }
    if (name == "quadratic-drift-counterexample") return {0.0};
    return {0.5};
}

}  // namespace polymag
