#pragma once

#include "polymag/generator.hpp"
#include "polymag/polyalg.hpp"
#include "polymag/process_spec.hpp"
#include "polymag/quadrature.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>

namespace polymag {

/// int_s^t ||H_u||_2 du by composite Gauss-Legendre with panel doubling.
/// Settles to max(q.rtol, 1e-8), or to 1e-4 where the norm has kinks;
/// throws NumericalError otherwise.
double norm_integral(const GeneratorFamily& family, double s, double t, const QuadratureConfig& q = {});
double norm_integral(const ProcessSpec& spec, double s, double t, int k, const QuadratureConfig& q = {});

/// First three Magnus terms of the forward equation dP/dt = P H_t on [s, t]:
///   omega1 = int H_u du
///   omega2 = -1/2 int_{s<v<u<t} [H_u, H_v]
///   omega3 = 1/6 int_{s<w<v<u<t} [H_u,[H_v,H_w]] + [H_w,[H_v,H_u]]
struct MagnusTerms {
    double s = 0.0;
    double t = 0.0;
    Eigen::MatrixXd omega1;
    Eigen::MatrixXd omega2;
    Eigen::MatrixXd omega3;

    Eigen::MatrixXd sum() const { return omega1 + omega2 + omega3; }
};

MagnusTerms magnus_terms(const GeneratorFamily& family, double s, double t, const QuadratureConfig& q = {});
MagnusTerms magnus_terms(const ProcessSpec& spec, double s, double t, int k, const QuadratureConfig& q = {});

enum class Method { Auto, Exact, Magnus3, Ode };

std::string to_string(Method m);
/// Accepts auto, exact, magnus3, ode. Throws std::invalid_argument otherwise.
Method parse_method(const std::string& text);

struct TransitionOptions {
    Method method = Method::Auto;
    QuadratureConfig quadrature;
    int ode_steps = 2048;
    /// The RK4 halving check fails above this (relative to max(1, ||P||_max)).
    double ode_max_error = 1e-6;
    /// Each Magnus subinterval must satisfy int ||H|| < safety * pi.
    double safety = 0.9;
    /// Magnus subintervals double until successive compositions agree to
    /// this (relative to max(1, ||P||_max)); 0 keeps the gate partition.
    double magnus_rtol = 1e-10;
    /// Lower bound on the number of Magnus subintervals.
    int min_subintervals = 1;
    int probe_grid = 8;
    /// Commutators count as zero below this times max ||H||_2^2.
    double commutator_rtol = 1e-12;
    bool compute_residual = true;
};

struct TransitionResult {
    double s = 0.0;
    double t = 0.0;
    BasisPtr basis;
    Eigen::MatrixXd matrix;
    Method method = Method::Exact;  ///< method actually used (never Auto)
    int subintervals = 0;
    double norm_integral = 0.0;
    /// max |dP/dt - P H_t| by finite differences; NaN when not computed.
    double residual = 0.0;
    /// Step-halving (ODE) or step-doubling (Magnus) error estimate.
    std::optional<double> error_estimate;
};

/// P_{s,t} on the degree-<= k basis.
TransitionResult transition_matrix(const ProcessSpec& spec, double s, double t, int k, const TransitionOptions& opts = {});
TransitionResult transition_matrix(const GeneratorFamily& family, double s, double t, const TransitionOptions& opts = {});

/// Defects of the Kolmogorov equations at (s, t), by finite differences of
/// the chosen solver: forward = max |dP/dt - P H_t|, backward = max |dP/ds + H_s P|.
struct EquationDefects {
    double forward = 0.0;
    double backward = 0.0;
};
EquationDefects equation_defects(const GeneratorFamily& family, double s, double t, const TransitionOptions& opts = {});

/// Evolution-system checks on r <= s <= t. Matrix defects are max-abs,
/// composition relative to max(1, ||P_{r,t}||_max).
struct EvolutionCheck {
    double identity = 0.0;      ///< ||P_{s,s} - I||
    double composition = 0.0;   ///< ||P_{r,s} P_{s,t} - P_{r,t}||
    double constant = 0.0;      ///< ||P_{r,t} e_0 - e_0||
    double block = 0.0;         ///< largest entry below the degree blocks of P_{r,t}
    EquationDefects defects;    ///< at (r, t)

    static constexpr double kIdentityTol = 1e-12;
    static constexpr double kCompositionTol = 1e-6;
    static constexpr double kConstantTol = 1e-12;
    static constexpr double kBlockTol = 1e-10;
    static constexpr double kDefectTol = 1e-4;

    bool pass() const {
        return identity <= kIdentityTol && composition <= kCompositionTol && constant <= kConstantTol &&
               block <= kBlockTol && defects.forward <= kDefectTol && defects.backward <= kDefectTol;
    }
};
EvolutionCheck check_evolution(const GeneratorFamily& family, double r, double s, double t, const TransitionOptions& opts = {});

struct MomentResult {
    double value = 0.0;
    bool inside_state_space = true;
    TransitionResult transition;
};

/// E[X_t^kidx | X_s = x] = (basis monomials at x) * P_{s,t} * e_kidx on the
/// degree-|kidx| basis.
MomentResult moment_detailed(const ProcessSpec& spec, double s, double t, std::span<const double> x,
                             const MultiIndex& kidx, const TransitionOptions& opts = {});
double moment(const ProcessSpec& spec, double s, double t, std::span<const double> x, const MultiIndex& kidx,
              const TransitionOptions& opts = {});

}  // namespace polymag
