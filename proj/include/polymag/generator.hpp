#pragma once

#include "polymag/polyalg.hpp"
#include "polymag/process_spec.hpp"

#include <Eigen/Dense>

#include <vector>

namespace polymag {

/// Representing matrix H_t of the generator on the degree-<= k monomial
/// basis: column j holds the coefficients of G_t v_j.
struct GeneratorMatrix {
    double t = 0.0;
    BasisPtr basis;
    Eigen::MatrixXd entries;
};

/// G_t f = sum_i D_i f b^i + 1/2 sum_ij D_ij f c^ij + sum_{2<=|l|<=deg f} D^l f / l! * M_l,
/// with M_l the jump-moment polynomials. The result lives on the basis of f.
///
/// Throws DegreeOverflow when a term has degree above deg f, which means the
/// characteristics do not leave the polynomials of that degree invariant.
Polynomial apply_generator(const ProcessSpec& spec, double t, const Polynomial& f);

/// H_t on the degree-<= k basis, k <= spec.m.
GeneratorMatrix generator_matrix(const ProcessSpec& spec, double t, int k);

struct CommutatorReport {
    bool commuting = true;
    double max_norm = 0.0;   ///< max ||[H_u, H_v]||_2 over the probe grid
    double max_h_norm = 0.0; ///< max ||H_u||_2 over the probe grid
};

/// Samples ||[H_u, H_v]||_2 on a grid x grid lattice of [s, t]^2 and reports
/// whether the maximum stays within tol.
CommutatorReport commutator_probe(const ProcessSpec& spec, double s, double t, int k, int grid, double tol);

/// H_t as a matrix polynomial in t, piece by piece between breakpoints.
///
/// The generator is linear in the characteristics, so expanding every time
/// coefficient in powers of t gives H_t = sum_p t^p G_p on each piece. The
/// matrices G_p are built once; evaluation is then a matrix Horner scheme.
class GeneratorFamily {
public:
    GeneratorFamily(const ProcessSpec& spec, int k);

    Eigen::MatrixXd operator()(double t) const;

    /// int_a^b H_u du, exact piece by piece from the power expansion.
    Eigen::MatrixXd integral(double a, double b) const;

    const BasisPtr& basis() const noexcept { return basis_; }
    int degree() const noexcept { return k_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(basis_->size()); }
    const std::vector<double>& breaks() const noexcept { return breaks_; }
    double horizon() const noexcept { return horizon_; }
    /// Largest power of t in any piece; H is a polynomial of this degree
    /// between consecutive breakpoints.
    int time_degree() const;

private:
    BasisPtr basis_;
    int k_;
    double horizon_;
    std::vector<double> breaks_;
    std::vector<std::vector<Eigen::MatrixXd>> powers_;  // [piece][power]
};

/// Block upper-triangular check: max |H_ij| over deg(v_i) > deg(v_j).
double below_degree_blocks(const Eigen::MatrixXd& a, const MonomialBasis& basis);

}  // namespace polymag
