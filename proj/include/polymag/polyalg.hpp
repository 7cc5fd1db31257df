#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace polymag {

/// Exponent tuple (k_1, ..., k_d) of a monomial x^k.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::size_t d) : k_(d, 0) {}
    MultiIndex(std::initializer_list<int> k);
    explicit MultiIndex(std::vector<int> k);

    std::size_t size() const noexcept { return k_.size(); }
    int operator[](std::size_t i) const { return k_[i]; }
    int& operator[](std::size_t i) { return k_[i]; }
    const std::vector<int>& exponents() const noexcept { return k_; }

    /// |k| = k_1 + ... + k_d
    int degree() const noexcept;

    /// k! = k_1! * ... * k_d!, exact for degree <= 12.
    double factorial() const;

    /// x^k
    double monomial(std::span<const double> x) const;

    MultiIndex operator+(const MultiIndex& other) const;

    /// Comma separated exponents, e.g. "2,0,1".
    std::string to_string() const;
    static MultiIndex parse(const std::string& text);

    auto operator<=>(const MultiIndex&) const = default;
    bool operator==(const MultiIndex&) const = default;

private:
    std::vector<int> k_;
};

/// All multi-indices with |k| <= m in graded order: degree ascending, and
/// within one degree lexicographically descending, so for d = 2, m = 1 the
/// order is 1, x1, x2. Index 0 is always the constant monomial.
class MonomialBasis {
public:
    MonomialBasis(std::size_t d, int m);

    std::size_t dim() const noexcept { return d_; }
    int max_degree() const noexcept { return m_; }
    std::size_t size() const noexcept { return order_.size(); }

    const MultiIndex& operator[](std::size_t i) const { return order_[i]; }
    const std::vector<MultiIndex>& order() const noexcept { return order_; }

    /// Position of k, or size() when |k| > m.
    std::size_t index_of(const MultiIndex& k) const;
    bool contains(const MultiIndex& k) const { return index_of(k) < size(); }

    /// Row vector of all basis monomials evaluated at x.
    Eigen::RowVectorXd evaluate(std::span<const double> x) const;

    /// First index whose degree exceeds deg (size() if none).
    std::size_t degree_end(int deg) const;

private:
    std::uint64_t key(const MultiIndex& k) const;

    std::size_t d_;
    int m_;
    std::vector<MultiIndex> order_;
    std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

using BasisPtr = std::shared_ptr<const MonomialBasis>;

/// Shared, memoized basis for (d, m). Thread-safe.
BasisPtr enumerate_basis(std::size_t d, int m);

/// Binomial coefficient C(d + m, d), the size of the degree-<= m basis.
std::size_t basis_size(std::size_t d, int m);

/// Dense real polynomial over a MonomialBasis.
class Polynomial {
public:
    static constexpr int kZeroDegree = std::numeric_limits<int>::min();

    explicit Polynomial(BasisPtr basis);
    Polynomial(BasisPtr basis, Eigen::VectorXd coeffs);

    static Polynomial constant(BasisPtr basis, double c);
    static Polynomial monomial(BasisPtr basis, const MultiIndex& k, double c = 1.0);
    /// The coordinate function x_i (0-based i).
    static Polynomial coordinate(BasisPtr basis, std::size_t i);

    const BasisPtr& basis() const noexcept { return basis_; }
    std::size_t dim() const noexcept { return basis_->dim(); }
    const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
    double coeff(const MultiIndex& k) const;
    double& operator[](std::size_t i) { return coeffs_[static_cast<Eigen::Index>(i)]; }
    double operator[](std::size_t i) const { return coeffs_[static_cast<Eigen::Index>(i)]; }

    /// Largest |k| with a nonzero coefficient, kZeroDegree for the zero polynomial.
    int degree() const;
    bool is_zero() const { return degree() == kZeroDegree; }

    double eval(std::span<const double> x) const;

    /// Re-expand on the basis of degree m. Throws DegreeOverflow when a
    /// nonzero coefficient would be dropped.
    Polynomial on_degree(int m) const;

    /// max |alpha_k|; the norm ||.||_m on a full-dimensional state space.
    double norm() const;

    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator-=(const Polynomial& other);
    Polynomial& operator*=(double c);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, double c) { return a *= c; }
    friend Polynomial operator*(double c, Polynomial a) { return a *= c; }

    bool operator==(const Polynomial& other) const;

private:
    void require_same_space(const Polynomial& other) const;

    BasisPtr basis_;
    Eigen::VectorXd coeffs_;
};

/// Evaluates p at x. Throws std::invalid_argument on a dimension mismatch.
double eval(const Polynomial& p, std::span<const double> x);

/// Exact product expanded on the degree-target_m basis.
/// Throws DegreeOverflow if a nonzero product term has degree > target_m.
Polynomial multiply(const Polynomial& p, const Polynomial& q, int target_m);

/// d/dx_i p for 0-based coordinate i; stays on the basis of p.
Polynomial partial_derivative(const Polynomial& p, std::size_t i);

/// D^l p = d^{|l|} p / dx^l.
Polynomial derivative(const Polynomial& p, const MultiIndex& l);

}  // namespace polymag
