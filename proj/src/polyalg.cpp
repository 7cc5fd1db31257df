#include "polymag/polyalg.hpp"

#include "polymag/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace polymag {

MultiIndex::MultiIndex(std::initializer_list<int> k) : MultiIndex(std::vector<int>(k)) {}

MultiIndex::MultiIndex(std::vector<int> k) : k_(std::move(k)) {
    for (int e : k_) {
        if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    }
}

int MultiIndex::degree() const noexcept {
    int s = 0;
    for (int e : k_) s += e;
    return s;
}

double MultiIndex::factorial() const {
    static constexpr double kFact[] = {1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0,
                                       40320.0, 362880.0, 3628800.0, 39916800.0, 479001600.0};
    double f = 1.0;
    for (int e : k_) {
        if (e > 12) throw std::invalid_argument("MultiIndex::factorial: exponent above 12");
        f *= kFact[e];
    }
    return f;
}

double MultiIndex::monomial(std::span<const double> x) const {
    if (x.size() != k_.size()) throw std::invalid_argument("MultiIndex::monomial: dimension mismatch");
    double v = 1.0;
    for (std::size_t i = 0; i < k_.size(); ++i) {
        for (int e = 0; e < k_[i]; ++e) v *= x[i];
    }
    return v;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
    if (other.size() != size()) throw std::invalid_argument("MultiIndex: dimension mismatch");
    MultiIndex r = *this;
    for (std::size_t i = 0; i < size(); ++i) r.k_[i] += other.k_[i];
    return r;
}

std::string MultiIndex::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < k_.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(k_[i]);
    }
    return s;
}

MultiIndex MultiIndex::parse(const std::string& text) {
    std::vector<int> k;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        int e = 0;
        try {
            e = std::stoi(item, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("invalid multi-index '" + text + "'");
        }
        while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
        if (pos != item.size() || e < 0) throw std::invalid_argument("invalid multi-index '" + text + "'");
        k.push_back(e);
    }
    if (k.empty()) throw std::invalid_argument("empty multi-index");
    return MultiIndex(std::move(k));
}

// ---------------------------------------------------------------------------

namespace {

void append_degree(std::size_t d, int deg, std::size_t pos, MultiIndex& cur, std::vector<MultiIndex>& out) {
    if (pos + 1 == d) {
        cur[pos] = deg;
        out.push_back(cur);
        return;
    }
    // Larger leading exponent first gives lexicographically descending order.
    for (int e = deg; e >= 0; --e) {
        cur[pos] = e;
        append_degree(d, deg - e, pos + 1, cur, out);
    }
}

}  // namespace

MonomialBasis::MonomialBasis(std::size_t d, int m) : d_(d), m_(m) {
    if (d == 0) throw std::invalid_argument("enumerate_basis: dimension must be positive");
    if (m < 0) throw std::invalid_argument("enumerate_basis: degree must be non-negative");
    order_.reserve(basis_size(d, m));
    for (int deg = 0; deg <= m; ++deg) {
        MultiIndex cur(d);
        append_degree(d, deg, 0, cur, order_);
    }
    lookup_.reserve(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) lookup_.emplace(key(order_[i]), i);
}

std::uint64_t MonomialBasis::key(const MultiIndex& k) const {
    std::uint64_t h = 0;
    const auto base = static_cast<std::uint64_t>(m_ + 1);
    for (std::size_t i = 0; i < d_; ++i) h = h * base + static_cast<std::uint64_t>(k[i]);
    return h;
}

std::size_t MonomialBasis::index_of(const MultiIndex& k) const {
    if (k.size() != d_) throw std::invalid_argument("MonomialBasis: dimension mismatch");
    if (k.degree() > m_) return size();
    auto it = lookup_.find(key(k));
    return it == lookup_.end() ? size() : it->second;
}

Eigen::RowVectorXd MonomialBasis::evaluate(std::span<const double> x) const {
    if (x.size() != d_) throw std::invalid_argument("MonomialBasis::evaluate: dimension mismatch");
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) row[static_cast<Eigen::Index>(i)] = order_[i].monomial(x);
    return row;
}

std::size_t MonomialBasis::degree_end(int deg) const {
    if (deg < 0) return 0;
    if (deg >= m_) return size();
    return basis_size(d_, deg);
}

std::size_t basis_size(std::size_t d, int m) {
    if (m < 0) return 0;
    // C(d+m, d) computed incrementally; exact in 64-bit for desk-scale d, m.
    std::uint64_t c = 1;
    for (std::size_t i = 1; i <= d; ++i) c = c * (static_cast<std::uint64_t>(m) + i) / i;
    return static_cast<std::size_t>(c);
}

BasisPtr enumerate_basis(std::size_t d, int m) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, int>, BasisPtr> cache;
    if (d == 0) throw std::invalid_argument("enumerate_basis: dimension must be positive");
    if (m < 0) throw std::invalid_argument("enumerate_basis: degree must be non-negative");
    std::lock_guard lock(mutex);
    auto& slot = cache[{d, m}];
    if (!slot) slot = std::make_shared<const MonomialBasis>(d, m);
    return slot;
}

// ---------------------------------------------------------------------------

Polynomial::Polynomial(BasisPtr basis)
    : basis_(std::move(basis)), coeffs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_->size()))) {}

Polynomial::Polynomial(BasisPtr basis, Eigen::VectorXd coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (static_cast<std::size_t>(coeffs_.size()) != basis_->size()) {
        throw std::invalid_argument("Polynomial: coefficient count does not match basis");
    }
}

Polynomial Polynomial::constant(BasisPtr basis, double c) {
    Polynomial p(std::move(basis));
    p.coeffs_[0] = c;
    return p;
}

Polynomial Polynomial::monomial(BasisPtr basis, const MultiIndex& k, double c) {
    Polynomial p(std::move(basis));
    const std::size_t i = p.basis_->index_of(k);
    if (i >= p.basis_->size()) throw DegreeOverflow("monomial x^(" + k.to_string() + ") exceeds basis degree");
    p.coeffs_[static_cast<Eigen::Index>(i)] = c;
    return p;
}

Polynomial Polynomial::coordinate(BasisPtr basis, std::size_t i) {
    MultiIndex k(basis->dim());
    if (i >= k.size()) throw std::invalid_argument("Polynomial::coordinate: index out of range");
    k[i] = 1;
    return monomial(std::move(basis), k);
}

double Polynomial::coeff(const MultiIndex& k) const {
    const std::size_t i = basis_->index_of(k);
    return i < basis_->size() ? coeffs_[static_cast<Eigen::Index>(i)] : 0.0;
}

int Polynomial::degree() const {
    for (Eigen::Index i = coeffs_.size() - 1; i >= 0; --i) {
        if (coeffs_[i] != 0.0) return (*basis_)[static_cast<std::size_t>(i)].degree();
    }
    return kZeroDegree;
}

double Polynomial::eval(std::span<const double> x) const {
    if (x.size() != dim()) throw std::invalid_argument("Polynomial::eval: dimension mismatch");
    double v = 0.0;
    for (std::size_t i = 0; i < basis_->size(); ++i) {
        const double c = coeffs_[static_cast<Eigen::Index>(i)];
        if (c != 0.0) v += c * (*basis_)[i].monomial(x);
    }
    return v;
}

Polynomial Polynomial::on_degree(int m) const {
    if (m == basis_->max_degree()) return *this;
    auto target = enumerate_basis(dim(), m);
    Polynomial r(target);
    for (std::size_t i = 0; i < basis_->size(); ++i) {
        const double c = coeffs_[static_cast<Eigen::Index>(i)];
        if (c == 0.0) continue;
        const std::size_t j = target->index_of((*basis_)[i]);
        if (j >= target->size()) {
            throw DegreeOverflow("polynomial of degree " + std::to_string(degree()) +
                                 " does not fit degree bound " + std::to_string(m));
        }
        r.coeffs_[static_cast<Eigen::Index>(j)] = c;
    }
    return r;
}

double Polynomial::norm() const { return coeffs_.size() ? coeffs_.cwiseAbs().maxCoeff() : 0.0; }

void Polynomial::require_same_space(const Polynomial& other) const {
    if (other.dim() != dim() || other.basis_->max_degree() != basis_->max_degree()) {
        throw std::invalid_argument("Polynomial: operands live on different bases");
    }
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
    require_same_space(other);
    coeffs_ += other.coeffs_;
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
    require_same_space(other);
    coeffs_ -= other.coeffs_;
    return *this;
}

Polynomial& Polynomial::operator*=(double c) {
    coeffs_ *= c;
    return *this;
}

bool Polynomial::operator==(const Polynomial& other) const {
    return other.dim() == dim() && other.basis_->max_degree() == basis_->max_degree() && coeffs_ == other.coeffs_;
}

double eval(const Polynomial& p, std::span<const double> x) { return p.eval(x); }

Polynomial multiply(const Polynomial& p, const Polynomial& q, int target_m) {
    if (p.dim() != q.dim()) throw std::invalid_argument("multiply: dimension mismatch");
    auto target = enumerate_basis(p.dim(), target_m);
    Polynomial r(target);
    std::map<MultiIndex, double> overflow;
    const auto& pb = *p.basis();
    const auto& qb = *q.basis();
    for (std::size_t i = 0; i < pb.size(); ++i) {
        const double a = p[i];
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < qb.size(); ++j) {
            const double b = q[j];
            if (b == 0.0) continue;
            const MultiIndex k = pb[i] + qb[j];
            const std::size_t idx = target->index_of(k);
            if (idx < target->size()) {
                r[idx] += a * b;
            } else {
                overflow[k] += a * b;
            }
        }
    }
    for (const auto& [k, c] : overflow) {
        if (c != 0.0) {
            throw DegreeOverflow("product term x^(" + k.to_string() + ") exceeds degree bound " +
                                 std::to_string(target_m));
        }
    }
    return r;
}

Polynomial partial_derivative(const Polynomial& p, std::size_t i) {
    if (i >= p.dim()) throw std::invalid_argument("partial_derivative: coordinate index out of range");
    const auto& basis = *p.basis();
    Polynomial r(p.basis());
    for (std::size_t j = 0; j < basis.size(); ++j) {
        const double c = p[j];
        const int e = basis[j][i];
        if (c == 0.0 || e == 0) continue;
        MultiIndex k = basis[j];
        k[i] = e - 1;
        r[basis.index_of(k)] += c * e;
    }
    return r;
}

Polynomial derivative(const Polynomial& p, const MultiIndex& l) {
    if (l.size() != p.dim()) throw std::invalid_argument("derivative: dimension mismatch");
    Polynomial r = p;
    for (std::size_t i = 0; i < l.size(); ++i) {
        for (int e = 0; e < l[i]; ++e) r = partial_derivative(r, i);
    }
    return r;
}

}  // namespace polymag
