#include "polymag/time_coefficient.hpp"

#include "polymag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace polymag {

namespace {

double horner(const std::vector<double>& c, double t) {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
    return v;
}

void trim(std::vector<double>& c) {
    while (!c.empty() && c.back() == 0.0) c.pop_back();
}

// A point strictly inside piece i of a breakpoint list.
double representative(const std::vector<double>& breaks, std::size_t i) {
    if (breaks.empty()) return 0.0;
    if (i == 0) return breaks.front() - 1.0;
    if (i == breaks.size()) return breaks.back() + 1.0;
    return 0.5 * (breaks[i - 1] + breaks[i]);
}

std::vector<double> merge_breaks(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool continuous_at(double b, const std::vector<double>& left, const std::vector<double>& right) {
    const double l = horner(left, b);
    const double r = horner(right, b);
    return std::abs(l - r) <= kContinuityTolerance * (1.0 + std::max(std::abs(l), std::abs(r)));
}

std::string poly_string(const std::vector<double>& c) {
    std::string s;
    for (std::size_t p = 0; p < c.size(); ++p) {
        if (c[p] == 0.0) continue;
        std::string term = format_number(std::abs(c[p]));
        if (p == 1) term += "*t";
        if (p > 1) term += "*t^" + std::to_string(p);
        if (s.empty()) {
            s = (c[p] < 0 ? "-" : "") + term;
        } else {
            s += (c[p] < 0 ? " - " : " + ") + term;
        }
    }
    return s.empty() ? "0" : s;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

TimeCoefficient::TimeCoefficient(double c) : pieces_{{c}} { normalize(); }

TimeCoefficient TimeCoefficient::polynomial(std::vector<double> powers) {
    TimeCoefficient r;
    r.pieces_ = {std::move(powers)};
    r.normalize();
    return r;
}

TimeCoefficient TimeCoefficient::piecewise(std::vector<double> breaks, std::vector<std::vector<double>> pieces) {
    if (pieces.size() != breaks.size() + 1) {
        throw std::invalid_argument("piecewise: need exactly one more piece than breakpoints");
    }
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        if (!std::isfinite(breaks[i])) throw std::invalid_argument("piecewise: non-finite breakpoint");
        if (i > 0 && !(breaks[i] > breaks[i - 1])) {
            throw std::invalid_argument("piecewise: breakpoints must be strictly increasing");
        }
        if (!continuous_at(breaks[i], pieces[i], pieces[i + 1])) {
            throw std::invalid_argument("piecewise: coefficient is discontinuous at t = " + format_number(breaks[i]));
        }
    }
    TimeCoefficient r;
    r.breaks_ = std::move(breaks);
    r.pieces_ = std::move(pieces);
    r.normalize();
    return r;
}

TimeCoefficient TimeCoefficient::splice(const std::vector<double>& breaks, const std::vector<TimeCoefficient>& parts) {
    if (parts.size() != breaks.size() + 1) {
        throw std::invalid_argument("piecewise: need exactly one more piece than breakpoints");
    }
    for (std::size_t i = 0; i < breaks.size(); ++i) {
        if (i > 0 && !(breaks[i] > breaks[i - 1])) {
            throw std::invalid_argument("piecewise: breakpoints must be strictly increasing");
        }
        const double l = parts[i](breaks[i]);
        const double r = parts[i + 1](breaks[i]);
        if (std::abs(l - r) > kContinuityTolerance * (1.0 + std::max(std::abs(l), std::abs(r)))) {
            throw std::invalid_argument("piecewise: coefficient is discontinuous at t = " + format_number(breaks[i]));
        }
    }
    std::vector<double> all = breaks;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const double lo = i == 0 ? -HUGE_VAL : breaks[i - 1];
        const double hi = i == breaks.size() ? HUGE_VAL : breaks[i];
        std::vector<double> inner;
        for (double b : parts[i].breaks_) {
            if (b > lo && b < hi) inner.push_back(b);
        }
        all = merge_breaks(all, inner);
    }
    TimeCoefficient r;
    r.breaks_ = all;
    r.pieces_.clear();
    for (std::size_t j = 0; j <= all.size(); ++j) {
        const double tau = representative(all, j);
        const std::size_t which = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), tau) - breaks.begin());
        r.pieces_.push_back(parts[which].piece_at(tau));
    }
    r.normalize();
    return r;
}

const std::vector<double>& TimeCoefficient::piece_at(double t) const {
    const auto i = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), t) - breaks_.begin());
    return pieces_[i];
}

double TimeCoefficient::operator()(double t) const { return horner(piece_at(t), t); }

bool TimeCoefficient::is_zero() const { return breaks_.empty() && pieces_.front().empty(); }

bool TimeCoefficient::is_constant() const { return breaks_.empty() && pieces_.front().size() <= 1; }

int TimeCoefficient::degree() const {
    int deg = -1;
    for (const auto& p : pieces_) deg = std::max(deg, static_cast<int>(p.size()) - 1);
    return deg;
}

TimeCoefficient TimeCoefficient::combine(const TimeCoefficient& a, const TimeCoefficient& b, const Op& op) {
    TimeCoefficient r;
    r.breaks_ = merge_breaks(a.breaks_, b.breaks_);
    r.pieces_.clear();
    for (std::size_t j = 0; j <= r.breaks_.size(); ++j) {
        const double tau = representative(r.breaks_, j);
        r.pieces_.push_back(op(a.piece_at(tau), b.piece_at(tau)));
    }
    r.normalize();
    return r;
}

void TimeCoefficient::normalize() {
    for (auto& p : pieces_) trim(p);
    std::vector<double> breaks;
    std::vector<std::vector<double>> pieces{pieces_.front()};
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
        if (pieces_[i + 1] == pieces.back()) continue;
        breaks.push_back(breaks_[i]);
        pieces.push_back(pieces_[i + 1]);
    }
    breaks_ = std::move(breaks);
    pieces_ = std::move(pieces);
}

TimeCoefficient& TimeCoefficient::operator+=(const TimeCoefficient& o) {
    *this = combine(*this, o, [](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> r(std::max(a.size(), b.size()), 0.0);
        for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
        for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
        return r;
    });
    return *this;
}

TimeCoefficient& TimeCoefficient::operator-=(const TimeCoefficient& o) { return *this += -o; }

TimeCoefficient& TimeCoefficient::operator*=(const TimeCoefficient& o) {
    *this = combine(*this, o, [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.empty() || b.empty()) return std::vector<double>{};
        std::vector<double> r(a.size() + b.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
        }
        return r;
    });
    return *this;
}

TimeCoefficient TimeCoefficient::operator-() const {
    TimeCoefficient r = *this;
    for (auto& p : r.pieces_) {
        for (double& c : p) c = -c;
    }
    return r;
}

std::string TimeCoefficient::to_string() const {
    if (breaks_.empty()) return poly_string(pieces_.front());
    std::string s = "piecewise(" + poly_string(pieces_.front());
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
        s += ", " + format_number(breaks_[i]) + ", " + poly_string(pieces_[i + 1]);
    }
    return s + ")";
}

TimeCoefficient TimeCoefficient::power_part(std::size_t power) const {
    TimeCoefficient r;
    r.breaks_ = breaks_;
    r.pieces_.clear();
    for (const auto& p : pieces_) r.pieces_.push_back({power < p.size() ? p[power] : 0.0});
    r.normalize();
    return r;
}

// ---------------------------------------------------------------------------

TimePolynomial::TimePolynomial(BasisPtr basis) : basis_(std::move(basis)), coeffs_(basis_->size()) {}

TimePolynomial TimePolynomial::constant(std::size_t d, const TimeCoefficient& c) {
    TimePolynomial p(enumerate_basis(d, 0));
    p.coeffs_[0] = c;
    return p;
}

TimePolynomial TimePolynomial::coordinate(std::size_t d, std::size_t i) {
    auto basis = enumerate_basis(d, 1);
    MultiIndex k(d);
    if (i >= d) throw std::invalid_argument("TimePolynomial::coordinate: index out of range");
    k[i] = 1;
    TimePolynomial p(basis);
    p.coeffs_[basis->index_of(k)] = 1.0;
    return p;
}

TimePolynomial TimePolynomial::from(const Polynomial& p) {
    TimePolynomial r(p.basis());
    for (std::size_t i = 0; i < r.coeffs_.size(); ++i) r.coeffs_[i] = p[i];
    return r;
}

TimeCoefficient TimePolynomial::coeff(const MultiIndex& k) const {
    const std::size_t i = basis_->index_of(k);
    return i < coeffs_.size() ? coeffs_[i] : TimeCoefficient{};
}

int TimePolynomial::degree() const {
    if (!basis_) return Polynomial::kZeroDegree;
    for (std::size_t i = coeffs_.size(); i-- > 0;) {
        if (!coeffs_[i].is_zero()) return (*basis_)[i].degree();
    }
    return Polynomial::kZeroDegree;
}

Polynomial TimePolynomial::at(double t) const {
    Polynomial p(basis_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) p[i] = coeffs_[i](t);
    return p;
}

std::vector<double> TimePolynomial::breaks() const {
    std::vector<double> out;
    for (const auto& c : coeffs_) out = merge_breaks(out, c.breaks());
    return out;
}

TimePolynomial TimePolynomial::on_degree(int m) const {
    if (m == basis_->max_degree()) return *this;
    TimePolynomial r(enumerate_basis(dim(), m));
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (coeffs_[i].is_zero()) continue;
        const std::size_t j = r.basis_->index_of((*basis_)[i]);
        if (j >= r.coeffs_.size()) {
            throw DegreeOverflow("polynomial of degree " + std::to_string(degree()) + " does not fit degree bound " +
                                 std::to_string(m));
        }
        r.coeffs_[j] = coeffs_[i];
    }
    return r;
}

TimePolynomial TimePolynomial::map(const std::function<TimeCoefficient(const TimeCoefficient&)>& f) const {
    TimePolynomial r = *this;
    for (auto& c : r.coeffs_) c = f(c);
    return r;
}

TimePolynomial& TimePolynomial::operator+=(const TimePolynomial& o) {
    if (o.dim() != dim()) throw std::invalid_argument("TimePolynomial: dimension mismatch");
    const int m = std::max(basis_->max_degree(), o.basis_->max_degree());
    *this = on_degree(m);
    const TimePolynomial rhs = o.on_degree(m);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
    return *this;
}

TimePolynomial& TimePolynomial::operator-=(const TimePolynomial& o) { return *this += -o; }

TimePolynomial TimePolynomial::operator-() const {
    return map([](const TimeCoefficient& c) { return -c; });
}

TimePolynomial operator*(const TimePolynomial& a, const TimePolynomial& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("TimePolynomial: dimension mismatch");
    const int m = std::max(0, std::max(a.degree(), 0) + std::max(b.degree(), 0));
    TimePolynomial r(enumerate_basis(a.dim(), m));
    const auto& ab = *a.basis_;
    const auto& bb = *b.basis_;
    for (std::size_t i = 0; i < ab.size(); ++i) {
        if (a.coeffs_[i].is_zero()) continue;
        for (std::size_t j = 0; j < bb.size(); ++j) {
            if (b.coeffs_[j].is_zero()) continue;
            r.coeffs_[r.basis_->index_of(ab[i] + bb[j])] += a.coeffs_[i] * b.coeffs_[j];
        }
    }
    return r;
}

TimePolynomial operator*(const TimeCoefficient& c, const TimePolynomial& p) {
    return p.map([&c](const TimeCoefficient& x) { return c * x; });
}

bool TimePolynomial::operator==(const TimePolynomial& o) const {
    if (dim() != o.dim()) return false;
    const int m = std::max(basis_->max_degree(), o.basis_->max_degree());
    return on_degree(m).coeffs_ == o.on_degree(m).coeffs_;
}

std::string TimePolynomial::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        const TimeCoefficient& c = coeffs_[i];
        if (c.is_zero()) continue;
        const MultiIndex& k = (*basis_)[i];
        std::string mono;
        for (std::size_t j = 0; j < k.size(); ++j) {
            if (k[j] == 0) continue;
            if (!mono.empty()) mono += '*';
            mono += dim() == 1 ? std::string("x") : "x" + std::to_string(j + 1);
            if (k[j] > 1) mono += "^" + std::to_string(k[j]);
        }
        std::string term;
        if (mono.empty()) {
            term = "(" + c.to_string() + ")";
        } else if (c == TimeCoefficient(1.0)) {
            term = mono;
        } else {
            term = "(" + c.to_string() + ")*" + mono;
        }
        s += (s.empty() ? "" : " + ") + term;
    }
    return s.empty() ? "0" : s;
}

}  // namespace polymag
