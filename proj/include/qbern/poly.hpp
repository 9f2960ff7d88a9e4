#pragma once

/* Exact polynomial arithmetic over the integers, used to certify the
 * q-binomial theorem
 *
 *   prod_{j=0}^{n-1} (1 + q^j x) = sum_{j=0}^{n} [n j]_q q^{j(j-1)/2} x^j
 *
 * with no floating point involved.  PolyQ is a univariate polynomial in q,
 * PolyQX a bivariate polynomial in (q, x); coefficients are arbitrary
 * precision integers.
 */

#include <map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "core.hpp"
#include "errors.hpp"

namespace qbern {

using BigInt = boost::multiprecision::cpp_int;

/* Exponents are capped so a typo cannot ask for astronomically large exact
 * objects; everything needed here is well below the cap. */
inline constexpr int kExactDegreeCap = 64;

class PolyQ {
public:
    PolyQ() = default;

    static PolyQ constant(BigInt c) {
        PolyQ r;
        if (c != 0) r.c_[0] = std::move(c);
        return r;
    }

    static PolyQ monomial(int deg, BigInt c = 1) {
        PolyQ r;
        if (c != 0) r.c_[deg] = std::move(c);
        return r;
    }

    const std::map<int, BigInt>& coeffs() const noexcept { return c_; }

    BigInt coeff(int deg) const {
        auto it = c_.find(deg);
        return it == c_.end() ? BigInt(0) : it->second;
    }

    int degree() const noexcept { return c_.empty() ? -1 : c_.rbegin()->first; }
    bool is_zero() const noexcept { return c_.empty(); }

    friend bool operator==(const PolyQ& a, const PolyQ& b) { return a.c_ == b.c_; }

    PolyQ& operator+=(const PolyQ& o) {
        for (const auto& [d, c] : o.c_) add_term(d, c);
        return *this;
    }

    friend PolyQ operator+(PolyQ a, const PolyQ& b) { return a += b; }

    friend PolyQ operator*(const PolyQ& a, const PolyQ& b) {
        PolyQ r;
        for (const auto& [da, ca] : a.c_)
            for (const auto& [db, cb] : b.c_) r.add_term(da + db, ca * cb);
        return r;
    }

    /* Exact quotient; throws if *this is not divisible by d.  d must be
     * nonzero with leading coefficient dividing every step (always true for
     * the monic divisors used here). */
    PolyQ divide_exact(const PolyQ& d) const {
        if (d.is_zero()) throw Error("PolyQ: division by zero polynomial");
        PolyQ rem = *this, quot;
        const int dd = d.degree();
        const BigInt& lead = d.c_.rbegin()->second;
        while (!rem.is_zero() && rem.degree() >= dd) {
            const int shift = rem.degree() - dd;
            BigInt factor = rem.c_.rbegin()->second / lead;
            if (factor * lead != rem.c_.rbegin()->second)
                throw Error("PolyQ: inexact division (leading coefficient)");
            quot.add_term(shift, factor);
            for (const auto& [deg, c] : d.c_) rem.add_term(deg + shift, -factor * c);
        }
        if (!rem.is_zero()) throw Error("PolyQ: inexact division (nonzero remainder)");
        return quot;
    }

    double eval(double q) const {
        double s = 0.0;
        for (const auto& [d, c] : c_) s += c.convert_to<double>() * std::pow(q, d);
        return s;
    }

    void add_term(int deg, const BigInt& c) {
        if (c == 0) return;
        auto [it, inserted] = c_.try_emplace(deg, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) c_.erase(it);
        }
    }

private:
    std::map<int, BigInt> c_;
};

class PolyQX {
public:
    PolyQX() = default;

    static PolyQX one() {
        PolyQX r;
        r.c_[{0, 0}] = 1;
        return r;
    }

    const std::map<std::pair<int, int>, BigInt>& coeffs() const noexcept { return c_; }

    BigInt coeff(int qdeg, int xdeg) const {
        auto it = c_.find({qdeg, xdeg});
        return it == c_.end() ? BigInt(0) : it->second;
    }

    int x_degree() const noexcept {
        int d = -1;
        for (const auto& [k, c] : c_) d = std::max(d, k.second);
        return d;
    }

    bool is_zero() const noexcept { return c_.empty(); }

    friend bool operator==(const PolyQX& a, const PolyQX& b) { return a.c_ == b.c_; }

    PolyQX& operator+=(const PolyQX& o) {
        for (const auto& [k, c] : o.c_) add_term(k.first, k.second, c);
        return *this;
    }

    friend PolyQX operator-(PolyQX a, const PolyQX& b) {
        for (const auto& [k, c] : b.c_) a.add_term(k.first, k.second, -c);
        return a;
    }

    /* Multiply in place by (1 + q^j x). */
    PolyQX& mul_one_plus_qj_x(int j) {
        PolyQX shifted;
        for (const auto& [k, c] : c_) shifted.c_[{k.first + j, k.second + 1}] = c;
        return *this += shifted;
    }

    void add_term(int qdeg, int xdeg, const BigInt& c) {
        if (c == 0) return;
        auto [it, inserted] = c_.try_emplace(std::pair{qdeg, xdeg}, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) c_.erase(it);
        }
    }

    double eval(double q, double x) const {
        double s = 0.0;
        for (const auto& [k, c] : c_)
            s += c.convert_to<double>() * std::pow(q, k.first) * std::pow(x, k.second);
        return s;
    }

private:
    std::map<std::pair<int, int>, BigInt> c_;
};

/* [n]_q as an exact polynomial: 1 + q + ... + q^{n-1}. */
inline PolyQ q_integer_poly(int n) {
    if (n < 0 || n > kExactDegreeCap) throw DomainError("q_integer_poly: n out of range");
    PolyQ r;
    for (int k = 0; k < n; ++k) r.add_term(k, 1);
    return r;
}

/* [n]_q! as an exact polynomial. */
inline PolyQ q_factorial_poly(int n) {
    if (n < 0 || n > kExactDegreeCap) throw DomainError("q_factorial_poly: n out of range");
    PolyQ r = PolyQ::constant(1);
    for (int k = 1; k <= n; ++k) r = r * q_integer_poly(k);
    return r;
}

inline void check_gauss_indices(int n, int j) {
    if (n < 0 || n > kExactDegreeCap)
        throw DomainError("gaussian binomial: n out of [0, 64]");
    if (j < 0 || j > n) throw DomainError("gaussian binomial: need 0 <= j <= n");
}

/* Full row { [n 0]_q, ..., [n n]_q } built by the q-Pascal recurrence
 *   [n j] = [n-1 j-1] + q^j [n-1 j].
 * Exact polynomials in q with nonnegative integer coefficients. */
inline std::vector<PolyQ> gaussian_binomial_row(int n) {
    if (n < 0 || n > kExactDegreeCap)
        throw DomainError("gaussian_binomial_row: n out of [0, 64]");
    std::vector<PolyQ> row{PolyQ::constant(1)};
    for (int r = 1; r <= n; ++r) {
        std::vector<PolyQ> next(static_cast<size_t>(r) + 1);
        next[0] = PolyQ::constant(1);
        next[static_cast<size_t>(r)] = PolyQ::constant(1);
        for (int i = 1; i < r; ++i)
            next[static_cast<size_t>(i)] =
                row[static_cast<size_t>(i) - 1] + PolyQ::monomial(i) * row[static_cast<size_t>(i)];
        row = std::move(next);
    }
    return row;
}

inline PolyQ gaussian_binomial_poly(int n, int j) {
    check_gauss_indices(n, j);
    return gaussian_binomial_row(n)[static_cast<size_t>(j)];
}

/* Same object built the other way: [n]_q! / ([j]_q! [n-j]_q!) by exact
 * division.  Kept as an independent route so the two constructions can be
 * cross-checked; an inexact division here means a real bug. */
inline PolyQ gaussian_binomial_from_factorials(int n, int j) {
    check_gauss_indices(n, j);
    return q_factorial_poly(n).divide_exact(q_factorial_poly(j) * q_factorial_poly(n - j));
}

/* prod_{j=0}^{n-1} (1 + q^j x) as an exact bivariate polynomial. */
inline PolyQX pochhammer_poly(int n) {
    if (n < 0 || n > kExactDegreeCap) throw DomainError("pochhammer_poly: n out of range");
    PolyQX r = PolyQX::one();
    for (int j = 0; j < n; ++j) r.mul_one_plus_qj_x(j);
    return r;
}

/* Exact statement of the q-binomial theorem for one n: expand the product
 * and compare, coefficient by coefficient, with
 * sum_j [n j]_q q^{j(j-1)/2} x^j.  True iff they agree exactly. */
inline bool gauss_identity_holds(int n) {
    if (n < 0 || n > kExactDegreeCap) throw DomainError("gauss_identity_holds: n out of range");
    const std::vector<PolyQ> row = gaussian_binomial_row(n);
    PolyQX rhs;
    for (int j = 0; j <= n; ++j) {
        const int tri = j * (j - 1) / 2;
        for (const auto& [deg, c] : row[static_cast<size_t>(j)].coeffs())
            rhs.add_term(deg + tri, j, c);
    }
    return pochhammer_poly(n) == rhs;
}

} // namespace qbern
