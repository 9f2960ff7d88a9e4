#pragma once

/* Scalar q-calculus building blocks:
 *
 *   [alpha]_q = (q^alpha - 1)/(q - 1)          real exponent
 *   [n]_q     = 1 + q + ... + q^{n-1}          integer case, same value
 *   [n]_q!    = [1]_q [2]_q ... [n]_q
 *   [n j]_q   = [n]_q! / ([j]_q! [n-j]_q!)     Gaussian binomial
 *   [inf j]_q = 1 / ((1-q)(1-q^2)...(1-q^j))   n -> infinity limit
 *
 * Everything is evaluated in double precision for a fixed base q held by
 * QParams.  Empty sums/products follow the usual conventions: [0]_q = 0,
 * [0]_q! = 1, [n 0]_q = 1.
 */

#include <cmath>
#include <string>

#include "errors.hpp"

namespace qbern {

/* The base q of every evaluation.  Values of q at or beyond the endpoints of
 * (0,1) make the infinite products meaningless or numerically hopeless, so
 * construction is range-checked.  The default window [1e-6, 1-1e-6] can be
 * widened or narrowed for limit studies. */
class QParams {
public:
    struct Bounds {
        double lo;
        double hi;
        constexpr Bounds() : lo(1e-6), hi(1.0 - 1e-6) {}
        constexpr Bounds(double lo_, double hi_) : lo(lo_), hi(hi_) {}
    };

    explicit QParams(double q, Bounds bounds = Bounds{}) : q_(q), bounds_(bounds) {
        if (!(bounds_.lo > 0.0) || !(bounds_.hi < 1.0) || !(bounds_.lo <= bounds_.hi))
            throw DomainError("QParams: bounds must satisfy 0 < lo <= hi < 1");
        if (!(q >= bounds_.lo) || !(q <= bounds_.hi))
            throw DomainError("QParams: q = " + std::to_string(q) +
                              " outside [" + std::to_string(bounds_.lo) + ", " +
                              std::to_string(bounds_.hi) + "]");
    }

    double q() const noexcept { return q_; }
    const Bounds& bounds() const noexcept { return bounds_; }

private:
    double q_;
    Bounds bounds_;
};

/* Budget for every truncated infinite product or series: eps_tail is the
 * certified relative tail tolerance, max_terms the hard iteration cap. */
struct TruncationPolicy {
    double eps_tail = 1e-14;
    long max_terms = 100000;

    void validate() const {
        if (!(eps_tail > 0.0))
            throw DomainError("TruncationPolicy: eps_tail must be > 0");
        if (max_terms < 1)
            throw DomainError("TruncationPolicy: max_terms must be >= 1");
    }
};

/* [alpha]_q for any real alpha.  expm1 keeps the numerator accurate when
 * alpha*log(q) is small (q near 1). */
inline double q_number(double alpha, const QParams& p) {
    return std::expm1(alpha * std::log(p.q())) / (p.q() - 1.0);
}

/* [n]_q by direct summation; must agree with q_number(n) to rounding. */
inline double q_integer(int n, const QParams& p) {
    if (n < 0) throw DomainError("q_integer: n must be >= 0");
    double sum = 0.0, qk = 1.0;
    for (int k = 0; k < n; ++k) {
        sum += qk;
        qk *= p.q();
    }
    return sum;
}

/* [n]_q! */
inline double q_factorial(int n, const QParams& p) {
    if (n < 0) throw DomainError("q_factorial: n must be >= 0");
    double prod = 1.0;
    for (int k = 1; k <= n; ++k) prod *= q_integer(k, p);
    return prod;
}

/* Gaussian binomial [n j]_q; 0 for j > n.  The factorial ratio is formed as
 * prod_{k=1..j} [n-j+k]_q/[k]_q, which stays in range for n in the hundreds
 * where the bare factorials would overflow. */
inline double q_binomial(int n, int j, const QParams& p) {
    if (n < 0 || j < 0) throw DomainError("q_binomial: indices must be >= 0");
    if (j > n) return 0.0;
    double prod = 1.0;
    for (int k = 1; k <= j; ++k)
        prod *= q_integer(n - j + k, p) / q_integer(k, p);
    return prod;
}

/* lim_{n->inf} [n j]_q = 1/((1-q)(1-q^2)...(1-q^j)). */
inline double q_binomial_limit(int j, const QParams& p) {
    if (j < 0) throw DomainError("q_binomial_limit: j must be >= 0");
    double prod = 1.0, qk = p.q();
    for (int k = 1; k <= j; ++k) {
        prod *= 1.0 - qk;
        qk *= p.q();
    }
    return 1.0 / prod;
}

} // namespace qbern
