#pragma once

/* q-Pochhammer products, finite and infinite:
 *
 *   (x - a)_q^n    = prod_{j=0}^{n-1} (x - q^j a)
 *   (x - a)_q^{-n} = 1 / (x - q^{-n} a)_q^n
 *   (1 + x)_q^inf  = prod_{j=0}^{inf} (1 + q^j x)          q in (0,1), x > -1
 *   (1 + x)_q^a    = (1 + x)_q^inf / (1 + q^a x)_q^inf     real exponent a
 *
 * Infinite products are accumulated in the log domain with a certified
 * geometric tail bound: with t = q^N |x| < 1,
 *
 *   | sum_{j>=N} log(1 + q^j x) |  <=  sum_{j>=N} q^j|x| / (1 - q^j|x|)
 *                                  <=  t / ((1-q)(1-t)),
 *
 * and accumulation stops at the first N whose bound is <= eps_tail.  The
 * bound is reported as the relative tail error of the truncated value.
 */

#include <cmath>
#include <limits>

#include "core.hpp"
#include "errors.hpp"

namespace qbern {

/* A truncated product value with its certified relative tail bound. */
struct TailBoundedValue {
    double value = 0.0;
    double tail_bound = 0.0;
    long terms_used = 0;
};

namespace detail {

struct LogProduct {
    double log_value = 0.0;
    double tail_bound = 0.0;
    long terms_used = 0;
};

/* log of (1 + x)_q^inf with the tail bound above.  x = -1 hits an exactly
 * zero factor; callers special-case it before coming here. */
inline LogProduct log_one_plus_inf(double x, const QParams& p, const TruncationPolicy& pol) {
    pol.validate();
    if (!(x > -1.0)) throw DomainError("one_plus_inf: need x > -1");
    const double q = p.q();
    double log_sum = 0.0;
    double qj = 1.0; // q^j, refreshed periodically to stop drift on long runs
    for (long j = 0;; ++j) {
        const double t = qj * std::fabs(x);
        double bound = std::numeric_limits<double>::infinity();
        if (t < 1.0) bound = t / ((1.0 - q) * (1.0 - t));
        if (bound <= pol.eps_tail) return {log_sum, bound, j};
        if (j >= pol.max_terms)
            throw TruncationBudgetExceeded(
                "one_plus_inf: tail bound " + std::to_string(bound) + " > eps_tail after " +
                    std::to_string(j) + " factors",
                bound, j);
        log_sum += std::log1p(qj * x);
        qj = (j % 4096 == 4095) ? std::exp(static_cast<double>(j + 1) * std::log(q)) : qj * q;
    }
}

} // namespace detail

/* (x - a)_q^n, finite product, n >= 0. */
inline double pochhammer_fin(double x, double a, int n, const QParams& p) {
    if (n < 0) throw DomainError("pochhammer_fin: n must be >= 0 (use pochhammer_neg)");
    double prod = 1.0, qj = 1.0;
    for (int j = 0; j < n; ++j) {
        prod *= x - qj * a;
        qj *= p.q();
    }
    return prod;
}

/* (x - a)_q^{-n} = 1/(x - q^{-n} a)_q^n, n >= 1.  Throws SingularPoint when
 * a factor of the underlying finite product vanishes. */
inline double pochhammer_neg(double x, double a, int n, const QParams& p) {
    if (n < 1) throw DomainError("pochhammer_neg: n must be >= 1");
    const double ashift = a * std::pow(p.q(), -n);
    double prod = 1.0, qj = 1.0;
    for (int j = 0; j < n; ++j) {
        const double factor = x - qj * ashift;
        if (std::fabs(factor) < 1e-300)
            throw SingularPoint("pochhammer_neg: factor x - q^{" + std::to_string(j - n) +
                                    "} a vanishes",
                                j);
        prod *= factor;
        qj *= p.q();
    }
    return 1.0 / prod;
}

/* prod_{j=0}^{n-1} (1 + q^j x): the integer-exponent case of (1+x)_q^n. */
inline double one_plus_fin(double x, int n, const QParams& p) {
    return pochhammer_fin(1.0, -x, n, p);
}

/* (1 + x)_q^k for any integer k (reciprocal product for k < 0). */
inline double one_plus_int(double x, int k, const QParams& p) {
    if (k >= 0) return one_plus_fin(x, k, p);
    return pochhammer_neg(1.0, -x, -k, p);
}

/* (1 + x)_q^inf for x > -1 (exactly 0 at x = -1). */
inline TailBoundedValue one_plus_inf(double x, const QParams& p,
                                     const TruncationPolicy& pol = {}) {
    if (x == -1.0) return {0.0, 0.0, 1};
    const auto lp = detail::log_one_plus_inf(x, p, pol);
    return {std::exp(lp.log_value), lp.tail_bound, lp.terms_used};
}

/* (1 + x)_q^a for real a, as the ratio of two infinite products.  Formed in
 * the log domain so the ratio survives regimes (q near 1) where either
 * product alone would overflow.  tail_bound adds both relative bounds. */
inline TailBoundedValue one_plus_real(double x, double alpha, const QParams& p,
                                      const TruncationPolicy& pol = {}) {
    if (!(x > -1.0)) throw DomainError("one_plus_real: need x > -1");
    const double shifted = std::pow(p.q(), alpha) * x;
    if (!(shifted > -1.0))
        throw DomainError("one_plus_real: need q^alpha x > -1 for the denominator");
    const auto num = detail::log_one_plus_inf(x, p, pol);
    const auto den = detail::log_one_plus_inf(shifted, p, pol);
    return {std::exp(num.log_value - den.log_value), num.tail_bound + den.tail_bound,
            num.terms_used + den.terms_used};
}

/* Symmetric relative residual, the yardstick for every identity check. */
inline double rel_residual(double a, double b) {
    if (a == b) return 0.0;
    return std::fabs(a - b) / (std::fabs(a) + std::fabs(b));
}

/* Residual of the exponent-addition rule
 *   (1+x)_q^alpha = (1+x)_q^{alpha+beta} / (1+q^alpha x)_q^beta.
 * Zero in exact arithmetic for all admissible (x, alpha, beta). */
inline double exponent_addition_residual(double x, double alpha, double beta,
                                         const QParams& p, const TruncationPolicy& pol = {}) {
    const double lhs = one_plus_real(x, alpha, p, pol).value;
    const double rhs = one_plus_real(x, alpha + beta, p, pol).value /
                       one_plus_real(std::pow(p.q(), alpha) * x, beta, p, pol).value;
    return rel_residual(lhs, rhs);
}

} // namespace qbern
