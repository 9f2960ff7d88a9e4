#pragma once

/* Power-series side of the q-calculus:
 *
 *   Euler:   prod_{j>=0} (1 + q^j x)  = sum_{j>=0} q^{j(j-1)/2} x^j / ((1-q)...(1-q^j))
 *            prod_{j>=0} (1-q^j x)^-1 = sum_{j>=0} x^j / ((1-q)...(1-q^j)),   |x| < 1
 *
 *   e_q(x) = sum x^j / [j]_q!                    |x| < 1/(1-q)
 *   E_q(x) = sum q^{j(j-1)/2} x^j / [j]_q!       entire
 *
 * For x < 0 these are alternating sums whose intermediate terms can exceed
 * the result by many orders of magnitude (condition number ~1e9 on the
 * required cross-check grid), so terms and partial sums are carried in
 * 113-bit floats internally; the public API stays double.
 *
 * Stopping rule: a term is "small" when |term| <= eps_tail * |partial sum|;
 * summation stops after three consecutive small terms (terms can grow before
 * they decay, so one small term proves nothing).
 */

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "core.hpp"
#include "errors.hpp"
#include "pochhammer.hpp"

namespace qbern {

namespace detail {

using quad = boost::multiprecision::cpp_bin_float_quad;

/* Sum 1 + sum_j prod_{k<=j} ratio(k) with the three-consecutive-small-terms
 * rule; ratio(j) = term_j / term_{j-1}, j >= 1. */
struct SeriesSum {
    quad value;
    double last_term_ratio;
    long terms_used;
};

template <typename RatioFn>
inline SeriesSum sum_series(RatioFn ratio, const TruncationPolicy& pol, const char* what) {
    pol.validate();
    quad sum = 1, term = 1;
    double rel = 1.0;
    int consecutive_small = 0;
    for (long j = 1;; ++j) {
        if (j > pol.max_terms)
            throw TruncationBudgetExceeded(std::string(what) + ": no three consecutive terms below eps_tail within max_terms",
                                           rel, j - 1);
        term *= ratio(j);
        sum += term;
        using boost::multiprecision::abs;
        rel = (sum == 0) ? std::numeric_limits<double>::infinity()
                         : (abs(term) / abs(sum)).template convert_to<double>();
        if (rel <= pol.eps_tail) {
            if (++consecutive_small >= 3) return {sum, rel, j};
        } else {
            consecutive_small = 0;
        }
    }
}

} // namespace detail

/* A truncated series value; last_term_ratio = |last term| / |sum|. */
struct SeriesValue {
    double value = 0.0;
    double last_term_ratio = 0.0;
    long terms_used = 0;
};

/* sum q^{j(j-1)/2} x^j / ((1-q)...(1-q^j)); equals (1+x)_q^inf for all x. */
inline SeriesValue euler_series_E(double x, const QParams& p, const TruncationPolicy& pol = {}) {
    const detail::quad qq = p.q(), xx = x;
    detail::quad qpow = 1; // q^{j-1}
    auto r = detail::sum_series(
        [&](long j) {
            if (j > 1) qpow *= qq;
            return qpow * xx / (1 - boost::multiprecision::pow(qq, static_cast<int>(j)));
        },
        pol, "euler_series_E");
    return {r.value.convert_to<double>(), r.last_term_ratio, r.terms_used};
}

/* sum x^j / ((1-q)...(1-q^j)); equals 1/(1-x)_q^inf, needs |x| < 1. */
inline SeriesValue euler_series_e(double x, const QParams& p, const TruncationPolicy& pol = {}) {
    if (!(std::fabs(x) < 1.0)) throw DomainError("euler_series_e: need |x| < 1");
    const detail::quad qq = p.q(), xx = x;
    auto r = detail::sum_series(
        [&](long j) { return xx / (1 - boost::multiprecision::pow(qq, static_cast<int>(j))); },
        pol, "euler_series_e");
    return {r.value.convert_to<double>(), r.last_term_ratio, r.terms_used};
}

/* e_q(x) = sum x^j/[j]_q!, radius of convergence 1/(1-q). */
inline SeriesValue e_q(double x, const QParams& p, const TruncationPolicy& pol = {}) {
    if (!(std::fabs(x) < 1.0 / (1.0 - p.q())))
        throw DomainError("e_q: need |x| < 1/(1-q)");
    const detail::quad qq = p.q(), xx = x;
    auto r = detail::sum_series(
        [&](long j) {
            const detail::quad qint =
                (1 - boost::multiprecision::pow(qq, static_cast<int>(j))) / (1 - qq);
            return xx / qint;
        },
        pol, "e_q");
    return {r.value.convert_to<double>(), r.last_term_ratio, r.terms_used};
}

/* E_q(x) = sum q^{j(j-1)/2} x^j/[j]_q!, entire; the product form
 * (1+(1-q)x)_q^inf needs (1-q)x > -1 but the series does not. */
inline SeriesValue E_q(double x, const QParams& p, const TruncationPolicy& pol = {}) {
    const detail::quad qq = p.q(), xx = x;
    detail::quad qpow = 1; // q^{j-1}
    auto r = detail::sum_series(
        [&](long j) {
            if (j > 1) qpow *= qq;
            const detail::quad qint =
                (1 - boost::multiprecision::pow(qq, static_cast<int>(j))) / (1 - qq);
            return qpow * xx / qint;
        },
        pol, "E_q");
    return {r.value.convert_to<double>(), r.last_term_ratio, r.terms_used};
}

/* |E_q(-x) e_q(x) - 1|: the two q-exponentials are reciprocal at mirrored
 * arguments.  Needs |x| strictly inside e_q's radius. */
inline double exp_inverse_residual(double x, const QParams& p, const TruncationPolicy& pol = {}) {
    return std::fabs(E_q(-x, p, pol).value * e_q(x, p, pol).value - 1.0);
}

/* Residual of e-with-base-1/q against E_q.  The 1/q path computes
 * [j]_{1/q} = 1 + r [j-1]_{1/q}, r = 1/q, directly (its own convergence
 * argument: [j]_{1/q} grows like r^{j-1}, so the series is entire), rather
 * than simplifying algebraically back to base-q quantities, so this really
 * crosses two distinct code paths. */
inline double e_recip_identity_residual(double x, const QParams& p,
                                        const TruncationPolicy& pol = {}) {
    const detail::quad r = detail::quad(1) / detail::quad(p.q());
    const detail::quad xx = x;
    detail::quad qint_r = 0; // [j]_{1/q}
    auto s = detail::sum_series(
        [&](long) {
            qint_r = 1 + r * qint_r;
            return xx / qint_r;
        },
        pol, "e_recip_identity_residual");
    return rel_residual(s.value.convert_to<double>(), E_q(x, p, pol).value);
}

/* A witness that e_q(x) e_q(y) != e_q(x+y) in general. */
struct NonadditivityWitness {
    double x = 0.0;
    double y = 0.0;
    double gap = 0.0; // |e_q(x) e_q(y) - e_q(x+y)|
};

/* Seeded search for a nonadditivity witness with gap > 1e-3.  Samples are
 * drawn inside the convergence domain (|x|, |y|, |x+y| all < 1/(1-q)).
 * Throws WitnessNotFound if the budget runs out. */
inline NonadditivityWitness nonadditivity_witness(const QParams& p, const TruncationPolicy& pol,
                                                  std::uint64_t seed, long budget = 1000) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const double r = 0.45 / (1.0 - p.q());
    for (long i = 0; i < budget; ++i) {
        const double x = (2.0 * unit() - 1.0) * r;
        const double y = (2.0 * unit() - 1.0) * r;
        const double gap =
            std::fabs(e_q(x, p, pol).value * e_q(y, p, pol).value - e_q(x + y, p, pol).value);
        if (gap > 1e-3) return {x, y, gap};
    }
    throw WitnessNotFound("nonadditivity_witness: no gap > 1e-3 within budget");
}

/* Heine's q-binomial series diagnostic.  The left side is
 *   1 / prod_{j=0}^{n-1} (1 - q^j x),  |x| < 1.
 * residual_standard compares against the standard expansion
 *   sum_{j>=0} [n+j-1 j]_q x^j
 * (terms by the exact ratio recurrence T_j = T_{j-1} x (1-q^{n+j-1})/(1-q^j)),
 * residual_printed against the variant sometimes printed with [n j]_q
 * coefficients, which terminates at j = n since [n j]_q = 0 for j > n.
 * Both residuals are reported; nothing is corrected silently. */
struct HeineResiduals {
    double residual_printed = 0.0;
    double residual_standard = 0.0;
};

inline HeineResiduals heine_diagnostic(double x, int n, const QParams& p,
                                       const TruncationPolicy& pol = {}) {
    if (n < 1) throw DomainError("heine_diagnostic: need n >= 1");
    if (!(std::fabs(x) < 1.0)) throw DomainError("heine_diagnostic: need |x| < 1");
    const double lhs = 1.0 / pochhammer_fin(1.0, x, n, p);

    double printed = 0.0;
    for (int j = 0; j <= n; ++j) printed += q_binomial(n, j, p) * std::pow(x, j);

    const detail::quad qq = p.q(), xx = x;
    auto s = detail::sum_series(
        [&](long j) {
            return xx * (1 - boost::multiprecision::pow(qq, static_cast<int>(n + j - 1))) /
                   (1 - boost::multiprecision::pow(qq, static_cast<int>(j)));
        },
        pol, "heine_diagnostic");

    return {rel_residual(lhs, printed), rel_residual(lhs, s.value.convert_to<double>())};
}

} // namespace qbern
