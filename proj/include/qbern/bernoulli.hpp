#pragma once

/* q-Bernoulli inequalities as certified margins.
 *
 * Every margin is sign-normalized so that value >= 0 means "the inequality
 * holds here": forms whose real exponent alpha lies in (0,1) have their sense
 * flipped (the classical Bernoulli flip), alpha >= 1 keeps the natural sense.
 * err is a conservative evaluation-error bound combining certified product
 * tails with floating-point slack, so
 *
 *   value >= -err   : certified "holds (within evaluation error)"
 *   value <  -err   : certified violation
 *
 * The q-hat estimator scans a descending q-grid for the highest certified
 * sign change and refines it by bisection; the counterexample search samples
 * a parameter box with a seeded generator.  Both treat points that exhaust
 * the truncation budget as inconclusive, never as violations.
 */

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "derivative.hpp"
#include "errors.hpp"
#include "pochhammer.hpp"
#include "series.hpp"

namespace qbern {

struct Margin {
    double value = 0.0; // >= 0 iff the (sign-normalized) inequality holds
    double err = 0.0;   // evaluation-error bound on value

    bool certified_nonneg() const noexcept { return value >= -err; }
    bool certified_violation() const noexcept { return value < -err; }
};

namespace detail {

inline constexpr double kEps = 2.220446049250313e-16; // 2^-52

/* Floating slack for a value assembled from ~count rounded operations. */
inline double fp_slack(double magnitude, double count) { return kEps * count * magnitude; }

inline Margin sign_normalize(double raw, double err, double alpha) {
    // alpha >= 1: natural sense; 0 < alpha < 1: flipped sense.
    return {alpha >= 1.0 ? raw : -raw, err};
}

} // namespace detail

/* (1+x)_q^n >= 1 + [n]_q x for integer n >= 1, x > -1 (holds for every q). */
inline Margin margin_thm1(double x, int n, const QParams& p) {
    if (!(x > -1.0)) throw DomainError("margin_thm1: need x > -1");
    if (n < 1) throw DomainError("margin_thm1: need n >= 1");
    const double lhs = one_plus_fin(x, n, p);
    const double rhs = 1.0 + q_integer(n, p) * x;
    return {lhs - rhs, detail::fp_slack(std::fabs(lhs) + std::fabs(rhs) + 1.0, n + 4.0)};
}

/* Same inequality written for x = -y, 0 < y < 1: (1-y)_q^n >= 1 - [n]_q y. */
inline Margin margin_rem2(double y, int n, const QParams& p) {
    if (!(y > 0.0) || !(y < 1.0)) throw DomainError("margin_rem2: need 0 < y < 1");
    return margin_thm1(-y, n, p);
}

/* (1+x)_q^{m+n} >= (1 + [m]_q x)(1 + q^m x)_q^n for m >= 1 and integer n
 * (negative n via the reciprocal product; SingularPoint propagates). */
inline Margin margin_cor1(double x, int m, int n, const QParams& p) {
    if (!(x > -1.0)) throw DomainError("margin_cor1: need x > -1");
    if (m < 1) throw DomainError("margin_cor1: need m >= 1");
    const double lhs = one_plus_int(x, m + n, p);
    const double rhs = (1.0 + q_integer(m, p) * x) * one_plus_int(std::pow(p.q(), m) * x, n, p);
    return {lhs - rhs,
            detail::fp_slack(std::fabs(lhs) + std::fabs(rhs) + 1.0, m + std::abs(n) + 6.0)};
}

/* (1+x)_q^alpha vs 1 + [alpha]_q x for real alpha > 0, x >= 0:
 * ">=" when alpha >= 1, "<=" when 0 < alpha < 1 (normalized here). */
inline Margin margin_thm2(double x, double alpha, const QParams& p,
                          const TruncationPolicy& pol = {}) {
    // Evaluable on all of x > -1; the unconditional guarantee only covers
    // x >= 0 (see in_guaranteed_domain), but the q-hat scan needs the margin
    // on (-1, 0) too.
    if (!(x > -1.0)) throw DomainError("margin_thm2: need x > -1");
    if (!(alpha > 0.0)) throw DomainError("margin_thm2: need alpha > 0");
    const TailBoundedValue lhs = one_plus_real(x, alpha, p, pol);
    const double rhs = 1.0 + q_number(alpha, p) * x;
    const double err = std::fabs(lhs.value) * (lhs.tail_bound + 32.0 * detail::kEps) +
                       detail::fp_slack(std::fabs(rhs) + 1.0, 8.0);
    return detail::sign_normalize(lhs.value - rhs, err, alpha);
}

/* (1+x)_q^{alpha+beta} vs (1 + [alpha]_q x)(1 + q^alpha x)_q^beta. */
inline Margin margin_prop1(double x, double alpha, double beta, const QParams& p,
                           const TruncationPolicy& pol = {}) {
    if (!(x > -1.0)) throw DomainError("margin_prop1: need x > -1");
    if (!(alpha > 0.0)) throw DomainError("margin_prop1: need alpha > 0");
    const TailBoundedValue lhs = one_plus_real(x, alpha + beta, p, pol);
    const TailBoundedValue tail = one_plus_real(std::pow(p.q(), alpha) * x, beta, p, pol);
    const double rhs = (1.0 + q_number(alpha, p) * x) * tail.value;
    const double err = std::fabs(lhs.value) * (lhs.tail_bound + 32.0 * detail::kEps) +
                       std::fabs(rhs) * (tail.tail_bound + 32.0 * detail::kEps) +
                       detail::fp_slack(std::fabs(rhs) + 1.0, 8.0);
    return detail::sign_normalize(lhs.value - rhs, err, alpha);
}

/* (1+x)_q^inf vs (1 + [alpha]_q x)(1 + q^alpha x)_q^beta (1 + q^{alpha+beta} x)_q^inf. */
inline Margin margin_cor6(double x, double alpha, double beta, const QParams& p,
                          const TruncationPolicy& pol = {}) {
    if (!(x > -1.0)) throw DomainError("margin_cor6: need x > -1");
    if (!(alpha > 0.0)) throw DomainError("margin_cor6: need alpha > 0");
    if (!(std::pow(p.q(), alpha + beta) * x > -1.0))
        throw DomainError("margin_cor6: need q^{alpha+beta} x > -1");
    const TailBoundedValue lhs = one_plus_inf(x, p, pol);
    const TailBoundedValue mid = one_plus_real(std::pow(p.q(), alpha) * x, beta, p, pol);
    const TailBoundedValue inf = one_plus_inf(std::pow(p.q(), alpha + beta) * x, p, pol);
    const double rhs = (1.0 + q_number(alpha, p) * x) * mid.value * inf.value;
    const double err =
        std::fabs(lhs.value) * (lhs.tail_bound + 32.0 * detail::kEps) +
        std::fabs(rhs) * (mid.tail_bound + inf.tail_bound + 64.0 * detail::kEps) +
        detail::fp_slack(std::fabs(rhs) + 1.0, 8.0);
    return detail::sign_normalize(lhs.value - rhs, err, alpha);
}

/* (1+x)_q^inf vs (1 + [alpha]_q x)(1 + q^alpha x)_q^inf. */
inline Margin margin_cor_final(double x, double alpha, const QParams& p,
                               const TruncationPolicy& pol = {}) {
    if (!(x > -1.0)) throw DomainError("margin_cor_final: need x > -1");
    if (!(alpha > 0.0)) throw DomainError("margin_cor_final: need alpha > 0");
    const TailBoundedValue lhs = one_plus_inf(x, p, pol);
    const TailBoundedValue inf = one_plus_inf(std::pow(p.q(), alpha) * x, p, pol);
    const double rhs = (1.0 + q_number(alpha, p) * x) * inf.value;
    const double err = std::fabs(lhs.value) * (lhs.tail_bound + 32.0 * detail::kEps) +
                       std::fabs(rhs) * (inf.tail_bound + 64.0 * detail::kEps) +
                       detail::fp_slack(std::fabs(rhs) + 1.0, 8.0);
    return detail::sign_normalize(lhs.value - rhs, err, alpha);
}

/* The infinite-product inequality written through the q-exponentials by the
 * substitution u = (1-q)x (kind E, where (1+u)_q^inf = E_q(x)) or
 * u = -(1-q)x (kind e, where (1+u)_q^inf = 1/e_q(x)). */
enum class ExpKind { E, e };

inline Margin margin_exp(double x, double alpha, double beta, ExpKind kind, const QParams& p,
                         const TruncationPolicy& pol = {}) {
    if (!(alpha > 0.0)) throw DomainError("margin_exp: need alpha > 0");
    const double radius = 1.0 / (1.0 - p.q());
    double u = 0.0, lhs_value = 0.0, lhs_rel_err = 0.0;
    if (kind == ExpKind::E) {
        if (!(x > -radius)) throw DomainError("margin_exp: need x > -1/(1-q)");
        u = (1.0 - p.q()) * x;
        const SeriesValue s = E_q(x, p, pol);
        lhs_value = s.value;
        lhs_rel_err = 8.0 * std::max(s.last_term_ratio, pol.eps_tail);
    } else {
        if (!(std::fabs(x) < radius)) throw DomainError("margin_exp: need |x| < 1/(1-q)");
        u = -(1.0 - p.q()) * x;
        const SeriesValue s = e_q(x, p, pol);
        lhs_value = 1.0 / s.value;
        lhs_rel_err = 8.0 * std::max(s.last_term_ratio, pol.eps_tail);
    }
    if (!(std::pow(p.q(), alpha + beta) * u > -1.0))
        throw DomainError("margin_exp: need q^{alpha+beta} u > -1");
    const TailBoundedValue mid = one_plus_real(std::pow(p.q(), alpha) * u, beta, p, pol);
    const TailBoundedValue inf = one_plus_inf(std::pow(p.q(), alpha + beta) * u, p, pol);
    const double rhs = (1.0 + q_number(alpha, p) * u) * mid.value * inf.value;
    const double err =
        std::fabs(lhs_value) * (lhs_rel_err + 32.0 * detail::kEps) +
        std::fabs(rhs) * (mid.tail_bound + inf.tail_bound + 64.0 * detail::kEps) +
        detail::fp_slack(std::fabs(rhs) + 1.0, 8.0);
    return detail::sign_normalize(lhs_value - rhs, err, alpha);
}

/* Tagged inequality forms: the vocabulary of the margin dispatcher, the
 * q-hat estimator, the counterexample search and the CLI --form flags. */
enum class FormTag { thm1, rem2, cor1, thm2, prop1, cor6, cor_final, exp_E, exp_e };

inline const char* to_string(FormTag t) {
    switch (t) {
        case FormTag::thm1: return "thm1";
        case FormTag::rem2: return "rem2";
        case FormTag::cor1: return "cor1";
        case FormTag::thm2: return "thm2";
        case FormTag::prop1: return "prop1";
        case FormTag::cor6: return "cor6";
        case FormTag::cor_final: return "cor_final";
        case FormTag::exp_E: return "exp_E";
        case FormTag::exp_e: return "exp_e";
    }
    return "?";
}

inline std::optional<FormTag> parse_form_tag(const std::string& s) {
    for (FormTag t : {FormTag::thm1, FormTag::rem2, FormTag::cor1, FormTag::thm2, FormTag::prop1,
                      FormTag::cor6, FormTag::cor_final, FormTag::exp_E, FormTag::exp_e})
        if (s == to_string(t)) return t;
    return std::nullopt;
}

struct IneqForm {
    FormTag tag = FormTag::thm1;
    int n = 1;          // thm1/rem2 exponent; cor1 second exponent (any sign)
    int m = 1;          // cor1 first exponent (>= 1)
    double alpha = 1.0; // real-exponent forms
    double beta = 0.0;  // prop1/cor6/exp forms
};

inline Margin eval_margin(const IneqForm& f, double x, const QParams& p,
                          const TruncationPolicy& pol = {}) {
    switch (f.tag) {
        case FormTag::thm1: return margin_thm1(x, f.n, p);
        case FormTag::rem2: return margin_rem2(x, f.n, p);
        case FormTag::cor1: return margin_cor1(x, f.m, f.n, p);
        case FormTag::thm2: return margin_thm2(x, f.alpha, p, pol);
        case FormTag::prop1: return margin_prop1(x, f.alpha, f.beta, p, pol);
        case FormTag::cor6: return margin_cor6(x, f.alpha, f.beta, p, pol);
        case FormTag::cor_final: return margin_cor_final(x, f.alpha, p, pol);
        case FormTag::exp_E: return margin_exp(x, f.alpha, f.beta, ExpKind::E, p, pol);
        case FormTag::exp_e: return margin_exp(x, f.alpha, f.beta, ExpKind::e, p, pol);
    }
    throw DomainError("eval_margin: unknown form tag");
}

/* Whether (form, x) lies where the inequality is asserted unconditionally
 * for every q in (0,1).  Outside this set a violation is an observation
 * about the q-range, not a failure: the real-exponent forms only claim a
 * neighborhood (q-hat, 1) for -1 < x < 0, and cor1 with a negative second
 * exponent needs x >= 0 to keep every factor positive. */
inline bool in_guaranteed_domain(const IneqForm& f, double x) {
    switch (f.tag) {
        case FormTag::thm1: return x > -1.0;
        case FormTag::rem2: return x > 0.0 && x < 1.0;
        case FormTag::cor1: return f.n >= 0 ? x > -1.0 : x >= 0.0;
        case FormTag::thm2:
        case FormTag::prop1:
        case FormTag::cor6:
        case FormTag::cor_final:
        case FormTag::exp_E: return x >= 0.0;
        case FormTag::exp_e: return x <= 0.0; // substituted argument -(1-q)x >= 0
    }
    return false;
}

/* Result of the q-hat scan: the inequality held at every scanned q above
 * qhat (and held everywhere scanned when held_on_all_grid, in which case
 * qhat is the lower end of the range).  witness_below carries the highest
 * grid point with a certified violation; inconclusive lists grid points
 * whose evaluation exhausted the truncation budget. */
struct QhatEstimate {
    double qhat = 0.0;
    double grid_step = 0.0;
    bool held_on_all_grid = false;
    std::optional<std::pair<double, Margin>> witness_below;
    std::vector<double> inconclusive;
};

namespace detail {

enum class PointClass { holds, violated, inconclusive };

inline PointClass classify_margin(const IneqForm& f, double x, double q,
                                  const TruncationPolicy& pol, Margin& out) {
    try {
        out = eval_margin(f, x, QParams(q), pol);
    } catch (const TruncationBudgetExceeded&) {
        return PointClass::inconclusive;
    } catch (const SingularPoint&) {
        return PointClass::inconclusive;
    }
    return out.certified_violation() ? PointClass::violated : PointClass::holds;
}

} // namespace detail

/* Scan q from q_hi down to q_lo in steps of grid_step; locate the highest
 * certified flip from "holds" to "violated", refine it by 40 bisection
 * steps, and return the midpoint as qhat.  Bisection resolves ties (margin
 * within +/-err of zero) and inconclusive points toward larger qhat, which
 * is the conservative direction (a smaller claimed hold-interval).  A
 * DomainError during the descent (the form's domain can end at a positive q,
 * e.g. the exponential forms need q > 1 - 1/|x|) ends the scan there. */
inline QhatEstimate qhat_estimate(const IneqForm& f, double x, double grid_step, double q_lo,
                                  double q_hi, const TruncationPolicy& pol = {}) {
    if (!(grid_step > 0.0) || !(grid_step <= 0.01))
        throw DomainError("qhat_estimate: need 0 < grid_step <= 0.01");
    if (!(q_lo < q_hi)) throw DomainError("qhat_estimate: need q_lo < q_hi");

    QhatEstimate est;
    est.grid_step = grid_step;

    double last_ok = std::numeric_limits<double>::quiet_NaN();
    double viol_q = std::numeric_limits<double>::quiet_NaN();
    bool any_evaluated = false;
    Margin viol_margin;
    const double lo_cut = q_lo - 0.5 * grid_step;
    for (double q = q_hi; q >= lo_cut; q -= grid_step) {
        Margin m;
        detail::PointClass c;
        try {
            c = detail::classify_margin(f, x, q, pol, m);
        } catch (const DomainError&) {
            break;
        }
        any_evaluated = true;
        if (c == detail::PointClass::inconclusive) {
            est.inconclusive.push_back(q);
            continue;
        }
        if (c == detail::PointClass::violated) {
            viol_q = q;
            viol_margin = m;
            break;
        }
        last_ok = q;
    }
    if (!any_evaluated)
        throw DomainError("qhat_estimate: form not evaluable anywhere in [q_lo, q_hi] at this x");

    if (std::isnan(viol_q)) {
        est.held_on_all_grid = true;
        est.qhat = q_lo;
        return est;
    }

    est.witness_below = std::pair{viol_q, viol_margin};
    if (std::isnan(last_ok)) {
        // Violated at the very top of the range: nothing to certify above.
        est.qhat = viol_q;
        return est;
    }

    double lo = viol_q, hi = last_ok;
    for (int iter = 0; iter < 40; ++iter) {
        const double mid = 0.5 * (lo + hi);
        Margin m;
        detail::PointClass c;
        try {
            c = detail::classify_margin(f, x, mid, pol, m);
        } catch (const DomainError&) {
            c = detail::PointClass::inconclusive;
        }
        const bool solidly_holds = (c == detail::PointClass::holds) && m.value >= m.err;
        if (solidly_holds)
            hi = mid;
        else
            lo = mid; // violation, tie, or inconclusive: push qhat upward
    }
    est.qhat = 0.5 * (lo + hi);
    return est;
}

/* A sampled point at which a form's margin is a certified violation. */
struct Witness {
    IneqForm form;
    double x = 0.0;
    double q = 0.0;
    Margin margin;
};

/* Parameter box for the counterexample search; integer exponents are drawn
 * uniformly from [n_lo, n_hi] / [m_lo, m_hi], reals uniformly from their
 * intervals. */
struct Box {
    double q_lo = 0.1, q_hi = 0.9;
    double x_lo = 0.0, x_hi = 1.0;
    double alpha_lo = 1.0, alpha_hi = 1.0;
    double beta_lo = 0.0, beta_hi = 0.0;
    int n_lo = 1, n_hi = 1;
    int m_lo = 1, m_hi = 1;
};

/* Seeded random search for a certified violation of the tagged form inside
 * the box.  Samples whose evaluation throws (domain, singular, budget) are
 * skipped; they count against the budget.  Returns the first witness found
 * or nullopt when the budget is exhausted. */
inline std::optional<Witness> counterexample_search(FormTag tag, const Box& box, long budget,
                                                    std::uint64_t seed,
                                                    const TruncationPolicy& pol = {}) {
    std::mt19937_64 rng(seed);
    auto unit = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * unit(); };
    auto in_int = [&](int lo, int hi) {
        return lo + static_cast<int>(unit() * (hi - lo + 1.0));
    };
    for (long i = 0; i < budget; ++i) {
        IneqForm f;
        f.tag = tag;
        const double q = in(box.q_lo, box.q_hi);
        const double x = in(box.x_lo, box.x_hi);
        f.alpha = in(box.alpha_lo, box.alpha_hi);
        f.beta = in(box.beta_lo, box.beta_hi);
        f.n = in_int(box.n_lo, box.n_hi);
        f.m = in_int(box.m_lo, box.m_hi);
        try {
            const Margin m = eval_margin(f, x, QParams(q), pol);
            if (m.certified_violation()) return Witness{f, x, q, m};
        } catch (const Error&) {
            continue;
        }
    }
    return std::nullopt;
}

} // namespace qbern
