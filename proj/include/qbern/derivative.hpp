#pragma once

/* Jackson's q-derivative and the q-mean-value equation:
 *
 *   D_q f(x) = (f(qx) - f(x)) / ((q-1) x),   x != 0
 *
 *   closed forms checked elsewhere: D_q (1+x)_q^a = [a]_q (1+qx)_q^{a-1},
 *   D_q E_q(x) = E_q(qx), D_q e_q(x) = e_q(x).
 *
 * qmvt_solve finds an eta in (a, b) with D_q f(eta) (b - a) = f(b) - f(a)
 * by grid scan plus bisection, and only ever returns a point at which the
 * defect has certifiably crossed the tolerance: the result is self-checking.
 */

#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "core.hpp"
#include "errors.hpp"
#include "pochhammer.hpp"
#include "series.hpp"

namespace qbern {

/* A real function with an explicit domain interval; evaluation outside the
 * declared domain throws. */
struct RealFunction {
    std::function<double(double)> fn;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    double operator()(double t) const {
        if (!(t >= lo) || !(t <= hi))
            throw DomainError("RealFunction: argument " + std::to_string(t) +
                              " outside declared domain");
        return fn(t);
    }
};

/* D_q f at x; both x and qx must lie in f's domain. */
inline double q_derivative(const RealFunction& f, double x, const QParams& p) {
    if (x == 0.0) throw DomainError("q_derivative: x must be nonzero");
    return (f(p.q() * x) - f(x)) / ((p.q() - 1.0) * x);
}

/* Residual of D_q (1+x)_q^alpha = [alpha]_q (1+qx)_q^{alpha-1}, where the
 * right side's real power is (1+qx)_q^inf / (1+q^alpha x)_q^inf, i.e.
 * one_plus_real(qx, alpha-1). */
inline double dq_pochhammer_residual(double x, double alpha, const QParams& p,
                                     const TruncationPolicy& pol = {}) {
    if (!(x > -1.0)) throw DomainError("dq_pochhammer_residual: need x > -1");
    if (x == 0.0) throw DomainError("dq_pochhammer_residual: x must be nonzero");
    RealFunction f{[&](double t) { return one_plus_real(t, alpha, p, pol).value; }, -1.0,
                   std::numeric_limits<double>::infinity()};
    const double lhs = q_derivative(f, x, p);
    const double rhs = q_number(alpha, p) * one_plus_real(p.q() * x, alpha - 1.0, p, pol).value;
    return rel_residual(lhs, rhs);
}

/* Residuals of D_q E_q(x) = E_q(qx) and D_q e_q(x) = e_q(x).  The e_q part
 * needs |x| strictly inside the radius 1/(1-q). */
struct DqExponentialResiduals {
    double res_E = 0.0;
    double res_e = 0.0;
};

inline DqExponentialResiduals dq_exponential_residuals(double x, const QParams& p,
                                                       const TruncationPolicy& pol = {}) {
    if (x == 0.0) throw DomainError("dq_exponential_residuals: x must be nonzero");
    if (!(std::fabs(x) < 1.0 / (1.0 - p.q())))
        throw DomainError("dq_exponential_residuals: need |x| < 1/(1-q)");
    RealFunction fE{[&](double t) { return E_q(t, p, pol).value; }};
    RealFunction fe{[&](double t) { return e_q(t, p, pol).value; },
                    -1.0 / (1.0 - p.q()), 1.0 / (1.0 - p.q())};
    const double res_E = rel_residual(q_derivative(fE, x, p), E_q(p.q() * x, p, pol).value);
    const double res_e = rel_residual(q_derivative(fe, x, p), e_q(x, p, pol).value);
    return {res_E, res_e};
}

/* Solve D_q f(eta) (b-a) = f(b) - f(a) for eta in (a,b), 0 < a < b.
 *
 * The defect h(eta) = D_q f(eta)(b-a) - (f(b)-f(a)) is scanned on a uniform
 * interior mesh; a mesh point with |h| already below tolerance is returned
 * directly (h identically zero for linear f makes this the first mesh
 * point), otherwise each sign change is refined by bisection (depth-capped)
 * until |h| <= 1e-12 (1 + |f(b)-f(a)|).  Returns nullopt when no crossing
 * certifies. */
inline std::optional<double> qmvt_solve(const RealFunction& f, double a, double b,
                                        const QParams& p, int grid = 1024) {
    if (!(0.0 < a) || !(a < b)) throw DomainError("qmvt_solve: need 0 < a < b");
    if (grid < 2) throw DomainError("qmvt_solve: grid must be >= 2");
    const double df = f(b) - f(a);
    const double tol = 1e-12 * (1.0 + std::fabs(df));
    auto h = [&](double eta) { return q_derivative(f, eta, p) * (b - a) - df; };

    double prev_eta = 0.0, prev_h = 0.0;
    bool have_prev = false;
    for (int i = 1; i <= grid; ++i) {
        const double eta = a + (b - a) * static_cast<double>(i) / (grid + 1);
        const double he = h(eta);
        if (std::fabs(he) <= tol) return eta;
        if (have_prev && std::signbit(he) != std::signbit(prev_h)) {
            double lo = prev_eta, hi = eta, hlo = prev_h;
            for (int iter = 0; iter < 200; ++iter) {
                const double mid = 0.5 * (lo + hi);
                const double hm = h(mid);
                if (std::fabs(hm) <= tol) return mid;
                if (std::signbit(hm) == std::signbit(hlo)) {
                    lo = mid;
                    hlo = hm;
                } else {
                    hi = mid;
                }
            }
            // Crossing did not certify within depth; keep scanning.
        }
        prev_eta = eta;
        prev_h = he;
        have_prev = true;
    }
    return std::nullopt;
}

} // namespace qbern
