#pragma once

/* Drivers for the two documented check suites.
 *
 * run_identity_checks streams one CheckRecord per identity check: the exact
 * q-binomial theorem, both Euler expansions against the product, the
 * exponent-addition and q-derivative rules for real powers, the
 * q-exponential identities, and the Heine-form diagnostic.  Residual bounds
 * scale linearly with cfg.tol: the documented tolerances are reproduced at
 * the default tol = 1e-10, and an impossible tol fails everything, as it
 * should.
 *
 * run_inequality_checks streams one CheckRecord per grid point of the
 * documented inequality sweeps.  Points inside a form's guaranteed domain
 * make real pass/fail rows; points outside it (reachable via x-range
 * overrides, where the inequality only claims a q-neighborhood of 1) are
 * recorded as ".explore" rows, never fatal, and each explored slice gets a
 * ".qhat" annotation row from the q-hat estimator.  Per-form ".min-margin"
 * summary rows close each sweep.
 *
 * Sampling is seeded and rejection-based: every random sample satisfies the
 * preconditions of the identity it feeds (arguments of every real power
 * > -1; |x| >= 1e-3 where a q-derivative's x != 0 precondition would
 * otherwise meet floating-point cancellation).
 */

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bernoulli.hpp"
#include "core.hpp"
#include "derivative.hpp"
#include "errors.hpp"
#include "pochhammer.hpp"
#include "poly.hpp"
#include "report.hpp"
#include "series.hpp"

namespace qbern {

struct VerifyConfig {
    double tol = 1e-10;
    TruncationPolicy policy{};
    std::uint64_t seed = 42;
    int exact_gauss_max = 25;
};

using RecordSink = std::function<void(const CheckRecord&)>;

namespace detail {

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}
    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double in(double lo, double hi) { return lo + (hi - lo) * unit(); }

private:
    std::mt19937_64 rng_;
};

inline std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw DomainError("linspace: need count >= 1");
    if (count == 1) return {lo};
    std::vector<double> v;
    v.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
        v.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
    return v;
}

inline std::vector<double> default_q_grid() {
    return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

inline std::vector<double> wide_q_grid() {
    std::vector<double> v;
    for (int i = 1; i <= 19; ++i) v.push_back(0.05 * i);
    return v;
}

} // namespace detail

inline void run_identity_checks(const VerifyConfig& cfg, const RecordSink& sink) {
    cfg.policy.validate();
    if (cfg.exact_gauss_max < 0 || cfg.exact_gauss_max > kExactDegreeCap)
        throw DomainError("run_identity_checks: exact_gauss_max out of [0, 64]");
    const double scale = cfg.tol / 1e-10;
    const double tol10 = cfg.tol;         // checks documented at 1e-10
    const double tol8 = 100.0 * cfg.tol;  // checks documented at 1e-8

    // Exact q-binomial theorem, coefficient by coefficient.
    for (int n = 0; n <= cfg.exact_gauss_max; ++n) {
        CheckRecord r =
            CheckRecord::residual_check("gauss.exact", gauss_identity_holds(n) ? 0.0 : 1.0, 0.0);
        r.n = n;
        sink(r);
    }

    // Euler expansion with q^{j(j-1)/2} terms vs the infinite product.
    for (double q : detail::default_q_grid()) {
        const QParams p(q);
        for (double x : detail::linspace(-0.9, 5.0, 31)) {
            const double res =
                rel_residual(euler_series_E(x, p, cfg.policy).value,
                             one_plus_inf(x, p, cfg.policy).value);
            CheckRecord r = CheckRecord::residual_check("eq11.cross", res, tol10);
            r.q = q;
            r.x = x;
            sink(r);
        }
    }

    // Euler expansion with plain x^j terms vs the reciprocal product (|x| < 1).
    for (double q : detail::default_q_grid()) {
        const QParams p(q);
        for (double x : detail::linspace(-0.9, 0.9, 19)) {
            const double res = rel_residual(euler_series_e(x, p, cfg.policy).value,
                                            1.0 / one_plus_inf(-x, p, cfg.policy).value);
            CheckRecord r = CheckRecord::residual_check("eq12.cross", res, tol10);
            r.q = q;
            r.x = x;
            sink(r);
        }
    }

    // Exponent-addition rule for real powers, sampled.
    {
        detail::Sampler s(cfg.seed);
        for (int i = 0; i < 1000; ++i) {
            double x, alpha, beta, q;
            do {
                x = s.in(-0.9, 5.0);
                alpha = s.in(-3.0, 3.0);
                beta = s.in(-3.0, 3.0);
                q = s.in(0.1, 0.9);
            } while (!(std::pow(q, alpha) * x > -1.0) ||
                     !(std::pow(q, alpha + beta) * x > -1.0));
            const QParams p(q);
            CheckRecord r = CheckRecord::residual_check(
                "poch.exponent-add", exponent_addition_residual(x, alpha, beta, p, cfg.policy),
                tol8);
            r.q = q;
            r.x = x;
            r.alpha = alpha;
            r.beta = beta;
            sink(r);
        }
    }

    // q-derivative rule for real powers, sampled.
    {
        detail::Sampler s(cfg.seed + 1);
        for (int i = 0; i < 1000; ++i) {
            double x, alpha, q;
            do {
                x = s.in(-0.9, 5.0);
                alpha = s.in(-3.0, 3.0);
                q = s.in(0.1, 0.9);
            } while (std::fabs(x) < 1e-3 || !(std::pow(q, alpha) * x > -1.0));
            const QParams p(q);
            CheckRecord r = CheckRecord::residual_check(
                "poch.dq", dq_pochhammer_residual(x, alpha, p, cfg.policy), tol8);
            r.q = q;
            r.x = x;
            r.alpha = alpha;
            sink(r);
        }
    }

    // E_q(-x) e_q(x) = 1, sampled inside the e_q radius.
    {
        detail::Sampler s(cfg.seed + 2);
        for (int i = 0; i < 500; ++i) {
            const double q = s.in(0.1, 0.9);
            const double x = s.in(-0.9, 0.9) / (1.0 - q);
            const QParams p(q);
            CheckRecord r = CheckRecord::residual_check(
                "exp.inverse", exp_inverse_residual(x, p, cfg.policy), tol10);
            r.q = q;
            r.x = x;
            sink(r);
        }
    }

    // e with base 1/q equals E_q, sampled.
    {
        detail::Sampler s(cfg.seed + 3);
        for (int i = 0; i < 500; ++i) {
            const double q = s.in(0.1, 0.9);
            const double x = s.in(-3.0, 3.0);
            const QParams p(q);
            CheckRecord r = CheckRecord::residual_check(
                "exp.base-recip", e_recip_identity_residual(x, p, cfg.policy), tol10);
            r.q = q;
            r.x = x;
            sink(r);
        }
    }

    // D_q E_q(x) = E_q(qx) and D_q e_q(x) = e_q(x), sampled.
    {
        detail::Sampler s(cfg.seed + 4);
        for (int i = 0; i < 200; ++i) {
            double q, x;
            do {
                q = s.in(0.1, 0.9);
                x = s.in(-0.9, 0.9) / (1.0 - q);
            } while (std::fabs(x) < 1e-3);
            const QParams p(q);
            const auto res = dq_exponential_residuals(x, p, cfg.policy);
            CheckRecord rE = CheckRecord::residual_check("exp.dq.E", res.res_E, tol8);
            rE.q = q;
            rE.x = x;
            sink(rE);
            CheckRecord re = CheckRecord::residual_check("exp.dq.e", res.res_e, tol8);
            re.q = q;
            re.x = x;
            sink(re);
        }
    }

    // Series vs product form for both q-exponentials, on a grid.
    for (double q : detail::default_q_grid()) {
        const QParams p(q);
        for (double u : {-0.9, -0.5, 0.5, 0.9, 2.0}) {
            const double x = u / (1.0 - q);
            if (u > -1.0) {
                const double res = rel_residual(E_q(x, p, cfg.policy).value,
                                                one_plus_inf(u, p, cfg.policy).value);
                CheckRecord r = CheckRecord::residual_check("exp.series-product.E", res, tol10);
                r.q = q;
                r.x = x;
                sink(r);
            }
            if (std::fabs(u) < 1.0) {
                const double res = rel_residual(e_q(x, p, cfg.policy).value,
                                                1.0 / one_plus_inf(-u, p, cfg.policy).value);
                CheckRecord r = CheckRecord::residual_check("exp.series-product.e", res, tol10);
                r.q = q;
                r.x = x;
                sink(r);
            }
        }
    }

    // Heine-form diagnostic: the standard series must match everywhere...
    for (double q : detail::default_q_grid()) {
        const QParams p(q);
        for (int n = 1; n <= 10; ++n) {
            for (double x : {-0.8, -0.4, -0.1, 0.1, 0.4, 0.8}) {
                const auto h = heine_diagnostic(x, n, p, cfg.policy);
                CheckRecord r =
                    CheckRecord::residual_check("heine.standard", h.residual_standard, tol10);
                r.q = q;
                r.x = x;
                r.n = n;
                sink(r);
            }
        }
    }
    // ...while the terminating [n j]_q variant visibly disagrees at the
    // reference point (margin-style row: observed = gap above 0.05).
    {
        const QParams p(0.5);
        const auto h = heine_diagnostic(0.5, 1, p, cfg.policy);
        CheckRecord r = CheckRecord::margin_check("heine.printed-gap",
                                                  h.residual_printed - 0.05 * scale, 0.0);
        r.q = 0.5;
        r.x = 0.5;
        r.n = 1;
        sink(r);
    }
}

/* Grid overrides for the inequality sweeps; anything unset uses the
 * documented defaults. */
struct GridOverrides {
    std::optional<double> x_min, x_max;
    std::optional<int> x_count;
    std::optional<double> q_min, q_max, q_step;
    std::optional<int> n_min, n_max;
    std::optional<double> alpha, beta;
    std::optional<int> m;
    double qhat_step = 5e-3;
    double qhat_q_lo = 0.01;
    double qhat_q_hi = 0.999;
};

namespace detail {

struct SweepPlan {
    std::vector<double> qs;
    std::vector<double> xs;
    std::vector<IneqForm> combos; // all non-(q,x) parameters
};

inline SweepPlan sweep_plan(FormTag tag, const GridOverrides& ov) {
    SweepPlan plan;

    const bool wide_q = (tag == FormTag::thm1 || tag == FormTag::rem2);
    if (ov.q_min || ov.q_max || ov.q_step) {
        const double lo = ov.q_min.value_or(0.1);
        const double hi = ov.q_max.value_or(0.9);
        const double st = ov.q_step.value_or(0.1);
        if (!(st > 0.0) || !(lo <= hi))
            throw DomainError("sweep: empty or malformed q-grid (need q_min <= q_max, q_step > 0)");
        for (double q = lo; q <= hi + 1e-12; q += st) plan.qs.push_back(q);
    } else {
        plan.qs = wide_q ? wide_q_grid() : default_q_grid();
    }

    const std::vector<double> alpha_list{1.0, 1.1, 1.5, 2.0, 2.718, 5.0, 10.0,
                                         0.1, 0.3, 0.5, 0.9};
    auto alphas = [&]() {
        return ov.alpha ? std::vector<double>{*ov.alpha} : alpha_list;
    };
    auto betas = [&](std::vector<double> def) {
        return ov.beta ? std::vector<double>{*ov.beta} : std::move(def);
    };
    auto ms = [&](std::vector<int> def) {
        return ov.m ? std::vector<int>{*ov.m} : std::move(def);
    };

    switch (tag) {
        case FormTag::thm1: {
            plan.xs = {-0.999, -0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
            const int n_lo = ov.n_min.value_or(1), n_hi = ov.n_max.value_or(30);
            if (n_lo > n_hi) throw DomainError("sweep: empty n-grid");
            for (int n = n_lo; n <= n_hi; ++n) {
                IneqForm f{FormTag::thm1};
                f.n = n;
                plan.combos.push_back(f);
            }
            break;
        }
        case FormTag::rem2: {
            plan.xs = {0.001, 0.1, 0.3, 0.5, 0.7, 0.9, 0.999};
            const int n_lo = ov.n_min.value_or(1), n_hi = ov.n_max.value_or(30);
            if (n_lo > n_hi) throw DomainError("sweep: empty n-grid");
            for (int n = n_lo; n <= n_hi; ++n) {
                IneqForm f{FormTag::rem2};
                f.n = n;
                plan.combos.push_back(f);
            }
            break;
        }
        case FormTag::cor1: {
            plan.xs = {-0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0, 3.0, 10.0};
            const int n_lo = ov.n_min.value_or(-3), n_hi = ov.n_max.value_or(5);
            if (n_lo > n_hi) throw DomainError("sweep: empty n-grid");
            for (int m : ms({1, 2, 5}))
                for (int n = n_lo; n <= n_hi; ++n) {
                    IneqForm f{FormTag::cor1};
                    f.m = m;
                    f.n = n;
                    plan.combos.push_back(f);
                }
            break;
        }
        case FormTag::thm2: {
            plan.xs = {0.0, 0.1, 0.5, 1.0, 3.0, 10.0};
            for (double a : alphas()) {
                IneqForm f{FormTag::thm2};
                f.alpha = a;
                plan.combos.push_back(f);
            }
            break;
        }
        case FormTag::prop1:
        case FormTag::cor6: {
            plan.xs = {0.0, 0.1, 0.5, 1.0, 3.0, 10.0};
            for (double a : alphas())
                for (double b : betas({-1.5, -0.5, 0.0, 0.5, 1.5, 3.0})) {
                    IneqForm f{tag};
                    f.alpha = a;
                    f.beta = b;
                    plan.combos.push_back(f);
                }
            break;
        }
        case FormTag::cor_final: {
            plan.xs = {0.0, 0.1, 0.5, 1.0, 3.0, 10.0};
            for (double a : alphas()) {
                IneqForm f{FormTag::cor_final};
                f.alpha = a;
                plan.combos.push_back(f);
            }
            break;
        }
        case FormTag::exp_E:
        case FormTag::exp_e: {
            plan.xs = (tag == FormTag::exp_E) ? std::vector<double>{0.0, 0.5, 1.0, 3.0}
                                              : std::vector<double>{-3.0, -1.0, -0.5, 0.0};
            for (double a : alphas())
                for (double b : betas({-0.5, 0.0, 1.0})) {
                    IneqForm f{tag};
                    f.alpha = a;
                    f.beta = b;
                    plan.combos.push_back(f);
                }
            break;
        }
    }

    if (ov.x_min || ov.x_max) {
        const double lo = ov.x_min.value_or(plan.xs.front());
        const double hi = ov.x_max.value_or(plan.xs.back());
        if (!(lo <= hi)) throw DomainError("sweep: empty x-grid (need x_min <= x_max)");
        plan.xs = linspace(lo, hi, ov.x_count.value_or(11));
    } else if (ov.x_count) {
        throw DomainError("sweep: x_count requires x_min/x_max");
    }
    return plan;
}

/* Whether the form is evaluable at (x, q); mirrors the margin preconditions
 * so grids can skip structurally out-of-domain combinations quietly. */
inline bool evaluable(const IneqForm& f, double x, double q) {
    switch (f.tag) {
        case FormTag::thm1: return x > -1.0;
        case FormTag::rem2: return x > 0.0 && x < 1.0;
        case FormTag::cor1: return x > -1.0;
        case FormTag::thm2: return x > -1.0;
        case FormTag::prop1:
            return x > -1.0 && std::pow(q, f.alpha) * x > -1.0 &&
                   std::pow(q, f.alpha + f.beta) * x > -1.0;
        case FormTag::cor6:
            return x > -1.0 && std::pow(q, f.alpha + f.beta) * x > -1.0;
        case FormTag::cor_final: return x > -1.0;
        case FormTag::exp_E: {
            const double u = (1.0 - q) * x;
            return x > -1.0 / (1.0 - q) && std::pow(q, f.alpha + f.beta) * u > -1.0;
        }
        case FormTag::exp_e: {
            const double u = -(1.0 - q) * x;
            return std::fabs(x) < 1.0 / (1.0 - q) && std::pow(q, f.alpha + f.beta) * u > -1.0;
        }
    }
    return false;
}

inline CheckRecord margin_record(std::string id, const IneqForm& f, double q, double x,
                                 const Margin& m, CheckRecord::Status status) {
    CheckRecord r;
    r.check_id = std::move(id);
    r.q = q;
    r.x = x;
    switch (f.tag) {
        case FormTag::thm1:
        case FormTag::rem2: r.n = f.n; break;
        case FormTag::cor1:
            r.n = f.n;
            r.m = f.m;
            break;
        case FormTag::thm2:
        case FormTag::cor_final: r.alpha = f.alpha; break;
        case FormTag::prop1:
        case FormTag::cor6:
        case FormTag::exp_E:
        case FormTag::exp_e:
            r.alpha = f.alpha;
            r.beta = f.beta;
            break;
    }
    r.observed = m.value;
    r.bound = m.err;
    r.status = status;
    return r;
}

} // namespace detail

/* Row selection for run_inequality_checks: the verification suite wants
 * q-hat annotations on explored slices and a closing min-margin row; the
 * plain sweep command wants raw grid rows only. */
struct SweepOptions {
    bool qhat_annotations = true;
    bool min_margin_row = true;
};

/* Sweep one form's grid, streaming one record per point (see file comment
 * for the row taxonomy).  Returns the number of fatal (guaranteed-domain)
 * violations. */
inline long run_inequality_checks(FormTag tag, const VerifyConfig& cfg, const GridOverrides& ov,
                                  const RecordSink& sink, const SweepOptions& opts = {}) {
    cfg.policy.validate();
    const auto plan = detail::sweep_plan(tag, ov);
    long fatal = 0;
    bool have_min = false;
    double min_margin = 0.0, min_err = 0.0;
    IneqForm min_form;
    double min_q = 0.0, min_x = 0.0;

    for (const IneqForm& f : plan.combos) {
        for (double x : plan.xs) {
            bool explored_slice = false;
            for (double q : plan.qs) {
                if (!detail::evaluable(f, x, q)) continue;
                const bool guaranteed = in_guaranteed_domain(f, x);
                if (!guaranteed) explored_slice = true;
                Margin m;
                detail::PointClass c;
                try {
                    c = detail::classify_margin(f, x, q, cfg.policy, m);
                } catch (const DomainError&) {
                    continue;
                }
                const std::string id =
                    guaranteed ? to_string(tag) : std::string(to_string(tag)) + ".explore";
                if (c == detail::PointClass::inconclusive) {
                    CheckRecord r = detail::margin_record(
                        id, f, q, x, m, CheckRecord::Status::inconclusive);
                    r.observed.reset();
                    r.bound.reset();
                    sink(r);
                    continue;
                }
                const bool violated = (c == detail::PointClass::violated);
                CheckRecord::Status st;
                if (guaranteed) {
                    st = violated ? CheckRecord::Status::fail : CheckRecord::Status::pass;
                    if (violated) ++fatal;
                } else {
                    st = CheckRecord::Status::pass; // observation, not a claim
                }
                if (guaranteed && (!have_min || m.value < min_margin)) {
                    have_min = true;
                    min_margin = m.value;
                    min_err = m.err;
                    min_form = f;
                    min_q = q;
                    min_x = x;
                }
                sink(detail::margin_record(id, f, q, x, m, st));
            }
            if (explored_slice && opts.qhat_annotations) {
                try {
                    const QhatEstimate est =
                        qhat_estimate(f, x, ov.qhat_step, ov.qhat_q_lo, ov.qhat_q_hi, cfg.policy);
                    CheckRecord r = detail::margin_record(
                        std::string(to_string(tag)) + ".qhat", f, est.qhat, x,
                        Margin{est.qhat, est.grid_step}, CheckRecord::Status::pass);
                    r.observed = est.qhat;
                    r.bound = est.grid_step;
                    sink(r);
                } catch (const Error&) {
                    // slice not estimable (domain too thin); skip the annotation
                }
            }
        }
    }

    if (have_min && opts.min_margin_row) {
        CheckRecord r = detail::margin_record(std::string(to_string(tag)) + ".min-margin",
                                              min_form, min_q, min_x, Margin{min_margin, min_err},
                                              min_margin >= -min_err
                                                  ? CheckRecord::Status::pass
                                                  : CheckRecord::Status::fail);
        sink(r);
    }
    return fatal;
}

} // namespace qbern
