#include <catch2/catch_amalgamated.hpp>

#include <qbern/bernoulli.hpp>

#include <cmath>

using namespace qbern;
using Catch::Approx;

namespace {
QParams P(double q) { return QParams(q); }
const TruncationPolicy pol{};
} // namespace

TEST_CASE("margin certification semantics") {
    Margin on_the_line{-1e-12, 1e-12};
    CHECK(on_the_line.certified_nonneg());
    CHECK(!on_the_line.certified_violation());
    Margin below{-2e-12, 1e-12};
    CHECK(!below.certified_nonneg());
    CHECK(below.certified_violation());
}

TEST_CASE("integer-exponent margin: closed forms and domains") {
    // n = 1 is an identity: both sides are 1 + x
    CHECK(margin_thm1(0.7, 1, P(0.5)).value == 0.0);
    // n = 2: (1+x)(1+qx) - (1 + (1+q)x) = q x^2
    for (double q : {0.2, 0.5, 0.8}) {
        for (double x : {-0.9, -0.3, 0.4, 2.0}) {
            CHECK(margin_thm1(x, 2, P(q)).value == Approx(q * x * x).margin(1e-12));
        }
    }
    // holds across a grid, certified
    for (double q : {0.05, 0.5, 0.95}) {
        for (double x : {-0.999, -0.5, 0.0, 1.0, 10.0}) {
            for (int n : {1, 5, 17, 30}) {
                CHECK(margin_thm1(x, n, P(q)).certified_nonneg());
            }
        }
    }
    CHECK_THROWS_AS(margin_thm1(-1.0, 3, P(0.5)), DomainError);
    CHECK_THROWS_AS(margin_thm1(0.5, 0, P(0.5)), DomainError);
}

TEST_CASE("mirrored-argument margin delegates exactly") {
    for (double y : {0.1, 0.5, 0.9}) {
        auto a = margin_rem2(y, 3, P(0.5));
        auto b = margin_thm1(-y, 3, P(0.5));
        CHECK(a.value == b.value);
        CHECK(a.err == b.err);
    }
    CHECK_THROWS_AS(margin_rem2(0.0, 3, P(0.5)), DomainError);
    CHECK_THROWS_AS(margin_rem2(1.0, 3, P(0.5)), DomainError);
}

TEST_CASE("split-exponent margin: frozen value, reduction, poles") {
    // m=2, n=-1, x=0.5, q=0.5: lhs = 1.5, rhs = 1.75 * 0.8 = 1.4
    CHECK(margin_cor1(0.5, 2, -1, P(0.5)).value == Approx(0.1).epsilon(1e-13));

    // n = 0 collapses to the one-exponent margin, bit for bit
    for (double q : {0.3, 0.7}) {
        for (double x : {-0.6, 0.0, 0.8, 3.0}) {
            for (int m : {1, 2, 7}) {
                CHECK(margin_cor1(x, m, 0, P(q)).value == margin_thm1(x, m, P(q)).value);
            }
        }
    }

    // nonnegative exponents: certified on x > -1; negative n: certified on x >= 0
    for (double q : {0.2, 0.8}) {
        for (double x : {-0.9, 0.0, 0.5, 2.0}) {
            CHECK(margin_cor1(x, 3, 2, P(q)).certified_nonneg());
        }
        for (double x : {0.0, 0.5, 2.0}) {
            CHECK(margin_cor1(x, 3, -2, P(q)).certified_nonneg());
        }
    }

    // the reciprocal product has a pole inside (-1, 0) for deep negative n
    CHECK_THROWS_AS(margin_cor1(-0.25, 1, -3, P(0.5)), SingularPoint);
    CHECK_THROWS_AS(margin_cor1(0.5, 0, 1, P(0.5)), DomainError);
}

TEST_CASE("real-exponent margin against the linear bound") {
    SECTION("alpha = 1 is an identity up to evaluation error") {
        for (double x : {0.0, 0.5, 3.0}) {
            auto m = margin_thm2(x, 1.0, P(0.5), pol);
            CHECK(std::fabs(m.value) <= m.err + 1e-12);
        }
    }

    SECTION("integer alpha agrees with the integer-exponent margin") {
        auto a = margin_thm2(2.0, 3.0, P(0.5), pol);
        auto b = margin_thm1(2.0, 3, P(0.5));
        CHECK(std::fabs(a.value - b.value) <= a.err + b.err + 1e-12);
    }

    SECTION("certified on x >= 0 for both alpha regimes") {
        for (double q : {0.1, 0.5, 0.9}) {
            for (double x : {0.0, 0.1, 1.0, 10.0}) {
                for (double alpha : {0.1, 0.3, 0.9, 1.1, 2.718, 10.0}) {
                    CHECK(margin_thm2(x, alpha, P(q), pol).certified_nonneg());
                }
            }
        }
    }

    SECTION("the sense really flips for fractional alpha") {
        // raw comparison: (1+x)^(alpha) <= 1 + [alpha] x for 0 < alpha < 1
        double lhs = one_plus_real(1.0, 0.5, P(0.5), pol).value;
        double rhs = 1.0 + q_number(0.5, P(0.5)) * 1.0;
        CHECK(lhs < rhs);
        CHECK(margin_thm2(1.0, 0.5, P(0.5), pol).value == Approx(rhs - lhs).epsilon(1e-12));
    }

    SECTION("evaluable on the negative side of the origin") {
        for (double alpha : {0.5, 2.5}) {
            auto m = margin_thm2(-0.5, alpha, P(0.3), pol);
            CHECK(std::isfinite(m.value));
            CHECK(m.certified_nonneg()); // measured: holds on (-1,0) at every scanned q
        }
    }

    CHECK_THROWS_AS(margin_thm2(-1.0, 2.0, P(0.5), pol), DomainError);
    CHECK_THROWS_AS(margin_thm2(1.0, 0.0, P(0.5), pol), DomainError);
}

TEST_CASE("two-exponent margin and its beta = 0 collapse") {
    for (double q : {0.3, 0.7}) {
        for (double x : {0.0, 0.5, 2.0}) {
            for (double alpha : {0.5, 1.0, 2.5}) {
                CHECK(margin_prop1(x, alpha, 0.0, P(q), pol).value ==
                      margin_thm2(x, alpha, P(q), pol).value);
                for (double beta : {-0.5, 0.5, 2.0}) {
                    CHECK(margin_prop1(x, alpha, beta, P(q), pol).certified_nonneg());
                }
            }
        }
    }
    // shifted argument pushed past -1 by a deep negative beta
    CHECK_THROWS_AS(margin_prop1(-0.5, 1.0, -5.0, P(0.5), pol), DomainError);
}

TEST_CASE("infinite-product margins and their beta = 0 collapse") {
    for (double q : {0.3, 0.7}) {
        for (double x : {0.0, 0.5, 2.0}) {
            for (double alpha : {0.5, 1.0, 2.5}) {
                CHECK(margin_cor6(x, alpha, 0.0, P(q), pol).value ==
                      margin_cor_final(x, alpha, P(q), pol).value);
                CHECK(margin_cor_final(x, alpha, P(q), pol).certified_nonneg());
                for (double beta : {-0.5, 0.5, 2.0}) {
                    CHECK(margin_cor6(x, alpha, beta, P(q), pol).certified_nonneg());
                }
            }
        }
    }
}

TEST_CASE("exponential-substitution margins") {
    SECTION("E-kind at beta = 0 matches the infinite-product margin") {
        // substituted argument u = (1-q) x
        auto a = margin_exp(1.0, 2.0, 0.0, ExpKind::E, P(0.5), pol);
        auto b = margin_cor_final(0.5, 2.0, P(0.5), pol);
        CHECK(std::fabs(a.value - b.value) <= a.err + b.err + 1e-12);
    }

    SECTION("e-kind at beta = 0 matches at the mirrored argument") {
        auto a = margin_exp(-1.0, 2.0, 0.0, ExpKind::e, P(0.5), pol);
        auto b = margin_cor_final(0.5, 2.0, P(0.5), pol);
        CHECK(std::fabs(a.value - b.value) <= a.err + b.err + 1e-10);
    }

    SECTION("certified inside the guaranteed half-lines") {
        for (double q : {0.3, 0.7}) {
            for (double alpha : {0.5, 2.0}) {
                for (double x : {0.0, 0.5, 1.5})
                    CHECK(margin_exp(x, alpha, 0.5, ExpKind::E, P(q), pol).certified_nonneg());
                // the e-kind argument must stay inside the radius 1/(1-q)
                for (double u : {0.0, 0.35, 0.9})
                    CHECK(margin_exp(-u / (1.0 - q), alpha, 0.5, ExpKind::e, P(q), pol)
                              .certified_nonneg());
            }
        }
    }

    CHECK_THROWS_AS(margin_exp(-3.0, 2.0, 0.0, ExpKind::E, P(0.5), pol), DomainError);
    CHECK_THROWS_AS(margin_exp(2.5, 2.0, 0.0, ExpKind::e, P(0.5), pol), DomainError);
    CHECK_THROWS_AS(margin_exp(1.0, 0.0, 0.0, ExpKind::E, P(0.5), pol), DomainError);
}

TEST_CASE("form tags round-trip and dispatch") {
    for (FormTag t : {FormTag::thm1, FormTag::rem2, FormTag::cor1, FormTag::thm2, FormTag::prop1,
                      FormTag::cor6, FormTag::cor_final, FormTag::exp_E, FormTag::exp_e}) {
        auto parsed = parse_form_tag(to_string(t));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == t);
    }
    CHECK(!parse_form_tag("bogus").has_value());

    IneqForm f;
    f.tag = FormTag::thm2;
    f.alpha = 2.5;
    CHECK(eval_margin(f, 1.0, P(0.5), pol).value ==
          margin_thm2(1.0, 2.5, P(0.5), pol).value);
    f.tag = FormTag::thm1;
    f.n = 4;
    CHECK(eval_margin(f, 1.0, P(0.5), pol).value == margin_thm1(1.0, 4, P(0.5)).value);
}

TEST_CASE("guaranteed domains per form") {
    IneqForm thm1f;
    thm1f.tag = FormTag::thm1;
    CHECK(in_guaranteed_domain(thm1f, -0.9));
    CHECK(in_guaranteed_domain(thm1f, 5.0));
    CHECK(!in_guaranteed_domain(thm1f, -1.0));

    IneqForm cor1_neg;
    cor1_neg.tag = FormTag::cor1;
    cor1_neg.n = -2;
    CHECK(!in_guaranteed_domain(cor1_neg, -0.5));
    CHECK(in_guaranteed_domain(cor1_neg, 0.0));

    IneqForm thm2f;
    thm2f.tag = FormTag::thm2;
    thm2f.alpha = 2.5;
    CHECK(in_guaranteed_domain(thm2f, 0.0));
    CHECK(!in_guaranteed_domain(thm2f, -0.5));

    IneqForm expe;
    expe.tag = FormTag::exp_e;
    CHECK(in_guaranteed_domain(expe, -3.0));
    CHECK(!in_guaranteed_domain(expe, 0.1));
}

TEST_CASE("q-hat estimator: validation, guaranteed regime, determinism") {
    IneqForm f;
    f.tag = FormTag::thm2;
    f.alpha = 2.0;

    CHECK_THROWS_AS(qhat_estimate(f, 1.0, 0.0, 0.01, 0.999, pol), DomainError);
    CHECK_THROWS_AS(qhat_estimate(f, 1.0, 0.02, 0.01, 0.999, pol), DomainError);
    CHECK_THROWS_AS(qhat_estimate(f, 1.0, 1e-3, 0.9, 0.5, pol), DomainError);

    // guaranteed regime: holds on the whole scanned grid
    auto est = qhat_estimate(f, 1.0, 0.01, 0.05, 0.95, pol);
    CHECK(est.held_on_all_grid);
    CHECK(est.qhat == Approx(0.05));
    CHECK(!est.witness_below.has_value());
    CHECK(est.inconclusive.empty());

    // same call, same answer
    auto est2 = qhat_estimate(f, 1.0, 0.01, 0.05, 0.95, pol);
    CHECK(est.qhat == est2.qhat);

    // nowhere evaluable: x outside the form's domain at every q
    IneqForm g;
    g.tag = FormTag::thm1;
    g.n = 3;
    CHECK_THROWS_AS(qhat_estimate(g, -2.0, 0.01, 0.05, 0.95, pol), DomainError);
}

TEST_CASE("q-hat estimator on the negative-x slices is self-consistent") {
    // Measured behavior of the real-exponent margin on (-1, 0): it holds at
    // every scanned q, so the estimator reports the bottom of the range and
    // the re-verification above qhat must certify.
    IneqForm f;
    f.tag = FormTag::thm2;
    f.alpha = 2.5;
    auto est = qhat_estimate(f, -0.5, 0.01, 0.05, 0.95, pol);
    CHECK(est.held_on_all_grid);
    CHECK(!est.witness_below.has_value());
    for (int i = 0; i < 20; ++i) {
        double q = est.qhat + est.grid_step +
                   (0.95 - est.qhat - est.grid_step) * (i / 19.0);
        CHECK(eval_margin(f, -0.5, P(q), pol).certified_nonneg());
    }
}

TEST_CASE("q-hat estimator locates a genuine flip at a negative order") {
    // For the split form with m = 2, n = -3 at x = -0.75 the margin is held
    // for q > |x| and certifiably violated below, with the flip pinned to the
    // pole of the reciprocal factor 1 + x/q at q = 0.75.  This drives the
    // witness-and-bisection branch end to end.
    IneqForm f;
    f.tag = FormTag::cor1;
    f.m = 2;
    f.n = -3;
    auto est = qhat_estimate(f, -0.75, 5e-3, 0.05, 0.95, pol);
    CHECK_FALSE(est.held_on_all_grid);
    REQUIRE(est.witness_below.has_value());
    CHECK(est.witness_below->second.certified_violation());
    CHECK(est.witness_below->first <= est.qhat + est.grid_step);
    CHECK(est.qhat == Approx(0.75).margin(1e-6));
    // margins straddle the estimate
    CHECK(eval_margin(f, -0.75, P(0.70), pol).certified_violation());
    CHECK(eval_margin(f, -0.75, P(0.90), pol).certified_nonneg());
    // reproducible bit for bit
    auto est2 = qhat_estimate(f, -0.75, 5e-3, 0.05, 0.95, pol);
    CHECK(est.qhat == est2.qhat);
    CHECK(est.witness_below->first == est2.witness_below->first);
}

TEST_CASE("counterexample search respects its budget and seed") {
    Box box;
    box.x_lo = 0.0;
    box.x_hi = 1.0;
    box.n_lo = 1;
    box.n_hi = 5;
    auto w = counterexample_search(FormTag::thm1, box, 2000, 42, pol);
    CHECK(!w.has_value()); // the guaranteed regime has no counterexamples

    Box neg;
    neg.x_lo = -0.9;
    neg.x_hi = -0.1;
    neg.alpha_lo = 0.1;
    neg.alpha_hi = 5.0;
    auto v1 = counterexample_search(FormTag::thm2, neg, 500, 7, pol);
    auto v2 = counterexample_search(FormTag::thm2, neg, 500, 7, pol);
    CHECK(v1.has_value() == v2.has_value());
    if (v1 && v2) {
        CHECK(v1->q == v2->q);
        CHECK(v1->x == v2->x);
    }
}

TEST_CASE("counterexample search finds genuine violations at negative orders") {
    // For n < 0 the left side 1/(1 + q^{-1}x)...(1 + q^{-|n|}x) changes sign
    // between its poles in (-1, 0), so the unguaranteed region really does
    // contain certified violations -- the search must surface one.
    Box box;
    box.q_lo = 0.3;
    box.q_hi = 0.7;
    box.x_lo = -0.95;
    box.x_hi = -0.55;
    box.n_lo = -3;
    box.n_hi = -1;
    box.m_lo = 1;
    box.m_hi = 2;
    auto w = counterexample_search(FormTag::cor1, box, 500, 11, pol);
    REQUIRE(w.has_value());
    CHECK(w->margin.certified_violation());
    CHECK(w->q >= box.q_lo);
    CHECK(w->q <= box.q_hi);
    CHECK(w->x >= box.x_lo);
    CHECK(w->x <= box.x_hi);
    CHECK(w->form.n < 0);
    // the witness is reproducible bit for bit
    auto w2 = counterexample_search(FormTag::cor1, box, 500, 11, pol);
    REQUIRE(w2.has_value());
    CHECK(w->q == w2->q);
    CHECK(w->x == w2->x);
    CHECK(w->margin.value == w2->margin.value);
}
