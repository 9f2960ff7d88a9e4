#include <catch2/catch_amalgamated.hpp>

#include <qbern/pochhammer.hpp>

#include <cmath>
#include <random>

#include "oracle.hpp"

using namespace qbern;
using Catch::Approx;

namespace {
QParams P(double q) { return QParams(q); }
} // namespace

TEST_CASE("finite shifted factorial: hand-checked values") {
    // (3 - 1)(3 - 0.5) = 5
    CHECK(pochhammer_fin(3.0, 1.0, 2, P(0.5)) == Approx(5.0).epsilon(1e-15));
    // (1 + 1)(1 + 0.5)(1 + 0.25) = 3.75
    CHECK(pochhammer_fin(1.0, -1.0, 3, P(0.5)) == Approx(3.75).epsilon(1e-15));
    // empty product
    CHECK(pochhammer_fin(7.3, 2.1, 0, P(0.5)) == 1.0);
    CHECK_THROWS_AS(pochhammer_fin(1.0, 1.0, -1, P(0.5)), DomainError);
}

TEST_CASE("negative-order shifted factorial") {
    // 1 / ((5 - 4*1)(5 - 2*1)) = 1/3
    CHECK(pochhammer_neg(5.0, 1.0, 2, P(0.5)) == Approx(1.0 / 3.0).epsilon(1e-15));
    // 1 / (3 - 2) = 1
    CHECK(pochhammer_neg(3.0, 1.0, 1, P(0.5)) == Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(pochhammer_neg(1.0, 1.0, 0, P(0.5)), DomainError);

    // x = q^{-1} a lands exactly on the pole
    try {
        pochhammer_neg(2.0, 1.0, 1, P(0.5));
        FAIL("expected SingularPoint");
    } catch (const SingularPoint& s) {
        CHECK(s.factor_index() == 0);
    }
}

TEST_CASE("negative order inverts positive order across the index shift") {
    // (x - a)_{-n} * (x - q^{-n} a)_n == 1 by construction; probe it numerically
    // on points away from the poles.
    QParams p(0.7);
    std::mt19937_64 rng(91);
    auto unif = [&](double lo, double hi) {
        return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
    };
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + int(rng() % 5);
        double a = unif(0.1, 0.9);
        double x = unif(3.0, 8.0); // well away from q^{-k} a for these a, n
        double lhs = pochhammer_neg(x, a, n, p);
        double rhs = pochhammer_fin(x, std::pow(p.q(), -n) * a, n, p);
        CHECK(lhs * rhs == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("one_plus_fin mirrors the shifted factorial with a = -x") {
    QParams p(0.35);
    for (double x : {-0.8, -0.2, 0.0, 0.4, 1.7, 6.0}) {
        for (int n : {0, 1, 2, 5, 11}) {
            CHECK(one_plus_fin(x, n, p) ==
                  Approx(pochhammer_fin(1.0, -x, n, p)).epsilon(1e-14));
        }
    }
    CHECK(one_plus_fin(0.0, 9, p) == 1.0);
}

TEST_CASE("one_plus_int handles zero and negative orders") {
    QParams p(0.5);
    CHECK(one_plus_int(0.3, 0, p) == 1.0);
    for (double x : {0.25, 1.0, 2.5}) {
        for (int k : {1, 2, 4}) {
            double direct = one_plus_int(x, k, p);
            double inv = one_plus_int(x, -k, p);
            // (1+x)^{-k} * (1 + q^{-k} x)^{k} == 1 in the q-power calculus
            double recon = pochhammer_fin(1.0, -std::pow(p.q(), -k) * x, k, p);
            CHECK(inv * recon == Approx(1.0).epsilon(1e-12));
            CHECK(direct == Approx(pochhammer_fin(1.0, -x, k, p)).epsilon(1e-14));
        }
    }
}

TEST_CASE("infinite product: fixed points and certified tails") {
    TruncationPolicy pol;

    SECTION("x = 0 gives exactly 1") {
        auto r = one_plus_inf(0.0, P(0.5), pol);
        CHECK(r.value == 1.0);
        CHECK(r.tail_bound <= pol.eps_tail);
    }

    SECTION("x = -1 kills the first factor exactly") {
        auto r = one_plus_inf(-1.0, P(0.5), pol);
        CHECK(r.value == 0.0);
        CHECK(r.tail_bound == 0.0);
    }

    SECTION("x below -1 is outside the domain") {
        CHECK_THROWS_AS(one_plus_inf(-1.5, P(0.5), pol), DomainError);
    }

    SECTION("frozen reference value at x = 1, q = 0.5") {
        auto r = one_plus_inf(1.0, P(0.5), pol);
        CHECK(r.value == Approx(4.768462058062743448).epsilon(1e-13));
        CHECK(r.tail_bound <= pol.eps_tail);
        CHECK(r.terms_used <= pol.max_terms);

        double ref = oracle::as_double(oracle::one_plus_inf(oracle::hp(1), oracle::hp(0.5)));
        CHECK(r.value == Approx(ref).epsilon(1e-13));
    }

    SECTION("frozen reference value at x = -0.7, q = 0.3") {
        auto r = one_plus_inf(-0.7, P(0.3), pol);
        CHECK(r.value == Approx(0.2161104305615118467).epsilon(1e-13));
        double ref = oracle::as_double(oracle::one_plus_inf(oracle::hp(-0.7), oracle::hp(0.3)));
        CHECK(r.value == Approx(ref).epsilon(1e-13));
    }

    SECTION("undersized term budget raises, carrying the achieved bound") {
        TruncationPolicy tiny{1e-14, 5};
        try {
            one_plus_inf(1.0, P(0.9), tiny);
            FAIL("expected TruncationBudgetExceeded");
        } catch (const TruncationBudgetExceeded& e) {
            CHECK(e.achieved_tail_bound() > 1e-14);
            CHECK(e.terms_used() == 5);
        }
    }
}

TEST_CASE("infinite product telescopes: f(x) = (1 + x) f(qx)") {
    TruncationPolicy pol;
    for (double q : {0.2, 0.5, 0.8}) {
        QParams p(q);
        for (double x : {-0.9, -0.3, 0.4, 1.0, 3.0}) {
            double lhs = one_plus_inf(x, p, pol).value;
            double rhs = (1.0 + x) * one_plus_inf(q * x, p, pol).value;
            CHECK(lhs == Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("real-exponent power: exact and frozen points") {
    TruncationPolicy pol;

    SECTION("alpha = 0 is exactly 1") {
        CHECK(one_plus_real(0.37, 0.0, P(0.6), pol).value == 1.0);
    }

    SECTION("integer alpha collapses to the finite product") {
        for (double q : {0.3, 0.7}) {
            QParams p(q);
            for (int n : {1, 2, 3, 7, 10}) {
                for (double x : {-0.5, 0.25, 1.5}) {
                    double via_real = one_plus_real(x, double(n), p, pol).value;
                    double via_fin = one_plus_fin(x, n, p);
                    CHECK(via_real == Approx(via_fin).epsilon(1e-12));
                }
            }
        }
    }

    SECTION("(1 + 1)^{(2)} at q = 0.5 is 3") {
        CHECK(one_plus_real(1.0, 2.0, P(0.5), pol).value == Approx(3.0).epsilon(1e-12));
    }

    SECTION("frozen non-integer point") {
        auto r = one_plus_real(0.5, 1.7, P(0.9), pol);
        CHECK(r.value == Approx(1.952237381052400780).epsilon(1e-12));
        double ref = oracle::as_double(
            oracle::one_plus_real(oracle::hp(0.5), oracle::hp(1.7), oracle::hp(0.9)));
        CHECK(r.value == Approx(ref).epsilon(1e-12));
    }

    SECTION("positivity for x > -1") {
        std::mt19937_64 rng(7);
        auto unif = [&](double lo, double hi) {
            return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
        };
        for (int trial = 0; trial < 300; ++trial) {
            double q, x, a;
            do {
                q = unif(0.05, 0.95);
                x = unif(-0.99, 4.0);
                a = unif(-3.0, 3.0);
            } while (!(std::pow(q, a) * x > -0.95)); // denominator argument in range
            auto r = one_plus_real(x, a, P(q), pol);
            CHECK(r.value > 0.0);
        }
    }

    SECTION("shifted argument below -1 is rejected") {
        // q^alpha x with alpha = -2, q = 0.5 scales x by 4
        CHECK_THROWS_AS(one_plus_real(-0.3, -2.0, P(0.5), pol), DomainError);
    }

    SECTION("deterministic: repeated calls agree bit for bit") {
        auto a = one_plus_real(0.5, 1.7, P(0.9), pol);
        auto b = one_plus_real(0.5, 1.7, P(0.9), pol);
        CHECK(a.value == b.value);
        CHECK(a.tail_bound == b.tail_bound);
    }
}

TEST_CASE("real-exponent power survives q close to 1") {
    // Individual infinite products overflow well before q = 1 - 1e-4; the
    // log-domain ratio must still land near the classical power (1 + x)^alpha.
    TruncationPolicy wide{1e-12, 2000000};
    QParams p(1.0 - 1e-4, {1e-9, 1.0 - 1e-9});
    for (double x : {0.5, 1.0, 2.0}) {
        for (double alpha : {0.5, 1.0, 2.0, 3.3}) {
            double got = one_plus_real(x, alpha, p, wide).value;
            double classical = std::pow(1.0 + x, alpha);
            CHECK(got == Approx(classical).epsilon(1e-2));
        }
    }
}

TEST_CASE("exponent addition residual is tiny inside the domain") {
    TruncationPolicy pol;
    std::mt19937_64 rng(123);
    auto unif = [&](double lo, double hi) {
        return lo + (hi - lo) * ((rng() >> 11) * 0x1.0p-53);
    };
    for (int trial = 0; trial < 400; ++trial) {
        double q = unif(0.1, 0.9);
        double x = unif(-0.9, 2.0);
        double a = unif(-1.5, 2.0);
        double b = unif(-1.5, 2.0);
        // keep every shifted argument above -1
        double worst = std::min({x, std::pow(q, a) * x, std::pow(q, a + b) * x});
        if (worst <= -0.95) continue;
        CHECK(exponent_addition_residual(x, a, b, QParams(q), pol) < 1e-10);
    }

    CHECK(exponent_addition_residual(0.7, 0.0, 1.3, P(0.5), pol) < 1e-12);
    CHECK(exponent_addition_residual(0.7, 1.3, 0.0, P(0.5), pol) < 1e-12);
}
