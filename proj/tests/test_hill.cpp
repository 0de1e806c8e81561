#include <doctest.h>

#include <cmath>
#include <random>

#include "popbal/hill.hpp"

using namespace popbal;

TEST_CASE("shifted hill limits and threshold value") {
    const HillParams p{0.1, 220e3, 3};
    CHECK(shifted_hill(0.0, p) == doctest::Approx(1.0));
    CHECK(shifted_hill(p.x0, p) == doctest::Approx((1.0 + 0.1) / 2.0));  // = 0.55
    // Asymptotic approach to lambda; the tail scales as |1-lambda|/(x/x0)^n.
    CHECK(shifted_hill(100 * p.x0, p) == doctest::Approx(0.1).epsilon(1e-5));
    const HillParams p6{0.1, 1e3, 6};
    CHECK(std::abs(shifted_hill(100 * p6.x0, p6) - 0.1) < 1e-6);
    const HillParams p2{0.1, 1e3, 2};
    CHECK(std::abs(shifted_hill(100 * p2.x0, p2) - 0.1) < 1e-4);
}

TEST_CASE("shifted hill rejects negative input and bad parameters") {
    const HillParams p{0.5, 1e3, 2};
    CHECK_THROWS(shifted_hill(-1.0, p));
    CHECK_THROWS(HillParams(0.5, -1.0, 2));
    CHECK_THROWS(HillParams(0.5, 1.0, 0));
    CHECK_THROWS(HillParams(-0.1, 1.0, 2));
}

TEST_CASE("shifted hill stays between 1 and lambda") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> lam(0.0, 12.0), x0(10.0, 1e6), ratio(0.05, 30.0);
    std::uniform_int_distribution<int> nr(1, 8);
    for (int i = 0; i < 500; ++i) {
        const HillParams p{lam(rng), x0(rng), nr(rng)};
        if (p.lambda == 1.0) continue;
        // Strict inequality holds while (x/x0)^n stays well inside double
        // range; far beyond that the value saturates at lambda (to rounding).
        const double h = shifted_hill(ratio(rng) * p.x0, p);
        CHECK(h > std::min(1.0, p.lambda));
        CHECK(h < std::max(1.0, p.lambda));
        const double h_far = shifted_hill(1e8 * p.x0, p);
        CHECK(std::abs(h_far - p.lambda) < 2e-7);
    }
}

TEST_CASE("translation functions at zero") {
    const TranslationTables t;
    const auto v = translation_functions(0.0, t);
    CHECK(v.L == doctest::Approx(1.0));
    CHECK(v.Y_mu == doctest::Approx(0.0));
    CHECK(v.Y_m == doctest::Approx(0.0));
    CHECK(translation_p(0.0, t, 0.5) == doctest::Approx(2.0));
    CHECK(translation_q(0.0, t, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("translation functions at the half-saturation point") {
    // At mu = mu0 every M_n^i equals 1/2^6, so the sums reduce to weighted
    // binomial totals: L = (1 + 0.6*6 + 0.3*15 + 0.1*20 + 0.05*(15+6+1))/64.
    const TranslationTables t;
    const auto v = translation_functions(t.mu0, t);
    CHECK(v.L == doctest::Approx(12.2 / 64.0).epsilon(1e-12));
    CHECK(v.Y_m == doctest::Approx((0.04 * 6 + 0.2 * 15 + 20 + 15 + 6 + 1) / 64.0).epsilon(1e-12));
    CHECK(v.Y_mu ==
          doctest::Approx((0.005 * 6 + 2 * 0.05 * 15 + 3 * 0.5 * 20 + 4 * 0.5 * 15 + 5 * 0.5 * 6 +
                           6 * 0.5) /
                          64.0)
              .epsilon(1e-12));
}

TEST_CASE("translation functions direct-summation oracle") {
    // Independent recomputation with explicit powers, no shared code path.
    const TranslationTables t;
    const double binom[7] = {1, 6, 15, 20, 15, 6, 1};
    for (double mu : {123.0, 5e3, 10e3, 25e3, 250e3}) {
        double L = 0, Ymu = 0, Ym = 0;
        for (int i = 0; i <= 6; ++i) {
            const double m = std::pow(mu / t.mu0, i) / std::pow(1.0 + mu / t.mu0, 6);
            L += t.l[i] * binom[i] * m;
            if (i >= 1) {
                Ymu += i * t.gamma_mu[i - 1] * binom[i] * m;
                Ym += t.gamma_m[i - 1] * binom[i] * m;
            }
        }
        const auto v = translation_functions(mu, t);
        CHECK(v.L == doctest::Approx(L).epsilon(1e-12));
        CHECK(v.Y_mu == doctest::Approx(Ymu).epsilon(1e-12));
        CHECK(v.Y_m == doctest::Approx(Ym).epsilon(1e-12));
    }
    CHECK_THROWS(translation_functions(-1.0, t));
}
