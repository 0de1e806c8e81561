#include <doctest.h>

#include <cmath>

#include "popbal/equilibria.hpp"
#include "popbal/reduction.hpp"

using namespace popbal;

TEST_CASE("zeb nullcline solves dZ/dt = 0") {
    const EmtCoreParams p;
    for (double mu : {0.0, 5e3, 12e3, 22e3}) {
        for (double s : {160e3, 200e3, 240e3}) {
            const double z = zeb_nullcline(mu, s, p);
            CHECK(std::abs(emt_core_rhs(mu, z, s, p)[1]) < 1e-4 * p.k_z * std::max(z, 1.0));
        }
    }
}

TEST_CASE("equilibria at S = 200K: tristable structure") {
    const auto eqs = find_equilibria(200e3);
    REQUIRE(eqs.size() == 5);
    // Frozen from the bisection root-finder at tol 1e-7.
    const double mu_expect[5] = {1714.12, 4038.29, 11690.08, 15781.79, 18668.22};
    const bool stable_expect[5] = {true, false, true, false, true};
    for (int i = 0; i < 5; ++i) {
        CHECK(eqs[i].mu200 == doctest::Approx(mu_expect[i]).epsilon(1e-3));
        CHECK(eqs[i].stable == stable_expect[i]);
        // Verify both components vanish at the root.
        const auto f = emt_core_rhs(eqs[i].mu200, eqs[i].zeb, 200e3, {});
        CHECK(std::abs(f[0]) < 0.05);
        CHECK(std::abs(f[1]) < 0.5);
    }
}

TEST_CASE("stable-equilibrium counts over the five S-windows") {
    // Published interval endpoints; sampling stays 350 molecules clear of the
    // fold points (the recomputed folds sit within ~200 molecules of the
    // published ones).
    const StabilityIntervals iv{};
    const double bounds[6] = {iv.s_min, iv.ep_mes_begin, iv.tristable_begin,
                              iv.tristable_end, iv.hyb_mes_end, iv.s_max};
    const int expect_stable[5] = {1, 2, 3, 2, 1};
    const int expect_total[5] = {1, 3, 5, 3, 1};
    const double inset = 350.0;
    for (int seg = 0; seg < 5; ++seg) {
        for (int i = 0; i < 9; ++i) {
            const double s =
                bounds[seg] + inset + (bounds[seg + 1] - bounds[seg] - 2 * inset) * i / 8.0;
            const auto eqs = find_equilibria(s);
            int stable = 0;
            for (const auto& e : eqs) stable += e.stable;
            CAPTURE(s);
            CHECK(static_cast<int>(eqs.size()) == expect_total[seg]);
            CHECK(stable == expect_stable[seg]);
        }
    }
}

TEST_CASE("epithelial branch tracks the published interpolant within 1%") {
    const auto polys = published_branch_polynomials();
    const auto& ep = polys[static_cast<int>(Branch::ep)];
    const auto valid = branch_validity(Branch::ep);
    for (int i = 0; i < 40; ++i) {
        const double s = valid.lo + (valid.hi - valid.lo) * (0.005 + 0.99 * i / 39.0);
        const auto eqs = find_equilibria(s);
        REQUIRE(!eqs.empty());
        const double root = eqs.back().mu200;  // highest root = epithelial
        CHECK(std::abs(root - ep(s)) / root < 0.01);
    }
}

TEST_CASE("hysteresis branch gap at S = 200K") {
    // Epithelial vs mesenchymal branch separation underlying the loop width.
    const auto eqs = find_equilibria(200e3);
    REQUIRE(eqs.size() == 5);
    CHECK(eqs.back().mu200 - eqs.front().mu200 > 5e3);
}
