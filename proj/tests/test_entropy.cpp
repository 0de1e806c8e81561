#include <doctest.h>

#include <cmath>

#include "popbal/entropy_growth.hpp"

using namespace popbal;

namespace {
ParticleEnsemble line_ensemble(int n) {
    ParticleEnsemble e;
    e.dim = 1;
    e.grid_n = n;
    e.pos.resize(n);
    e.w.assign(n, 1.0 / n);
    e.v.assign(n, 0.0);
    for (int i = 0; i < n; ++i) e.pos[i] = (i + 0.5) / n;
    return e;
}
}  // namespace

TEST_CASE("discrete weighted entropy: uniform, point mass, scaling") {
    auto e = line_ensemble(16);
    // v proportional to w: the density is uniform, entropy zero.
    for (int i = 0; i < 16; ++i) e.v[i] = 3.0 * e.w[i];
    CHECK(ensemble_entropy(e) == doctest::Approx(0.0));

    // All mass on one particle: entropy is ln(w) = -ln N.
    auto p = line_ensemble(16);
    p.v[7] = 42.0;
    CHECK(ensemble_entropy(p) == doctest::Approx(-std::log(16.0)));

    // Scale invariance of the mass weights.
    auto s = line_ensemble(16);
    for (int i = 0; i < 16; ++i) s.v[i] = std::exp(-0.1 * i) * s.w[i];
    const double before = ensemble_entropy(s);
    for (auto& vi : s.v) vi *= 1234.5;
    CHECK(ensemble_entropy(s) == doctest::Approx(before).epsilon(1e-12));

    // Upper bound on the unit interval: 0, attained only by uniform.
    CHECK(before < 0.0);
    auto zero = line_ensemble(8);
    CHECK_THROWS(ensemble_entropy(zero));
}

TEST_CASE("entropy dominance of spread over concentrated densities") {
    auto tight = line_ensemble(50);
    auto wide = line_ensemble(50);
    for (int i = 0; i < 50; ++i) {
        const double x = (i + 0.5) / 50;
        tight.v[i] = std::exp(-0.5 * std::pow((x - 0.5) / 0.03, 2));
        wide.v[i] = std::exp(-0.5 * std::pow((x - 0.3) / 0.12, 2)) +
                    std::exp(-0.5 * std::pow((x - 0.7) / 0.12, 2));
    }
    CHECK(ensemble_entropy(wide) > ensemble_entropy(tight));
}

TEST_CASE("growth response families") {
    // Hill: r0 at E=0, 1.5 r0 at E=theta, 2 r0 in the limit.
    CHECK(growth_response(0.0, GrowthResponseKind::hill, 9.0) == doctest::Approx(0.0182));
    CHECK(growth_response(9.0, GrowthResponseKind::hill, 9.0) == doctest::Approx(0.0273));
    CHECK(growth_response(1e3, GrowthResponseKind::hill, 9.0) == doctest::Approx(2 * 0.0182).epsilon(1e-9));
    CHECK(growth_response(9.0, GrowthResponseKind::hill, 7.0) > growth_response(9.0, GrowthResponseKind::hill, 9.0));
    // Linear: r0 at E=8.
    CHECK(growth_response(8.0, GrowthResponseKind::linear, 9.0) == doctest::Approx(0.0182));
    CHECK(growth_response(9.0, GrowthResponseKind::linear, 9.0) == doctest::Approx(0.0282));
    CHECK_THROWS(growth_response(-1.0, GrowthResponseKind::hill, 9.0));
    CHECK_THROWS(parse_response_kind("sigmoid"));
    CHECK(parse_response_kind("hill") == GrowthResponseKind::hill);
}

TEST_CASE("field entropy matches the ensemble form and scales with the axis") {
    auto e = line_ensemble(50);
    for (int i = 0; i < 50; ++i) {
        const double x = (i + 0.5) / 50;
        e.v[i] = std::exp(-0.5 * std::pow((x - 0.4) / 0.1, 2)) / 50;
    }
    const auto field = regularize(e, 0.8);
    const double h_norm = field_entropy(field);
    const double h_mol = field_entropy(field, false, std::log(25e3));
    CHECK(h_mol - h_norm == doctest::Approx(std::log(25e3)));
    CHECK(h_norm < 0.0);
    CHECK(h_mol > 8.0);  // a ~2.5K-molecule-wide band on the 25K axis
}

TEST_CASE("named initial supports hold 100 cells") {
    const auto ra = default_reduced_advection();
    for (auto kind : {EntropyInitial::ep, EntropyInitial::hyb, EntropyInitial::mes,
                      EntropyInitial::ep_mes, EntropyInitial::unif}) {
        const auto u0 = entropy_initial_density(kind, ra);
        const int q = 100000;
        double mass = 0;
        for (int i = 0; i < q; ++i) {
            const double x[1] = {25e3 * (i + 0.5) / q};
            mass += u0(x) * 25e3 / q;
        }
        CHECK(mass == doctest::Approx(100.0).epsilon(1e-3));
    }
    // The pure supports are disjoint bands around the stable roots.
    const auto u_ep = entropy_initial_density(EntropyInitial::ep, ra);
    const auto u_mes = entropy_initial_density(EntropyInitial::mes, ra);
    const double at_ep[1] = {ra.poly(Branch::ep)(200e3)};
    const double at_mes[1] = {ra.poly(Branch::mes)(200e3)};
    CHECK(u_ep(at_ep) > 0);
    CHECK(u_ep(at_mes) == 0.0);
    CHECK(u_mes(at_mes) > 0);
    CHECK(u_mes(at_ep) == 0.0);
}

TEST_CASE("entropy-coupled run: plateau toward the death-link fixed point") {
    const auto ra = default_reduced_advection();
    EntropyModelParams p;
    p.response = GrowthResponseKind::linear;
    std::vector<double> checkpoints;
    for (double t = 24; t <= 480; t += 24) checkpoints.push_back(t);
    const auto u0 = entropy_initial_density(EntropyInitial::unif, ra);
    const auto res = run_entropy_model(u0, checkpoints, p, ra);
    REQUIRE(res.rho.size() == checkpoints.size());
    // rho approaches r(E)/d(E) = 10K (up to restart leakage drag).
    CHECK(res.rho.back() == doctest::Approx(10e3).epsilon(0.10));
    // entropy settles between the pure-band and uniform levels
    CHECK(res.entropy.back() > 8.0);
    CHECK(res.entropy.back() < std::log(25e3) + 1e-9);
    // mass stays positive throughout
    for (double r : res.rho) CHECK(r > 0);
}

TEST_CASE("entropy coupling is monotone in the pre-mixing transient") {
    // Two initial densities with the same mass but different spread: under
    // the linear response the broader one must grow faster early on.
    const auto ra = default_reduced_advection();
    EntropyModelParams p;
    p.response = GrowthResponseKind::linear;
    const auto u_lo = entropy_initial_density(EntropyInitial::ep, ra);
    const auto u_hi = entropy_initial_density(EntropyInitial::unif, ra);
    const std::vector<double> checkpoints = {24, 48};
    const auto r_lo = run_entropy_model(u_lo, checkpoints, p, ra);
    const auto r_hi = run_entropy_model(u_hi, checkpoints, p, ra);
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        CHECK(r_hi.entropy[i] > r_lo.entropy[i]);
        CHECK(r_hi.rho[i] > r_lo.rho[i]);
    }
}
