#pragma once

#include <vector>

#include "popbal/regulatory.hpp"

namespace popbal {

struct Equilibrium {
    double mu200 = 0;
    double zeb = 0;
    bool stable = false;
};

struct EquilibriumOptions {
    double mu_max = 25e3;     // scan range [0, mu_max]
    int scan_points = 500;    // bracketing resolution
    double tol = 1e-7;        // relative tolerance on mu roots
    double fd_step_rel = 1e-4;  // Jacobian finite-difference step, relative to state scale
};

// ZEB component of the nullcline: the unique Z >= 0 with dZ/dt = 0 at fixed
// (mu200, S). Solved by bisection; the production term is bounded so a
// bracketing upper bound is available in closed form.
double zeb_nullcline(double mu200, double snail, const EmtCoreParams& p);

// All equilibria of the two-variable core model at fixed S, sorted by
// ascending mu200, classified by the sign structure of the finite-difference
// Jacobian (2x2: stable iff trace < 0 and det > 0).
std::vector<Equilibrium> find_equilibria(double snail, const EmtCoreParams& p = {},
                                         const EquilibriumOptions& opts = {});

}  // namespace popbal
