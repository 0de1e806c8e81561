#pragma once

#include <array>
#include <string>
#include <vector>

#include "popbal/equilibria.hpp"
#include "popbal/integrate.hpp"
#include "popbal/regulatory.hpp"

namespace popbal {

enum class Branch { mes = 0, u1 = 1, hyb = 2, u2 = 3, ep = 4 };

// Degree-5 interpolant of one equilibrium branch mu*(S), coefficients stored
// high order first (a5..a0), evaluated by Horner on raw molecule counts.
struct BranchPolynomial {
    std::array<double, 6> coeffs{};  // a5, a4, a3, a2, a1, a0
    Branch role = Branch::mes;

    double operator()(double snail) const {
        double acc = 0;
        for (double c : coeffs) acc = acc * snail + c;
        return acc;
    }
};

// Contiguous S-intervals on which the core model is mono-, bi- or tristable.
struct StabilityIntervals {
    double s_min = 150e3;
    double ep_mes_begin = 185270.541082;      // epithelial/mesenchymal bistability onset
    double tristable_begin = 193286.5731462;  // hybrid branch appears
    double tristable_end = 208817.635271;     // epithelial branch disappears
    double hyb_mes_end = 224649.298597;       // hybrid branch disappears
    double s_max = 250e3;

    bool in_ep(double s) const { return s >= s_min && s < ep_mes_begin; }
    bool in_ep_mes(double s) const { return s >= ep_mes_begin && s < tristable_begin; }
    bool in_tristable(double s) const { return s >= tristable_begin && s < tristable_end; }
    bool in_hyb_mes(double s) const { return s >= tristable_end && s < hyb_mes_end; }
    bool in_mes(double s) const { return s >= hyb_mes_end && s <= s_max; }
};

// Validity spans of the five branches (closed intervals in S).
struct BranchValidity {
    double lo, hi;
    bool contains(double s) const { return s >= lo && s <= hi; }
};
BranchValidity branch_validity(Branch b, const StabilityIntervals& iv = {});

// One-dimensional reduced advection f_r(x, S) = k * f~(x, S): for each S a
// continuous piecewise-linear function with slope -+k whose zeros are the
// valid branch values, breakpoints at midpoints between adjacent roots.
// Stable roots attract (negative slope segment through them).
struct ReducedAdvection {
    std::array<BranchPolynomial, 5> polys;  // indexed by Branch
    StabilityIntervals intervals;
    double k = 0.02;  // per hour

    double value(double x, double snail) const;
    // +-k on the active linear segment; left-segment value at breakpoints.
    double divergence(double x, double snail) const;
    // Valid roots at S, ascending (alternating stable/unstable, odd count).
    std::vector<double> zeros(double snail) const;
    std::vector<double> stable_roots(double snail) const;

    const BranchPolynomial& poly(Branch b) const { return polys[static_cast<int>(b)]; }
};

ReducedAdvection build_reduced(const std::array<BranchPolynomial, 5>& polys,
                               const StabilityIntervals& intervals, double k);

// The branch interpolants exactly as published (all five columns).
std::array<BranchPolynomial, 5> published_branch_polynomials();

// Working reduced advection, k = 0.02: published stable branches, with the
// unstable separators regenerated from the equilibrium finder (the published
// u1/u2 columns contradict the fold structure; see the implementation note).
ReducedAdvection default_reduced_advection();

// Regenerates the five interpolants from the equilibrium finder by
// least-squares fitting degree-5 polynomials over each validity interval.
std::array<BranchPolynomial, 5> fit_branch_polynomials(const EmtCoreParams& p = {},
                                                       int samplesitv = 160);

// Calibration of the slope magnitude k: grid of 1D trajectories under
// k * f~(., S) against 2D trajectories of the core model, scored by the
// time-averaged |x(t) - mu200(t)| Riemann sum over all initial conditions.
struct CalibrationGrid {
    int n_s = 20;
    int n_x = 20;
    int n_z = 20;
    int n_t = 100;
};

struct CalibrationReport {
    std::vector<double> candidates;
    std::vector<double> discrepancy;  // same order as candidates
    double selected = 0;
};

CalibrationReport calibrate_k(const std::vector<double>& candidates, double horizon,
                              const CalibrationGrid& grid = {},
                              const std::array<BranchPolynomial, 5>* polys = nullptr,
                              const EmtCoreParams& p = {}, const IntegratorConfig& cfg = {});

}  // namespace popbal
