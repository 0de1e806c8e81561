#include "popbal/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace popbal {

BranchValidity branch_validity(Branch b, const StabilityIntervals& iv) {
    switch (b) {
        case Branch::ep: return {iv.s_min, iv.tristable_end};
        case Branch::u2: return {iv.tristable_begin, iv.tristable_end};
        case Branch::hyb: return {iv.tristable_begin, iv.hyb_mes_end};
        case Branch::u1: return {iv.ep_mes_begin, iv.hyb_mes_end};
        case Branch::mes: return {iv.ep_mes_begin, iv.s_max};
    }
    throw std::logic_error("branch_validity: bad branch");
}

ReducedAdvection build_reduced(const std::array<BranchPolynomial, 5>& polys,
                               const StabilityIntervals& intervals, double k) {
    if (k <= 0) throw std::invalid_argument("build_reduced: k must be > 0");
    ReducedAdvection ra;
    ra.polys = polys;
    ra.intervals = intervals;
    ra.k = k;
    for (int i = 0; i < 5; ++i) ra.polys[i].role = static_cast<Branch>(i);
    return ra;
}

std::array<BranchPolynomial, 5> published_branch_polynomials() {
    std::array<BranchPolynomial, 5> polys{};
    polys[static_cast<int>(Branch::mes)].coeffs = {-6.109064e-21, 6.846339e-15, -3.065919e-09,
                                                   6.859093e-04, -7.668477e+01, 3.430402e+06};
    polys[static_cast<int>(Branch::u1)].coeffs = {2.504295e-19, -2.551948e-13, 1.039834e-07,
                                                  -2.117715e-02, 2.155712e+03, -8.774602e+07};
    polys[static_cast<int>(Branch::hyb)].coeffs = {-9.979604e-19, 1.044470e-12, -4.372031e-07,
                                                   9.149320e-02, -9.572462e+03, 4.005964e+08};
    polys[static_cast<int>(Branch::u2)].coeffs = {1.981710e-17, -1.996178e-11, 8.042697e-06,
                                                  -1.620159e+00, 1.631806e+05, -6.573913e+09};
    polys[static_cast<int>(Branch::ep)].coeffs = {-1.980683e-20, 1.727787e-14, -6.016556e-09,
                                                  1.045582e-03, -9.081813e+01, 3.1850617e+06};
    for (int i = 0; i < 5; ++i) polys[i].role = static_cast<Branch>(i);
    return polys;
}

ReducedAdvection default_reduced_advection() {
    // The published unstable-branch interpolants are inconsistent with the
    // published fold structure (u2 exits the phenotype domain and crosses the
    // epithelial branch, u1 misses its fold partner), which would leave the
    // reduced flow without an epithelial attractor in the tristable window.
    // The stable branches are kept verbatim; u1/u2 carry coefficients
    // regenerated from the equilibrium finder (fit_branch_polynomials).
    auto polys = published_branch_polynomials();
    polys[static_cast<int>(Branch::u1)].coeffs = {
        2.1239393158502227e-19, -2.1619560870344566e-13, 8.8003096891605847e-08,
        -0.017906068581859003, 1821.2353136114759, -74078147.727009982};
    polys[static_cast<int>(Branch::u2)].coeffs = {
        1.7622261132898883e-17, -1.7749014519673172e-11, 7.150468702392846e-06,
        -1.4403004855369221, 145054.4311802038, -5843300989.0083094};
    return build_reduced(polys, StabilityIntervals{}, 0.02);
}

std::vector<double> ReducedAdvection::zeros(double snail) const {
    if (snail < intervals.s_min || snail > intervals.s_max)
        throw std::domain_error("ReducedAdvection: S outside [150K, 250K]");
    // Roots ascend mes < u1 < hyb < u2 < ep, alternating stable/unstable,
    // first and last stable.
    if (intervals.in_ep(snail)) return {poly(Branch::ep)(snail)};
    if (intervals.in_ep_mes(snail))
        return {poly(Branch::mes)(snail), poly(Branch::u1)(snail), poly(Branch::ep)(snail)};
    if (intervals.in_tristable(snail))
        return {poly(Branch::mes)(snail), poly(Branch::u1)(snail), poly(Branch::hyb)(snail),
                poly(Branch::u2)(snail), poly(Branch::ep)(snail)};
    if (intervals.in_hyb_mes(snail))
        return {poly(Branch::mes)(snail), poly(Branch::u1)(snail), poly(Branch::hyb)(snail)};
    return {poly(Branch::mes)(snail)};
}

std::vector<double> ReducedAdvection::stable_roots(double snail) const {
    const auto r = zeros(snail);
    std::vector<double> out;
    for (std::size_t i = 0; i < r.size(); i += 2) out.push_back(r[i]);
    return out;
}

namespace {
// Segment index for x given ascending roots; breakpoints at midpoints belong
// to the left segment.
std::size_t segment_of(double x, const std::vector<double>& roots) {
    std::size_t seg = roots.size() - 1;
    for (std::size_t j = 0; j + 1 < roots.size(); ++j) {
        if (x <= 0.5 * (roots[j] + roots[j + 1])) {
            seg = j;
            break;
        }
    }
    return seg;
}
}  // namespace

double ReducedAdvection::value(double x, double snail) const {
    const auto roots = zeros(snail);
    const std::size_t seg = segment_of(x, roots);
    const double sign = (seg % 2 == 0) ? -1.0 : 1.0;  // stable roots sit on even segments
    return k * sign * (x - roots[seg]);
}

double ReducedAdvection::divergence(double x, double snail) const {
    const auto roots = zeros(snail);
    const std::size_t seg = segment_of(x, roots);
    return (seg % 2 == 0) ? -k : k;
}

std::array<BranchPolynomial, 5> fit_branch_polynomials(const EmtCoreParams& p, int samples) {
    const StabilityIntervals iv{};
    std::array<BranchPolynomial, 5> out{};

    // Expected position of each branch in the ascending equilibrium list, by
    // total root count at that S.
    auto branch_index = [](Branch b, std::size_t count) -> int {
        switch (b) {
            case Branch::mes: return count > 1 ? 0 : (count == 1 ? 0 : -1);
            case Branch::u1: return count >= 3 ? 1 : -1;
            case Branch::hyb: return count >= 3 ? 2 : -1;
            case Branch::u2: return count == 5 ? 3 : -1;
            case Branch::ep: return static_cast<int>(count) - 1;
        }
        return -1;
    };

    for (int bi = 0; bi < 5; ++bi) {
        const Branch b = static_cast<Branch>(bi);
        const auto valid = branch_validity(b, iv);
        const double inset = 0.005 * (valid.hi - valid.lo);

        std::vector<double> ss, mus;
        for (int i = 0; i < samples; ++i) {
            const double s = valid.lo + inset + (valid.hi - valid.lo - 2 * inset) * i / (samples - 1);
            const auto eqs = find_equilibria(s, p);
            // Root counts must match the regime for an unambiguous assignment.
            const std::size_t expected = iv.in_ep(s) || iv.in_mes(s) ? 1
                                         : iv.in_tristable(s)        ? 5
                                                                     : 3;
            if (eqs.size() != expected) continue;
            int idx = branch_index(b, eqs.size());
            if (b == Branch::mes && eqs.size() == 1 && !iv.in_mes(s)) continue;
            if (b == Branch::ep && eqs.size() == 1 && !iv.in_ep(s)) continue;
            if (idx < 0) continue;
            ss.push_back(s);
            mus.push_back(eqs[idx].mu200);
        }
        if (ss.size() < 12) throw std::runtime_error("fit_branch_polynomials: too few usable samples");

        // Least squares in the scaled variable t = S * 1e-5 (conditioning),
        // via Householder QR on the 6-column Vandermonde matrix.
        const double scale = 1e-5;
        const std::size_t m = ss.size();
        const int nc = 6;
        std::vector<double> a(m * nc);
        std::vector<double> rhs = mus;
        for (std::size_t r = 0; r < m; ++r) {
            double t = 1.0;
            for (int c = 0; c < nc; ++c) {
                a[r * nc + c] = t;
                t *= ss[r] * scale;
            }
        }
        for (int c = 0; c < nc; ++c) {
            double norm = 0;
            for (std::size_t r = c; r < m; ++r) norm += a[r * nc + c] * a[r * nc + c];
            norm = std::sqrt(norm);
            if (a[c * nc + c] > 0) norm = -norm;
            std::vector<double> vvec(m, 0.0);
            for (std::size_t r = c; r < m; ++r) vvec[r] = a[r * nc + c];
            vvec[c] -= norm;
            double vnorm2 = 0;
            for (std::size_t r = c; r < m; ++r) vnorm2 += vvec[r] * vvec[r];
            if (vnorm2 == 0) continue;
            for (int cc = c; cc < nc; ++cc) {
                double dot = 0;
                for (std::size_t r = c; r < m; ++r) dot += vvec[r] * a[r * nc + cc];
                const double f = 2.0 * dot / vnorm2;
                for (std::size_t r = c; r < m; ++r) a[r * nc + cc] -= f * vvec[r];
            }
            double dot = 0;
            for (std::size_t r = c; r < m; ++r) dot += vvec[r] * rhs[r];
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t r = c; r < m; ++r) rhs[r] -= f * vvec[r];
        }
        std::array<double, 6> c_scaled{};
        for (int r = nc - 1; r >= 0; --r) {
            double acc = rhs[r];
            for (int cc = r + 1; cc < nc; ++cc) acc -= a[r * nc + cc] * c_scaled[cc];
            c_scaled[r] = acc / a[r * nc + r];
        }
        BranchPolynomial bp;
        bp.role = b;
        double pw = 1.0;
        for (int i = 0; i < 6; ++i) {
            bp.coeffs[5 - i] = c_scaled[i] * pw;  // power i of S
            pw *= scale;
        }
        out[bi] = bp;
    }
    return out;
}

CalibrationReport calibrate_k(const std::vector<double>& candidates, double horizon,
                              const CalibrationGrid& grid, const std::array<BranchPolynomial, 5>* polys,
                              const EmtCoreParams& p, const IntegratorConfig& cfg) {
    if (candidates.empty()) throw std::invalid_argument("calibrate_k: empty candidate list");

    const auto branch_polys = polys ? *polys : default_reduced_advection().polys;
    std::vector<ReducedAdvection> reduced;
    reduced.reserve(candidates.size());
    for (double k : candidates) reduced.push_back(build_reduced(branch_polys, {}, k));

    std::vector<double> sample_t(grid.n_t);
    for (int i = 0; i < grid.n_t; ++i) sample_t[i] = (i + 1) * horizon / grid.n_t;

    std::vector<double> total(candidates.size(), 0.0);
    std::vector<double> mu_samples(static_cast<std::size_t>(grid.n_z) * grid.n_t);

    for (int j = 1; j <= grid.n_s; ++j) {
        const double s = 150e3 + j * 100e3 / grid.n_s;
        for (int kx = 1; kx <= grid.n_x; ++kx) {
            const double x0 = kx * 25e3 / grid.n_x;

            for (int l = 1; l <= grid.n_z; ++l) {
                const double z0 = l * 800e3 / grid.n_z;
                auto rhs2d = [&](double, const double* y, double* dy) {
                    const auto f = emt_core_rhs(std::max(y[0], 0.0), std::max(y[1], 0.0), s, p);
                    dy[0] = f[0];
                    dy[1] = f[1];
                };
                const double y0[2] = {x0, z0};
                const auto r = integrate(rhs2d, std::span<const double>(y0, 2), 0.0, horizon, cfg, sample_t);
                if (r.status != OdeStatus::ok || r.sample_t.size() != sample_t.size())
                    throw std::runtime_error("calibrate_k: 2D integration failed at S=" + std::to_string(s) +
                                             " x0=" + std::to_string(x0) + " Z0=" + std::to_string(z0));
                for (int i = 0; i < grid.n_t; ++i)
                    mu_samples[(l - 1) * grid.n_t + i] = r.sample_y[i][0];
            }

            for (std::size_t c = 0; c < candidates.size(); ++c) {
                const auto& ra = reduced[c];
                auto rhs1d = [&](double, const double* y, double* dy) { dy[0] = ra.value(y[0], s); };
                const double y0[1] = {x0};
                const auto r = integrate(rhs1d, std::span<const double>(y0, 1), 0.0, horizon, cfg, sample_t);
                if (r.status != OdeStatus::ok || r.sample_t.size() != sample_t.size())
                    throw std::runtime_error("calibrate_k: 1D integration failed at S=" + std::to_string(s) +
                                             " x0=" + std::to_string(x0));
                double acc = 0;
                for (int l = 0; l < grid.n_z; ++l)
                    for (int i = 0; i < grid.n_t; ++i)
                        acc += std::abs(r.sample_y[i][0] - mu_samples[l * grid.n_t + i]);
                total[c] += acc;
            }
        }
    }

    CalibrationReport rep;
    rep.candidates = candidates;
    rep.discrepancy.resize(candidates.size());
    const double norm = 1.0 / (static_cast<double>(grid.n_t) * grid.n_s * grid.n_x * grid.n_z);
    for (std::size_t c = 0; c < candidates.size(); ++c) rep.discrepancy[c] = total[c] * norm;
    rep.selected = rep.candidates[std::min_element(rep.discrepancy.begin(), rep.discrepancy.end()) -
                                  rep.discrepancy.begin()];
    return rep;
}

}  // namespace popbal
