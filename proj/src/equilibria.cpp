#include "popbal/equilibria.hpp"

#include <algorithm>
#include <cmath>

namespace popbal {

double zeb_nullcline(double mu200, double snail, const EmtCoreParams& p) {
    const double production_scale =
        p.g_z * p.g_mz * shifted_hill(snail, p.h_s_mz) * translation_p(mu200, p.tables, p.k_mz);
    auto g = [&](double z) {
        return production_scale * shifted_hill(z, p.h_z_mz) - p.k_z * z;
    };
    // g(0) > 0 and the Hill factor is bounded by max(1, lambda), so the root
    // lies below production_scale * max(1, lambda) / k_z.
    double hi = production_scale * std::max(1.0, p.h_z_mz.lambda) / p.k_z * (1.0 + 1e-9) + 1.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-9 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

namespace {

double mu_residual(double mu, double snail, const EmtCoreParams& p) {
    const double z = zeb_nullcline(mu, snail, p);
    return emt_core_rhs(mu, z, snail, p)[0];
}

bool is_stable(double mu, double z, double snail, const EmtCoreParams& p, double fd_rel) {
    const double h_mu = fd_rel * std::max(mu, 1e3);
    const double h_z = fd_rel * std::max(z, 1e3);
    const auto safe_rhs = [&](double m, double zz) {
        return emt_core_rhs(std::max(m, 0.0), std::max(zz, 0.0), snail, p);
    };
    const auto f_mu_p = safe_rhs(mu + h_mu, z);
    const auto f_mu_m = safe_rhs(mu - h_mu, z);
    const auto f_z_p = safe_rhs(mu, z + h_z);
    const auto f_z_m = safe_rhs(mu, z - h_z);
    const double j00 = (f_mu_p[0] - f_mu_m[0]) / (2 * h_mu);
    const double j10 = (f_mu_p[1] - f_mu_m[1]) / (2 * h_mu);
    const double j01 = (f_z_p[0] - f_z_m[0]) / (2 * h_z);
    const double j11 = (f_z_p[1] - f_z_m[1]) / (2 * h_z);
    const double trace = j00 + j11;
    const double det = j00 * j11 - j01 * j10;
    return trace < 0 && det > 0;
}

}  // namespace

std::vector<Equilibrium> find_equilibria(double snail, const EmtCoreParams& p,
                                         const EquilibriumOptions& opts) {
    std::vector<Equilibrium> out;
    const int n = opts.scan_points;
    const double dmu = opts.mu_max / n;

    double prev_mu = 0.0;
    double prev_g = mu_residual(prev_mu, snail, p);
    for (int i = 1; i <= n; ++i) {
        const double mu = i * dmu;
        const double g = mu_residual(mu, snail, p);
        if (prev_g == 0.0 || prev_g * g < 0) {
            double lo = prev_mu, hi = mu, g_lo = prev_g;
            if (g_lo == 0.0) {
                hi = lo;
            } else {
                for (int it = 0; it < 100; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double g_mid = mu_residual(mid, snail, p);
                    if (g_lo * g_mid <= 0)
                        hi = mid;
                    else {
                        lo = mid;
                        g_lo = g_mid;
                    }
                    if (hi - lo < opts.tol * opts.mu_max) break;
                }
            }
            Equilibrium eq;
            eq.mu200 = 0.5 * (lo + hi);
            eq.zeb = zeb_nullcline(eq.mu200, snail, p);
            eq.stable = is_stable(eq.mu200, eq.zeb, snail, p, opts.fd_step_rel);
            // Drop duplicates produced by a sign change landing on a grid node.
            if (out.empty() || std::abs(out.back().mu200 - eq.mu200) > 10 * opts.tol * opts.mu_max)
                out.push_back(eq);
        }
        prev_mu = mu;
        prev_g = g;
    }
    return out;
}

}  // namespace popbal
