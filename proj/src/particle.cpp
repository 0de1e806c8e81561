#include "popbal/particle.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace popbal {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;
}

PopulationModel rescale(const PopulationModel& m, const Rescaling& r) {
    const bool domain_matches = std::abs(m.lo[0] - r.b) < 1e-9 * r.a &&
                                std::abs(m.hi[0] - (r.b + r.a)) < 1e-9 * r.a &&
                                (m.dim == 1 || (std::abs(m.lo[1] - r.d) < 1e-9 * r.c &&
                                                std::abs(m.hi[1] - (r.d + r.c)) < 1e-9 * r.c));
    if (!domain_matches) throw std::invalid_argument("rescale: model domain does not match the rescaling");

    PopulationModel out;
    out.dim = m.dim;
    out.lo = {0.0, 0.0};
    out.hi = {1.0, 1.0};
    out.mutation_cutoff_sigmas = m.mutation_cutoff_sigmas;

    const int dim = m.dim;
    auto to_mol = [r, dim](const double* y, double* ym) {
        ym[0] = r.x_from_unit(y[0]);
        if (dim == 2) ym[1] = r.s_from_unit(y[1]);
    };
    out.advection = [m, r, to_mol](const double* y, double* f) {
        double ym[2], fm[2];
        to_mol(y, ym);
        m.advection(ym, fm);
        f[0] = fm[0] / r.a;
        if (m.dim == 2) f[1] = fm[1] / r.c;
    };
    // Divergence is invariant under the per-axis affine map.
    out.divergence = [m, to_mol](const double* y) {
        double ym[2];
        to_mol(y, ym);
        return m.divergence(ym);
    };
    out.growth = [m, to_mol](const double* y) {
        double ym[2];
        to_mol(y, ym);
        return m.growth(ym);
    };
    out.death = [m, to_mol](const double* y) {
        double ym[2];
        to_mol(y, ym);
        return m.death(ym);
    };
    if (m.mutation) out.mutation = MutationKernel{m.mutation->eta_x / r.a, m.mutation->eta_s / r.c};
    return out;
}

std::function<double(const double*)> rescale_density(const std::function<double(const double*)>& u0,
                                                     const Rescaling& r, int dim) {
    const double jacobian = dim == 2 ? r.a * r.c : r.a;
    return [u0, r, dim, jacobian](const double* y) {
        double ym[2] = {r.x_from_unit(y[0]), 0.0};
        if (dim == 2) ym[1] = r.s_from_unit(y[1]);
        return jacobian * u0(ym);
    };
}

double ParticleEnsemble::rho() const {
    double acc = 0;
    for (double vi : v) acc += vi;
    return acc;
}

ParticleEnsemble make_grid_ensemble(int n, int dim, const std::function<double(const double*)>& u0_unit) {
    if (n < 2) throw std::invalid_argument("make_grid_ensemble: n must be >= 2");
    if (dim != 1 && dim != 2) throw std::invalid_argument("make_grid_ensemble: dim must be 1 or 2");
    ParticleEnsemble e;
    e.dim = dim;
    e.grid_n = n;
    const int count = dim == 2 ? n * n : n;
    e.pos.resize(static_cast<std::size_t>(count) * dim);
    e.w.assign(count, 1.0 / count);
    e.v.resize(count);
    int idx = 0;
    if (dim == 1) {
        for (int i = 0; i < n; ++i, ++idx) {
            e.pos[idx] = (i + 0.5) / n;
            e.v[idx] = u0_unit(&e.pos[idx]) / count;
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j, ++idx) {
                e.pos[2 * idx] = (i + 0.5) / n;
                e.pos[2 * idx + 1] = (j + 0.5) / n;
                e.v[idx] = u0_unit(&e.pos[2 * idx]) / count;
            }
    }
    return e;
}

double regularization_bandwidth(int grid_n, int dim, double gamma, BandwidthRule rule) {
    const double spacing = 1.0 / grid_n;
    switch (rule) {
        case BandwidthRule::grid_spacing: return std::pow(spacing, gamma);
        case BandwidthRule::particle_count:
            return std::pow(1.0 / std::pow(static_cast<double>(grid_n), dim), gamma);
        case BandwidthRule::floored_count:
            return std::max(std::pow(1.0 / std::pow(static_cast<double>(grid_n), dim), gamma),
                            0.6 * spacing);
    }
    throw std::logic_error("regularization_bandwidth: bad rule");
}

namespace {

// Shared core of particle_rhs and the packed ODE right-hand side.
void particle_derivatives(const PopulationModel& m, int dim, int count, const double* pos,
                          const double* w, const double* v, double* dpos, double* dw, double* dv) {
    double rho = 0;
    for (int i = 0; i < count; ++i) rho += v[i];

    std::vector<double> growth_rate(count);
    for (int i = 0; i < count; ++i) {
        const double* y = pos + static_cast<std::size_t>(i) * dim;
        double f[2];
        m.advection(y, f);
        for (int a = 0; a < dim; ++a) {
            const double fa = f[a];
            if (!std::isfinite(fa))
                throw std::runtime_error("particle_rhs: non-finite advection at particle " + std::to_string(i));
            dpos[i * dim + a] = fa;
        }
        const double div = m.divergence(y);
        const double r = m.growth(y);
        const double d = m.death(y);
        if (!std::isfinite(div) || !std::isfinite(r) || !std::isfinite(d))
            throw std::runtime_error("particle_rhs: non-finite model evaluation at particle " + std::to_string(i));
        dw[i] = div * w[i];
        growth_rate[i] = r;
        dv[i] = (r - d * rho) * v[i];
    }

    if (!m.mutation) return;

    const double eta_x = m.mutation->eta_x;
    const double eta_s = m.mutation->eta_s;
    const double kernel_norm = dim == 2 ? kInvSqrt2Pi * kInvSqrt2Pi / (eta_x * eta_s)
                                        : kInvSqrt2Pi / eta_x;
    const double cutoff2 = m.mutation_cutoff_sigmas > 0
                               ? m.mutation_cutoff_sigmas * m.mutation_cutoff_sigmas
                               : std::numeric_limits<double>::infinity();

    std::vector<double> gain(count, 0.0);   // sum_j P_ij r_j v_j
    std::vector<double> leave(count, 0.0);  // sum_j w_j P_ij
    for (int i = 0; i < count; ++i) {
        const double* yi = pos + static_cast<std::size_t>(i) * dim;
        const bool massless_i = v[i] == 0.0;
        gain[i] += kernel_norm * growth_rate[i] * v[i];  // j = i term
        leave[i] += kernel_norm * w[i];
        for (int j = i + 1; j < count; ++j) {
            // A pair of massless particles contributes nothing: the gains
            // pick up r*v = 0 and the leave quadratures are multiplied by
            // v = 0 below.
            if (massless_i && v[j] == 0.0) continue;
            const double* yj = pos + static_cast<std::size_t>(j) * dim;
            const double ux = (yi[0] - yj[0]) / eta_x;
            double q = ux * ux;
            if (dim == 2) {
                const double us = (yi[1] - yj[1]) / eta_s;
                q += us * us;
            }
            if (q > cutoff2) continue;
            const double p = kernel_norm * std::exp(-0.5 * q);
            gain[i] += p * growth_rate[j] * v[j];
            gain[j] += p * growth_rate[i] * v[i];
            leave[i] += p * w[j];
            leave[j] += p * w[i];
        }
    }
    for (int i = 0; i < count; ++i) dv[i] += w[i] * gain[i] - v[i] * growth_rate[i] * leave[i];
}

}  // namespace

ParticleDerivatives particle_rhs(const ParticleEnsemble& e, const PopulationModel& m) {
    if (e.dim != m.dim) throw std::invalid_argument("particle_rhs: ensemble/model dimension mismatch");
    ParticleDerivatives d;
    const int count = e.count();
    d.dpos.resize(e.pos.size());
    d.dw.resize(count);
    d.dv.resize(count);
    particle_derivatives(m, e.dim, count, e.pos.data(), e.w.data(), e.v.data(), d.dpos.data(),
                         d.dw.data(), d.dv.data());
    return d;
}

ParticleEnsemble simulate_window(const ParticleEnsemble& e, const PopulationModel& m, double t_end,
                                 const IntegratorConfig& cfg) {
    if (e.dim != m.dim) throw std::invalid_argument("simulate_window: ensemble/model dimension mismatch");
    if (t_end < e.t) throw std::invalid_argument("simulate_window: t_end precedes ensemble time");
    if (t_end == e.t) return e;

    const int count = e.count();
    const int dim = e.dim;
    const std::size_t npos = e.pos.size();
    std::vector<double> y;
    y.reserve(npos + 2 * count);
    y.insert(y.end(), e.pos.begin(), e.pos.end());
    y.insert(y.end(), e.w.begin(), e.w.end());
    y.insert(y.end(), e.v.begin(), e.v.end());

    auto rhs = [&](double, const double* s, double* ds) {
        particle_derivatives(m, dim, count, s, s + npos, s + npos + count, ds, ds + npos,
                             ds + npos + count);
    };
    auto clamp_mass = [&](double, std::span<double> s) {
        double vmax = 0;
        for (int i = 0; i < count; ++i) vmax = std::max(vmax, std::abs(s[npos + count + i]));
        const double tol = 1e-9 * std::max(vmax, 1e-300);
        bool modified = false;
        for (int i = 0; i < count; ++i) {
            double& vi = s[npos + count + i];
            if (vi < 0) {
                if (vi < -tol)
                    throw std::runtime_error("simulate_window: mass weight went negative");
                vi = 0;
                modified = true;
            }
        }
        return modified;
    };

    const auto res = integrate(rhs, std::span<const double>(y), e.t, t_end, cfg, {}, clamp_mass);
    if (res.status != OdeStatus::ok)
        throw std::runtime_error("simulate_window: integrator failed: " + res.message);

    ParticleEnsemble out = e;
    out.t = t_end;
    std::copy(res.y.begin(), res.y.begin() + npos, out.pos.begin());
    std::copy(res.y.begin() + npos, res.y.begin() + npos + count, out.w.begin());
    std::copy(res.y.begin() + npos + count, res.y.end(), out.v.begin());
    return out;
}

DensityField regularize(const ParticleEnsemble& e, double gamma, BandwidthRule rule) {
    if (e.grid_n < 2) throw std::invalid_argument("regularize: ensemble lacks a grid");
    DensityField field;
    field.dim = e.dim;
    field.grid_n = e.grid_n;
    field.t = e.t;
    field.gamma = gamma;
    field.epsilon = regularization_bandwidth(e.grid_n, e.dim, gamma, rule);

    const int count = e.count();
    field.grid.resize(e.pos.size());
    field.values.assign(count, 0.0);

    // Rebuild the original cell-centre grid.
    const int n = e.grid_n;
    if (e.dim == 1) {
        for (int i = 0; i < n; ++i) field.grid[i] = (i + 0.5) / n;
    } else {
        int idx = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j, ++idx) {
                field.grid[2 * idx] = (i + 0.5) / n;
                field.grid[2 * idx + 1] = (j + 0.5) / n;
            }
    }

    const double eps = field.epsilon;
    const double norm = e.dim == 2 ? kInvSqrt2Pi * kInvSqrt2Pi / (eps * eps) : kInvSqrt2Pi / eps;
    for (int g = 0; g < count; ++g) {
        const double* yg = field.grid.data() + static_cast<std::size_t>(g) * e.dim;
        double acc = 0;
        for (int i = 0; i < count; ++i) {
            const double* yi = e.pos.data() + static_cast<std::size_t>(i) * e.dim;
            const double ux = (yg[0] - yi[0]) / eps;
            double q = ux * ux;
            if (e.dim == 2) {
                const double us = (yg[1] - yi[1]) / eps;
                q += us * us;
            }
            if (q > 324.0) continue;  // 18 sigma: kernel below 6e-71
            acc += e.v[i] * std::exp(-0.5 * q);
        }
        field.values[g] = acc * norm;
    }

    double mass = 0;
    for (double u : field.values) mass += u;
    field.rho = mass / count;
    return field;
}

ParticleEnsemble restart_from_field(const DensityField& d) {
    ParticleEnsemble e;
    e.dim = d.dim;
    e.grid_n = d.grid_n;
    e.t = d.t;
    e.pos = d.grid;
    const int count = static_cast<int>(d.values.size());
    e.w.assign(count, 1.0 / count);
    e.v.resize(count);
    double clamped = 0;
    for (int i = 0; i < count; ++i) {
        double u = d.values[i];
        if (u < 0) {
            clamped -= u;
            u = 0;
        }
        e.v[i] = u / count;
    }
    if (clamped > 1e-12 * std::max(d.rho, 1.0))
        std::cerr << "restart_from_field: clamped negative density mass " << clamped << "\n";
    return e;
}

ScheduleResult run_schedule(const PopulationModel& m,
                            const std::function<double(const double*)>& u0_unit,
                            const std::vector<double>& checkpoints, int n, double gamma,
                            const IntegratorConfig& cfg, BandwidthRule rule) {
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
        if (checkpoints[i] <= checkpoints[i - 1])
            throw std::invalid_argument("run_schedule: checkpoints must be strictly increasing");

    ScheduleResult out;
    ParticleEnsemble e = make_grid_ensemble(n, m.dim, u0_unit);
    for (double t_k : checkpoints) {
        e = simulate_window(e, m, t_k, cfg);
        const double rho_before = e.rho();
        DensityField field = regularize(e, gamma, rule);
        e = restart_from_field(field);
        out.leakage.push_back(rho_before > 0 ? 1.0 - field.rho / rho_before : 0.0);
        out.rho_ensemble.push_back(rho_before);
        out.fields.push_back(std::move(field));
    }
    out.final_ensemble = std::move(e);
    return out;
}

}  // namespace popbal
