#include "popbal/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "popbal/equilibria.hpp"

namespace popbal {

double PhenotypeClassifier::sep_low(double snail) const {
    const auto valid = branch_validity(Branch::u1, reduced.intervals);
    return reduced.poly(Branch::u1)(std::clamp(snail, valid.lo, valid.hi));
}

double PhenotypeClassifier::sep_high(double snail) const {
    const auto valid = branch_validity(Branch::u2, reduced.intervals);
    return reduced.poly(Branch::u2)(std::clamp(snail, valid.lo, valid.hi));
}

Phenotype PhenotypeClassifier::classify(double x, double snail) const {
    if (x < sep_low(snail)) return Phenotype::mesenchymal;
    if (x < sep_high(snail)) return Phenotype::hybrid;
    return Phenotype::epithelial;
}

PhenotypeClassifier default_classifier() { return PhenotypeClassifier{default_reduced_advection()}; }

Fractions phenotype_fractions(const DensityField& d, const PhenotypeClassifier& c, const Rescaling& rs) {
    Fractions f;
    double total = 0;
    const int count = static_cast<int>(d.values.size());
    for (int i = 0; i < count; ++i) {
        const double u = std::max(d.values[i], 0.0);
        const double x = rs.x_from_unit(d.grid[static_cast<std::size_t>(i) * d.dim]);
        const double s =
            d.dim == 2 ? rs.s_from_unit(d.grid[static_cast<std::size_t>(i) * d.dim + 1]) : 200e3;
        switch (c.classify(x, s)) {
            case Phenotype::epithelial: f.e += u; break;
            case Phenotype::hybrid: f.h += u; break;
            case Phenotype::mesenchymal: f.m += u; break;
        }
        total += u;
    }
    if (total <= 0) throw std::invalid_argument("phenotype_fractions: zero-mass field");
    f.e /= total;
    f.h /= total;
    f.m /= total;
    return f;
}

GrowthCase parse_growth_case(const std::string& name) {
    if (name == "r1") return GrowthCase::r1;
    if (name == "r2") return GrowthCase::r2;
    if (name == "r3") return GrowthCase::r3;
    throw std::invalid_argument("unknown growth case: " + name);
}

double growth_rate(Phenotype ph, GrowthCase gc, double r_epi) {
    switch (gc) {
        case GrowthCase::r1: return r_epi;
        case GrowthCase::r2: return ph == Phenotype::mesenchymal ? 0.5 * r_epi : r_epi;
        case GrowthCase::r3: return ph == Phenotype::epithelial ? r_epi : 0.5 * r_epi;
    }
    throw std::logic_error("growth_rate: bad case");
}

PopInitial parse_pop_initial(const std::string& name) {
    if (name == "epi") return PopInitial::epi;
    if (name == "hyb") return PopInitial::hyb;
    if (name == "mes") return PopInitial::mes;
    if (name == "epi_mes") return PopInitial::epi_mes;
    if (name == "epi_hyb_mes") return PopInitial::epi_hyb_mes;
    if (name == "uni") return PopInitial::uni;
    throw std::invalid_argument("unknown initial condition: " + name);
}

namespace {

struct Rect {
    double x_lo, x_hi, s_lo, s_hi;
};

// x-band around a stable branch at S0, the branch value held at the nearest
// validity endpoint when S0 falls outside it.
Rect branch_band(Branch b, double s0, const ReducedAdvection& ra) {
    const auto valid = branch_validity(b, ra.intervals);
    const double x_center = ra.poly(b)(std::clamp(s0, valid.lo, valid.hi));
    Rect r;
    r.x_lo = std::max(x_center - 2000.0, 0.0);
    r.x_hi = std::min(x_center + 2000.0, 25e3);
    r.s_lo = std::max(s0 - 5000.0, 150e3);
    r.s_hi = std::min(s0 + 5000.0, 250e3);
    return r;
}

}  // namespace

std::function<double(const double*)> population_initial_density(PopInitial kind, double s0,
                                                                const ReducedAdvection& ra,
                                                                double total_cells) {
    std::vector<Rect> rects;
    switch (kind) {
        case PopInitial::epi: rects = {branch_band(Branch::ep, s0, ra)}; break;
        case PopInitial::hyb: rects = {branch_band(Branch::hyb, s0, ra)}; break;
        case PopInitial::mes: rects = {branch_band(Branch::mes, s0, ra)}; break;
        case PopInitial::epi_mes:
            rects = {branch_band(Branch::ep, s0, ra), branch_band(Branch::mes, s0, ra)};
            break;
        case PopInitial::epi_hyb_mes:
            rects = {branch_band(Branch::ep, s0, ra), branch_band(Branch::hyb, s0, ra),
                     branch_band(Branch::mes, s0, ra)};
            break;
        case PopInitial::uni: rects = {{0.0, 25e3, 150e3, 250e3}}; break;
    }
    double area = 0;
    for (const auto& r : rects) area += (r.x_hi - r.x_lo) * (r.s_hi - r.s_lo);
    const double level = total_cells / area;
    return [rects, level](const double* y) {
        for (const auto& r : rects)
            if (y[0] >= r.x_lo && y[0] <= r.x_hi && y[1] >= r.s_lo && y[1] <= r.s_hi) return level;
        return 0.0;
    };
}

PopulationRunResult run_population_scenario(const PopulationScenarioParams& params, bool keep_fields) {
    const auto ra = default_reduced_advection();
    const PhenotypeClassifier classifier{ra};
    const SnailDynamics snail_dyn(params.s0, params.alpha_relax);

    PopulationModel model;
    model.dim = 2;
    model.lo = {0.0, 150e3};
    model.hi = {25e3, 250e3};
    model.advection = [ra, snail_dyn](const double* y, double* f) {
        f[0] = ra.value(y[0], y[1]);
        f[1] = snail_dyn.delta * (1.0 - y[1] / snail_dyn.s0);
    };
    model.divergence = [ra, snail_dyn](const double* y) {
        return ra.divergence(y[0], y[1]) - snail_dyn.delta / snail_dyn.s0;
    };
    const GrowthCase gc = params.growth;
    const double r_epi = params.r_epi;
    model.growth = [classifier, gc, r_epi](const double* y) {
        return growth_rate(classifier.classify(y[0], y[1]), gc, r_epi);
    };
    const double death = params.death;
    model.death = [death](const double*) { return death; };
    if (params.mutations) model.mutation = MutationKernel{params.eta_x, params.eta_s};

    const Rescaling rs;
    const PopulationModel model_unit = rescale(model, rs);
    const auto u0 = population_initial_density(params.ic, params.s0, ra, params.total_cells);
    auto u0_unit = rescale_density(u0, rs, 2);

    // Normalise the grid-sampled mass to the analytic total so runs with
    // narrow supports start from the same population size.
    ParticleEnsemble probe = make_grid_ensemble(params.n_grid, 2, u0_unit);
    const double mass_grid = probe.rho();
    if (mass_grid <= 0)
        throw std::invalid_argument("run_population_scenario: initial density vanishes on the grid");
    const double mass_fix = params.total_cells / mass_grid;
    auto u0_fixed = [u0_unit, mass_fix](const double* y) { return u0_unit(y) * mass_fix; };

    std::vector<double> checkpoints;
    for (double t = params.checkpoint; t < params.horizon + 0.5 * params.checkpoint;
         t += params.checkpoint)
        checkpoints.push_back(std::min(t, params.horizon));
    if (checkpoints.empty() || checkpoints.back() != params.horizon) checkpoints.push_back(params.horizon);

    const auto sched =
        run_schedule(model_unit, u0_fixed, checkpoints, params.n_grid, params.gamma, params.ode,
                     params.bandwidth);

    PopulationRunResult out;
    const double log_scale = std::log(rs.a);
    for (std::size_t i = 0; i < sched.fields.size(); ++i) {
        SeriesPoint pt;
        pt.t = checkpoints[i];
        pt.rho = sched.rho_ensemble[i];
        pt.fractions = phenotype_fractions(sched.fields[i], classifier, rs);
        pt.entropy = field_entropy(sched.fields[i], false, log_scale);
        pt.leak = sched.leakage[i];
        out.series.push_back(pt);
    }
    out.final_field = sched.fields.back();
    if (keep_fields) out.fields = sched.fields;
    return out;
}

std::vector<double> heterogeneity_series(const std::vector<DensityField>& fields, bool joint,
                                         const Rescaling& rs) {
    std::vector<double> out;
    out.reserve(fields.size());
    for (const auto& f : fields) {
        const double log_scale = joint && f.dim == 2 ? std::log(rs.a * rs.c) : std::log(rs.a);
        out.push_back(field_entropy(f, joint, log_scale));
    }
    return out;
}

namespace {

// Epithelial equilibrium (highest-mu root) of the core model at fixed S. The
// scan reaches past the scenario domain: below S = 150K the epithelial state
// sits above 25K molecules (production cap g_mu200/k_mu200 = 42K).
Equilibrium epithelial_equilibrium(double snail, const EmtCoreParams& p) {
    EquilibriumOptions opts;
    opts.mu_max = 45e3;
    opts.scan_points = 900;
    const auto eqs = find_equilibria(snail, p, opts);
    if (eqs.empty()) throw std::runtime_error("no equilibrium found");
    return eqs.back();
}

}  // namespace

HomogeneousHysteresisResult run_hysteresis_homogeneous(const EmtCoreParams& p,
                                                       const IntegratorConfig& cfg) {
    const auto schedule = snail_schedule(ScheduleKind::hysteresis);
    const auto start = epithelial_equilibrium(schedule.value(0.0), p);
    const auto ra = default_reduced_advection();

    auto rhs = [&](double t, const double* y, double* dy) {
        const auto f = emt_core_rhs(std::max(y[0], 0.0), std::max(y[1], 0.0),
                                    schedule.value_clamped(t), p);
        dy[0] = f[0];
        dy[1] = f[1];
    };

    HomogeneousHysteresisResult out;
    const double dt = 5.0;
    std::vector<double> samples;
    for (double t = 0; t <= schedule.t_end() + 0.5 * dt; t += dt) samples.push_back(t);

    // Integrate each schedule segment separately so breakpoints land exactly.
    std::vector<double> y = {start.mu200, start.zeb};
    std::size_t cursor = 0;
    for (std::size_t seg = 1; seg < schedule.points.size(); ++seg) {
        const double t0 = schedule.points[seg - 1].first;
        const double t1 = schedule.points[seg].first;
        std::vector<double> seg_samples;
        while (cursor < samples.size() && samples[cursor] <= t1) seg_samples.push_back(samples[cursor++]);
        const auto res = integrate(rhs, std::span<const double>(y), t0, t1, cfg, seg_samples);
        if (res.status != OdeStatus::ok)
            throw std::runtime_error("run_hysteresis_homogeneous: " + res.message);
        for (std::size_t i = 0; i < res.sample_t.size(); ++i) {
            out.t.push_back(res.sample_t[i]);
            out.mu200.push_back(res.sample_y[i][0]);
            out.zeb.push_back(res.sample_y[i][1]);
            out.snail.push_back(schedule.value_clamped(res.sample_t[i]));
        }
        y = res.y;
    }

    // Hysteresis diagnostics. S crosses 200K at t = 2500 (ascending) and
    // t = 7500 (descending), both exact sample times.
    const auto hyb_valid = branch_validity(Branch::hyb, ra.intervals);
    for (std::size_t i = 0; i < out.t.size(); ++i) {
        const double t = out.t[i];
        const double s = out.snail[i];
        if (t == 2500.0) out.mu_ascending_200k = out.mu200[i];
        if (t == 7500.0) out.mu_descending_200k = out.mu200[i];
        if (hyb_valid.contains(s) && std::abs(out.mu200[i] - ra.poly(Branch::hyb)(s)) < 2000.0) {
            if (t <= 5000)
                out.dwell_hybrid_ascending += dt;
            else
                out.dwell_hybrid_descending += dt;
        }
    }
    return out;
}

HeterogeneousHysteresisResult run_hysteresis_heterogeneous(int n_particles, const EmtCoreParams& p,
                                                           const IntegratorConfig& cfg) {
    const auto schedule = snail_schedule(ScheduleKind::hysteresis);
    const PhenotypeClassifier classifier = default_classifier();

    const double s_mean = 160e3, s_sd = 20e3;
    const auto start = epithelial_equilibrium(s_mean, p);

    // Deterministic quadrature of the Gaussian SNAIL spread: equally spaced
    // nodes over +-4 sd with pdf weights, renormalised.
    HeterogeneousHysteresisResult out;
    std::vector<std::vector<double>> state(n_particles);
    out.weights.resize(n_particles);
    double wsum = 0;
    for (int i = 0; i < n_particles; ++i) {
        const double z = -4.0 + 8.0 * i / (n_particles - 1);
        const double s = std::max(s_mean + s_sd * z, 1e3);
        out.weights[i] = std::exp(-0.5 * z * z);
        wsum += out.weights[i];
        state[i] = {start.mu200, start.zeb, s};
    }
    for (auto& w : out.weights) w /= wsum;

    auto rhs = [&](double t, const double* y, double* dy) {
        const auto f = emt_core_rhs(std::max(y[0], 0.0), std::max(y[1], 0.0), std::max(y[2], 0.0), p);
        dy[0] = f[0];
        dy[1] = f[1];
        dy[2] = schedule.step_fs(t);
    };

    const double dt_out = 100.0;
    for (double t = 0; t <= schedule.t_end() + 0.5 * dt_out; t += dt_out) out.t.push_back(t);

    std::vector<std::vector<double>> mu_at(out.t.size(), std::vector<double>(n_particles));
    std::vector<std::vector<double>> s_at(out.t.size(), std::vector<double>(n_particles));
    for (int i = 0; i < n_particles; ++i) {
        // Split at the f_S sign switch.
        std::vector<double> first_half, second_half;
        for (double ts : out.t) (ts <= 5000 ? first_half : second_half).push_back(ts);
        auto r1 = integrate(rhs, std::span<const double>(state[i]), 0.0, 5000.0, cfg, first_half);
        auto r2 = integrate(rhs, std::span<const double>(r1.y), 5000.0, schedule.t_end(), cfg, second_half);
        if (r1.status != OdeStatus::ok || r2.status != OdeStatus::ok)
            throw std::runtime_error("run_hysteresis_heterogeneous: integration failed");
        std::size_t k = 0;
        for (const auto& row : r1.sample_y) mu_at[k][i] = row[0], s_at[k][i] = row[2], ++k;
        for (const auto& row : r2.sample_y) mu_at[k][i] = row[0], s_at[k][i] = row[2], ++k;
        state[i] = r2.y;
    }

    for (std::size_t k = 0; k < out.t.size(); ++k) {
        Fractions f;
        double s_mean_k = 0;
        for (int i = 0; i < n_particles; ++i) {
            s_mean_k += out.weights[i] * s_at[k][i];
            switch (classifier.classify(mu_at[k][i], s_at[k][i])) {
                case Phenotype::epithelial: f.e += out.weights[i]; break;
                case Phenotype::hybrid: f.h += out.weights[i]; break;
                case Phenotype::mesenchymal: f.m += out.weights[i]; break;
            }
        }
        out.fractions.push_back(f);
        out.snail_mean.push_back(s_mean_k);
        out.mu200.push_back(mu_at[k]);
    }
    return out;
}

EpigeneticRunResult run_epigenetic(Induction induction, const EpigeneticParams& p, double horizon,
                                   const IntegratorConfig& cfg) {
    const auto schedule = snail_schedule(induction == Induction::short_term
                                             ? ScheduleKind::short_induction
                                             : ScheduleKind::long_induction);
    const auto start = epithelial_equilibrium(schedule.value(0.0), p.core);
    const auto recovery_eq = epithelial_equilibrium(schedule.points.back().second, p.core);

    EpigeneticRunResult out;
    out.withdrawal_start = schedule.withdrawal_start();
    out.recovery_threshold = 0.9 * recovery_eq.mu200;

    auto rhs = [&](double t, const double* y, double* dy) {
        const bool increasing = schedule.slope(t) >= 0;
        const auto f = epigenetic_rhs(std::max(y[0], 0.0), std::max(y[1], 0.0), std::max(y[2], 0.0),
                                      schedule.value_clamped(t), p, increasing);
        dy[0] = f[0];
        dy[1] = f[1];
        dy[2] = f[2];
    };

    const double dt = 2.0;
    std::vector<double> y = {start.mu200, start.zeb, p.z0_baseline};
    std::vector<double> seg_bounds;
    for (const auto& [tb, sv] : schedule.points) seg_bounds.push_back(tb);
    if (horizon > seg_bounds.back()) seg_bounds.push_back(horizon);

    for (std::size_t seg = 1; seg < seg_bounds.size(); ++seg) {
        const double t0 = seg_bounds[seg - 1];
        const double t1 = seg_bounds[seg];
        std::vector<double> samples;
        for (double t = t0; t < t1; t += dt) samples.push_back(t);
        samples.push_back(t1);
        const auto res = integrate(rhs, std::span<const double>(y), t0, t1, cfg, samples);
        if (res.status != OdeStatus::ok) throw std::runtime_error("run_epigenetic: " + res.message);
        for (std::size_t i = 0; i < res.sample_t.size(); ++i) {
            if (!out.t.empty() && res.sample_t[i] <= out.t.back()) continue;
            out.t.push_back(res.sample_t[i]);
            out.mu200.push_back(res.sample_y[i][0]);
            out.zeb.push_back(res.sample_y[i][1]);
            out.z0.push_back(res.sample_y[i][2]);
            out.snail.push_back(schedule.value_clamped(res.sample_t[i]));
        }
        y = res.y;
    }

    for (std::size_t i = 0; i < out.t.size(); ++i) {
        if (out.t[i] > out.withdrawal_start && out.mu200[i] >= out.recovery_threshold) {
            out.recovery_time = out.t[i] - out.withdrawal_start;
            out.recovered = true;
            break;
        }
    }
    return out;
}

std::vector<double> marginal_modes(const DensityField& d, double prominence) {
    const int n = d.grid_n;
    std::vector<double> marginal(n, 0.0);
    if (d.dim == 1) {
        for (int i = 0; i < n; ++i) marginal[i] = std::max(d.values[i], 0.0);
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) marginal[i] += std::max(d.values[i * n + j], 0.0) / n;
    }
    const double peak = *std::max_element(marginal.begin(), marginal.end());
    if (peak <= 0) return {};

    std::vector<double> modes;
    for (int i = 0; i < n; ++i) {
        const double left = i > 0 ? marginal[i - 1] : -1.0;
        const double right = i + 1 < n ? marginal[i + 1] : -1.0;
        if (marginal[i] > left && marginal[i] >= right && marginal[i] >= prominence * peak) {
            // Require a genuine dip between neighbouring modes.
            if (!modes.empty()) {
                const int prev = static_cast<int>((modes.back() * n) - 0.5 + 1e-9);
                double valley = marginal[i];
                for (int k = prev; k <= i; ++k) valley = std::min(valley, marginal[k]);
                const double lower_peak = std::min(marginal[prev], marginal[i]);
                if (valley > 0.8 * lower_peak) {
                    // Plateau, not a separate mode: keep the taller sample.
                    if (marginal[i] > marginal[prev]) modes.back() = (i + 0.5) / n;
                    continue;
                }
            }
            modes.push_back((i + 0.5) / n);
        }
    }
    return modes;
}

}  // namespace popbal
