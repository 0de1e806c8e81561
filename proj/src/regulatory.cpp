#include "popbal/regulatory.hpp"

#include <cmath>
#include <stdexcept>

namespace popbal {

SnailDynamics::SnailDynamics(double s0_, double alpha_relax_) : s0(s0_), alpha_relax(alpha_relax_) {
    if (s0 < 150e3 || s0 > 250e3) throw std::invalid_argument("SnailDynamics: s0 must lie in [150K, 250K]");
    if (alpha_relax <= 0) throw std::invalid_argument("SnailDynamics: alpha_relax must be > 0");
    delta = s0 * std::log(2.0) / alpha_relax;
}

std::array<double, 2> emt_core_rhs(double mu200, double zeb, double snail, const EmtCoreParams& p) {
    if (mu200 < 0 || zeb < 0 || snail < 0) throw std::invalid_argument("emt_core_rhs: negative state");
    const auto tv = translation_functions(mu200, p.tables);
    const double denom = tv.Y_m + p.k_mz;
    const double mz_translation = p.g_mz * shifted_hill(zeb, p.h_z_mz) * shifted_hill(snail, p.h_s_mz);
    const double d_mu = p.g_mu200 * shifted_hill(zeb, p.h_z_mu200) * shifted_hill(snail, p.h_s_mu200)
                        - mz_translation * (tv.Y_mu / denom) - p.k_mu200 * mu200;
    const double d_z = p.g_z * mz_translation * (tv.L / denom) - p.k_z * zeb;
    return {d_mu, d_z};
}

std::array<double, 3> epigenetic_rhs(double mu200, double zeb, double z0, double snail,
                                     const EpigeneticParams& p, bool snail_increasing) {
    if (mu200 < 0 || zeb < 0 || z0 < 0 || snail < 0)
        throw std::invalid_argument("epigenetic_rhs: negative state");
    EmtCoreParams core = p.core;
    core.h_z_mu200.x0 = z0;  // dynamic inhibition threshold
    const auto base = emt_core_rhs(mu200, zeb, snail, core);
    const double beta = snail_increasing ? p.beta_up : p.beta_down;
    const double d_z0 = (p.z0_baseline - z0 - p.alpha_epi * zeb) / beta;
    return {base[0], base[1], d_z0};
}

double snail_rhs(double snail, const SnailDynamics& d) {
    if (snail < 0) throw std::invalid_argument("snail_rhs: negative state");
    return d.delta * (1.0 - snail / d.s0);
}

double snail_closed_form(double t, double s_init, const SnailDynamics& d) {
    return d.s0 - (d.s0 - s_init) * std::exp2(-t / d.alpha_relax);
}

SnailSchedule snail_schedule(ScheduleKind kind) {
    SnailSchedule s;
    s.kind = kind;
    switch (kind) {
        case ScheduleKind::hysteresis:
            s.points = {{0, 160e3}, {5000, 240e3}, {10000, 160e3}};
            break;
        case ScheduleKind::short_induction:
            s.points = {{0, 100e3}, {1200, 240e3}, {2400, 100e3}};
            break;
        case ScheduleKind::long_induction:
            s.points = {{0, 100e3}, {1200, 240e3}, {2400, 240e3}, {3600, 100e3}};
            break;
    }
    return s;
}

double SnailSchedule::value(double t) const {
    if (t < t_begin() || t > t_end()) throw std::domain_error("SnailSchedule: t outside schedule domain");
    return value_clamped(t);
}

double SnailSchedule::value_clamped(double t) const {
    if (t <= t_begin()) return points.front().second;
    if (t >= t_end()) return points.back().second;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (t <= points[i].first) {
            const auto& [t0, v0] = points[i - 1];
            const auto& [t1, v1] = points[i];
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    return points.back().second;
}

double SnailSchedule::slope(double t) const {
    if (t < t_begin() || t >= t_end()) return 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (t < points[i].first) {
            const auto& [t0, v0] = points[i - 1];
            const auto& [t1, v1] = points[i];
            return (v1 - v0) / (t1 - t0);
        }
    }
    return 0.0;
}

double SnailSchedule::step_fs(double t) const {
    if (kind == ScheduleKind::hysteresis) return t < 5000.0 ? 40.0 : -40.0;
    return slope(t);
}

double SnailSchedule::withdrawal_start() const {
    return points[points.size() - 2].first;
}

}  // namespace popbal
