#pragma once

#include <array>
#include <string>
#include <vector>

#include "popbal/hill.hpp"

namespace popbal {

// Core miR-200 / ZEB / SNAIL regulatory module. State variables are raw
// molecule counts, time is in hours.
struct EmtCoreParams {
    double g_mu200 = 2.1e3;  // molecules/hr
    double g_z = 0.1e3;      // molecules/hr
    double g_mz = 11.0;      // molecules/hr
    double k_mu200 = 0.05;   // per hour
    double k_z = 0.1;        // per hour
    double k_mz = 0.5;       // per hour

    HillParams h_z_mu200{0.1, 220e3, 3};
    HillParams h_s_mu200{0.1, 180e3, 2};
    HillParams h_z_mz{7.5, 25e3, 2};
    HillParams h_s_mz{10.0, 180e3, 2};

    TranslationTables tables;
};

// Epigenetic variant: the ZEB threshold inhibiting miR-200 becomes a slow
// state variable Z0 relaxing to z0_baseline - alpha_epi * Z, with a timescale
// that depends on whether the SNAIL input is currently non-decreasing.
struct EpigeneticParams {
    EmtCoreParams core;
    double alpha_epi = 0.15;     // dimensionless coupling
    double beta_up = 240.0;      // hours, SNAIL non-decreasing
    double beta_down = 720.0;    // hours, SNAIL decreasing
    double z0_baseline = 220e3;  // molecules
};

// SNAIL mean-reversion: dS/dt = delta * (1 - S/s0), delta = s0*ln2/alpha_relax,
// so the distance to s0 halves every alpha_relax hours.
struct SnailDynamics {
    double s0 = 200e3;          // molecules
    double alpha_relax = 120.0;  // hours
    double delta = 0;            // molecules/hr, derived

    SnailDynamics() { *this = SnailDynamics(200e3, 120.0); }
    SnailDynamics(double s0_, double alpha_relax_);
};

// d(mu200)/dt and dZ/dt of the two-variable core model at external signal S.
std::array<double, 2> emt_core_rhs(double mu200, double zeb, double snail, const EmtCoreParams& p);

// Same vector field with the miR-200 inhibition threshold replaced by the
// dynamic value z0, plus dZ0/dt. snail_increasing selects beta_up/beta_down.
std::array<double, 3> epigenetic_rhs(double mu200, double zeb, double z0, double snail,
                                     const EpigeneticParams& p, bool snail_increasing);

double snail_rhs(double snail, const SnailDynamics& d);

// Exact solution of the SNAIL relaxation, used as a test oracle.
double snail_closed_form(double t, double s_init, const SnailDynamics& d);

// Piecewise-linear SNAIL input schedules driving the EMT/MET scenarios.
enum class ScheduleKind { hysteresis, short_induction, long_induction };

struct SnailSchedule {
    ScheduleKind kind;
    std::vector<std::pair<double, double>> points;  // (hours, molecules)

    double t_begin() const { return points.front().first; }
    double t_end() const { return points.back().first; }

    // Piecewise-linear interpolation; rejects t outside [t_begin, t_end].
    double value(double t) const;
    // Value with the endpoints extended as constants, for integrating past the
    // end of an induction protocol.
    double value_clamped(double t) const;
    // Slope of the active segment (right-continuous at interior breakpoints,
    // zero outside the domain).
    double slope(double t) const;
    // The derivative step function f_S as published for the hysteresis
    // protocol: +-40 molecules/hr switching at the peak time. For the
    // induction schedules this is just the segment slope.
    double step_fs(double t) const;
    // Start of the final descending leg (where inducer withdrawal begins).
    double withdrawal_start() const;
};

SnailSchedule snail_schedule(ScheduleKind kind);

}  // namespace popbal
