#pragma once

#include <functional>
#include <string>
#include <vector>

#include "popbal/entropy_growth.hpp"
#include "popbal/particle.hpp"
#include "popbal/reduction.hpp"
#include "popbal/regulatory.hpp"

namespace popbal {

enum class Phenotype { epithelial, hybrid, mesenchymal };

// Basin-membership classifier: the unstable branches u1 (mes | rest) and u2
// (hybrid | epithelial) separate the phenotypes; outside their validity
// intervals the nearest endpoint value is held constant.
struct PhenotypeClassifier {
    ReducedAdvection reduced;

    double sep_low(double snail) const;   // mes/hybrid separator
    double sep_high(double snail) const;  // hybrid/epithelial separator
    Phenotype classify(double x, double snail) const;
};

PhenotypeClassifier default_classifier();

struct Fractions {
    double e = 0, h = 0, m = 0;
};

// Mass fractions of a (normalised) density field in the three basins, using
// per-S separators. Rejects zero-mass fields.
Fractions phenotype_fractions(const DensityField& d, const PhenotypeClassifier& c,
                              const Rescaling& rs = {});

// Piecewise-constant division rates over the phenotype classes.
enum class GrowthCase { r1, r2, r3 };
GrowthCase parse_growth_case(const std::string& name);

// r1: every class divides at r_epi; r2: mesenchymal at half rate;
// r3: hybrid and mesenchymal at half rate.
double growth_rate(Phenotype ph, GrowthCase gc, double r_epi);

enum class PopInitial { epi, hyb, mes, epi_mes, epi_hyb_mes, uni };
PopInitial parse_pop_initial(const std::string& name);

// Uniform density on the named support with the given total mass: bands of
// x half-width 2000 molecules around the stable branches at S0 crossed with
// S0 +- 5000 (clipped to the domain), or the whole rectangle for `uni`.
std::function<double(const double*)> population_initial_density(PopInitial kind, double s0,
                                                                const ReducedAdvection& ra,
                                                                double total_cells = 100.0);

struct PopulationScenarioParams {
    PopInitial ic = PopInitial::epi;
    GrowthCase growth = GrowthCase::r1;
    double s0 = 200e3;
    double alpha_relax = 120.0;
    double eta_x = 1000.0;
    double eta_s = 12500.0;
    bool mutations = true;
    double r_epi = 0.0182;       // per hour
    double death = 1.82e-7;      // per cell per hour
    double total_cells = 100.0;
    double horizon = 2400.0;     // hours
    double checkpoint = 24.0;    // regularisation cadence, hours
    int n_grid = 20;
    double gamma = 0.8;
    IntegratorConfig ode{};
    BandwidthRule bandwidth = BandwidthRule::floored_count;
};

struct SeriesPoint {
    double t = 0;
    double rho = 0;
    Fractions fractions;
    double entropy = 0;  // x-marginal, molecule axis
    double leak = 0;
};

struct PopulationRunResult {
    std::vector<SeriesPoint> series;
    DensityField final_field;
    std::vector<DensityField> fields;  // filled when keep_fields
};

// Full pipeline for the growth + mutation experiments: reduced advection in x,
// SNAIL mean reversion in S, scenario growth rates, division-linked mutation
// kernel; normalised, run through the window/restart schedule, post-processed
// into (rho, fractions, entropy) series.
PopulationRunResult run_population_scenario(const PopulationScenarioParams& params,
                                            bool keep_fields = false);

// Molecule-axis heterogeneity of each field (x-marginal by default).
std::vector<double> heterogeneity_series(const std::vector<DensityField>& fields,
                                         bool joint = false, const Rescaling& rs = {});

// EMT/MET cycle of a homogeneous population (a single regulatory trajectory
// driven by the scheduled SNAIL input), with hysteresis diagnostics.
struct HomogeneousHysteresisResult {
    std::vector<double> t, mu200, zeb, snail;
    double mu_ascending_200k = 0;   // mu200 when S crosses 200K going up
    double mu_descending_200k = 0;  // and coming down
    double dwell_hybrid_ascending = 0;   // hours within 2K of the hybrid branch
    double dwell_hybrid_descending = 0;
};

HomogeneousHysteresisResult run_hysteresis_homogeneous(const EmtCoreParams& p = {},
                                                       const IntegratorConfig& cfg = {});

// Heterogeneous variant: SNAIL joins the structure variable with a Gaussian
// initial spread (mean 160K, sd 20K) and the published step advection
// f_S = +-40 molecules/hr; every cell starts from the epithelial equilibrium.
struct HeterogeneousHysteresisResult {
    std::vector<double> t;
    std::vector<Fractions> fractions;     // weighted basin fractions over time
    std::vector<double> snail_mean;
    std::vector<std::vector<double>> mu200;  // per-checkpoint particle states
    std::vector<double> weights;
};

HeterogeneousHysteresisResult run_hysteresis_heterogeneous(int n_particles = 81,
                                                           const EmtCoreParams& p = {},
                                                           const IntegratorConfig& cfg = {});

enum class Induction { short_term, long_term };

struct EpigeneticRunResult {
    std::vector<double> t, mu200, zeb, z0, snail;
    double withdrawal_start = 0;
    double recovery_time = -1;    // hours after withdrawal start; -1 = not recovered
    double recovery_threshold = 0;
    bool recovered = false;
};

// Integrates the epigenetic model under the short/long induction schedule and
// reports the time for miR-200 to climb back to 90% of the epithelial
// equilibrium at the withdrawn SNAIL level.
EpigeneticRunResult run_epigenetic(Induction induction, const EpigeneticParams& p = {},
                                   double horizon = 12000.0, const IntegratorConfig& cfg = {});

// Local maxima of the x-marginal of a field (mode detection for the
// multimodality checks). Peaks below `prominence` of the tallest are ignored.
std::vector<double> marginal_modes(const DensityField& d, double prominence = 0.02);

}  // namespace popbal
