#pragma once

#include <functional>
#include <string>
#include <vector>

#include "popbal/particle.hpp"
#include "popbal/reduction.hpp"

namespace popbal {

// Discrete weighted differential entropy of the particle ensemble,
//   E = -sum_j (v_j / rho) * ln(v_j / (w_j * rho)),
// the particle form of -int (u/rho) ln(u/rho). Zero-mass particles contribute
// nothing (x ln x -> 0). Measured on the ensemble's own coordinates: for the
// unit box this is <= 0 with equality only for v_j proportional to w_j.
double ensemble_entropy(const ParticleEnsemble& e);

// Entropy of a density field's implied ensemble. For 2D fields the x-marginal
// is used unless joint is requested. log_scale shifts the result to another
// coordinate scale (differential entropy gains ln of the axis stretch), e.g.
// ln(25000) to report on the molecule axis.
double field_entropy(const DensityField& d, bool joint = false, double log_scale = 0.0);

enum class GrowthResponseKind { hill, linear };

// Population growth rate as a function of heterogeneity E:
//   hill:   r0 * (theta^6 + 2 E^6) / (theta^6 + E^6)   (r0 at E=0, 2*r0 at infinity)
//   linear: r0 + 0.01 * (E - 8)
double growth_response(double entropy, GrowthResponseKind kind, double theta, double r0 = 0.0182);

GrowthResponseKind parse_response_kind(const std::string& name);

// Named initial supports for the heterogeneity-coupled runs: uniform bands of
// half-width 2000 molecules around the stable roots of f_r(., 200K), their
// union, or the whole axis; each normalised to total_cells.
enum class EntropyInitial { ep, hyb, mes, ep_mes, unif };

std::function<double(const double*)> entropy_initial_density(EntropyInitial kind,
                                                             const ReducedAdvection& ra,
                                                             double total_cells = 100.0);

struct EntropyModelParams {
    GrowthResponseKind response = GrowthResponseKind::linear;
    double theta = 9.0;
    double r0 = 0.0182;
    double death_scale = 10e3;  // d(E) = r(E) / death_scale
    double eta_x = 4000.0;      // molecules
    double snail = 200e3;       // held constant
    int n_grid = 50;
    double gamma = 0.8;
    IntegratorConfig ode{};
    BandwidthRule bandwidth = BandwidthRule::floored_count;
};

struct EntropyRunResult {
    std::vector<double> t;
    std::vector<double> entropy;  // molecule-axis entropy at each checkpoint
    std::vector<double> rho;
    std::vector<double> leakage;
    std::vector<DensityField> fields;
};

// 1D particle run of the heterogeneity-coupled model: growth, death and the
// mutation rate are re-evaluated from the instantaneous ensemble entropy
// inside the right-hand side (not frozen per window). u0 takes molecule
// coordinates; the run itself happens on the unit interval.
EntropyRunResult run_entropy_model(const std::function<double(const double*)>& u0_molecules,
                                   const std::vector<double>& checkpoints,
                                   const EntropyModelParams& params,
                                   const ReducedAdvection& ra, bool keep_fields = false);

}  // namespace popbal
