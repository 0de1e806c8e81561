#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "popbal/config.hpp"
#include "popbal/particle.hpp"
#include "popbal/reduction.hpp"

namespace popbal {

// Locale-independent shortest round-trip decimal rendering.
std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& comment_lines = {});

// Field snapshot in molecule units (t_hours, x_molecules, S_molecules,
// density), header carrying N, gamma, epsilon and rho.
void write_field_csv(const std::filesystem::path& path, const DensityField& d,
                     const Rescaling& rs = {});

void write_ensemble_json(const std::filesystem::path& path, const ParticleEnsemble& e);
ParticleEnsemble read_ensemble_json(const std::filesystem::path& path);

struct RunSummary {
    std::string preset;
    double rho = 0;
    double entropy = 0;
    double wall_seconds = 0;
    std::filesystem::path directory;
};

// Executes the configured scenario end to end, writing the config snapshot,
// series/field CSVs and summary JSON under a per-run directory. Returns the
// one-line summary values (wall time stays out of the files so reruns are
// byte-identical).
RunSummary run_config(const ScenarioConfig& cfg, const std::filesystem::path& output_root);

// Fans a sweep document ({"base": {...}, "grid": {key: [values...]}}) out
// into independent runs, one directory each.
std::vector<RunSummary> run_sweep(const std::string& sweep_json,
                                  const std::filesystem::path& output_root, int jobs = 1);

// Reduced-advection lookup table (S, x, f_r) and calibration report.
void write_reduction_table(const std::filesystem::path& path, const ReducedAdvection& ra,
                           int n_s = 41, int n_x = 201);
void write_calibration_json(const std::filesystem::path& path, const CalibrationReport& rep);

// Equilibrium table over an S-grid: S, mu200, zeb, stable flag, branch label.
void write_bifurcation_csv(const std::filesystem::path& path, int n_s = 201);

std::filesystem::path default_output_root();

}  // namespace popbal
