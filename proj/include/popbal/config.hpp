#pragma once

#include <optional>
#include <string>
#include <vector>

namespace popbal {

// Flat run description: one scenario family plus every numeric knob, strictly
// validated before any computation starts. Unknown keys are rejected.
struct ScenarioConfig {
    std::string preset = "population";  // scenario family or named preset
    std::string initial_condition = "epi";
    std::string growth = "r1";
    std::string response = "linear";  // heterogeneity-coupled runs
    std::string bandwidth_rule = "floored-count";  // or "grid-spacing", "particle-count"

    double s0 = 200e3;
    double alpha_relax = 120.0;
    double alpha_epi = 0.15;
    double eta_x = 1000.0;
    double eta_s = 12500.0;
    double theta = 9.0;
    double r_epi = 0.0182;
    double death = 1.82e-7;
    double total_cells = 100.0;
    double gamma = 0.8;
    double horizon_hours = 2400.0;
    double checkpoint_hours = 24.0;
    int n_grid = 20;
    double rtol = 1e-6;
    double atol = 1e-9;
    bool mutations = true;
    bool keep_fields = false;
    bool joint_entropy = false;
    long seed = 0;  // reserved; every method here is deterministic

    std::string output_dir;
};

// Built-in preset names, each a fully specified configuration.
std::vector<std::string> preset_names();
ScenarioConfig preset_config(const std::string& name);

// Parses a JSON document (possibly empty) on top of the named preset's
// defaults; unknown keys and out-of-range values are rejected with the
// violated bound.
ScenarioConfig parse_config(const std::string& json_text, const std::string& preset_name = "");
std::string serialize_config(const ScenarioConfig& cfg);
void validate_config(const ScenarioConfig& cfg);

}  // namespace popbal
