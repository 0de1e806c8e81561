#include "popbal/config.hpp"

#include <set>
#include <stdexcept>

#include <json.hpp>

namespace popbal {

namespace {

const std::set<std::string> kFamilies = {
    "hysteresis-homogeneous", "hysteresis-heterogeneous", "epigenetic-short", "epigenetic-long",
    "population", "entropy",
};

struct PresetDef {
    std::string family;
    void (*tweak)(ScenarioConfig&);
};

ScenarioConfig family_defaults(const std::string& family) {
    ScenarioConfig cfg;
    cfg.preset = family;
    if (family == "entropy") {
        cfg.n_grid = 50;
        cfg.eta_x = 4000.0;
        cfg.s0 = 200e3;
        cfg.horizon_hours = 120.0;
        cfg.checkpoint_hours = 12.0;
        cfg.initial_condition = "uni";
    }
    return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {
        "hysteresis-homogeneous",
        "hysteresis-heterogeneous",
        "epigenetic-short",
        "epigenetic-long",
        "population",
        "population-tristable",
        "population-monostable-epi",
        "population-monostable-mes",
        "population-epi-barrier",
        "entropy",
        "entropy-linear",
        "entropy-hill",
    };
}

ScenarioConfig preset_config(const std::string& name) {
    if (kFamilies.count(name)) return family_defaults(name);
    if (name == "population-tristable") {
        auto cfg = family_defaults("population");
        cfg.preset = name;
        cfg.s0 = 200e3;
        cfg.initial_condition = "epi";
        return cfg;
    }
    if (name == "population-monostable-epi") {
        auto cfg = family_defaults("population");
        cfg.preset = name;
        cfg.s0 = 150e3;
        cfg.initial_condition = "epi";
        return cfg;
    }
    if (name == "population-monostable-mes") {
        auto cfg = family_defaults("population");
        cfg.preset = name;
        cfg.s0 = 250e3;
        cfg.initial_condition = "epi";
        return cfg;
    }
    if (name == "population-epi-barrier") {
        auto cfg = family_defaults("population");
        cfg.preset = name;
        cfg.s0 = 175e3;
        cfg.initial_condition = "epi";
        cfg.eta_x = 5000.0;
        return cfg;
    }
    if (name == "entropy-linear") {
        auto cfg = family_defaults("entropy");
        cfg.preset = name;
        cfg.response = "linear";
        return cfg;
    }
    if (name == "entropy-hill") {
        auto cfg = family_defaults("entropy");
        cfg.preset = name;
        cfg.response = "hill";
        cfg.theta = 9.0;
        return cfg;
    }
    throw std::invalid_argument("unknown preset: " + name);
}

// The scenario family a preset belongs to (presets are parameterisations).
static std::string family_of(const std::string& preset) {
    for (const auto& fam : kFamilies)
        if (preset.rfind(fam, 0) == 0) return fam;
    throw std::invalid_argument("unknown preset: " + preset);
}

void validate_config(const ScenarioConfig& cfg) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    family_of(cfg.preset);
    if (!(cfg.gamma > 0.5 && cfg.gamma < 1.0)) fail("gamma must lie in (0.5, 1)");
    if (!(cfg.s0 >= 150e3 && cfg.s0 <= 250e3)) fail("s0 must lie in [150000, 250000]");
    if (cfg.alpha_relax <= 0) fail("alpha_relax must be > 0");
    if (cfg.alpha_epi < 0 || cfg.alpha_epi >= 1) fail("alpha_epi must lie in [0, 1)");
    if (cfg.eta_x <= 0) fail("eta_x must be > 0");
    if (cfg.eta_s <= 0) fail("eta_s must be > 0");
    if (cfg.theta <= 0) fail("theta must be > 0");
    if (cfg.r_epi <= 0) fail("r_epi must be > 0");
    if (cfg.death < 0) fail("death must be >= 0");
    if (cfg.total_cells <= 0) fail("total_cells must be > 0");
    if (cfg.horizon_hours <= 0) fail("horizon_hours must be > 0");
    if (cfg.checkpoint_hours <= 0) fail("checkpoint_hours must be > 0");
    if (cfg.n_grid < 2) fail("n_grid must be >= 2");
    if (cfg.rtol <= 0 || cfg.atol <= 0) fail("tolerances must be > 0");
    if (cfg.bandwidth_rule != "floored-count" && cfg.bandwidth_rule != "grid-spacing" &&
        cfg.bandwidth_rule != "particle-count")
        fail("bandwidth_rule must be floored-count, grid-spacing or particle-count");
    if (cfg.response != "linear" && cfg.response != "hill") fail("response must be linear or hill");
    static const std::set<std::string> ics = {"epi", "hyb", "mes", "epi_mes", "epi_hyb_mes", "uni"};
    if (!ics.count(cfg.initial_condition)) fail("unknown initial_condition " + cfg.initial_condition);
    if (cfg.growth != "r1" && cfg.growth != "r2" && cfg.growth != "r3") fail("growth must be r1|r2|r3");
}

namespace {

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text, const std::string& preset_name) {
    nlohmann::json j =
        json_text.empty() ? nlohmann::json::object() : nlohmann::json::parse(json_text);
    if (!j.is_object()) throw std::invalid_argument("config: document must be a JSON object");

    std::string preset = preset_name;
    if (j.contains("preset")) preset = j.at("preset").get<std::string>();
    if (preset.empty()) throw std::invalid_argument("config: no preset named");

    ScenarioConfig cfg = preset_config(preset);
    cfg.preset = preset;

    static const std::set<std::string> known = {
        "preset", "initial_condition", "growth", "response", "bandwidth_rule", "s0", "alpha_relax",
        "alpha_epi", "eta_x", "eta_s", "theta", "r_epi", "death", "total_cells", "gamma",
        "horizon_hours", "checkpoint_hours", "n_grid", "rtol", "atol", "mutations", "keep_fields",
        "joint_entropy", "seed", "output_dir",
    };
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw std::invalid_argument("config: unknown key \"" + key + "\"");

    read_key(j, "initial_condition", cfg.initial_condition);
    read_key(j, "growth", cfg.growth);
    read_key(j, "response", cfg.response);
    read_key(j, "bandwidth_rule", cfg.bandwidth_rule);
    read_key(j, "s0", cfg.s0);
    read_key(j, "alpha_relax", cfg.alpha_relax);
    read_key(j, "alpha_epi", cfg.alpha_epi);
    read_key(j, "eta_x", cfg.eta_x);
    read_key(j, "eta_s", cfg.eta_s);
    read_key(j, "theta", cfg.theta);
    read_key(j, "r_epi", cfg.r_epi);
    read_key(j, "death", cfg.death);
    read_key(j, "total_cells", cfg.total_cells);
    read_key(j, "gamma", cfg.gamma);
    read_key(j, "horizon_hours", cfg.horizon_hours);
    read_key(j, "checkpoint_hours", cfg.checkpoint_hours);
    read_key(j, "n_grid", cfg.n_grid);
    read_key(j, "rtol", cfg.rtol);
    read_key(j, "atol", cfg.atol);
    read_key(j, "mutations", cfg.mutations);
    read_key(j, "keep_fields", cfg.keep_fields);
    read_key(j, "joint_entropy", cfg.joint_entropy);
    read_key(j, "seed", cfg.seed);
    read_key(j, "output_dir", cfg.output_dir);

    validate_config(cfg);
    return cfg;
}

std::string serialize_config(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["preset"] = cfg.preset;
    j["initial_condition"] = cfg.initial_condition;
    j["growth"] = cfg.growth;
    j["response"] = cfg.response;
    j["bandwidth_rule"] = cfg.bandwidth_rule;
    j["s0"] = cfg.s0;
    j["alpha_relax"] = cfg.alpha_relax;
    j["alpha_epi"] = cfg.alpha_epi;
    j["eta_x"] = cfg.eta_x;
    j["eta_s"] = cfg.eta_s;
    j["theta"] = cfg.theta;
    j["r_epi"] = cfg.r_epi;
    j["death"] = cfg.death;
    j["total_cells"] = cfg.total_cells;
    j["gamma"] = cfg.gamma;
    j["horizon_hours"] = cfg.horizon_hours;
    j["checkpoint_hours"] = cfg.checkpoint_hours;
    j["n_grid"] = cfg.n_grid;
    j["rtol"] = cfg.rtol;
    j["atol"] = cfg.atol;
    j["mutations"] = cfg.mutations;
    j["keep_fields"] = cfg.keep_fields;
    j["joint_entropy"] = cfg.joint_entropy;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    return j.dump(2) + "\n";
}

}  // namespace popbal
