#include "popbal/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "popbal/entropy_growth.hpp"
#include "popbal/equilibria.hpp"
#include "popbal/scenarios.hpp"

namespace popbal {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows,
               const std::vector<std::string>& comment_lines) {
    auto out = open_out(path);
    for (const auto& line : comment_lines) out << "# " << line << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

void write_field_csv(const fs::path& path, const DensityField& d, const Rescaling& rs) {
    std::vector<std::vector<double>> rows;
    rows.reserve(d.values.size());
    const double jac = d.dim == 2 ? rs.a * rs.c : rs.a;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        const double x = rs.x_from_unit(d.grid[i * d.dim]);
        const double s = d.dim == 2 ? rs.s_from_unit(d.grid[i * d.dim + 1]) : 200e3;
        rows.push_back({d.t, x, s, d.values[i] / jac});
    }
    write_csv(path, {"t_hours", "x_molecules", "S_molecules", "density"}, rows,
              {"N=" + std::to_string(d.grid_n), "gamma=" + format_double(d.gamma),
               "epsilon=" + format_double(d.epsilon), "rho=" + format_double(d.rho)});
}

void write_ensemble_json(const fs::path& path, const ParticleEnsemble& e) {
    nlohmann::json j;
    j["dim"] = e.dim;
    j["grid_n"] = e.grid_n;
    j["t"] = e.t;
    j["positions"] = e.pos;
    j["volume_weights"] = e.w;
    j["mass_weights"] = e.v;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

ParticleEnsemble read_ensemble_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    nlohmann::json j;
    in >> j;
    ParticleEnsemble e;
    e.dim = j.at("dim").get<int>();
    e.grid_n = j.at("grid_n").get<int>();
    e.t = j.at("t").get<double>();
    e.pos = j.at("positions").get<std::vector<double>>();
    e.w = j.at("volume_weights").get<std::vector<double>>();
    e.v = j.at("mass_weights").get<std::vector<double>>();
    if (e.w.size() != e.v.size() || e.pos.size() != e.w.size() * e.dim)
        throw std::runtime_error("ensemble JSON: inconsistent array sizes");
    return e;
}

namespace {

fs::path run_directory(const ScenarioConfig& cfg, const fs::path& root) {
    if (!cfg.output_dir.empty()) return fs::path(cfg.output_dir);
    return root / cfg.preset;
}

void write_summary(const fs::path& dir, const nlohmann::json& summary) {
    auto out = open_out(dir / "summary.json");
    out << summary.dump(2) << "\n";
}

RunSummary run_population_family(const ScenarioConfig& cfg, const fs::path& dir) {
    PopulationScenarioParams p;
    p.ic = parse_pop_initial(cfg.initial_condition);
    p.growth = parse_growth_case(cfg.growth);
    p.s0 = cfg.s0;
    p.alpha_relax = cfg.alpha_relax;
    p.eta_x = cfg.eta_x;
    p.eta_s = cfg.eta_s;
    p.mutations = cfg.mutations;
    p.r_epi = cfg.r_epi;
    p.death = cfg.death;
    p.total_cells = cfg.total_cells;
    p.horizon = cfg.horizon_hours;
    p.checkpoint = cfg.checkpoint_hours;
    p.n_grid = cfg.n_grid;
    p.gamma = cfg.gamma;
    p.ode.rtol = cfg.rtol;
    p.ode.atol = cfg.atol;
    p.bandwidth = cfg.bandwidth_rule == "particle-count"   ? BandwidthRule::particle_count
                  : cfg.bandwidth_rule == "grid-spacing" ? BandwidthRule::grid_spacing
                                                         : BandwidthRule::floored_count;

    const auto result = run_population_scenario(p, cfg.keep_fields);

    std::vector<std::vector<double>> rows;
    for (const auto& pt : result.series)
        rows.push_back({pt.t, pt.rho, pt.fractions.e, pt.fractions.h, pt.fractions.m, pt.entropy,
                        pt.leak});
    write_csv(dir / "series.csv", {"t_hours", "rho", "frac_e", "frac_h", "frac_m", "entropy", "leak"},
              rows);
    write_field_csv(dir / "field_final.csv", result.final_field);
    write_ensemble_json(dir / "ensemble_final.json", restart_from_field(result.final_field));
    if (cfg.keep_fields)
        for (std::size_t i = 0; i < result.fields.size(); ++i)
            write_field_csv(dir / ("field_" + std::to_string(i) + ".csv"), result.fields[i]);

    const auto modes = marginal_modes(result.final_field);
    const auto& last = result.series.back();
    nlohmann::json summary;
    summary["preset"] = cfg.preset;
    summary["rho_final"] = last.rho;
    summary["fractions_final"] = {{"e", last.fractions.e}, {"h", last.fractions.h}, {"m", last.fractions.m}};
    summary["entropy_final"] = last.entropy;
    summary["modes_x_molecules"] = [&] {
        std::vector<double> mm;
        for (double m : modes) mm.push_back(Rescaling{}.x_from_unit(m));
        return mm;
    }();
    summary["modal_count"] = modes.size();
    write_summary(dir, summary);
    return {cfg.preset, last.rho, last.entropy, 0, dir};
}

RunSummary run_entropy_family(const ScenarioConfig& cfg, const fs::path& dir) {
    EntropyModelParams p;
    p.response = parse_response_kind(cfg.response);
    p.theta = cfg.theta;
    p.r0 = cfg.r_epi;
    p.eta_x = cfg.eta_x;
    p.snail = cfg.s0;
    p.n_grid = cfg.n_grid;
    p.gamma = cfg.gamma;
    p.ode.rtol = cfg.rtol;
    p.ode.atol = cfg.atol;
    p.bandwidth = cfg.bandwidth_rule == "particle-count"   ? BandwidthRule::particle_count
                  : cfg.bandwidth_rule == "grid-spacing" ? BandwidthRule::grid_spacing
                                                         : BandwidthRule::floored_count;

    const auto ra = default_reduced_advection();
    EntropyInitial kind;
    if (cfg.initial_condition == "epi")
        kind = EntropyInitial::ep;
    else if (cfg.initial_condition == "hyb")
        kind = EntropyInitial::hyb;
    else if (cfg.initial_condition == "mes")
        kind = EntropyInitial::mes;
    else if (cfg.initial_condition == "epi_mes")
        kind = EntropyInitial::ep_mes;
    else
        kind = EntropyInitial::unif;
    const auto u0 = entropy_initial_density(kind, ra, cfg.total_cells);

    std::vector<double> checkpoints;
    for (double t = cfg.checkpoint_hours; t < cfg.horizon_hours + 0.5 * cfg.checkpoint_hours;
         t += cfg.checkpoint_hours)
        checkpoints.push_back(std::min(t, cfg.horizon_hours));
    if (checkpoints.empty() || checkpoints.back() != cfg.horizon_hours)
        checkpoints.push_back(cfg.horizon_hours);

    const auto result = run_entropy_model(u0, checkpoints, p, ra, cfg.keep_fields);

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < result.t.size(); ++i)
        rows.push_back({result.t[i], result.entropy[i], result.rho[i],
                        static_cast<double>(p.response == GrowthResponseKind::linear ? 0 : 1),
                        p.theta, result.leakage[i]});
    write_csv(dir / "series.csv", {"t_hours", "entropy", "rho", "response_kind", "theta", "leak"},
              rows);
    write_field_csv(dir / "field_final.csv", result.fields.back());
    write_ensemble_json(dir / "ensemble_final.json", restart_from_field(result.fields.back()));

    nlohmann::json summary;
    summary["preset"] = cfg.preset;
    summary["rho_final"] = result.rho.back();
    summary["entropy_final"] = result.entropy.back();
    summary["response"] = cfg.response;
    write_summary(dir, summary);
    return {cfg.preset, result.rho.back(), result.entropy.back(), 0, dir};
}

RunSummary run_hysteresis_family(const ScenarioConfig& cfg, const fs::path& dir) {
    IntegratorConfig ode;
    ode.rtol = cfg.rtol;
    ode.atol = cfg.atol;
    nlohmann::json summary;
    summary["preset"] = cfg.preset;

    if (cfg.preset == "hysteresis-homogeneous") {
        const auto res = run_hysteresis_homogeneous({}, ode);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < res.t.size(); ++i)
            rows.push_back({res.t[i], res.mu200[i], res.zeb[i], res.snail[i]});
        write_csv(dir / "trajectory.csv", {"t_hours", "mu200", "zeb", "snail"}, rows);
        summary["mu200_ascending_at_200k"] = res.mu_ascending_200k;
        summary["mu200_descending_at_200k"] = res.mu_descending_200k;
        summary["hysteresis_gap"] = std::abs(res.mu_ascending_200k - res.mu_descending_200k);
        summary["dwell_hybrid_ascending_hours"] = res.dwell_hybrid_ascending;
        summary["dwell_hybrid_descending_hours"] = res.dwell_hybrid_descending;
        write_summary(dir, summary);
        return {cfg.preset, 0, 0, 0, dir};
    }

    const auto res = run_hysteresis_heterogeneous(81, {}, ode);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < res.t.size(); ++i)
        rows.push_back({res.t[i], res.snail_mean[i], res.fractions[i].e, res.fractions[i].h,
                        res.fractions[i].m});
    write_csv(dir / "series.csv", {"t_hours", "snail_mean", "frac_e", "frac_h", "frac_m"}, rows);
    double asc = 0, desc = 0;
    for (std::size_t i = 0; i < res.t.size(); ++i)
        (res.t[i] <= 5000 ? asc : desc) += res.fractions[i].h;
    summary["hybrid_exposure_ascending"] = asc;
    summary["hybrid_exposure_descending"] = desc;
    write_summary(dir, summary);
    return {cfg.preset, 0, 0, 0, dir};
}

RunSummary run_epigenetic_family(const ScenarioConfig& cfg, const fs::path& dir) {
    IntegratorConfig ode;
    ode.rtol = cfg.rtol;
    ode.atol = cfg.atol;
    EpigeneticParams p;
    p.alpha_epi = cfg.alpha_epi;
    const auto res = run_epigenetic(
        cfg.preset == "epigenetic-short" ? Induction::short_term : Induction::long_term, p, 12000.0,
        ode);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < res.t.size(); ++i)
        rows.push_back({res.t[i], res.mu200[i], res.zeb[i], res.z0[i], res.snail[i]});
    write_csv(dir / "trajectory.csv", {"t_hours", "mu200", "zeb", "z0", "snail"}, rows);
    nlohmann::json summary;
    summary["preset"] = cfg.preset;
    summary["withdrawal_start_hours"] = res.withdrawal_start;
    summary["recovered"] = res.recovered;
    summary["recovery_time_hours"] = res.recovery_time;
    summary["recovery_threshold_mu200"] = res.recovery_threshold;
    write_summary(dir, summary);
    return {cfg.preset, 0, 0, 0, dir};
}

}  // namespace

RunSummary run_config(const ScenarioConfig& cfg, const fs::path& output_root) {
    validate_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dir = run_directory(cfg, output_root);
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "config.json");
        out << serialize_config(cfg);
    }

    RunSummary summary;
    if (cfg.preset.rfind("population", 0) == 0)
        summary = run_population_family(cfg, dir);
    else if (cfg.preset.rfind("entropy", 0) == 0)
        summary = run_entropy_family(cfg, dir);
    else if (cfg.preset.rfind("hysteresis", 0) == 0)
        summary = run_hysteresis_family(cfg, dir);
    else
        summary = run_epigenetic_family(cfg, dir);

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

std::vector<RunSummary> run_sweep(const std::string& sweep_json, const fs::path& output_root,
                                  int jobs) {
    const auto doc = nlohmann::json::parse(sweep_json);
    if (!doc.is_object() || !doc.contains("base"))
        throw std::invalid_argument("sweep: document needs a \"base\" object");
    const std::string base_text = doc.at("base").dump();
    const auto grid = doc.value("grid", nlohmann::json::object());

    // Cartesian product of the grid axes, applied on top of the base config.
    std::vector<nlohmann::json> combos = {nlohmann::json::object()};
    for (const auto& [key, values] : grid.items()) {
        if (!values.is_array()) throw std::invalid_argument("sweep: grid entries must be arrays");
        std::vector<nlohmann::json> next;
        for (const auto& combo : combos)
            for (const auto& v : values) {
                auto c = combo;
                c[key] = v;
                next.push_back(c);
            }
        combos = std::move(next);
    }

    std::vector<ScenarioConfig> configs;
    for (std::size_t i = 0; i < combos.size(); ++i) {
        auto merged = nlohmann::json::parse(base_text);
        std::string tag = "run_" + std::to_string(i);
        for (const auto& [key, v] : combos[i].items()) {
            merged[key] = v;
            tag += "_" + key + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
        }
        auto cfg = parse_config(merged.dump());
        if (cfg.output_dir.empty()) cfg.output_dir = (output_root / tag).string();
        configs.push_back(cfg);
    }

    std::vector<RunSummary> out(configs.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) out[i] = run_config(configs[i], output_root);
        return out;
    }
    std::vector<std::future<RunSummary>> futures;
    futures.reserve(configs.size());
    for (const auto& cfg : configs)
        futures.push_back(std::async(std::launch::async, [cfg, output_root] {
            return run_config(cfg, output_root);
        }));
    for (std::size_t i = 0; i < futures.size(); ++i) out[i] = futures[i].get();
    return out;
}

void write_reduction_table(const fs::path& path, const ReducedAdvection& ra, int n_s, int n_x) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < n_s; ++i) {
        const double s = 150e3 + 100e3 * i / (n_s - 1);
        for (int j = 0; j < n_x; ++j) {
            const double x = 25e3 * j / (n_x - 1);
            rows.push_back({s, x, ra.value(x, s)});
        }
    }
    write_csv(path, {"S_molecules", "x_molecules", "f_r"}, rows,
              {"k=" + format_double(ra.k)});
}

void write_calibration_json(const fs::path& path, const CalibrationReport& rep) {
    nlohmann::json j;
    j["selected"] = rep.selected;
    nlohmann::json table = nlohmann::json::array();
    for (std::size_t i = 0; i < rep.candidates.size(); ++i)
        table.push_back({{"k", rep.candidates[i]}, {"discrepancy", rep.discrepancy[i]}});
    j["candidates"] = table;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_bifurcation_csv(const fs::path& path, int n_s) {
    const auto ra = default_reduced_advection();
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < n_s; ++i) {
        const double s = 150e3 + 100e3 * i / (n_s - 1);
        for (const auto& eq : find_equilibria(s)) {
            // Nearest valid branch for labelling.
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (int b = 0; b < 5; ++b) {
                if (!branch_validity(static_cast<Branch>(b), ra.intervals).contains(s)) continue;
                const double d = std::abs(ra.polys[b](s) - eq.mu200);
                if (d < best_d) best_d = d, best = b;
            }
            rows.push_back({s, eq.mu200, eq.zeb, eq.stable ? 1.0 : 0.0, static_cast<double>(best)});
        }
    }
    write_csv(path, {"S_molecules", "mu200", "zeb", "stable", "branch"}, rows,
              {"branch: 0=mes 1=u1 2=hyb 3=u2 4=ep"});
}

std::filesystem::path default_output_root() {
    if (const char* env = std::getenv("POPBAL_OUTPUT_ROOT")) return fs::path(env);
    return fs::path("runs");
}

}  // namespace popbal
