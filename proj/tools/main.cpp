#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "popbal/config.hpp"
#include "popbal/io.hpp"
#include "popbal/reduction.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool looks_like_file(const std::string& arg) {
    return arg.find('.') != std::string::npos || arg.find('/') != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phenotype-structured cell population balance simulator"};
    app.require_subcommand(1);

    std::string out_root = popbal::default_output_root().string();
    app.add_option("--out", out_root, "output root directory (or POPBAL_OUTPUT_ROOT)");

    auto* run_cmd = app.add_subcommand("run", "run a named preset or a JSON config file");
    std::string run_target;
    run_cmd->add_option("target", run_target, "preset name or config file")->required();

    auto* sweep_cmd = app.add_subcommand("sweep", "fan a parameter grid out into independent runs");
    std::string sweep_file;
    int jobs = 1;
    sweep_cmd->add_option("config", sweep_file, "sweep JSON file")->required();
    sweep_cmd->add_option("--jobs", jobs, "concurrent runs");

    auto* reduce_cmd = app.add_subcommand("reduce", "export the reduced advection and calibration");
    std::string calibrate = "";
    reduce_cmd->add_option("--calibrate", calibrate, "calibration grid: desk or full");

    auto* bif_cmd = app.add_subcommand("bifurcate", "export the equilibrium table");
    int bif_samples = 201;
    bif_cmd->add_option("--samples", bif_samples, "number of S samples");

    auto* presets_cmd = app.add_subcommand("presets", "list built-in presets");

    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path root(out_root);
        if (*run_cmd) {
            popbal::ScenarioConfig cfg;
            if (looks_like_file(run_target) && fs::exists(run_target))
                cfg = popbal::parse_config(slurp(run_target));
            else
                cfg = popbal::parse_config("", run_target);
            const auto summary = popbal::run_config(cfg, root);
            std::cout << "preset=" << summary.preset << " rho=" << popbal::format_double(summary.rho)
                      << " entropy=" << popbal::format_double(summary.entropy)
                      << " wall=" << popbal::format_double(summary.wall_seconds) << "s"
                      << " dir=" << summary.directory.string() << "\n";
        } else if (*sweep_cmd) {
            const auto summaries = popbal::run_sweep(slurp(sweep_file), root, jobs);
            for (const auto& s : summaries)
                std::cout << "preset=" << s.preset << " rho=" << popbal::format_double(s.rho)
                          << " dir=" << s.directory.string() << "\n";
        } else if (*reduce_cmd) {
            const auto ra = popbal::default_reduced_advection();
            popbal::write_reduction_table(root / "reduction" / "f_r_table.csv", ra);
            std::cout << "wrote " << (root / "reduction" / "f_r_table.csv").string() << "\n";
            if (!calibrate.empty()) {
                popbal::CalibrationGrid grid;
                if (calibrate == "desk") {
                    grid = {10, 10, 10, 50};
                } else if (calibrate != "full") {
                    throw std::runtime_error("--calibrate takes desk or full");
                }
                const auto rep =
                    popbal::calibrate_k({0.005, 0.01, 0.02, 0.04, 0.08}, 100.0, grid);
                popbal::write_calibration_json(root / "reduction" / "calibration.json", rep);
                std::cout << "selected k=" << popbal::format_double(rep.selected) << "\n";
            }
        } else if (*bif_cmd) {
            popbal::write_bifurcation_csv(root / "bifurcation.csv", bif_samples);
            std::cout << "wrote " << (root / "bifurcation.csv").string() << "\n";
        } else if (*presets_cmd) {
            for (const auto& name : popbal::preset_names()) std::cout << name << "\n";
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
