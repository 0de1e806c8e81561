#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "popbal/config.hpp"
#include "popbal/io.hpp"

using namespace popbal;

TEST_CASE("empty document yields the preset defaults") {
    const auto cfg = parse_config("", "population-tristable");
    CHECK(cfg.preset == "population-tristable");
    CHECK(cfg.s0 == 200e3);
    CHECK(cfg.gamma == 0.8);
    CHECK(cfg.n_grid == 20);
    CHECK(cfg.initial_condition == "epi");

    const auto ent = parse_config("", "entropy-linear");
    CHECK(ent.n_grid == 50);
    CHECK(ent.eta_x == 4000.0);
    CHECK(ent.response == "linear");
}

TEST_CASE("strict validation: unknown keys and bounds") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"preset":"population","gama":0.8})"),
                         doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config(R"({"preset":"population","gamma":1.5})"),
                         doctest::Contains("(0.5, 1)"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config(R"({"preset":"population","s0":300000})"),
                         doctest::Contains("[150000, 250000]"), std::invalid_argument);
    CHECK_THROWS(parse_config(R"({"preset":"no-such-preset"})"));
    CHECK_THROWS(parse_config(R"({"preset":"population","initial_condition":"weird"})"));
    CHECK_THROWS(parse_config(R"({"preset":"population","growth":"r9"})"));
    CHECK_THROWS(parse_config("", ""));
    // Overrides apply on top of the preset.
    const auto cfg = parse_config(R"({"preset":"population","eta_x":5000,"s0":175000})");
    CHECK(cfg.eta_x == 5000.0);
    CHECK(cfg.s0 == 175000.0);
}

TEST_CASE("config round-trips through serialization") {
    auto cfg = preset_config("population");
    cfg.eta_x = 2500.0;
    cfg.growth = "r3";
    cfg.checkpoint_hours = 48.0;
    cfg.mutations = false;
    cfg.output_dir = "/tmp/somewhere";
    const auto text = serialize_config(cfg);
    const auto back = parse_config(text);
    CHECK(back.preset == cfg.preset);
    CHECK(back.eta_x == cfg.eta_x);
    CHECK(back.growth == cfg.growth);
    CHECK(back.checkpoint_hours == cfg.checkpoint_hours);
    CHECK(back.mutations == cfg.mutations);
    CHECK(back.output_dir == cfg.output_dir);
    CHECK(serialize_config(back) == text);
}

TEST_CASE("every preset parses and validates") {
    for (const auto& name : preset_names()) {
        const auto cfg = parse_config("", name);
        CHECK_NOTHROW(validate_config(cfg));
    }
}

TEST_CASE("format_double renders round-trip decimals") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::stod(format_double(100000.0)) == 100000.0);
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(std::stod(format_double(8.2847e-3)) == 8.2847e-3);
}

TEST_CASE("ensemble JSON round-trip") {
    namespace fs = std::filesystem;
    ParticleEnsemble e;
    e.dim = 2;
    e.grid_n = 2;
    e.t = 48.0;
    e.pos = {0.25, 0.25, 0.25, 0.75, 0.75, 0.25, 0.75, 0.75};
    e.w = {0.25, 0.25, 0.25, 0.25};
    e.v = {1.0, 2.0, 3.5, 0.0};
    const auto path = fs::temp_directory_path() / "popbal_test_ensemble.json";
    write_ensemble_json(path, e);
    const auto back = read_ensemble_json(path);
    CHECK(back.dim == e.dim);
    CHECK(back.t == e.t);
    CHECK(back.pos == e.pos);
    CHECK(back.w == e.w);
    CHECK(back.v == e.v);
    fs::remove(path);
}
