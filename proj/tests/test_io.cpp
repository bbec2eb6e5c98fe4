// test_io.cpp — CSV round trips, config hashing and strict run configs

#include "fluor/dataset_io.hpp"
#include "fluor/run.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <cstring>
#include <random>

using namespace fluor;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("fluor-io-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

json small_spectrum_config() {
    return json::parse(R"({
        "name": "tiny", "experiment": "spectrum",
        "model": {"family": "two-level", "levels": [0, 1], "omega_a": 1, "alpha": 1, "g_a": 0.1,
                  "g_b": 0.01, "gamma": 0.5, "n_b_max": 1},
        "grids": {"omega_b": {"min": 0.9, "max": 1.1, "points": 3}, "t_final": 16}
    })");
}

} // namespace

TEST_CASE("numbers are written with 17 significant digits") {
    CHECK(format_number(0.1) == "1.0000000000000001e-01");
    CHECK(format_number(-2.5) == "-2.5000000000000000e+00");
}

TEST_CASE("CSV round trip is bit exact") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Table t{{"a", "b", "c"}, {}};
    for (int r = 0; r < 50; ++r) t.rows.push_back({u(rng), std::ldexp(u(rng), -900), std::ldexp(u(rng), 900)});
    t.rows.push_back({0.0, -0.0, 5e-324});
    const Table back = parse_csv(to_csv(t));
    CHECK(back.columns == t.columns);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(std::memcmp(&back.rows[r][c], &t.rows[r][c], sizeof(double)) == 0);
}

TEST_CASE("spectrum datasets survive emission and read-back") {
    const auto dir = scratch("dataset");
    SpectrumDataset d;
    d.omega_grid = {0.9, 1.0, 1.1};
    d.time_grid = {0.0, 1.0};
    d.P = RMatrix::Zero(2, 3);
    d.P << 0.0, 0.0, 0.0, 0.1, 0.3, 1.0 / 3.0;
    d.metadata["config"] = {{"k", 1}};
    emit_dataset(d, dir / "s");
    const auto back = read_dataset(dir / "s");
    CHECK(back.omega_grid == d.omega_grid);
    CHECK(back.time_grid == d.time_grid);
    CHECK(back.P == d.P);
    CHECK_THROWS_WITH(emit_dataset(d, dir / "s"), doctest::Contains("refusing"));
    EmitOptions force;
    force.force_overwrite = true;
    CHECK_NOTHROW(emit_dataset(d, dir / "s", force));
    std::ifstream side(dir / "s.json");
    const json meta = json::parse(side);
    CHECK(meta.at("config_hash") == config_hash(d.metadata["config"]));
}

TEST_CASE("config hash is canonical and sensitive to every field") {
    const json base = parse_run_config(small_spectrum_config()).resolved();
    const std::string h = config_hash(base);
    CHECK(h.size() == 64);
    // Key order does not matter.
    json reordered = json::object();
    for (auto it = base.rbegin(); it != base.rend(); ++it) reordered[it.key()] = it.value();
    CHECK(config_hash(reordered) == h);
    for (const char* key : {"gamma", "g_b", "alpha", "omega_a", "n_b_max"}) {
        json c = small_spectrum_config();
        if (std::string(key) == "n_b_max") c["model"][key] = 2;
        else c["model"][key] = c["model"][key].get<double>() * (1.0 + 1e-12);
        CHECK(config_hash(parse_run_config(c).resolved()) != h);
    }
    json c = small_spectrum_config();
    c["numerics"] = {{"dt", 0.025}};
    CHECK(config_hash(parse_run_config(c).resolved()) != h);
}

TEST_CASE("strict configs name the offending key") {
    auto err = [](const json& j) {
        try {
            parse_run_config(j);
        } catch (const std::invalid_argument& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    json c = small_spectrum_config();
    c["model"]["gamma"] = -0.1;
    CHECK(err(c).find("model.gamma") != std::string::npos);
    c = small_spectrum_config();
    c["model"]["colour"] = 1;
    CHECK(err(c).find("colour") != std::string::npos);
    c = small_spectrum_config();
    c["grids"]["omega_b"] = {{"min", 1.0}, {"max", 0.5}, {"points", 3}};
    CHECK(err(c).find("grids.omega_b") != std::string::npos);
    c = small_spectrum_config();
    c["experiment"] = "teleport";
    CHECK(err(c).find("teleport") != std::string::npos);
    c = small_spectrum_config();
    c["variants"] = json::parse(R"([{"name": "bad", "model": {"gamma": -1}}])");
    CHECK(err(c).find("variants.bad") != std::string::npos);
    c = small_spectrum_config();
    c["variants"] = json::parse(R"([{"model": {"gamma": 1}}])");
    CHECK(err(c).find("name") != std::string::npos);
    c = small_spectrum_config();
    c["model"]["alpha"] = "many";
    CHECK(err(c).find("alpha") != std::string::npos);
    c = small_spectrum_config();
    c["grids"].erase("omega_b");
    CHECK(err(c).find("omega_b") != std::string::npos);
}

TEST_CASE("grid helper expands ranges") {
    const auto g = parse_grid(json{{"min", 0.0}, {"max", 1.0}, {"points", 5}}, "x");
    CHECK(g == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(parse_grid(json::array({0.3, 0.1}), "x") == std::vector<double>{0.3, 0.1});
    CHECK_THROWS(parse_grid(json{{"min", 0.0}, {"max", 1.0}, {"points", 0}}, "x"));
}

TEST_CASE("runs write a hashed summary and refuse to overwrite it") {
    auto cfg = parse_run_config(small_spectrum_config());
    cfg.output_dir = scratch("run");
    const auto res = run(cfg);
    CHECK(std::filesystem::exists(cfg.output_dir / "tiny" / "summary.json"));
    std::ifstream f(cfg.output_dir / "tiny" / "summary.json");
    const json s = json::parse(f);
    CHECK(s.at("config_hash") == config_hash(cfg.resolved()));
    CHECK_THROWS_WITH(run(cfg), doctest::Contains("refusing"));
    cfg.force_overwrite = true;
    CHECK_NOTHROW(run(cfg));
}
