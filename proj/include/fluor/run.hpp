// run.hpp — Config-driven experiments and dataset emission

#pragma once

#include "fluor/model.hpp"
#include "fluor/propagator.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fluor {

struct Variant {
    std::string name;
    ModelSpec model;
    nlohmann::json options = nlohmann::json::object();
};

struct RunConfig {
    std::string name{"run"};
    std::string experiment;
    ModelSpec model;
    KrylovConfig numerics;
    std::vector<Variant> variants;   // at least one after parsing
    std::vector<double> omega_b;
    std::vector<double> time;
    std::vector<double> n_list;
    std::vector<double> p0_list;
    std::vector<double> coupling;    // g_a grid (levels) or lambda_b grid (dicke-critical)
    std::optional<double> t_final;
    nlohmann::json options = nlohmann::json::object();
    std::filesystem::path output_dir{"out"};
    int workers{1};
    bool force_overwrite{false};

    // Fully resolved form; embedded in every dataset and hashed.
    nlohmann::json resolved() const;
};

const std::vector<std::string>& known_experiments();

// Strict parse: unknown keys anywhere are rejected with the key path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
std::filesystem::path preset_path(const std::string& name);
RunConfig load_preset(const std::string& name);

// Grid helper accepting either a list or {"min", "max", "points"}.
std::vector<double> parse_grid(const nlohmann::json& j, const std::string& key);

struct RunResult {
    std::vector<std::filesystem::path> files;
    nlohmann::json summary = nlohmann::json::object();
};

// Executes the experiment and writes datasets under output_dir/name.
RunResult run(const RunConfig& cfg);

} // namespace fluor
