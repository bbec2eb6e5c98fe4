// fluor_cli.cpp — Command-line driver for config-described experiments

#include "fluor/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Multi-photon fluorescence simulator"};
    std::string config_path, preset, out_dir = "out";
    int workers = 1;
    bool force = false, list = false, dry = false;
    app.add_option("--config", config_path, "JSON run description");
    app.add_option("--preset", preset, "Named preset from the presets directory");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--workers", workers, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
    app.add_flag("--force-overwrite", force, "Replace existing datasets");
    app.add_flag("--list-experiments", list, "Print known experiment names");
    app.add_flag("--dry-run", dry, "Validate and print the resolved configuration");
    CLI11_PARSE(app, argc, argv);

    if (list) {
        for (const auto& e : fluor::known_experiments()) std::cout << e << "\n";
        return 0;
    }
    if (config_path.empty() == preset.empty()) {
        std::cerr << "error: exactly one of --config or --preset is required\n";
        return 2;
    }
    try {
        fluor::RunConfig cfg = config_path.empty() ? fluor::load_preset(preset) : fluor::load_run_config(config_path);
        cfg.output_dir = out_dir;
        cfg.workers = workers;
        cfg.force_overwrite = force;
        if (dry) {
            std::cout << cfg.resolved().dump(2) << "\n";
            return 0;
        }
        const auto res = fluor::run(cfg);
        for (const auto& f : res.files) std::cout << f.string() << "\n";
        std::cout << res.summary.dump(2) << "\n";
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
