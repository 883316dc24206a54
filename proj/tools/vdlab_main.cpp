#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "vdlab/config.hpp"
#include "vdlab/runner.hpp"

using namespace vdlab;

int main(int argc, char** argv) {
    CLI::App app{"vdlab: vacuum-coupled Klein-Gordon and Dirac identity laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", runner::kVersion);

    std::string config_path;
    std::string experiment;
    std::string out_dir;
    std::vector<std::string> overrides;
    int refine_levels = 0;
    long long seed = -1;

    auto* run = app.add_subcommand("run", "run an experiment and write report.json plus CSV tables");
    run->add_option("--config", config_path, "config file")->required();
    run->add_option("--experiment", experiment, "experiment name or 'all' (overrides run.experiment)");
    run->add_option("--out", out_dir, "output directory (VDLAB_OUT takes precedence)");
    run->add_option("--set", overrides, "override, section.key=value (repeatable)");
    run->add_option("--refine-levels", refine_levels, "refinement levels (overrides run.refine_levels)")
        ->check(CLI::Range(1, 6));
    run->add_option("--seed", seed, "base seed (overrides run.seed)")->check(CLI::NonNegativeNumber);

    auto* validate = app.add_subcommand("validate", "parse and validate a config file");
    validate->add_option("--config", config_path, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*validate) {
            const auto cfg = runner::load_config(config_path);
            std::cout << "config ok: " << config_path << '\n';
            for (const auto& [k, v] : cfg.echo) std::cout << "  " << k << " = " << v << '\n';
            return 0;
        }
        if (!experiment.empty()) overrides.push_back("run.experiment=" + experiment);
        if (refine_levels > 0) overrides.push_back("run.refine_levels=" + std::to_string(refine_levels));
        if (seed >= 0) overrides.push_back("run.seed=" + std::to_string(seed));
        auto cfg = runner::load_config(config_path, overrides);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (const char* env = std::getenv("VDLAB_OUT"); env && *env) cfg.output_dir = env;
        return runner::run(cfg, std::cout).exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
