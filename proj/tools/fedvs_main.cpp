#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fedvs/config.hpp"
#include "fedvs/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"FedVS: straggler-resilient, privacy-preserving split-VFL simulator"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "Run a training experiment from a config file");
    std::string config_path;
    std::string strategy;
    std::optional<std::uint64_t> seed;
    std::optional<int> rounds;
    std::string out_path;
    int sweep_seeds = 1;
    run->add_option("--config", config_path, "Path to the key=value config file")->required();
    run->add_option("--strategy", strategy, "Override: fedvs|wait|ignore|wait_dp");
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--rounds", rounds, "Override the number of rounds");
    run->add_option("--out", out_path, "Metrics output file (JSONL); stdout when omitted");
    run->add_option("--sweep-seeds", sweep_seeds, "Run this many consecutive seeds in parallel")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        fedvs::ExperimentConfig cfg = fedvs::load_config(config_path);
        if (!strategy.empty()) fedvs::apply_override(cfg, "strategy", strategy);
        if (seed) cfg.seed = *seed;
        if (rounds) fedvs::apply_override(cfg, "rounds", std::to_string(*rounds));
        fedvs::validate(cfg);
        return fedvs::run_experiment(cfg, out_path, sweep_seeds);
    } catch (const std::exception& e) {
        nlohmann::json rec;
        rec["error"] = {{"kind", fedvs::error_kind(e)}, {"message", e.what()}};
        std::cerr << rec.dump() << std::endl;
        return 1;
    }
}
