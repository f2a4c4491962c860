// Command-line experiment runner. Usage:
//   tsge_lab run <config.json> [--seed N] [--replications N] [--out DIR]
//                [--threads N]
// The TSGE_SEED environment variable overrides the seed (and is logged).
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tsge/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Simulation laboratory for the TS-GE non-stationary bandit"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run one experiment config");
    std::string config_path;
    run->add_option("config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);

    long long seed = -1;
    int replications = -1;
    int threads = -1;
    std::string out_dir;
    run->add_option("--seed", seed, "override the base seed");
    run->add_option("--replications", replications,
                    "override the replication count");
    run->add_option("--out", out_dir, "override the output directory");
    run->add_option("--threads", threads, "worker threads for replications");

    CLI11_PARSE(app, argc, argv);

    tsge::CliOverrides overrides;
    if (seed >= 0) overrides.seed = static_cast<std::uint64_t>(seed);
    if (replications > 0) overrides.replications = replications;
    if (threads > 0) overrides.threads = threads;
    if (!out_dir.empty()) overrides.output_dir = out_dir;

    if (const char* env_seed = std::getenv("TSGE_SEED")) {
        overrides.seed = static_cast<std::uint64_t>(std::stoull(env_seed));
        std::cerr << "seed overridden by TSGE_SEED=" << env_seed << "\n";
    }

    return tsge::run_experiment_file(config_path, overrides);
}
