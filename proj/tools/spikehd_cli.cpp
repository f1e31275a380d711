#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spikehd/runner.hpp"
#include "spikehd/serialize.hpp"

namespace {

using namespace spikehd;

struct CliOverrides {
    std::string config_path;
    std::string out_dir;
    std::string checkpoint;
    std::string split = "test";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
};

// Environment variables override only the output directory and thread count.
void apply_environment(RunConfig& cfg) {
    if (const char* out = std::getenv("SPIKEHD_OUT")) cfg.output_dir = out;
    if (const char* w = std::getenv("SPIKEHD_WORKERS")) {
        int n = std::atoi(w);
        if (n >= 1) cfg.workers = n;
    }
}

RunConfig prepare_config(const CliOverrides& cli) {
    RunConfig cfg = load_config_file(cli.config_path);
    if (cli.seed_set) cfg.seed = cli.seed;
    if (!cli.out_dir.empty()) cfg.output_dir = cli.out_dir;
    if (cli.workers >= 1) cfg.workers = cli.workers;
    apply_environment(cfg);
    resolve_seeds(cfg);
    return cfg;
}

int cmd_inspect(const std::string& checkpoint) {
    CheckpointMeta meta = read_checkpoint_meta(checkpoint);
    Checkpoint cp = load_checkpoint(checkpoint);
    char hash_buf[20];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(meta.config_hash));
    std::cout << "phase: " << phase_name(static_cast<Phase>(meta.phase)) << "\n";
    std::cout << "config_hash: " << hash_buf << "\n";
    std::cout << "injection_depth: " << meta.injection_depth << "\n";
    std::cout << "pooling: "
              << (static_cast<Pooling>(meta.pooling) == Pooling::MeanRate ? "mean_rate"
                                                                          : "mean_readout_potential")
              << "\n";
    std::cout << "network: input " << cp.network.input_dim() << ", layers";
    for (std::size_t l = 1; l <= cp.network.num_layers(); ++l)
        std::cout << " " << cp.network.layer_size(l);
    std::cout << ", classes " << cp.network.classes() << "\n";
    std::cout << "encoder: " << cp.basis.input_dim() << " -> " << cp.basis.dim() << " ("
              << (cp.basis.activation() == Activation::Tanh ? "tanh" : "sincos") << ", seed "
              << cp.basis.seed() << ")\n";
    std::cout << "memory: " << cp.memory.num_classes() << " classes x " << cp.memory.dim() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spiking front end + hyperdimensional classifier"};
    app.require_subcommand(1);

    CliOverrides cli;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", cli.config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", cli.seed, "override the master seed")
            ->each([&](const std::string&) { cli.seed_set = true; });
        sub->add_option("--workers", cli.workers, "worker pool size (default 1, fully serial)");
        sub->add_option("--out", cli.out_dir, "output directory override");
    };

    CLI::App* train = app.add_subcommand("train", "run the three training stages");
    add_common(train);

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    add_common(eval);
    eval->add_option("--checkpoint", cli.checkpoint, "model checkpoint")->required();
    eval->add_option("--split", cli.split, "dataset split to evaluate (train|test)");

    CLI::App* sweep = app.add_subcommand("sweep", "run a benchmark sweep");
    add_common(sweep);

    CLI::App* inspect = app.add_subcommand("inspect", "print checkpoint metadata");
    inspect->add_option("--checkpoint", cli.checkpoint, "model checkpoint")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            TrainOutcome out = run_train(prepare_config(cli));
            std::cout << "final test accuracy: " << out.final_accuracy << "\n";
            std::cout << "checkpoint: " << out.checkpoint_path << "\n";
            return 0;
        }
        if (eval->parsed()) {
            EvalOutcome out = run_eval(prepare_config(cli), cli.checkpoint, cli.split);
            std::cout << "accuracy: " << out.accuracy << "\n";
            return 0;
        }
        if (sweep->parsed()) {
            SweepOutcome out = run_sweep_cmd(prepare_config(cli));
            std::cout << out.row_count << " sweep rows written\n";
            return 0;
        }
        if (inspect->parsed()) return cmd_inspect(cli.checkpoint);
    } catch (const spikehd::ConfigError& e) {
        for (const std::string& msg : e.errors()) std::cerr << "error: " << msg << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
