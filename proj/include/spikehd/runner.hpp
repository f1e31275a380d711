#pragma once

#include <string>

#include <json.hpp>

#include "spikehd/config.hpp"

namespace spikehd {

// Command flows shared by the CLI and the test suites. Each writes its
// outputs into cfg.output_dir; on failure, partially written files are moved
// to a quarantine subdirectory before the error propagates.

struct TrainOutcome {
    nlohmann::json report;
    std::string checkpoint_path;
    double final_accuracy = 0.0;
    std::uint64_t config_hash = 0;
};

TrainOutcome run_train(const RunConfig& cfg);

struct EvalOutcome {
    double accuracy = 0.0;
    std::string eval_csv;
    std::string predictions_csv;
};

EvalOutcome run_eval(const RunConfig& cfg, const std::string& checkpoint_path,
                     const std::string& split);

struct SweepOutcome {
    std::size_t row_count = 0;
    std::string sweep_csv;
    std::string summary_json;
    std::string plot_json;
};

SweepOutcome run_sweep_cmd(const RunConfig& cfg);

}  // namespace spikehd
