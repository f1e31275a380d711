#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikehd/bench.hpp"
#include "spikehd/pipeline.hpp"

namespace spikehd {

struct DatasetConfig {
    std::string source = "synth_blobs";  // synth_blobs | synth_digits | idx | csv
    std::string path;
    std::string labels_path;
    std::string test_path;
    std::string test_labels_path;
    std::string label_column;
    std::size_t classes = 10;
    std::size_t features = 64;
    std::size_t train_samples = 1000;
    std::size_t test_samples = 200;
    double spread = 0.1;               // blob scatter
    double noise = 0.05;               // glyph pixel noise
    std::size_t image_side = 28;       // glyph resolution
    std::size_t downscale_factor = 1;  // block-mean pooling of images
    double train_fraction = 0.8;       // split when no explicit test files exist
};

// Complete declarative description of one experiment. Every field has a
// default; the resolved form (defaults filled in) is echoed into every output.
struct RunConfig {
    int schema_version = 1;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    int workers = 1;
    DatasetConfig dataset;
    RateCodeConfig rate_code;  // seed filled from the master seed
    ModelSpec model;           // input_dim filled from the dataset
    PhaseConfig phases;        // seed/rate_code filled from the master seed
    bool online_after_step2 = false;

    bool has_sweep = false;
    SweepSpec sweep;
    FaultScope fault_scope = FaultScope::HdcOnly;
    FaultModel fault_model = FaultModel::Parameters;
    std::size_t warmup = 100;
    std::size_t param_budget = 10000;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

// Parses and validates; collects every problem (with its field path) instead
// of stopping at the first.
RunConfig parse_config(const nlohmann::json& j, std::vector<std::string>& errors);
RunConfig load_config_file(const std::string& path);  // throws ConfigError

// The fully resolved configuration with every default spelled out. Re-running
// from this JSON reproduces the run exactly.
nlohmann::json resolved_json(const RunConfig& cfg);
std::uint64_t config_hash(const nlohmann::json& resolved);

struct LoadedData {
    DenseDataset train;
    DenseDataset test;
};

LoadedData load_dataset(const DatasetConfig& cfg, std::uint64_t master_seed);

// Applies the master seed to every derived seed field.
void resolve_seeds(RunConfig& cfg);

}  // namespace spikehd
