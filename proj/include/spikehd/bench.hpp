#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikehd/pipeline.hpp"

namespace spikehd {

enum class SweepAxis : std::uint8_t {
    Dimension = 0,
    FaultRate = 1,
    InjectionDepth = 2,
    ParamRatio = 3,
    OnlineVsOffline = 4,
};

enum class FaultScope : std::uint8_t { HdcOnly = 0, SnnOnly = 1, Both = 2 };

// Parameters: individual weights / memory entries are zeroed.
// Neurons: whole units are lost (a memory column, or a neuron's incident
// weights).
enum class FaultModel : std::uint8_t { Parameters = 0, Neurons = 1 };

struct SweepSpec {
    SweepAxis axis = SweepAxis::Dimension;
    std::vector<double> values;
    int repeats = 5;
    std::uint64_t seed = 1;
    std::string task;  // dataset name, recorded in outputs
};

struct SweepRow {
    double value = 0.0;
    int repeat = 0;
    std::string metric;
    double metric_value = 0.0;
    double seconds = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

struct BenchConfig {
    DenseDataset train;
    DenseDataset test;
    ModelSpec model;
    PhaseConfig phases;
    FaultScope fault_scope = FaultScope::HdcOnly;
    FaultModel fault_model = FaultModel::Parameters;
    std::size_t warmup = 100;          // online-vs-offline split point
    std::size_t param_budget = 10000;  // trainable-parameter budget for the ratio axis
};

// Returns a faulted copy; the source model is never touched. Exactly
// floor(fraction * pool) parameters (or units) are zeroed, chosen uniformly
// without replacement from the scoped pool, reproducibly by seed.
SpikeHdModel inject_faults(const SpikeHdModel& model, double fraction, FaultScope scope,
                           std::uint64_t seed, FaultModel fault_model = FaultModel::Parameters);

std::size_t fault_pool_size(const SpikeHdModel& model, FaultScope scope, FaultModel fault_model);

SweepResult run_sweep(const SweepSpec& spec, const BenchConfig& base);

// Shared stage-one/stage-two warmup, then one branch keeps co-training while
// the other only streams memory updates; per-epoch accuracy rows carry
// cumulative training seconds so both convergence views can be plotted.
SweepResult compare_online_offline(std::uint64_t model_seed, const DenseDataset& train,
                                   const DenseDataset& test, std::size_t warmup,
                                   const ModelSpec& spec, const PhaseConfig& cfg);

}  // namespace spikehd
