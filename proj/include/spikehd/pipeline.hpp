#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "spikehd/data.hpp"
#include "spikehd/encoder.hpp"
#include "spikehd/lif.hpp"
#include "spikehd/memory.hpp"

namespace spikehd {

enum class Phase : std::uint8_t { Fresh = 0, Step1Done = 1, Step2Done = 2, Step3Done = 3 };

const char* phase_name(Phase p);

// The spiking front end, the hyperspace encoder at the injection point, and
// the class memory that owns the final prediction.
struct SpikeHdModel {
    LifNetwork network;
    std::shared_ptr<const EncoderBasis> basis;
    ClassMemory memory;
    std::size_t injection_depth = 4;
    Pooling pooling = Pooling::MeanRate;
    Phase phase = Phase::Fresh;
};

struct ModelSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> layer_sizes{150, 120, 100, 120, 150};
    LifParams lif;
    std::size_t encoder_dim = 4000;
    Activation activation = Activation::Tanh;
    std::size_t injection_depth = 4;
    Pooling pooling = Pooling::MeanRate;
};

SpikeHdModel make_model(const ModelSpec& spec, const std::vector<Label>& labels,
                        std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

struct PhaseConfig {
    int epochs_step1 = 20;
    int epochs_step2 = 10;
    int epochs_step3 = 10;
    double snn_lr = 2.0;
    double cotrain_snn_lr = 0.2;
    HdTrainConfig hd_cfg;
    std::size_t hd_update_period = 1;  // apply memory updates every N batches
    BackprojectMode backproject_mode = BackprojectMode::ChainRule;
    std::size_t batch_size = 32;
    bool shuffle = true;
    bool binarize_at_inference = false;
    std::uint64_t seed = 1;
    RateCodeConfig rate_code;
};

struct EpochRow {
    std::string phase;
    int epoch = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double mean_loss = 0.0;
    // Cumulative seconds spent training within the phase, excluding the
    // per-epoch test evaluation. Informational; not part of metric files.
    double train_seconds = 0.0;
};

struct PhaseLog {
    std::string phase;
    std::vector<EpochRow> rows;
    std::vector<std::string> warnings;
    double seconds = 0.0;
    std::size_t peak_aux_bytes = 0;  // transient training buffers, instrumented
};

// Stage one: the spiking layers train on their own local readout losses; the
// hyperspace side is untouched.
PhaseLog step1_train_snn(SpikeHdModel& model, const DenseDataset& train, const DenseDataset& test,
                         const PhaseConfig& cfg);

// Stage two: the frozen network feeds pooled activity at the injection depth
// through the encoder into single-pass memory updates.
PhaseLog step2_train_hdc(SpikeHdModel& model, const DenseDataset& train, const DenseDataset& test,
                         const PhaseConfig& cfg);

// Stage three: the memory loss is pushed back through the encoder to the
// injection point and the spiking layers descend on it, while the memory
// keeps absorbing samples every hd_update_period batches.
PhaseLog step3_cotrain(SpikeHdModel& model, const DenseDataset& train, const DenseDataset& test,
                       const PhaseConfig& cfg);

// Streaming mode: the network stays frozen; one pass over the stream updates
// only the memory, with auxiliary storage independent of stream length.
PhaseLog online_update(SpikeHdModel& model, const DenseDataset& stream, const DenseDataset& test,
                       const PhaseConfig& cfg);

// simulate -> pool -> encode -> nearest class.
Label predict_end_to_end(const SpikeHdModel& model, const SpikeTrain& sample,
                         bool binarize_query = false);

struct EvalResult {
    double accuracy = 0.0;
    Matrix confusion;                // label_set x label_set counts
    std::vector<Label> predictions;  // per sample
};

// Accuracy through the memory (the owned prediction path).
EvalResult evaluate_hdc(const SpikeHdModel& model, const DenseDataset& data, const PhaseConfig& cfg);
// Accuracy of the final layer's own readout (stage-one baseline).
EvalResult evaluate_snn(const SpikeHdModel& model, const DenseDataset& data, const PhaseConfig& cfg);

}  // namespace spikehd
