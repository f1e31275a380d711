#pragma once

#include <cstdint>
#include <vector>

#include "spikehd/encoder.hpp"
#include "spikehd/matrix.hpp"

namespace spikehd {

struct LifParams {
    double alpha_mem = 0.9;       // membrane trace decay per step
    double alpha_syn = 0.85;      // synaptic trace decay per step
    double gamma_ref = 0.9;       // refractory decay per step
    double theta = 1.0;           // firing threshold
    double surrogate_slope = 10.0;
    double dropout_p = 0.2;       // readout-path dropout during training
};

// T x n binary event tensor, row-major by time.
struct SpikeTrain {
    std::size_t steps = 0;
    std::size_t channels = 0;
    std::vector<std::uint8_t> events;

    SpikeTrain() = default;
    SpikeTrain(std::size_t t, std::size_t n) : steps(t), channels(n), events(t * n, 0) {}
    std::uint8_t at(std::size_t t, std::size_t j) const { return events[t * channels + j]; }
    std::uint8_t& at(std::size_t t, std::size_t j) { return events[t * channels + j]; }
    const std::uint8_t* row(std::size_t t) const { return events.data() + t * channels; }
};

// Per-layer dynamic traces. Kept separate from the layer so a frozen network
// can serve many samples concurrently, each with its own state.
struct LifState {
    std::vector<double> filtered;   // P, length inputs
    std::vector<double> synaptic;   // Q, length inputs
    std::vector<double> refractory; // R, length neurons
    std::vector<double> membrane;   // U, length neurons

    void zero();
};

// One leaky integrate-and-fire layer with a fixed random readout. The
// readout is frozen at construction and never trained.
struct LifLayer {
    Matrix weights;  // neurons x inputs
    Matrix readout;  // classes x neurons
    LifParams params;
    std::uint64_t weight_seed = 0;
    std::uint64_t readout_seed = 0;

    std::size_t inputs() const { return weights.cols; }
    std::size_t neurons() const { return weights.rows; }
    std::size_t classes() const { return readout.rows; }

    static LifLayer create(std::size_t inputs, std::size_t neurons, std::size_t classes,
                           const LifParams& params, std::uint64_t weight_seed,
                           std::uint64_t readout_seed, double nominal_input_rate = 0.1);
    static Matrix make_readout(std::size_t classes, std::size_t neurons, std::uint64_t seed);
};

struct LayerRecord {
    Matrix spikes;    // T x neurons (0/1, or graded in the relaxed mode)
    Matrix membrane;  // T x neurons, pre-threshold potential
    Matrix trace;     // T x inputs, filtered input used by the potential
    Matrix readout;   // T x classes
    std::vector<double> dropout_mask;  // per-neuron scale; empty = no dropout

    std::size_t steps() const { return spikes.rows; }
};

struct NetworkRecords {
    std::vector<LayerRecord> layers;
};

struct SimOptions {
    bool train = false;          // draw per-sample dropout masks on the readout path
    bool soft = false;           // surrogate-relaxed dynamics (graded spikes, no refractory)
    std::uint64_t mask_seed = 0; // per-sample seed for dropout masks
    std::size_t upto_layer = 0;  // 0 = simulate all layers, else stop after this one
};

enum class Pooling : std::uint8_t { MeanRate = 0, MeanReadoutPotential = 1 };

class LifNetwork {
public:
    static LifNetwork create(std::size_t input_dim, const std::vector<std::size_t>& sizes,
                             std::size_t classes, const LifParams& params, std::uint64_t seed);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t num_layers() const { return layers_.size(); }
    std::size_t classes() const { return layers_.empty() ? 0 : layers_.front().classes(); }
    std::size_t layer_size(std::size_t depth) const { return layers_.at(depth - 1).neurons(); }
    const LifLayer& layer(std::size_t depth) const { return layers_.at(depth - 1); }
    LifLayer& layer_mut(std::size_t depth) { return layers_.at(depth - 1); }

    // Zeroes every trace; weights and readouts are untouched.
    void reset();
    std::vector<LifState>& state() { return state_; }

    std::vector<LifState> make_state() const;

    // Time-stepped feedforward simulation. State is carried across calls, so
    // simulating two halves of a train back to back equals one full pass;
    // callers reset between samples.
    NetworkRecords simulate(const SpikeTrain& train, const SimOptions& opts = {});
    NetworkRecords simulate(const SpikeTrain& train, std::vector<LifState>& state,
                            const SimOptions& opts) const;

    // Record-free evaluation path: time-pooled activity of the given layer,
    // using caller-held state. Auxiliary memory is independent of T.
    std::vector<double> pooled_activity(const SpikeTrain& train, std::vector<LifState>& state,
                                        std::size_t depth, Pooling pooling) const;

    // Record-free mean of the final layer's readout over time (evaluation
    // mode, no dropout).
    std::vector<double> readout_mean(const SpikeTrain& train, std::vector<LifState>& state) const;

    std::uint64_t weight_hash() const;
    std::uint64_t readout_hash() const;

private:
    std::size_t input_dim_ = 0;
    std::vector<LifLayer> layers_;
    std::vector<LifState> state_;
};

struct StepResult {
    std::vector<double> spikes;
    std::vector<double> readout;
};

// Single spiking step of one layer against caller-held state.
StepResult step(const LifLayer& layer, LifState& state, const std::vector<double>& input);

// Collapses the time dimension of a simulated layer into a feature vector.
FeatureVector layer_activity(const NetworkRecords& records, std::size_t depth, Pooling pooling);

double surrogate_derivative(double u, const LifParams& params);
double surrogate_activation(double u, const LifParams& params);

struct LayerGrad {
    Matrix dw;
    double loss = 0.0;
    // Mean-square trace entry over the record. Update steps divide by this
    // so the effective step size does not depend on the input magnitude,
    // which differs by an order of magnitude between the first layer (raw
    // rate-coded drive) and deeper layers (sparse spikes).
    double trace_ms = 1.0;
};

// lr / max(trace_ms, floor): the normalized step applied by every updater.
double normalized_step(double learning_rate, double trace_ms);

// Layer-local gradient of the squared error between the time-averaged
// readout and the target, using the surrogate spike derivative at the
// recorded potentials. Nothing outside this layer is consulted.
LayerGrad local_gradient(const LifLayer& layer, const std::vector<double>& target,
                         const LayerRecord& record);
double local_update(LifLayer& layer, const std::vector<double>& target, const LayerRecord& record,
                    double learning_rate);

// Treats grad_f as the error at the mean-rate activity of layer `depth` and
// produces weight gradients for layers 1..depth, passing the error down one
// layer at a time through the surrogate slopes. Layers above depth get no
// gradient.
std::vector<LayerGrad> injected_gradients(const LifNetwork& network, std::size_t depth,
                                          const std::vector<double>& grad_f,
                                          const NetworkRecords& records);
void inject_feature_gradient(LifNetwork& network, std::size_t depth,
                             const std::vector<double>& grad_f, const NetworkRecords& records,
                             double learning_rate);

}  // namespace spikehd
