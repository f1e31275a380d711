#include "spikehd/lif.hpp"

#include <cmath>
#include <stdexcept>

#include "spikehd/kernels.hpp"
#include "spikehd/rng.hpp"

namespace spikehd {

namespace {

// One time step of a layer. Trace updates first, then potential, threshold,
// refractory. In the relaxed mode spikes are graded and the refractory
// feedback is absent, which makes the layer loss a smooth function of the
// weights.
void step_layer(const LifLayer& layer, LifState& st, const double* input, bool soft,
                const double* mask, double* spikes_out, double* readout_out) {
    const LifParams& p = layer.params;
    const std::size_t ni = layer.inputs();
    const std::size_t nn = layer.neurons();

    for (std::size_t j = 0; j < ni; ++j) {
        st.synaptic[j] = p.alpha_syn * st.synaptic[j] + input[j];
        st.filtered[j] = p.alpha_mem * st.filtered[j] + st.synaptic[j];
    }

    kernels::matvec(layer.weights, st.filtered.data(), st.membrane.data());
    if (!soft) {
        for (std::size_t i = 0; i < nn; ++i) st.membrane[i] -= st.refractory[i];
    }

    for (std::size_t i = 0; i < nn; ++i) {
        double s = soft ? surrogate_activation(st.membrane[i], p)
                        : (st.membrane[i] > p.theta ? 1.0 : 0.0);
        spikes_out[i] = s;
        if (!soft) st.refractory[i] = p.gamma_ref * st.refractory[i] + p.theta * s;
    }

    if (readout_out != nullptr) {
        if (mask != nullptr) {
            std::vector<double> gated(nn);
            for (std::size_t i = 0; i < nn; ++i) gated[i] = mask[i] * spikes_out[i];
            kernels::matvec(layer.readout, gated.data(), readout_out);
        } else {
            kernels::matvec(layer.readout, spikes_out, readout_out);
        }
    }
}

std::vector<double> make_dropout_mask(const LifLayer& layer, std::uint64_t seed) {
    double p = layer.params.dropout_p;
    std::vector<double> mask(layer.neurons(), 1.0);
    if (p <= 0.0) return mask;
    SplitMix64 rng(seed);
    double keep_scale = 1.0 / (1.0 - p);
    for (double& m : mask) m = rng.bernoulli(p) ? 0.0 : keep_scale;
    return mask;
}

}  // namespace

void LifState::zero() {
    std::fill(filtered.begin(), filtered.end(), 0.0);
    std::fill(synaptic.begin(), synaptic.end(), 0.0);
    std::fill(refractory.begin(), refractory.end(), 0.0);
    std::fill(membrane.begin(), membrane.end(), 0.0);
}

LifLayer LifLayer::create(std::size_t inputs, std::size_t neurons, std::size_t classes,
                          const LifParams& params, std::uint64_t weight_seed,
                          std::uint64_t readout_seed, double nominal_input_rate) {
    require(inputs >= 1 && neurons >= 1 && classes >= 1, "LifLayer: sizes must be >= 1");
    require(params.alpha_mem > 0.0 && params.alpha_mem < 1.0, "LifLayer: alpha_mem outside (0,1)");
    require(params.alpha_syn > 0.0 && params.alpha_syn < 1.0, "LifLayer: alpha_syn outside (0,1)");
    require(params.gamma_ref > 0.0 && params.gamma_ref < 1.0, "LifLayer: gamma_ref outside (0,1)");
    require(params.dropout_p >= 0.0 && params.dropout_p < 1.0, "LifLayer: dropout_p outside [0,1)");
    require(params.surrogate_slope > 0.0, "LifLayer: surrogate_slope must be positive");

    LifLayer layer;
    layer.params = params;
    layer.weight_seed = weight_seed;
    layer.readout_seed = readout_seed;
    layer.weights = Matrix(neurons, inputs);
    SplitMix64 rng(weight_seed);
    // Uniform 1/sqrt(fan-in) init, compensated for the DC gain of the double
    // trace filter and the expected input firing rate, so membrane potentials
    // straddle the threshold instead of saturating or going silent.
    double gain = (1.0 - params.alpha_mem) * (1.0 - params.alpha_syn);
    double scale = 2.5 * params.theta * gain /
                   (std::sqrt(static_cast<double>(inputs)) * nominal_input_rate);
    for (double& w : layer.weights.data) w = rng.uniform(-scale, scale);
    layer.readout = make_readout(classes, neurons, readout_seed);
    return layer;
}

Matrix LifLayer::make_readout(std::size_t classes, std::size_t neurons, std::uint64_t seed) {
    Matrix g(classes, neurons);
    SplitMix64 rng(seed);
    for (double& v : g.data) v = rng.normal();
    // Fixed-norm rows: readout magnitudes (and so the local loss scale) do
    // not depend on the draw, which keeps one learning rate valid across
    // seeds. The norm gives the squashed readout usable dynamic range at
    // nominal firing rates.
    for (std::size_t c = 0; c < classes; ++c) {
        double* row = g.row(c);
        double nrm = 0.0;
        for (std::size_t i = 0; i < neurons; ++i) nrm += row[i] * row[i];
        nrm = std::sqrt(nrm) / 8.0;
        for (std::size_t i = 0; i < neurons; ++i) row[i] /= nrm;
    }
    return g;
}

LifNetwork LifNetwork::create(std::size_t input_dim, const std::vector<std::size_t>& sizes,
                              std::size_t classes, const LifParams& params, std::uint64_t seed) {
    require(input_dim >= 1, "LifNetwork: input_dim must be >= 1");
    require(!sizes.empty(), "LifNetwork: at least one layer required");
    LifNetwork net;
    net.input_dim_ = input_dim;
    std::size_t prev = input_dim;
    for (std::size_t l = 0; l < sizes.size(); ++l) {
        std::uint64_t wseed = derive_seed(seed, "snn.weights", l);
        std::uint64_t rseed = derive_seed(seed, "snn.readout", l);
        double rate_hint = l == 0 ? 0.25 : 0.05;  // rate-coded inputs run hotter than spiking layers
        net.layers_.push_back(LifLayer::create(prev, sizes[l], classes, params, wseed, rseed, rate_hint));
        prev = sizes[l];
    }
    net.state_ = net.make_state();
    return net;
}

std::vector<LifState> LifNetwork::make_state() const {
    std::vector<LifState> st(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        st[l].filtered.assign(layers_[l].inputs(), 0.0);
        st[l].synaptic.assign(layers_[l].inputs(), 0.0);
        st[l].refractory.assign(layers_[l].neurons(), 0.0);
        st[l].membrane.assign(layers_[l].neurons(), 0.0);
    }
    return st;
}

void LifNetwork::reset() {
    for (LifState& s : state_) s.zero();
}

NetworkRecords LifNetwork::simulate(const SpikeTrain& train, const SimOptions& opts) {
    return static_cast<const LifNetwork*>(this)->simulate(train, state_, opts);
}

NetworkRecords LifNetwork::simulate(const SpikeTrain& train, std::vector<LifState>& state,
                                    const SimOptions& opts) const {
    require(train.channels == input_dim_, "simulate: channel count does not match input size");
    require(state.size() == layers_.size(), "simulate: state/layer count mismatch");
    std::size_t depth = opts.upto_layer == 0 ? layers_.size() : opts.upto_layer;
    require(depth >= 1 && depth <= layers_.size(), "simulate: layer index out of range");

    const std::size_t t_steps = train.steps;
    NetworkRecords rec;
    rec.layers.resize(depth);
    for (std::size_t l = 0; l < depth; ++l) {
        const LifLayer& layer = layers_[l];
        rec.layers[l].spikes = Matrix(t_steps, layer.neurons());
        rec.layers[l].membrane = Matrix(t_steps, layer.neurons());
        rec.layers[l].trace = Matrix(t_steps, layer.inputs());
        rec.layers[l].readout = Matrix(t_steps, layer.classes());
        if (opts.train)
            rec.layers[l].dropout_mask =
                make_dropout_mask(layer, derive_seed(opts.mask_seed, "dropout.layer", l));
    }

    std::vector<double> input(input_dim_);
    for (std::size_t t = 0; t < t_steps; ++t) {
        const std::uint8_t* ev = train.row(t);
        for (std::size_t j = 0; j < input_dim_; ++j) input[j] = ev[j];
        const double* x = input.data();
        for (std::size_t l = 0; l < depth; ++l) {
            LayerRecord& r = rec.layers[l];
            const double* mask = r.dropout_mask.empty() ? nullptr : r.dropout_mask.data();
            step_layer(layers_[l], state[l], x, opts.soft, mask, r.spikes.row(t), r.readout.row(t));
            std::copy(state[l].membrane.begin(), state[l].membrane.end(), r.membrane.row(t));
            std::copy(state[l].filtered.begin(), state[l].filtered.end(), r.trace.row(t));
            x = r.spikes.row(t);
        }
    }
    return rec;
}

std::vector<double> LifNetwork::pooled_activity(const SpikeTrain& train,
                                                std::vector<LifState>& state, std::size_t depth,
                                                Pooling pooling) const {
    require(train.channels == input_dim_, "pooled_activity: channel count does not match input size");
    require(depth >= 1 && depth <= layers_.size(), "pooled_activity: layer index out of range");
    require(train.steps >= 1, "pooled_activity: empty spike train");

    std::vector<std::vector<double>> spikes(depth);
    for (std::size_t l = 0; l < depth; ++l) spikes[l].assign(layers_[l].neurons(), 0.0);
    std::vector<double> sums(layers_[depth - 1].neurons(), 0.0);

    std::vector<double> input(input_dim_);
    for (std::size_t t = 0; t < train.steps; ++t) {
        const std::uint8_t* ev = train.row(t);
        for (std::size_t j = 0; j < input_dim_; ++j) input[j] = ev[j];
        const double* x = input.data();
        for (std::size_t l = 0; l < depth; ++l) {
            step_layer(layers_[l], state[l], x, false, nullptr, spikes[l].data(), nullptr);
            x = spikes[l].data();
        }
        if (pooling == Pooling::MeanRate) {
            for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += spikes[depth - 1][i];
        } else {
            for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += state[depth - 1].membrane[i];
        }
    }
    double inv_t = 1.0 / static_cast<double>(train.steps);
    for (double& s : sums) s *= inv_t;
    return sums;
}

std::vector<double> LifNetwork::readout_mean(const SpikeTrain& train,
                                             std::vector<LifState>& state) const {
    require(train.channels == input_dim_, "readout_mean: channel count does not match input size");
    require(train.steps >= 1, "readout_mean: empty spike train");
    const std::size_t depth = layers_.size();
    std::vector<std::vector<double>> spikes(depth);
    for (std::size_t l = 0; l < depth; ++l) spikes[l].assign(layers_[l].neurons(), 0.0);
    std::vector<double> readout(layers_.back().classes(), 0.0);
    std::vector<double> sums(readout.size(), 0.0);

    std::vector<double> input(input_dim_);
    for (std::size_t t = 0; t < train.steps; ++t) {
        const std::uint8_t* ev = train.row(t);
        for (std::size_t j = 0; j < input_dim_; ++j) input[j] = ev[j];
        const double* x = input.data();
        for (std::size_t l = 0; l < depth; ++l) {
            double* ro = (l + 1 == depth) ? readout.data() : nullptr;
            step_layer(layers_[l], state[l], x, false, nullptr, spikes[l].data(), ro);
            x = spikes[l].data();
        }
        for (std::size_t c = 0; c < sums.size(); ++c) sums[c] += readout[c];
    }
    double inv_t = 1.0 / static_cast<double>(train.steps);
    for (double& s : sums) s *= inv_t;
    return sums;
}

std::uint64_t LifNetwork::weight_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const LifLayer& l : layers_)
        h = fnv1a64_bytes(l.weights.data.data(), l.weights.data.size() * sizeof(double), h);
    return h;
}

std::uint64_t LifNetwork::readout_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const LifLayer& l : layers_)
        h = fnv1a64_bytes(l.readout.data.data(), l.readout.data.size() * sizeof(double), h);
    return h;
}

StepResult step(const LifLayer& layer, LifState& state, const std::vector<double>& input) {
    require(input.size() == layer.inputs(), "step: input length mismatch");
    StepResult out;
    out.spikes.resize(layer.neurons());
    out.readout.resize(layer.classes());
    step_layer(layer, state, input.data(), false, nullptr, out.spikes.data(), out.readout.data());
    return out;
}

FeatureVector layer_activity(const NetworkRecords& records, std::size_t depth, Pooling pooling) {
    require(depth >= 1 && depth <= records.layers.size(), "layer_activity: layer index out of range");
    const LayerRecord& rec = records.layers[depth - 1];
    const Matrix& src = pooling == Pooling::MeanRate ? rec.spikes : rec.membrane;
    if (src.rows == 0) throw std::invalid_argument("layer_activity: no recorded steps");
    FeatureVector out(src.cols, 0.0);
    for (std::size_t t = 0; t < src.rows; ++t) {
        const double* r = src.row(t);
        for (std::size_t j = 0; j < src.cols; ++j) out[j] += r[j];
    }
    double inv_t = 1.0 / static_cast<double>(src.rows);
    for (double& v : out) v *= inv_t;
    return out;
}

double surrogate_derivative(double u, const LifParams& params) {
    double d = params.surrogate_slope * std::abs(u - params.theta) + 1.0;
    return 1.0 / (d * d);
}

double surrogate_activation(double u, const LifParams& params) {
    double x = u - params.theta;
    return 0.5 + x / (1.0 + params.surrogate_slope * std::abs(x));
}

LayerGrad local_gradient(const LifLayer& layer, const std::vector<double>& target,
                         const LayerRecord& record) {
    require(target.size() == layer.classes(), "local_gradient: target length mismatch");
    require(record.steps() > 0, "local_gradient: no recorded steps");
    const std::size_t t_steps = record.steps();
    const std::size_t nn = layer.neurons();

    std::vector<double> mean_readout(layer.classes(), 0.0);
    for (std::size_t t = 0; t < t_steps; ++t) {
        const double* r = record.readout.row(t);
        for (std::size_t c = 0; c < mean_readout.size(); ++c) mean_readout[c] += r[c];
    }
    double inv_t = 1.0 / static_cast<double>(t_steps);
    for (double& v : mean_readout) v *= inv_t;

    LayerGrad out;
    // Squashed readout: silence costs 0.5 per class, so the loss cannot be
    // cheated by suppressing all activity.
    std::vector<double> err(layer.classes());
    for (std::size_t c = 0; c < err.size(); ++c) {
        double z = 1.0 / (1.0 + std::exp(-mean_readout[c]));
        double diff = z - target[c];
        out.loss += 0.5 * diff * diff;
        err[c] = diff * z * (1.0 - z);
    }

    // Per-neuron error through the frozen readout (and the dropout gate the
    // forward pass actually used).
    std::vector<double> neuron_err(nn);
    kernels::matvec_t(layer.readout, err.data(), neuron_err.data());
    if (!record.dropout_mask.empty())
        for (std::size_t i = 0; i < nn; ++i) neuron_err[i] *= record.dropout_mask[i];

    out.dw = Matrix(nn, layer.inputs());
    std::vector<double> coeff(nn);
    double trace_sq = 0.0;
    for (std::size_t t = 0; t < t_steps; ++t) {
        const double* u = record.membrane.row(t);
        for (std::size_t i = 0; i < nn; ++i)
            coeff[i] = neuron_err[i] * surrogate_derivative(u[i], layer.params) * inv_t;
        kernels::outer_acc(out.dw, coeff.data(), record.trace.row(t), 1.0);
        const double* tr = record.trace.row(t);
        for (std::size_t j = 0; j < layer.inputs(); ++j) trace_sq += tr[j] * tr[j];
    }
    out.trace_ms = trace_sq / (static_cast<double>(t_steps) * static_cast<double>(layer.inputs()));
    return out;
}

double normalized_step(double learning_rate, double trace_ms) {
    return learning_rate / std::max(trace_ms, 1e-9);
}

double local_update(LifLayer& layer, const std::vector<double>& target, const LayerRecord& record,
                    double learning_rate) {
    LayerGrad g = local_gradient(layer, target, record);
    if (learning_rate != 0.0) {
        double step = normalized_step(learning_rate, g.trace_ms);
        for (std::size_t i = 0; i < layer.weights.data.size(); ++i)
            layer.weights.data[i] -= step * g.dw.data[i];
    }
    return g.loss;
}

std::vector<LayerGrad> injected_gradients(const LifNetwork& network, std::size_t depth,
                                          const std::vector<double>& grad_f,
                                          const NetworkRecords& records) {
    require(depth >= 1 && depth <= network.num_layers(), "injected_gradients: depth out of range");
    require(depth <= records.layers.size(), "injected_gradients: records missing for depth");
    require(grad_f.size() == network.layer_size(depth), "injected_gradients: gradient length mismatch");

    std::vector<LayerGrad> grads(depth);
    std::vector<double> err = grad_f;
    for (std::size_t l = depth; l >= 1; --l) {
        const LifLayer& layer = network.layer(l);
        const LayerRecord& rec = records.layers[l - 1];
        require(rec.steps() > 0, "injected_gradients: no recorded steps");
        const std::size_t t_steps = rec.steps();
        const std::size_t nn = layer.neurons();
        double inv_t = 1.0 / static_cast<double>(t_steps);

        LayerGrad& g = grads[l - 1];
        g.dw = Matrix(nn, layer.inputs());
        std::vector<double> coeff(nn);
        std::vector<double> slope_mean(nn, 0.0);
        double trace_sq = 0.0;
        for (std::size_t t = 0; t < t_steps; ++t) {
            const double* u = rec.membrane.row(t);
            for (std::size_t i = 0; i < nn; ++i) {
                double sd = surrogate_derivative(u[i], layer.params);
                coeff[i] = err[i] * sd * inv_t;
                slope_mean[i] += sd * inv_t;
            }
            kernels::outer_acc(g.dw, coeff.data(), rec.trace.row(t), 1.0);
            const double* tr = rec.trace.row(t);
            for (std::size_t j = 0; j < layer.inputs(); ++j) trace_sq += tr[j] * tr[j];
        }
        g.trace_ms = trace_sq / (static_cast<double>(t_steps) * static_cast<double>(layer.inputs()));

        if (l > 1) {
            // Pass the error one layer down through the weights, scaled by the
            // time-averaged surrogate slope of this layer.
            std::vector<double> gated(nn);
            for (std::size_t i = 0; i < nn; ++i) gated[i] = err[i] * slope_mean[i];
            std::vector<double> prev(layer.inputs());
            kernels::matvec_t(layer.weights, gated.data(), prev.data());
            err = std::move(prev);
        }
    }
    return grads;
}

void inject_feature_gradient(LifNetwork& network, std::size_t depth,
                             const std::vector<double>& grad_f, const NetworkRecords& records,
                             double learning_rate) {
    std::vector<LayerGrad> grads = injected_gradients(network, depth, grad_f, records);
    if (learning_rate == 0.0) return;
    for (std::size_t l = 1; l <= depth; ++l) {
        Matrix& w = network.layer_mut(l).weights;
        const Matrix& dw = grads[l - 1].dw;
        double step = normalized_step(learning_rate, grads[l - 1].trace_ms);
        for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] -= step * dw.data[i];
    }
}

}  // namespace spikehd
