#include "spikehd/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "spikehd/kernels.hpp"
#include "spikehd/rng.hpp"

namespace spikehd {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_phase(const SpikeHdModel& model, Phase expected, const char* op) {
    if (model.phase != expected)
        throw std::logic_error(std::string(op) + ": requires phase " +
                               phase_name(expected) + ", model is at " + phase_name(model.phase));
}

void require_phase_at_least(const SpikeHdModel& model, Phase floor, const char* op) {
    if (static_cast<int>(model.phase) < static_cast<int>(floor))
        throw std::logic_error(std::string(op) + ": requires phase at least " + phase_name(floor) +
                               ", model is at " + phase_name(model.phase));
}

std::vector<std::size_t> sample_order(std::size_t n, bool shuffle, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    if (shuffle) {
        SplitMix64 rng(seed);
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    }
    return order;
}

std::unordered_map<Label, std::size_t> label_indices(const ClassMemory& memory) {
    std::unordered_map<Label, std::size_t> map;
    for (std::size_t i = 0; i < memory.labels().size(); ++i) map.emplace(memory.labels()[i], i);
    return map;
}

std::size_t state_bytes(const LifNetwork& net) {
    std::size_t b = 0;
    for (std::size_t l = 1; l <= net.num_layers(); ++l)
        b += (2 * net.layer(l).inputs() + 2 * net.layer(l).neurons()) * sizeof(double);
    return b;
}

std::size_t records_bytes(const LifNetwork& net, std::size_t t_steps, std::size_t depth) {
    std::size_t b = 0;
    for (std::size_t l = 1; l <= depth; ++l) {
        const LifLayer& layer = net.layer(l);
        b += t_steps * (2 * layer.neurons() + layer.inputs() + layer.classes()) * sizeof(double);
        b += layer.neurons() * sizeof(double);
    }
    return b;
}

std::size_t grads_bytes(const LifNetwork& net, std::size_t depth) {
    std::size_t b = 0;
    for (std::size_t l = 1; l <= depth; ++l) b += net.layer(l).weights.size() * sizeof(double);
    return b;
}

std::size_t parallel_width() { return static_cast<std::size_t>(std::max(1, kernels::workers())); }

// Error signal in feature space pointing uphill along the memory loss.
FeatureVector feature_error(const EncoderBasis& basis, const std::vector<double>& grad_h,
                            const Hypervector& h, BackprojectMode mode) {
    if (mode == BackprojectMode::ChainRule) return basis.backproject(grad_h, h, mode);
    std::vector<double> displacement(grad_h.size());
    for (std::size_t i = 0; i < grad_h.size(); ++i) displacement[i] = -grad_h[i];
    FeatureVector towards = basis.backproject(displacement, h, BackprojectMode::PinvTarget);
    for (double& v : towards) v = -v;
    return towards;
}

}  // namespace

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Fresh: return "fresh";
        case Phase::Step1Done: return "step1-done";
        case Phase::Step2Done: return "step2-done";
        case Phase::Step3Done: return "step3-done";
    }
    return "?";
}

SpikeHdModel make_model(const ModelSpec& spec, const std::vector<Label>& labels,
                        std::uint64_t seed, std::vector<std::string>* warnings) {
    require(spec.input_dim >= 1, "make_model: input_dim must be >= 1");
    require(!spec.layer_sizes.empty(), "make_model: at least one layer required");
    require(spec.injection_depth >= 1 && spec.injection_depth <= spec.layer_sizes.size(),
            "make_model: injection depth out of range");
    std::size_t feature_dim = spec.layer_sizes[spec.injection_depth - 1];
    require(spec.encoder_dim >= feature_dim,
            "make_model: encoder dimension must be >= injected layer size");
    if (warnings && spec.injection_depth == spec.layer_sizes.size())
        warnings->push_back(
            "injection depth equals layer count; the memory attaches to the final layer and mostly "
            "relearns its readout");

    SpikeHdModel model;
    model.network = LifNetwork::create(spec.input_dim, spec.layer_sizes, labels.size(), spec.lif,
                                       derive_seed(seed, "snn"));
    model.basis = std::make_shared<EncoderBasis>(EncoderBasis::create(
        feature_dim, spec.encoder_dim, spec.activation, derive_seed(seed, "encoder")));
    model.memory = ClassMemory::init(labels, spec.encoder_dim);
    model.injection_depth = spec.injection_depth;
    model.pooling = spec.pooling;
    model.phase = Phase::Fresh;
    return model;
}

PhaseLog step1_train_snn(SpikeHdModel& model, const DenseDataset& train, const DenseDataset& test,
                         const PhaseConfig& cfg) {
    require_phase(model, Phase::Fresh, "step1_train_snn");
    PhaseLog log;
    log.phase = "step1";
    auto t0 = Clock::now();

    if (cfg.epochs_step1 <= 0) {
        log.warnings.push_back("step1: zero epochs configured; spiking weights are untrained");
        model.phase = Phase::Step1Done;
        log.seconds = elapsed_seconds(t0);
        return log;
    }

    auto label_map = label_indices(model.memory);
    const std::size_t n = train.size();
    const std::size_t classes = model.memory.num_classes();
    const std::size_t layers = model.network.num_layers();
    const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);

    log.peak_aux_bytes = batch * grads_bytes(model.network, layers) +
                         parallel_width() * (records_bytes(model.network, cfg.rate_code.steps, layers) +
                                             state_bytes(model.network));

    double train_time = 0.0;
    for (int epoch = 1; epoch <= cfg.epochs_step1; ++epoch) {
        auto epoch_start = Clock::now();
        auto order = sample_order(n, cfg.shuffle,
                                  derive_seed(cfg.seed, "shuffle.step1", static_cast<std::uint64_t>(epoch)));
        double loss_sum = 0.0;

        for (std::size_t start = 0; start < n; start += batch) {
            std::size_t count = std::min(batch, n - start);
            std::vector<std::vector<LayerGrad>> grads(count);
            std::vector<double> losses(count, 0.0);

            kernels::for_each_index(count, [&](std::size_t b) {
                std::size_t idx = order[start + b];
                SpikeTrain spikes = rate_encode(train.samples[idx], cfg.rate_code, idx);
                auto state = model.network.make_state();
                SimOptions so;
                so.train = true;
                so.mask_seed = derive_seed(cfg.seed, "dropout.step1",
                                           static_cast<std::uint64_t>(epoch) * n + idx);
                NetworkRecords rec = model.network.simulate(spikes, state, so);

                std::vector<double> target(classes, 0.0);
                target[label_map.at(train.labels[idx])] = 1.0;

                grads[b].reserve(layers);
                double sample_loss = 0.0;
                for (std::size_t l = 1; l <= layers; ++l) {
                    grads[b].push_back(local_gradient(model.network.layer(l), target, rec.layers[l - 1]));
                    sample_loss += grads[b].back().loss;
                }
                losses[b] = sample_loss;
            });

            double scale = cfg.snn_lr / static_cast<double>(count);
            for (std::size_t l = 1; l <= layers; ++l) {
                Matrix& w = model.network.layer_mut(l).weights;
                for (std::size_t b = 0; b < count; ++b) {
                    const Matrix& dw = grads[b][l - 1].dw;
                    double step = normalized_step(scale, grads[b][l - 1].trace_ms);
                    for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] -= step * dw.data[i];
                }
            }
            for (std::size_t b = 0; b < count; ++b) loss_sum += losses[b];
        }

        EpochRow row;
        row.phase = log.phase;
        row.epoch = epoch;
        row.mean_loss = n == 0 ? 0.0 : loss_sum / static_cast<double>(n);
        train_time += elapsed_seconds(epoch_start);
        row.train_seconds = train_time;
        row.train_accuracy = evaluate_snn(model, train, cfg).accuracy;
        row.test_accuracy = evaluate_snn(model, test, cfg).accuracy;
        log.rows.push_back(row);
    }

    model.phase = Phase::Step1Done;
    log.seconds = elapsed_seconds(t0);
    return log;
}

PhaseLog step2_train_hdc(SpikeHdModel& model, const DenseDataset& train, const DenseDataset& test,
                         const PhaseConfig& cfg) {
    require_phase(model, Phase::Step1Done, "step2_train_hdc");
    PhaseLog log;
    log.phase = "step2";
    auto t0 = Clock::now();

    if (cfg.epochs_step2 <= 0) {
        log.warnings.push_back("step2: zero epochs configured; class memory is untrained");
        model.phase = Phase::Step2Done;
        log.seconds = elapsed_seconds(t0);
        return log;
    }

    const std::uint64_t weights_before = model.network.weight_hash();
    const std::size_t n = train.size();
    const std::size_t chunk = parallel_width() * 4;
    log.peak_aux_bytes = chunk * model.basis->dim() * sizeof(double) +
                         parallel_width() * (state_bytes(model.network) +
                                             model.network.layer(model.injection_depth).neurons() *
                                                 sizeof(double));

    double train_time = 0.0;
    for (int epoch = 1; epoch <= cfg.epochs_step2; ++epoch) {
        auto epoch_start = Clock::now();
        auto order = sample_order(n, cfg.shuffle,
                                  derive_seed(cfg.seed, "shuffle.step2", static_cast<std::uint64_t>(epoch)));

        std::vector<Hypervector> slots(chunk);
        for (std::size_t start = 0; start < n; start += chunk) {
            std::size_t count = std::min(chunk, n - start);
            kernels::for_each_index(count, [&](std::size_t b) {
                std::size_t idx = order[start + b];
                SpikeTrain spikes = rate_encode(train.samples[idx], cfg.rate_code, idx);
                auto state = model.network.make_state();
                FeatureVector pooled =
                    model.network.pooled_activity(spikes, state, model.injection_depth, model.pooling);
                slots[b] = model.basis->encode(pooled);
            });
            // Memory updates are order-sensitive; apply them sequentially.
            for (std::size_t b = 0; b < count; ++b) {
                std::size_t idx = order[start + b];
                model.memory.update_single(slots[b], train.labels[idx], cfg.hd_cfg);
            }
        }

        EpochRow row;
        row.phase = log.phase;
        row.epoch = epoch;
        train_time += elapsed_seconds(epoch_start);
        row.train_seconds = train_time;
        row.train_accuracy = evaluate_hdc(model, train, cfg).accuracy;
        row.test_accuracy = evaluate_hdc(model, test, cfg).accuracy;
        log.rows.push_back(row);
    }

    if (model.network.weight_hash() != weights_before)
        throw std::logic_error("step2_train_hdc: spiking weights changed during a frozen stage");
    model.phase = Phase::Step2Done;
    log.seconds = elapsed_seconds(t0);
    return log;
}

PhaseLog step3_cotrain(SpikeHdModel& model, const DenseDataset& train, const DenseDataset& test,
                       const PhaseConfig& cfg) {
    require_phase(model, Phase::Step2Done, "step3_cotrain");
    PhaseLog log;
    log.phase = "step3";
    auto t0 = Clock::now();

    if (cfg.epochs_step3 <= 0) {
        log.warnings.push_back("step3: zero epochs configured; co-training skipped");
        model.phase = Phase::Step3Done;
        log.seconds = elapsed_seconds(t0);
        return log;
    }

    const std::size_t n = train.size();
    const std::size_t depth = model.injection_depth;
    const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
    const std::size_t period = std::max<std::size_t>(1, cfg.hd_update_period);

    log.peak_aux_bytes =
        batch * (grads_bytes(model.network, depth) + model.basis->dim() * sizeof(double)) +
        parallel_width() * (records_bytes(model.network, cfg.rate_code.steps, depth) +
                            state_bytes(model.network));

    std::size_t batch_counter = 0;
    double train_time = 0.0;
    for (int epoch = 1; epoch <= cfg.epochs_step3; ++epoch) {
        auto epoch_start = Clock::now();
        auto order = sample_order(n, cfg.shuffle,
                                  derive_seed(cfg.seed, "shuffle.step3", static_cast<std::uint64_t>(epoch)));
        double loss_sum = 0.0;

        for (std::size_t start = 0; start < n; start += batch) {
            std::size_t count = std::min(batch, n - start);
            ++batch_counter;
            const bool update_memory = (batch_counter % period) == 0;

            std::vector<Hypervector> encoded(count);
            std::vector<std::vector<LayerGrad>> sgrads(count);
            std::vector<double> losses(count, 0.0);

            kernels::for_each_index(count, [&](std::size_t b) {
                std::size_t idx = order[start + b];
                SpikeTrain spikes = rate_encode(train.samples[idx], cfg.rate_code, idx);
                auto state = model.network.make_state();
                SimOptions so;
                so.train = true;
                so.upto_layer = depth;
                so.mask_seed = derive_seed(cfg.seed, "dropout.step3",
                                           static_cast<std::uint64_t>(epoch) * n + idx);
                NetworkRecords rec = model.network.simulate(spikes, state, so);
                FeatureVector pooled = layer_activity(rec, depth, model.pooling);
                encoded[b] = model.basis->encode(pooled);

                LossGrad lg = model.memory.loss_and_gradient(encoded[b], train.labels[idx]);
                losses[b] = lg.loss;

                if (cfg.cotrain_snn_lr != 0.0) {
                    FeatureVector gf =
                        feature_error(*model.basis, lg.grad_h, encoded[b], cfg.backproject_mode);
                    sgrads[b] = injected_gradients(model.network, depth, gf, rec);
                }
            });

            if (update_memory) {
                for (std::size_t b = 0; b < count; ++b)
                    model.memory.update_single(encoded[b], train.labels[order[start + b]], cfg.hd_cfg);
            }

            if (cfg.cotrain_snn_lr != 0.0) {
                double scale = cfg.cotrain_snn_lr / static_cast<double>(count);
                for (std::size_t l = 1; l <= depth; ++l) {
                    Matrix& w = model.network.layer_mut(l).weights;
                    for (std::size_t b = 0; b < count; ++b) {
                        const Matrix& dw = sgrads[b][l - 1].dw;
                        double step = normalized_step(scale, sgrads[b][l - 1].trace_ms);
                        for (std::size_t i = 0; i < w.data.size(); ++i)
                            w.data[i] -= step * dw.data[i];
                    }
                }
            }

            for (std::size_t b = 0; b < count; ++b) loss_sum += losses[b];
        }

        EpochRow row;
        row.phase = log.phase;
        row.epoch = epoch;
        row.mean_loss = n == 0 ? 0.0 : loss_sum / static_cast<double>(n);
        train_time += elapsed_seconds(epoch_start);
        row.train_seconds = train_time;
        row.train_accuracy = evaluate_hdc(model, train, cfg).accuracy;
        row.test_accuracy = evaluate_hdc(model, test, cfg).accuracy;
        log.rows.push_back(row);
    }

    model.phase = Phase::Step3Done;
    log.seconds = elapsed_seconds(t0);
    return log;
}

PhaseLog online_update(SpikeHdModel& model, const DenseDataset& stream, const DenseDataset& test,
                       const PhaseConfig& cfg) {
    require_phase_at_least(model, Phase::Step2Done, "online_update");
    PhaseLog log;
    log.phase = "online";
    auto t0 = Clock::now();

    const std::uint64_t weights_before = model.network.weight_hash();
    const std::size_t n = stream.size();
    const std::size_t chunk = parallel_width() * 4;
    // Bounded auxiliary storage: chunk slots plus per-worker simulation state,
    // independent of the stream length.
    log.peak_aux_bytes = chunk * model.basis->dim() * sizeof(double) +
                         parallel_width() * (state_bytes(model.network) +
                                             model.network.layer(model.injection_depth).neurons() *
                                                 sizeof(double));

    std::vector<Hypervector> slots(chunk);
    for (std::size_t start = 0; start < n; start += chunk) {
        std::size_t count = std::min(chunk, n - start);
        kernels::for_each_index(count, [&](std::size_t b) {
            std::size_t idx = start + b;
            SpikeTrain spikes = rate_encode(stream.samples[idx], cfg.rate_code, idx);
            auto state = model.network.make_state();
            FeatureVector pooled =
                model.network.pooled_activity(spikes, state, model.injection_depth, model.pooling);
            slots[b] = model.basis->encode(pooled);
        });
        for (std::size_t b = 0; b < count; ++b) {
            model.memory.update_single(slots[b], stream.labels[start + b], cfg.hd_cfg);
        }
    }

    EpochRow row;
    row.phase = log.phase;
    row.epoch = 1;
    row.train_seconds = elapsed_seconds(t0);
    row.train_accuracy = evaluate_hdc(model, stream, cfg).accuracy;
    row.test_accuracy = evaluate_hdc(model, test, cfg).accuracy;
    log.rows.push_back(row);

    if (model.network.weight_hash() != weights_before)
        throw std::logic_error("online_update: spiking weights changed during a frozen stage");
    log.seconds = elapsed_seconds(t0);
    return log;
}

Label predict_end_to_end(const SpikeHdModel& model, const SpikeTrain& sample, bool binarize_query) {
    require_phase_at_least(model, Phase::Step2Done, "predict_end_to_end");
    auto state = model.network.make_state();
    FeatureVector pooled =
        model.network.pooled_activity(sample, state, model.injection_depth, model.pooling);
    Hypervector h = model.basis->encode(pooled);
    if (binarize_query) h = binarize(h);
    return model.memory.predict(h);
}

namespace {

EvalResult evaluate_common(const SpikeHdModel& model, const DenseDataset& data,
                           const PhaseConfig& cfg, bool hdc_path) {
    EvalResult out;
    const std::size_t k = model.memory.num_classes();
    out.confusion = Matrix(k, k);
    out.predictions.resize(data.size());
    auto label_map = label_indices(model.memory);

    std::vector<std::size_t> pred_idx(data.size(), 0);
    kernels::for_each_index(data.size(), [&](std::size_t i) {
        SpikeTrain spikes = rate_encode(data.samples[i], cfg.rate_code, i);
        auto state = model.network.make_state();
        if (hdc_path) {
            FeatureVector pooled =
                model.network.pooled_activity(spikes, state, model.injection_depth, model.pooling);
            Hypervector h = model.basis->encode(pooled);
            if (cfg.binarize_at_inference) h = binarize(h);
            pred_idx[i] = model.memory.predict_index(h);
        } else {
            std::vector<double> ro = model.network.readout_mean(spikes, state);
            std::size_t best = 0;
            for (std::size_t c = 1; c < ro.size(); ++c)
                if (ro[c] > ro[best]) best = c;
            pred_idx[i] = best;
        }
    });

    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t truth = label_map.at(data.labels[i]);
        out.confusion(truth, pred_idx[i]) += 1.0;
        out.predictions[i] = model.memory.labels()[pred_idx[i]];
        if (pred_idx[i] == truth) ++correct;
    }
    out.accuracy = data.size() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(data.size());
    return out;
}

}  // namespace

EvalResult evaluate_hdc(const SpikeHdModel& model, const DenseDataset& data, const PhaseConfig& cfg) {
    return evaluate_common(model, data, cfg, true);
}

EvalResult evaluate_snn(const SpikeHdModel& model, const DenseDataset& data, const PhaseConfig& cfg) {
    return evaluate_common(model, data, cfg, false);
}

}  // namespace spikehd
