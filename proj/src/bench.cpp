#include "spikehd/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "spikehd/rng.hpp"

namespace spikehd {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Uniform sample of `count` distinct indices from [0, pool) via partial
// Fisher-Yates.
std::vector<std::size_t> choose_indices(std::size_t pool, std::size_t count, std::uint64_t seed) {
    std::vector<std::size_t> all(pool);
    for (std::size_t i = 0; i < pool; ++i) all[i] = i;
    SplitMix64 rng(seed);
    count = std::min(count, pool);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(pool - i));
        std::swap(all[i], all[j]);
    }
    all.resize(count);
    return all;
}

std::size_t snn_param_count(const LifNetwork& net) {
    std::size_t total = 0;
    for (std::size_t l = 1; l <= net.num_layers(); ++l) total += net.layer(l).weights.size();
    return total;
}

std::size_t snn_neuron_count(const LifNetwork& net) {
    std::size_t total = 0;
    for (std::size_t l = 1; l <= net.num_layers(); ++l) total += net.layer(l).neurons();
    return total;
}

void zero_snn_parameter(LifNetwork& net, std::size_t flat) {
    for (std::size_t l = 1; l <= net.num_layers(); ++l) {
        Matrix& w = net.layer_mut(l).weights;
        if (flat < w.size()) {
            w.data[flat] = 0.0;
            return;
        }
        flat -= w.size();
    }
}

void zero_snn_neuron(LifNetwork& net, std::size_t flat) {
    for (std::size_t l = 1; l <= net.num_layers(); ++l) {
        Matrix& w = net.layer_mut(l).weights;
        if (flat < w.rows) {
            for (std::size_t j = 0; j < w.cols; ++j) w(flat, j) = 0.0;
            if (l < net.num_layers()) {
                Matrix& next = net.layer_mut(l + 1).weights;
                for (std::size_t i = 0; i < next.rows; ++i) next(i, flat) = 0.0;
            }
            return;
        }
        flat -= w.rows;
    }
}

struct CycleResult {
    double test_accuracy = 0.0;
    double seconds = 0.0;
    SpikeHdModel model;
};

CycleResult train_eval_cycle(const ModelSpec& spec, const DenseDataset& train,
                             const DenseDataset& test, const PhaseConfig& cfg,
                             std::uint64_t seed) {
    auto t0 = Clock::now();
    PhaseConfig run_cfg = cfg;
    run_cfg.seed = seed;
    SpikeHdModel model = make_model(spec, train.label_set, seed);
    step1_train_snn(model, train, test, run_cfg);
    step2_train_hdc(model, train, test, run_cfg);
    if (run_cfg.epochs_step3 > 0) step3_cotrain(model, train, test, run_cfg);
    CycleResult out;
    out.test_accuracy = evaluate_hdc(model, test, run_cfg).accuracy;
    out.seconds = elapsed_seconds(t0);
    out.model = std::move(model);
    return out;
}

// Solve the 2:3:2 layer scale so the spiking side uses about `target`
// trainable weights: 2s*input + 12s^2 = target.
std::size_t ratio_layer_scale(std::size_t input_dim, double target) {
    double in = static_cast<double>(input_dim);
    double s = (-in + std::sqrt(in * in + 6.0 * target)) / 12.0;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(s)));
}

}  // namespace

std::size_t fault_pool_size(const SpikeHdModel& model, FaultScope scope, FaultModel fault_model) {
    std::size_t hdc = fault_model == FaultModel::Parameters ? model.memory.classes().size()
                                                            : model.memory.dim();
    std::size_t snn = fault_model == FaultModel::Parameters ? snn_param_count(model.network)
                                                            : snn_neuron_count(model.network);
    switch (scope) {
        case FaultScope::HdcOnly: return hdc;
        case FaultScope::SnnOnly: return snn;
        case FaultScope::Both: return hdc + snn;
    }
    return 0;
}

SpikeHdModel inject_faults(const SpikeHdModel& model, double fraction, FaultScope scope,
                           std::uint64_t seed, FaultModel fault_model) {
    require(fraction >= 0.0 && fraction <= 1.0, "inject_faults: fraction outside [0,1]");
    SpikeHdModel copy = model;

    std::size_t pool = fault_pool_size(model, scope, fault_model);
    auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pool)));
    if (count == 0) return copy;

    std::size_t hdc_pool = fault_model == FaultModel::Parameters ? copy.memory.classes().size()
                                                                 : copy.memory.dim();
    bool has_hdc = scope != FaultScope::SnnOnly;

    for (std::size_t flat : choose_indices(pool, count, seed)) {
        bool in_hdc = has_hdc && flat < hdc_pool;
        std::size_t local = in_hdc ? flat : (has_hdc ? flat - hdc_pool : flat);
        if (in_hdc) {
            Matrix& rows = copy.memory.classes_mut();
            if (fault_model == FaultModel::Parameters) {
                rows.data[local] = 0.0;
            } else {
                for (std::size_t r = 0; r < rows.rows; ++r) rows(r, local) = 0.0;
            }
        } else {
            if (fault_model == FaultModel::Parameters) {
                zero_snn_parameter(copy.network, local);
            } else {
                zero_snn_neuron(copy.network, local);
            }
        }
    }
    return copy;
}

SweepResult run_sweep(const SweepSpec& spec, const BenchConfig& base) {
    require(!spec.values.empty(), "run_sweep: value list must be nonempty");
    require(spec.repeats >= 1, "run_sweep: repeats must be >= 1");
    SweepResult out;

    for (int rep = 0; rep < spec.repeats; ++rep) {
        std::uint64_t rep_seed = derive_seed(spec.seed, "sweep.repeat", static_cast<std::uint64_t>(rep));

        switch (spec.axis) {
            case SweepAxis::Dimension: {
                // One spiking front end per repeat; each dimension gets a
                // fresh encoder/memory trained on the same frozen features.
                PhaseConfig cfg = base.phases;
                cfg.seed = rep_seed;
                ModelSpec ms = base.model;
                ms.input_dim = base.train.feature_dim();
                ms.encoder_dim = static_cast<std::size_t>(
                    *std::max_element(spec.values.begin(), spec.values.end()));
                SpikeHdModel warm = make_model(ms, base.train.label_set, rep_seed);
                step1_train_snn(warm, base.train, base.test, cfg);

                for (double value : spec.values) {
                    auto t0 = Clock::now();
                    auto dim = static_cast<std::size_t>(value);
                    SpikeHdModel m = warm;
                    std::size_t feat = m.network.layer_size(m.injection_depth);
                    m.basis = std::make_shared<EncoderBasis>(EncoderBasis::create(
                        feat, dim, ms.activation, derive_seed(rep_seed, "encoder")));
                    m.memory = ClassMemory::init(base.train.label_set, dim);
                    step2_train_hdc(m, base.train, base.test, cfg);
                    double acc = evaluate_hdc(m, base.test, cfg).accuracy;
                    out.rows.push_back({value, rep, "test_accuracy", acc, elapsed_seconds(t0)});
                }
                break;
            }

            case SweepAxis::FaultRate: {
                PhaseConfig cfg = base.phases;
                cfg.seed = rep_seed;
                ModelSpec ms = base.model;
                ms.input_dim = base.train.feature_dim();
                CycleResult cycle = train_eval_cycle(ms, base.train, base.test, cfg, rep_seed);
                double base_acc = cycle.test_accuracy;
                for (std::size_t v = 0; v < spec.values.size(); ++v) {
                    auto t0 = Clock::now();
                    double fraction = spec.values[v];
                    SpikeHdModel faulted =
                        inject_faults(cycle.model, fraction, base.fault_scope,
                                      derive_seed(rep_seed, "fault", v), base.fault_model);
                    double acc = evaluate_hdc(faulted, base.test, cfg).accuracy;
                    double secs = elapsed_seconds(t0);
                    out.rows.push_back({fraction, rep, "test_accuracy", acc, secs});
                    double retention = base_acc > 0.0 ? acc / base_acc : 0.0;
                    out.rows.push_back({fraction, rep, "retention", retention, secs});
                }
                break;
            }

            case SweepAxis::InjectionDepth: {
                for (double value : spec.values) {
                    PhaseConfig cfg = base.phases;
                    ModelSpec ms = base.model;
                    ms.input_dim = base.train.feature_dim();
                    ms.injection_depth = static_cast<std::size_t>(value);
                    CycleResult cycle = train_eval_cycle(ms, base.train, base.test, cfg, rep_seed);
                    out.rows.push_back({value, rep, "test_accuracy", cycle.test_accuracy, cycle.seconds});
                }
                break;
            }

            case SweepAxis::ParamRatio: {
                std::size_t classes = base.train.label_set.size();
                for (double fraction : spec.values) {
                    PhaseConfig cfg = base.phases;
                    ModelSpec ms = base.model;
                    ms.input_dim = base.train.feature_dim();
                    double budget = static_cast<double>(base.param_budget);
                    std::size_t s = ratio_layer_scale(ms.input_dim, fraction * budget);
                    ms.layer_sizes = {2 * s, 3 * s, 2 * s};
                    ms.injection_depth = 2;
                    std::size_t snn_params = 2 * s * ms.input_dim + 12 * s * s;
                    double left = budget - static_cast<double>(snn_params);
                    auto dim = static_cast<std::size_t>(
                        std::max(left / static_cast<double>(classes), 0.0));
                    ms.encoder_dim = std::max(dim, 3 * s);  // encoder needs at least the layer width
                    CycleResult cycle = train_eval_cycle(ms, base.train, base.test, cfg, rep_seed);
                    out.rows.push_back({fraction, rep, "test_accuracy", cycle.test_accuracy, cycle.seconds});
                    out.rows.push_back(
                        {fraction, rep, "hdc_dimension", static_cast<double>(ms.encoder_dim), 0.0});
                }
                break;
            }

            case SweepAxis::OnlineVsOffline: {
                ModelSpec ms = base.model;
                ms.input_dim = base.train.feature_dim();
                SweepResult pair = compare_online_offline(rep_seed, base.train, base.test,
                                                          base.warmup, ms, base.phases);
                for (SweepRow& row : pair.rows) {
                    row.repeat = rep;
                    out.rows.push_back(row);
                }
                break;
            }
        }
    }
    return out;
}

SweepResult compare_online_offline(std::uint64_t model_seed, const DenseDataset& train,
                                   const DenseDataset& test, std::size_t warmup,
                                   const ModelSpec& spec, const PhaseConfig& cfg) {
    require(warmup >= 1 && warmup < train.size(),
            "compare_online_offline: warmup must be smaller than the dataset");

    DenseDataset head = train;
    head.samples.assign(train.samples.begin(), train.samples.begin() + warmup);
    head.labels.assign(train.labels.begin(), train.labels.begin() + warmup);
    DenseDataset rest = train;
    rest.samples.assign(train.samples.begin() + warmup, train.samples.end());
    rest.labels.assign(train.labels.begin() + warmup, train.labels.end());

    PhaseConfig run_cfg = cfg;
    run_cfg.seed = model_seed;
    SpikeHdModel shared = make_model(spec, train.label_set, model_seed);
    step1_train_snn(shared, head, test, run_cfg);
    step2_train_hdc(shared, head, test, run_cfg);

    SweepResult out;
    const double offline = 0.0;
    const double online = 1.0;

    // Branch A: keep co-training the spiking side on the remaining stream.
    SpikeHdModel model_a = shared;
    PhaseLog log_a = step3_cotrain(model_a, rest, test, run_cfg);
    double a_train_seconds = log_a.rows.empty() ? 0.0 : log_a.rows.back().train_seconds;
    for (const EpochRow& row : log_a.rows) {
        out.rows.push_back({offline, 0, "test_accuracy_epoch_" + std::to_string(row.epoch),
                            row.test_accuracy, row.train_seconds});
    }
    out.rows.push_back({offline, 0, "final_test_accuracy",
                        log_a.rows.empty() ? 0.0 : log_a.rows.back().test_accuracy, a_train_seconds});
    out.rows.push_back({offline, 0, "train_seconds", a_train_seconds, a_train_seconds});
    out.rows.push_back({offline, 0, "peak_aux_bytes", static_cast<double>(log_a.peak_aux_bytes), 0.0});

    // Branch B: frozen network, one memory-only pass per epoch.
    SpikeHdModel model_b = shared;
    double b_train_seconds = 0.0;
    double b_final = 0.0;
    std::size_t b_peak = 0;
    int epochs = std::max(1, run_cfg.epochs_step3);
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        PhaseLog log_b = online_update(model_b, rest, test, run_cfg);
        const EpochRow& row = log_b.rows.front();
        b_train_seconds += row.train_seconds;
        b_final = row.test_accuracy;
        b_peak = std::max(b_peak, log_b.peak_aux_bytes);
        out.rows.push_back({online, 0, "test_accuracy_epoch_" + std::to_string(epoch),
                            row.test_accuracy, b_train_seconds});
    }
    out.rows.push_back({online, 0, "final_test_accuracy", b_final, b_train_seconds});
    out.rows.push_back({online, 0, "train_seconds", b_train_seconds, b_train_seconds});
    out.rows.push_back({online, 0, "peak_aux_bytes", static_cast<double>(b_peak), 0.0});
    return out;
}

}  // namespace spikehd
