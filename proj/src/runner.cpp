#include "spikehd/runner.hpp"

#include <cstdio>

#include "spikehd/kernels.hpp"
#include "spikehd/report.hpp"
#include "spikehd/rng.hpp"
#include "spikehd/serialize.hpp"

namespace spikehd {

namespace {

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Checkpoint model_to_checkpoint(const SpikeHdModel& model, std::uint64_t hash,
                               const std::string& resolved) {
    CheckpointMeta meta;
    meta.phase = static_cast<std::uint8_t>(model.phase);
    meta.injection_depth = model.injection_depth;
    meta.pooling = static_cast<std::uint8_t>(model.pooling);
    meta.config_hash = hash;
    meta.resolved_config = resolved;
    return Checkpoint{meta, model.network, *model.basis, model.memory};
}

SpikeHdModel checkpoint_to_model(Checkpoint&& cp) {
    SpikeHdModel model;
    model.network = std::move(cp.network);
    model.basis = std::make_shared<EncoderBasis>(std::move(cp.basis));
    model.memory = std::move(cp.memory);
    model.injection_depth = cp.meta.injection_depth;
    model.pooling = static_cast<Pooling>(cp.meta.pooling);
    model.phase = static_cast<Phase>(cp.meta.phase);
    return model;
}

}  // namespace

TrainOutcome run_train(const RunConfig& cfg) {
    kernels::set_workers(cfg.workers);
    nlohmann::json resolved = resolved_json(cfg);
    std::uint64_t hash = config_hash(resolved);
    OutputTracker outputs(cfg.output_dir);

    try {
        LoadedData data = load_dataset(cfg.dataset, cfg.seed);
        ModelSpec spec = cfg.model;
        spec.input_dim = data.train.feature_dim();

        std::vector<std::string> warnings;
        SpikeHdModel model =
            make_model(spec, data.train.label_set, derive_seed(cfg.seed, "model"), &warnings);

        std::vector<PhaseLog> logs;
        logs.push_back(step1_train_snn(model, data.train, data.test, cfg.phases));
        logs.push_back(step2_train_hdc(model, data.train, data.test, cfg.phases));
        if (cfg.online_after_step2) {
            logs.push_back(online_update(model, data.train, data.test, cfg.phases));
        } else {
            logs.push_back(step3_cotrain(model, data.train, data.test, cfg.phases));
        }
        EvalResult final_eval = evaluate_hdc(model, data.test, cfg.phases);

        write_json(outputs.path("resolved_config.json"), resolved);
        write_metrics_csv(outputs.path("metrics.csv"), logs, hash);
        write_timing_csv(outputs.path("timing.csv"), logs, hash);
        std::string checkpoint_path = outputs.path("checkpoint.spikehd");
        save_checkpoint(checkpoint_path, model_to_checkpoint(model, hash, resolved.dump()));
        write_summary_txt(outputs.path("summary.txt"), resolved, logs, final_eval.accuracy, warnings,
                          hash);

        TrainOutcome out;
        out.checkpoint_path = checkpoint_path;
        out.final_accuracy = final_eval.accuracy;
        out.config_hash = hash;

        nlohmann::json report;
        report["schema_version"] = 1;
        report["config_hash"] = hash_hex(hash);
        report["resolved_config"] = resolved;
        report["checkpoint"] = checkpoint_path;
        report["final_test_accuracy"] = final_eval.accuracy;
        nlohmann::json phases = nlohmann::json::array();
        for (const PhaseLog& log : logs) {
            nlohmann::json p;
            p["phase"] = log.phase;
            p["seconds"] = log.seconds;
            p["peak_aux_bytes"] = log.peak_aux_bytes;
            p["warnings"] = log.warnings;
            nlohmann::json rows = nlohmann::json::array();
            for (const EpochRow& row : log.rows)
                rows.push_back({{"epoch", row.epoch},
                                {"train_accuracy", row.train_accuracy},
                                {"test_accuracy", row.test_accuracy},
                                {"mean_loss", row.mean_loss}});
            p["rows"] = rows;
            phases.push_back(p);
        }
        report["phases"] = phases;
        write_json(outputs.path("report.json"), report);
        out.report = std::move(report);
        return out;
    } catch (...) {
        outputs.quarantine();
        throw;
    }
}

EvalOutcome run_eval(const RunConfig& cfg, const std::string& checkpoint_path,
                     const std::string& split) {
    kernels::set_workers(cfg.workers);
    nlohmann::json resolved = resolved_json(cfg);
    std::uint64_t hash = config_hash(resolved);
    OutputTracker outputs(cfg.output_dir);

    try {
        SpikeHdModel model = checkpoint_to_model(load_checkpoint(checkpoint_path));
        LoadedData data = load_dataset(cfg.dataset, cfg.seed);
        const DenseDataset& part = split == "train" ? data.train : data.test;
        if (part.feature_dim() != model.network.input_dim())
            throw std::runtime_error("eval: dataset feature count " +
                                     std::to_string(part.feature_dim()) +
                                     " does not match checkpoint input size " +
                                     std::to_string(model.network.input_dim()));

        EvalResult eval = evaluate_hdc(model, part, cfg.phases);
        EvalOutcome out;
        out.accuracy = eval.accuracy;
        out.eval_csv = outputs.path("eval.csv");
        out.predictions_csv = outputs.path("predictions.csv");
        write_eval_csv(out.eval_csv, eval, model.memory.labels(), hash);
        write_predictions_csv(out.predictions_csv, eval, part, hash);
        return out;
    } catch (...) {
        outputs.quarantine();
        throw;
    }
}

SweepOutcome run_sweep_cmd(const RunConfig& cfg) {
    kernels::set_workers(cfg.workers);
    if (!cfg.has_sweep) throw ConfigError({"sweep: config has no sweep section"});
    nlohmann::json resolved = resolved_json(cfg);
    std::uint64_t hash = config_hash(resolved);
    OutputTracker outputs(cfg.output_dir);

    try {
        LoadedData data = load_dataset(cfg.dataset, cfg.seed);
        BenchConfig bench;
        bench.train = std::move(data.train);
        bench.test = std::move(data.test);
        bench.model = cfg.model;
        bench.model.input_dim = bench.train.feature_dim();
        bench.phases = cfg.phases;
        bench.fault_scope = cfg.fault_scope;
        bench.fault_model = cfg.fault_model;
        bench.warmup = cfg.warmup;
        bench.param_budget = cfg.param_budget;

        SweepSpec spec = cfg.sweep;
        spec.task = bench.train.name;
        SweepResult result = run_sweep(spec, bench);

        SweepOutcome out;
        out.row_count = result.rows.size();
        write_json(outputs.path("resolved_config.json"), resolved);
        out.sweep_csv = outputs.path("sweep.csv");
        write_sweep_csv(out.sweep_csv, spec, result, hash);
        out.summary_json = outputs.path("sweep_summary.json");
        write_json(out.summary_json, sweep_summary_json(spec, result, hash));
        out.plot_json = outputs.path("plot.json");
        write_json(out.plot_json, plot_description_json(spec, result, hash));
        return out;
    } catch (...) {
        outputs.quarantine();
        throw;
    }
}

}  // namespace spikehd
