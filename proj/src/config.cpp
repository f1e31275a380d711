#include "spikehd/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "spikehd/rng.hpp"

namespace spikehd {

namespace {

using nlohmann::json;

struct ErrorSink {
    std::vector<std::string>& list;
    void add(const std::string& path, const std::string& msg) { list.push_back(path + ": " + msg); }
};

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed,
                ErrorSink& err) {
    if (!j.is_object()) return;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            err.add(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
    }
}

template <typename T>
T get_num(const json& j, const char* key, T def, const std::string& path, ErrorSink& err) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number()) {
        err.add(path, "must be a number");
        return def;
    }
    return v.get<T>();
}

std::string get_str(const json& j, const char* key, const std::string& def, const std::string& path,
                    ErrorSink& err) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_string()) {
        err.add(path, "must be a string");
        return def;
    }
    return v.get<std::string>();
}

bool get_bool(const json& j, const char* key, bool def, const std::string& path, ErrorSink& err) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_boolean()) {
        err.add(path, "must be a boolean");
        return def;
    }
    return v.get<bool>();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(errors.size() == 1
                             ? "configuration error: " + errors.front()
                             : "configuration errors (" + std::to_string(errors.size()) + ")"),
      errors_(std::move(errors)) {}

RunConfig parse_config(const json& j, std::vector<std::string>& errors) {
    ErrorSink err{errors};
    RunConfig cfg;
    if (!j.is_object()) {
        err.add("$", "config root must be an object");
        return cfg;
    }

    check_keys(j, "", {"schema_version", "seed", "output_dir", "workers", "dataset", "rate_code",
                       "network", "encoder", "hd", "phases", "pipeline", "sweep"},
               err);

    cfg.schema_version = get_num<int>(j, "schema_version", 1, "schema_version", err);
    if (cfg.schema_version != 1) err.add("schema_version", "unsupported version (expected 1)");
    cfg.seed = get_num<std::uint64_t>(j, "seed", 1, "seed", err);
    cfg.output_dir = get_str(j, "output_dir", "out", "output_dir", err);
    cfg.workers = get_num<int>(j, "workers", 1, "workers", err);
    if (cfg.workers < 1) err.add("workers", "must be >= 1");

    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        check_keys(d, "dataset",
                   {"source", "path", "labels_path", "test_path", "test_labels_path", "label_column",
                    "classes", "features", "train_samples", "test_samples", "spread", "noise",
                    "image_side", "downscale_factor", "train_fraction"},
                   err);
        DatasetConfig& ds = cfg.dataset;
        ds.source = get_str(d, "source", ds.source, "dataset.source", err);
        ds.path = get_str(d, "path", "", "dataset.path", err);
        ds.labels_path = get_str(d, "labels_path", "", "dataset.labels_path", err);
        ds.test_path = get_str(d, "test_path", "", "dataset.test_path", err);
        ds.test_labels_path = get_str(d, "test_labels_path", "", "dataset.test_labels_path", err);
        ds.label_column = get_str(d, "label_column", "", "dataset.label_column", err);
        ds.classes = get_num<std::size_t>(d, "classes", ds.classes, "dataset.classes", err);
        ds.features = get_num<std::size_t>(d, "features", ds.features, "dataset.features", err);
        ds.train_samples =
            get_num<std::size_t>(d, "train_samples", ds.train_samples, "dataset.train_samples", err);
        ds.test_samples =
            get_num<std::size_t>(d, "test_samples", ds.test_samples, "dataset.test_samples", err);
        ds.spread = get_num<double>(d, "spread", ds.spread, "dataset.spread", err);
        ds.noise = get_num<double>(d, "noise", ds.noise, "dataset.noise", err);
        ds.image_side = get_num<std::size_t>(d, "image_side", ds.image_side, "dataset.image_side", err);
        ds.downscale_factor = get_num<std::size_t>(d, "downscale_factor", ds.downscale_factor,
                                                   "dataset.downscale_factor", err);
        ds.train_fraction =
            get_num<double>(d, "train_fraction", ds.train_fraction, "dataset.train_fraction", err);

        if (ds.source == "idx") {
            if (ds.path.empty()) err.add("dataset.path", "required for source 'idx'");
            if (ds.labels_path.empty()) err.add("dataset.labels_path", "required for source 'idx'");
        } else if (ds.source == "csv") {
            if (ds.path.empty()) err.add("dataset.path", "required for source 'csv'");
            if (ds.label_column.empty()) err.add("dataset.label_column", "required for source 'csv'");
        } else if (ds.source == "synth_blobs" || ds.source == "synth_digits") {
            if (ds.train_samples < 1) err.add("dataset.train_samples", "must be >= 1");
            if (ds.classes < 1) err.add("dataset.classes", "must be >= 1");
        } else {
            err.add("dataset.source",
                    "unknown source '" + ds.source +
                        "' (expected synth_blobs, synth_digits, idx, or csv)");
        }
        if (ds.source == "synth_blobs" && ds.features < 1) err.add("dataset.features", "must be >= 1");
        if (ds.train_fraction <= 0.0 || ds.train_fraction >= 1.0)
            err.add("dataset.train_fraction", "must be inside (0,1)");
    }

    if (j.contains("rate_code")) {
        const json& r = j.at("rate_code");
        check_keys(r, "rate_code", {"steps", "max_rate"}, err);
        cfg.rate_code.steps = get_num<std::size_t>(r, "steps", 100, "rate_code.steps", err);
        cfg.rate_code.max_rate = get_num<double>(r, "max_rate", 1.0, "rate_code.max_rate", err);
        if (cfg.rate_code.steps < 1) err.add("rate_code.steps", "must be >= 1");
        if (!(cfg.rate_code.max_rate > 0.0 && cfg.rate_code.max_rate <= 1.0))
            err.add("rate_code.max_rate", "must be inside (0,1]");
    }

    if (j.contains("network")) {
        const json& n = j.at("network");
        check_keys(n, "network",
                   {"sizes", "alpha_mem", "alpha_syn", "gamma_ref", "theta", "surrogate_slope",
                    "dropout_p"},
                   err);
        if (n.contains("sizes")) {
            if (!n.at("sizes").is_array() || n.at("sizes").empty()) {
                err.add("network.sizes", "must be a nonempty array of layer sizes");
            } else {
                cfg.model.layer_sizes.clear();
                for (const auto& v : n.at("sizes")) {
                    if (!v.is_number_integer() || v.get<long long>() < 1) {
                        err.add("network.sizes", "entries must be positive integers");
                        cfg.model.layer_sizes = {150, 120, 100, 120, 150};
                        break;
                    }
                    cfg.model.layer_sizes.push_back(v.get<std::size_t>());
                }
            }
        }
        LifParams& p = cfg.model.lif;
        p.alpha_mem = get_num<double>(n, "alpha_mem", p.alpha_mem, "network.alpha_mem", err);
        p.alpha_syn = get_num<double>(n, "alpha_syn", p.alpha_syn, "network.alpha_syn", err);
        p.gamma_ref = get_num<double>(n, "gamma_ref", p.gamma_ref, "network.gamma_ref", err);
        p.theta = get_num<double>(n, "theta", p.theta, "network.theta", err);
        p.surrogate_slope =
            get_num<double>(n, "surrogate_slope", p.surrogate_slope, "network.surrogate_slope", err);
        p.dropout_p = get_num<double>(n, "dropout_p", p.dropout_p, "network.dropout_p", err);
        for (auto [v, name] : {std::pair<double, const char*>{p.alpha_mem, "network.alpha_mem"},
                               {p.alpha_syn, "network.alpha_syn"},
                               {p.gamma_ref, "network.gamma_ref"}}) {
            if (!(v > 0.0 && v < 1.0)) err.add(name, "must be inside (0,1)");
        }
        if (!(p.dropout_p >= 0.0 && p.dropout_p < 1.0)) err.add("network.dropout_p", "must be inside [0,1)");
        if (!(p.surrogate_slope > 0.0)) err.add("network.surrogate_slope", "must be positive");
    }

    if (j.contains("encoder")) {
        const json& e = j.at("encoder");
        check_keys(e, "encoder", {"dim", "activation", "sigma"}, err);
        cfg.model.encoder_dim = get_num<std::size_t>(e, "dim", 4000, "encoder.dim", err);
        if (cfg.model.encoder_dim < 1) err.add("encoder.dim", "must be >= 1");
        std::string act = get_str(e, "activation", "tanh", "encoder.activation", err);
        if (act == "tanh") {
            cfg.model.activation = Activation::Tanh;
        } else if (act == "sincos") {
            cfg.model.activation = Activation::SinCos;
        } else {
            err.add("encoder.activation", "must be 'tanh' or 'sincos'");
        }
    }

    if (j.contains("hd")) {
        const json& h = j.at("hd");
        check_keys(h, "hd",
                   {"eta1", "eta2", "boost_correct_on_error", "skip_update_when_correct",
                    "binarize_queries"},
                   err);
        HdTrainConfig& t = cfg.phases.hd_cfg;
        t.eta1 = get_num<double>(h, "eta1", t.eta1, "hd.eta1", err);
        t.eta2 = get_num<double>(h, "eta2", t.eta2, "hd.eta2", err);
        if (!(t.eta1 > 0.0)) err.add("hd.eta1", "must be positive");
        if (!(t.eta2 > 0.0)) err.add("hd.eta2", "must be positive");
        t.boost_correct_on_error =
            get_bool(h, "boost_correct_on_error", false, "hd.boost_correct_on_error", err);
        t.skip_update_when_correct =
            get_bool(h, "skip_update_when_correct", false, "hd.skip_update_when_correct", err);
        t.binarize_queries = get_bool(h, "binarize_queries", false, "hd.binarize_queries", err);
    }

    if (j.contains("phases")) {
        const json& p = j.at("phases");
        check_keys(p, "phases",
                   {"epochs_step1", "epochs_step2", "epochs_step3", "snn_lr", "cotrain_snn_lr",
                    "hd_update_period", "backproject", "batch_size", "shuffle",
                    "binarize_at_inference"},
                   err);
        PhaseConfig& ph = cfg.phases;
        ph.epochs_step1 = get_num<int>(p, "epochs_step1", ph.epochs_step1, "phases.epochs_step1", err);
        ph.epochs_step2 = get_num<int>(p, "epochs_step2", ph.epochs_step2, "phases.epochs_step2", err);
        ph.epochs_step3 = get_num<int>(p, "epochs_step3", ph.epochs_step3, "phases.epochs_step3", err);
        if (ph.epochs_step1 < 0) err.add("phases.epochs_step1", "must be >= 0");
        if (ph.epochs_step2 < 0) err.add("phases.epochs_step2", "must be >= 0");
        if (ph.epochs_step3 < 0) err.add("phases.epochs_step3", "must be >= 0");
        ph.snn_lr = get_num<double>(p, "snn_lr", ph.snn_lr, "phases.snn_lr", err);
        ph.cotrain_snn_lr =
            get_num<double>(p, "cotrain_snn_lr", ph.cotrain_snn_lr, "phases.cotrain_snn_lr", err);
        if (!(ph.snn_lr > 0.0)) err.add("phases.snn_lr", "must be positive");
        if (ph.cotrain_snn_lr < 0.0) err.add("phases.cotrain_snn_lr", "must be >= 0");
        ph.hd_update_period = get_num<std::size_t>(p, "hd_update_period", ph.hd_update_period,
                                                   "phases.hd_update_period", err);
        if (ph.hd_update_period < 1) err.add("phases.hd_update_period", "must be >= 1");
        std::string bp = get_str(p, "backproject", "chain_rule", "phases.backproject", err);
        if (bp == "chain_rule") {
            ph.backproject_mode = BackprojectMode::ChainRule;
        } else if (bp == "pinv_target") {
            ph.backproject_mode = BackprojectMode::PinvTarget;
        } else {
            err.add("phases.backproject", "must be 'chain_rule' or 'pinv_target'");
        }
        ph.batch_size = get_num<std::size_t>(p, "batch_size", ph.batch_size, "phases.batch_size", err);
        if (ph.batch_size < 1) err.add("phases.batch_size", "must be >= 1");
        ph.shuffle = get_bool(p, "shuffle", true, "phases.shuffle", err);
        ph.binarize_at_inference =
            get_bool(p, "binarize_at_inference", false, "phases.binarize_at_inference", err);
    }

    if (j.contains("pipeline")) {
        const json& p = j.at("pipeline");
        check_keys(p, "pipeline", {"injection_depth", "pooling", "online_after_step2"}, err);
        cfg.model.injection_depth =
            get_num<std::size_t>(p, "injection_depth", 4, "pipeline.injection_depth", err);
        std::string pooling = get_str(p, "pooling", "mean_rate", "pipeline.pooling", err);
        if (pooling == "mean_rate") {
            cfg.model.pooling = Pooling::MeanRate;
        } else if (pooling == "mean_readout_potential") {
            cfg.model.pooling = Pooling::MeanReadoutPotential;
        } else {
            err.add("pipeline.pooling", "must be 'mean_rate' or 'mean_readout_potential'");
        }
        cfg.online_after_step2 = get_bool(p, "online_after_step2", false, "pipeline.online_after_step2", err);
    }
    if (cfg.model.injection_depth < 1 || cfg.model.injection_depth > cfg.model.layer_sizes.size())
        err.add("pipeline.injection_depth", "must be between 1 and the layer count");

    if (j.contains("sweep")) {
        cfg.has_sweep = true;
        const json& s = j.at("sweep");
        check_keys(s, "sweep",
                   {"axis", "values", "repeats", "fault_scope", "fault_model", "warmup",
                    "param_budget"},
                   err);
        std::string axis = get_str(s, "axis", "dimension", "sweep.axis", err);
        if (axis == "dimension") {
            cfg.sweep.axis = SweepAxis::Dimension;
        } else if (axis == "fault_rate") {
            cfg.sweep.axis = SweepAxis::FaultRate;
        } else if (axis == "injection_depth") {
            cfg.sweep.axis = SweepAxis::InjectionDepth;
        } else if (axis == "param_ratio") {
            cfg.sweep.axis = SweepAxis::ParamRatio;
        } else if (axis == "online_vs_offline") {
            cfg.sweep.axis = SweepAxis::OnlineVsOffline;
        } else {
            err.add("sweep.axis", "unknown axis '" + axis + "'");
        }
        if (s.contains("values") && s.at("values").is_array()) {
            for (const auto& v : s.at("values")) {
                if (v.is_number()) cfg.sweep.values.push_back(v.get<double>());
            }
        }
        if (cfg.sweep.values.empty() && cfg.sweep.axis != SweepAxis::OnlineVsOffline)
            err.add("sweep.values", "must be a nonempty numeric array");
        if (cfg.sweep.values.empty()) cfg.sweep.values = {0.0};
        cfg.sweep.repeats = get_num<int>(s, "repeats", 5, "sweep.repeats", err);
        if (cfg.sweep.repeats < 1) err.add("sweep.repeats", "must be >= 1");
        std::string scope = get_str(s, "fault_scope", "hdc_only", "sweep.fault_scope", err);
        if (scope == "hdc_only") {
            cfg.fault_scope = FaultScope::HdcOnly;
        } else if (scope == "snn_only") {
            cfg.fault_scope = FaultScope::SnnOnly;
        } else if (scope == "both") {
            cfg.fault_scope = FaultScope::Both;
        } else {
            err.add("sweep.fault_scope", "must be 'hdc_only', 'snn_only', or 'both'");
        }
        std::string fmodel = get_str(s, "fault_model", "parameters", "sweep.fault_model", err);
        if (fmodel == "parameters") {
            cfg.fault_model = FaultModel::Parameters;
        } else if (fmodel == "neurons") {
            cfg.fault_model = FaultModel::Neurons;
        } else {
            err.add("sweep.fault_model", "must be 'parameters' or 'neurons'");
        }
        cfg.warmup = get_num<std::size_t>(s, "warmup", 100, "sweep.warmup", err);
        cfg.param_budget = get_num<std::size_t>(s, "param_budget", 10000, "sweep.param_budget", err);
    }

    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"config: cannot open file '" + path + "'"});
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError({std::string("config: invalid JSON: ") + e.what()});
    }
    std::vector<std::string> errors;
    RunConfig cfg = parse_config(j, errors);
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

void resolve_seeds(RunConfig& cfg) {
    cfg.rate_code.seed = derive_seed(cfg.seed, "ratecode");
    cfg.phases.seed = derive_seed(cfg.seed, "phases");
    cfg.phases.rate_code = cfg.rate_code;
    cfg.sweep.seed = derive_seed(cfg.seed, "sweep");
}

nlohmann::json resolved_json(const RunConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["workers"] = cfg.workers;

    json d;
    d["source"] = cfg.dataset.source;
    d["path"] = cfg.dataset.path;
    d["labels_path"] = cfg.dataset.labels_path;
    d["test_path"] = cfg.dataset.test_path;
    d["test_labels_path"] = cfg.dataset.test_labels_path;
    d["label_column"] = cfg.dataset.label_column;
    d["classes"] = cfg.dataset.classes;
    d["features"] = cfg.dataset.features;
    d["train_samples"] = cfg.dataset.train_samples;
    d["test_samples"] = cfg.dataset.test_samples;
    d["spread"] = cfg.dataset.spread;
    d["noise"] = cfg.dataset.noise;
    d["image_side"] = cfg.dataset.image_side;
    d["downscale_factor"] = cfg.dataset.downscale_factor;
    d["train_fraction"] = cfg.dataset.train_fraction;
    j["dataset"] = d;

    j["rate_code"] = {{"steps", cfg.rate_code.steps}, {"max_rate", cfg.rate_code.max_rate}};

    json n;
    n["sizes"] = cfg.model.layer_sizes;
    n["alpha_mem"] = cfg.model.lif.alpha_mem;
    n["alpha_syn"] = cfg.model.lif.alpha_syn;
    n["gamma_ref"] = cfg.model.lif.gamma_ref;
    n["theta"] = cfg.model.lif.theta;
    n["surrogate_slope"] = cfg.model.lif.surrogate_slope;
    n["dropout_p"] = cfg.model.lif.dropout_p;
    j["network"] = n;

    j["encoder"] = {{"dim", cfg.model.encoder_dim},
                    {"activation", cfg.model.activation == Activation::Tanh ? "tanh" : "sincos"}};

    j["hd"] = {{"eta1", cfg.phases.hd_cfg.eta1},
               {"eta2", cfg.phases.hd_cfg.eta2},
               {"boost_correct_on_error", cfg.phases.hd_cfg.boost_correct_on_error},
               {"skip_update_when_correct", cfg.phases.hd_cfg.skip_update_when_correct},
               {"binarize_queries", cfg.phases.hd_cfg.binarize_queries}};

    j["phases"] = {
        {"epochs_step1", cfg.phases.epochs_step1},
        {"epochs_step2", cfg.phases.epochs_step2},
        {"epochs_step3", cfg.phases.epochs_step3},
        {"snn_lr", cfg.phases.snn_lr},
        {"cotrain_snn_lr", cfg.phases.cotrain_snn_lr},
        {"hd_update_period", cfg.phases.hd_update_period},
        {"backproject",
         cfg.phases.backproject_mode == BackprojectMode::ChainRule ? "chain_rule" : "pinv_target"},
        {"batch_size", cfg.phases.batch_size},
        {"shuffle", cfg.phases.shuffle},
        {"binarize_at_inference", cfg.phases.binarize_at_inference},
    };

    j["pipeline"] = {{"injection_depth", cfg.model.injection_depth},
                     {"pooling", cfg.model.pooling == Pooling::MeanRate ? "mean_rate"
                                                                        : "mean_readout_potential"},
                     {"online_after_step2", cfg.online_after_step2}};

    if (cfg.has_sweep) {
        const char* axis = "dimension";
        switch (cfg.sweep.axis) {
            case SweepAxis::Dimension: axis = "dimension"; break;
            case SweepAxis::FaultRate: axis = "fault_rate"; break;
            case SweepAxis::InjectionDepth: axis = "injection_depth"; break;
            case SweepAxis::ParamRatio: axis = "param_ratio"; break;
            case SweepAxis::OnlineVsOffline: axis = "online_vs_offline"; break;
        }
        const char* scope = cfg.fault_scope == FaultScope::HdcOnly
                                ? "hdc_only"
                                : (cfg.fault_scope == FaultScope::SnnOnly ? "snn_only" : "both");
        j["sweep"] = {{"axis", axis},
                      {"values", cfg.sweep.values},
                      {"repeats", cfg.sweep.repeats},
                      {"fault_scope", scope},
                      {"fault_model",
                       cfg.fault_model == FaultModel::Parameters ? "parameters" : "neurons"},
                      {"warmup", cfg.warmup},
                      {"param_budget", cfg.param_budget}};
    }
    return j;
}

std::uint64_t config_hash(const nlohmann::json& resolved) {
    // Where a run writes and how many workers it uses do not change what it
    // computes, so they stay out of the identity.
    nlohmann::json identity = resolved;
    identity.erase("output_dir");
    identity.erase("workers");
    return fnv1a64(identity.dump());
}

namespace {

LoadedData split_dataset(DenseDataset&& all, double train_fraction) {
    LoadedData out;
    auto cut = static_cast<std::size_t>(static_cast<double>(all.size()) * train_fraction);
    cut = std::min(std::max<std::size_t>(cut, 1), all.size() - 1);
    out.train = all;
    out.train.samples.assign(all.samples.begin(), all.samples.begin() + cut);
    out.train.labels.assign(all.labels.begin(), all.labels.begin() + cut);
    out.train.split = "train";
    out.test = std::move(all);
    out.test.samples.assign(out.test.samples.begin() + cut, out.test.samples.end());
    out.test.labels.assign(out.test.labels.begin() + cut, out.test.labels.end());
    out.test.split = "test";
    return out;
}

}  // namespace

LoadedData load_dataset(const DatasetConfig& cfg, std::uint64_t master_seed) {
    LoadedData out;
    if (cfg.source == "synth_blobs") {
        // One draw covers both splits so they share class means but never a
        // sample; the generator orders samples class-major.
        std::size_t per_train = (cfg.train_samples + cfg.classes - 1) / cfg.classes;
        std::size_t per_test = (cfg.test_samples + cfg.classes - 1) / cfg.classes;
        DenseDataset all = synth_blobs(cfg.classes, cfg.features, per_train + per_test, cfg.spread,
                                       derive_seed(master_seed, "data"));
        out.train.label_set = all.label_set;
        out.test.label_set = all.label_set;
        out.train.name = all.name;
        out.test.name = all.name;
        std::size_t per_class = per_train + per_test;
        for (std::size_t c = 0; c < cfg.classes; ++c) {
            for (std::size_t s = 0; s < per_class; ++s) {
                std::size_t idx = c * per_class + s;
                DenseDataset& dst = s < per_train ? out.train : out.test;
                dst.samples.push_back(all.samples[idx]);
                dst.labels.push_back(all.labels[idx]);
            }
        }
        out.train.split = "train";
        out.test.split = "test";
    } else if (cfg.source == "synth_digits") {
        out.train = synth_digits(cfg.train_samples, cfg.image_side, cfg.noise,
                                 derive_seed(master_seed, "data.train"));
        out.test = synth_digits(cfg.test_samples, cfg.image_side, cfg.noise,
                                derive_seed(master_seed, "data.test"));
        out.train.split = "train";
        out.test.split = "test";
    } else if (cfg.source == "idx") {
        DenseDataset train = load_idx(cfg.path, cfg.labels_path);
        if (!cfg.test_path.empty()) {
            out.train = std::move(train);
            out.train.split = "train";
            out.test = load_idx(cfg.test_path, cfg.test_labels_path);
            out.test.split = "test";
        } else {
            out = split_dataset(std::move(train), cfg.train_fraction);
        }
    } else if (cfg.source == "csv") {
        CsvLoadResult loaded = load_csv(cfg.path, cfg.label_column);
        if (!cfg.test_path.empty()) {
            out.train = std::move(loaded.dataset);
            out.train.split = "train";
            out.test = load_csv_with(cfg.test_path, cfg.label_column, loaded.scaling);
            out.test.label_set = out.train.label_set;
            out.test.split = "test";
        } else {
            out = split_dataset(std::move(loaded.dataset), cfg.train_fraction);
        }
    } else {
        throw ConfigError({"dataset.source: unknown source '" + cfg.source + "'"});
    }

    if (cfg.downscale_factor > 1) {
        out.train = downscale(out.train, cfg.downscale_factor);
        out.test = downscale(out.test, cfg.downscale_factor);
    }
    return out;
}

}  // namespace spikehd
