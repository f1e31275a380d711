#include "spikehd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

namespace spikehd {

namespace fs = std::filesystem;

std::string csv_escape(const std::string& s) {
    bool needs_quotes = s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {
std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    return out;
}
std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}
}  // namespace

void write_metrics_csv(const std::string& path, const std::vector<PhaseLog>& logs,
                       std::uint64_t config_hash) {
    std::ofstream out = open_out(path);
    out << "config_hash,phase,epoch,train_accuracy,test_accuracy,mean_loss\n";
    for (const PhaseLog& log : logs)
        for (const EpochRow& row : log.rows)
            out << hash_hex(config_hash) << ',' << csv_escape(row.phase) << ',' << row.epoch << ','
                << format_double(row.train_accuracy) << ',' << format_double(row.test_accuracy)
                << ',' << format_double(row.mean_loss) << '\n';
}

void write_timing_csv(const std::string& path, const std::vector<PhaseLog>& logs,
                      std::uint64_t config_hash) {
    std::ofstream out = open_out(path);
    out << "config_hash,phase,seconds,peak_aux_bytes\n";
    for (const PhaseLog& log : logs)
        out << hash_hex(config_hash) << ',' << csv_escape(log.phase) << ','
            << format_double(log.seconds) << ',' << log.peak_aux_bytes << '\n';
}

void write_eval_csv(const std::string& path, const EvalResult& eval,
                    const std::vector<Label>& label_set, std::uint64_t config_hash) {
    std::ofstream out = open_out(path);
    out << "config_hash,metric,true_label,predicted_label,value\n";
    out << hash_hex(config_hash) << ",accuracy,,," << format_double(eval.accuracy) << '\n';
    for (std::size_t t = 0; t < label_set.size(); ++t)
        for (std::size_t p = 0; p < label_set.size(); ++p)
            out << hash_hex(config_hash) << ",confusion," << csv_escape(label_set[t]) << ','
                << csv_escape(label_set[p]) << ',' << format_double(eval.confusion(t, p)) << '\n';
}

void write_predictions_csv(const std::string& path, const EvalResult& eval,
                           const DenseDataset& data, std::uint64_t config_hash) {
    std::ofstream out = open_out(path);
    out << "config_hash,index,label,predicted\n";
    for (std::size_t i = 0; i < eval.predictions.size(); ++i)
        out << hash_hex(config_hash) << ',' << i << ',' << csv_escape(data.labels[i]) << ','
            << csv_escape(eval.predictions[i]) << '\n';
}

namespace {
const char* axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Dimension: return "dimension";
        case SweepAxis::FaultRate: return "fault_rate";
        case SweepAxis::InjectionDepth: return "injection_depth";
        case SweepAxis::ParamRatio: return "param_ratio";
        case SweepAxis::OnlineVsOffline: return "online_vs_offline";
    }
    return "?";
}
}  // namespace

void write_sweep_csv(const std::string& path, const SweepSpec& spec, const SweepResult& result,
                     std::uint64_t config_hash) {
    std::ofstream out = open_out(path);
    out << "config_hash,axis,value,repeat,metric,metric_value,seconds\n";
    for (const SweepRow& row : result.rows)
        out << hash_hex(config_hash) << ',' << axis_name(spec.axis) << ','
            << format_double(row.value) << ',' << row.repeat << ',' << csv_escape(row.metric) << ','
            << format_double(row.metric_value) << ',' << format_double(row.seconds) << '\n';
}

nlohmann::json sweep_summary_json(const SweepSpec& spec, const SweepResult& result,
                                  std::uint64_t config_hash) {
    std::map<std::pair<std::string, double>, std::vector<double>> groups;
    for (const SweepRow& row : result.rows) groups[{row.metric, row.value}].push_back(row.metric_value);

    nlohmann::json aggregates = nlohmann::json::array();
    for (const auto& [key, vals] : groups) {
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        double stddev = vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1)) : 0.0;
        aggregates.push_back({{"metric", key.first},
                              {"value", key.second},
                              {"mean", mean},
                              {"stddev", stddev},
                              {"count", vals.size()}});
    }
    return nlohmann::json{{"schema_version", 1},
                          {"config_hash", hash_hex(config_hash)},
                          {"axis", axis_name(spec.axis)},
                          {"task", spec.task},
                          {"repeats", spec.repeats},
                          {"aggregates", aggregates}};
}

nlohmann::json plot_description_json(const SweepSpec& spec, const SweepResult& result,
                                     std::uint64_t config_hash) {
    std::map<std::string, nlohmann::json> series;
    for (const SweepRow& row : result.rows) {
        if (!series.count(row.metric))
            series[row.metric] = nlohmann::json{{"name", row.metric},
                                                {"points", nlohmann::json::array()}};
        series[row.metric]["points"].push_back(
            {{"x", row.value}, {"y", row.metric_value}, {"repeat", row.repeat}});
    }
    nlohmann::json series_array = nlohmann::json::array();
    for (auto& [name, s] : series) series_array.push_back(std::move(s));
    return nlohmann::json{{"schema_version", 1},
                          {"config_hash", hash_hex(config_hash)},
                          {"title", std::string("sweep over ") + axis_name(spec.axis)},
                          {"x_axis", {{"label", axis_name(spec.axis)}}},
                          {"y_axis", {{"label", "metric value"}}},
                          {"series", series_array}};
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_summary_txt(const std::string& path, const nlohmann::json& resolved,
                       const std::vector<PhaseLog>& logs, double final_accuracy,
                       const std::vector<std::string>& warnings, std::uint64_t config_hash) {
    std::ofstream out = open_out(path);
    out << "config_hash: " << hash_hex(config_hash) << "\n";
    out << "dataset: " << resolved["dataset"]["source"].get<std::string>() << "\n";
    for (const PhaseLog& log : logs) {
        out << log.phase << ": " << log.rows.size() << " epochs";
        if (!log.rows.empty())
            out << ", final train acc " << format_double(log.rows.back().train_accuracy)
                << ", final test acc " << format_double(log.rows.back().test_accuracy);
        out << " (" << format_double(log.seconds) << " s)\n";
        for (const std::string& w : log.warnings) out << "  warning: " << w << "\n";
    }
    for (const std::string& w : warnings) out << "warning: " << w << "\n";
    out << "final test accuracy: " << format_double(final_accuracy) << "\n";
}

OutputTracker::OutputTracker(std::string out_dir) : out_dir_(std::move(out_dir)) {
    fs::create_directories(out_dir_);
}

std::string OutputTracker::path(const std::string& filename) {
    std::string full = (fs::path(out_dir_) / filename).string();
    written_.push_back(full);
    return full;
}

void OutputTracker::quarantine() {
    fs::path qdir = fs::path(out_dir_) / "quarantine";
    std::error_code ec;
    fs::create_directories(qdir, ec);
    for (const std::string& file : written_) {
        fs::path src(file);
        if (fs::exists(src, ec)) fs::rename(src, qdir / src.filename(), ec);
    }
    written_.clear();
}

}  // namespace spikehd
