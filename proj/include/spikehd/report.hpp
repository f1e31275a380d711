#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikehd/bench.hpp"
#include "spikehd/pipeline.hpp"

namespace spikehd {

// Every output file carries the resolved-config hash so artifacts from
// different runs cannot be mixed silently. Metric CSVs contain no wall-clock
// fields, so seeded reruns reproduce them byte for byte; timings live in
// their own file.

std::string csv_escape(const std::string& s);
std::string format_double(double v);

void write_metrics_csv(const std::string& path, const std::vector<PhaseLog>& logs,
                       std::uint64_t config_hash);
void write_timing_csv(const std::string& path, const std::vector<PhaseLog>& logs,
                      std::uint64_t config_hash);
void write_eval_csv(const std::string& path, const EvalResult& eval,
                    const std::vector<Label>& label_set, std::uint64_t config_hash);
void write_predictions_csv(const std::string& path, const EvalResult& eval,
                           const DenseDataset& data, std::uint64_t config_hash);
void write_sweep_csv(const std::string& path, const SweepSpec& spec, const SweepResult& result,
                     std::uint64_t config_hash);

// Per-(value, metric) mean and sample standard deviation across repeats.
nlohmann::json sweep_summary_json(const SweepSpec& spec, const SweepResult& result,
                                  std::uint64_t config_hash);

// Plot description consumed by external renderers: one series per metric,
// one point per sweep row.
nlohmann::json plot_description_json(const SweepSpec& spec, const SweepResult& result,
                                     std::uint64_t config_hash);

void write_json(const std::string& path, const nlohmann::json& j);

void write_summary_txt(const std::string& path, const nlohmann::json& resolved,
                       const std::vector<PhaseLog>& logs, double final_accuracy,
                       const std::vector<std::string>& warnings, std::uint64_t config_hash);

// Tracks files written by a command; on failure they are swept into a
// quarantine subdirectory so partial outputs are never mistaken for results.
class OutputTracker {
public:
    explicit OutputTracker(std::string out_dir);
    std::string path(const std::string& filename);
    void quarantine();
    const std::string& dir() const { return out_dir_; }

private:
    std::string out_dir_;
    std::vector<std::string> written_;
};

}  // namespace spikehd
