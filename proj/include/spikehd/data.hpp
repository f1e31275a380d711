#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikehd/lif.hpp"
#include "spikehd/memory.hpp"

namespace spikehd {

struct DenseDataset {
    std::vector<std::vector<double>> samples;  // values in [0, 1]
    std::vector<Label> labels;                 // one per sample
    std::vector<Label> label_set;              // declared label set, ordered
    std::string name;
    std::string split;

    std::size_t size() const { return samples.size(); }
    std::size_t feature_dim() const { return samples.empty() ? 0 : samples.front().size(); }
};

struct RateCodeConfig {
    std::size_t steps = 100;
    double max_rate = 1.0;  // per-step firing probability at intensity 1
    std::uint64_t seed = 0;
};

// Bernoulli rate coding: events[t][j] fires with probability value_j * max_rate,
// independently across steps and channels, deterministic per (seed, sample_index).
SpikeTrain rate_encode(const std::vector<double>& sample, const RateCodeConfig& cfg,
                       std::uint64_t sample_index);

// IDX containers (big-endian magic + dimensions header, as used by the
// classic digit datasets).
DenseDataset load_idx(const std::string& images_path, const std::string& labels_path);
std::vector<std::vector<double>> load_idx_images(const std::string& path);
void save_idx_images(const std::string& path, const std::vector<std::vector<double>>& images,
                     std::size_t rows, std::size_t cols);
void save_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

// Per-column min-max scaling parameters, recorded from a training split so a
// test split can reuse them.
struct CsvScaling {
    std::vector<double> min;
    std::vector<double> range;  // max - min; zero-range columns scale to 0
};

struct CsvLoadResult {
    DenseDataset dataset;
    CsvScaling scaling;
};

CsvLoadResult load_csv(const std::string& path, const std::string& label_column);
DenseDataset load_csv_with(const std::string& path, const std::string& label_column,
                           const CsvScaling& scaling);

// Gaussian blobs: class means in [0.2, 0.8]^dim, samples clamped to [0, 1].
DenseDataset synth_blobs(std::size_t classes, std::size_t dim, std::size_t per_class,
                         double spread, std::uint64_t seed);

// Procedural digit-like glyph images (10 classes), rendered on a side x side
// grid with random shift, intensity jitter and pixel noise. Stands in for
// file-based digit data in self-contained runs.
DenseDataset synth_digits(std::size_t count, std::size_t side, double noise, std::uint64_t seed);

// Block-mean pooling of square images; factor must divide the side length.
DenseDataset downscale(const DenseDataset& dataset, std::size_t factor);

// Bit-packed spike-train container (versioned header; bits row-major by time).
void save_spike_train(const std::string& path, const SpikeTrain& train);
SpikeTrain load_spike_train(const std::string& path);

}  // namespace spikehd
