#include "spikehd/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spikehd/rng.hpp"

namespace spikehd {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("IDX parse error: truncated " + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
constexpr std::uint64_t kMaxIdxBytes = 1ULL << 31;

void check_range01(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string(what) + ": value outside [0,1]");
    }
}

// 7-segment-style digit glyphs on a 4x7 cell grid; distinct enough per class
// and cheap to render at any resolution.
constexpr std::uint8_t kSegmentsByDigit[10] = {
    // bit order: top, top-left, top-right, middle, bottom-left, bottom-right, bottom
    0b1110111,  // 0
    0b0010010,  // 1
    0b1011101,  // 2
    0b1011011,  // 3
    0b0111010,  // 4
    0b1101011,  // 5
    0b1101111,  // 6
    0b1010010,  // 7
    0b1111111,  // 8
    0b1111011,  // 9
};

}  // namespace

SpikeTrain rate_encode(const std::vector<double>& sample, const RateCodeConfig& cfg,
                       std::uint64_t sample_index) {
    if (cfg.steps < 1) throw std::invalid_argument("rate_encode: steps must be >= 1");
    if (!(cfg.max_rate > 0.0 && cfg.max_rate <= 1.0))
        throw std::invalid_argument("rate_encode: max_rate outside (0,1]");
    check_range01(sample, "rate_encode");

    SpikeTrain train(cfg.steps, sample.size());
    SplitMix64 rng(derive_seed(cfg.seed, "ratecode.sample", sample_index));
    for (std::size_t t = 0; t < cfg.steps; ++t) {
        std::uint8_t* row = train.events.data() + t * train.channels;
        for (std::size_t j = 0; j < sample.size(); ++j)
            row[j] = rng.bernoulli(sample[j] * cfg.max_rate) ? 1 : 0;
    }
    return train;
}

std::vector<std::vector<double>> load_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open IDX file: " + path);
    std::uint32_t magic = read_be32(in, "magic");
    if (magic != kIdxImagesMagic)
        throw std::runtime_error("IDX parse error: bad magic in " + path);
    std::uint64_t count = read_be32(in, "count");
    std::uint64_t rows = read_be32(in, "rows");
    std::uint64_t cols = read_be32(in, "cols");
    std::uint64_t total = count * rows * cols;
    if (rows == 0 || cols == 0 || total > kMaxIdxBytes)
        throw std::runtime_error("IDX parse error: dimension overflow in " + path);

    std::vector<unsigned char> raw(total);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(total));
    std::uint64_t got = static_cast<std::uint64_t>(in.gcount());
    if (got != total)
        throw std::runtime_error("IDX parse error: truncated payload in " + path + " (missing " +
                                 std::to_string(total - got) + " bytes)");

    std::vector<std::vector<double>> images(count, std::vector<double>(rows * cols));
    for (std::uint64_t i = 0; i < count; ++i)
        for (std::uint64_t p = 0; p < rows * cols; ++p)
            images[i][p] = raw[i * rows * cols + p] / 255.0;
    return images;
}

DenseDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    DenseDataset ds;
    ds.samples = load_idx_images(images_path);
    ds.name = images_path;

    std::ifstream in(labels_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open IDX file: " + labels_path);
    std::uint32_t magic = read_be32(in, "magic");
    if (magic != kIdxLabelsMagic)
        throw std::runtime_error("IDX parse error: bad magic in " + labels_path);
    std::uint64_t count = read_be32(in, "count");
    if (count != ds.samples.size())
        throw std::runtime_error("IDX parse error: image/label count mismatch");
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::uint64_t>(in.gcount()) != count)
        throw std::runtime_error("IDX parse error: truncated payload in " + labels_path +
                                 " (missing " + std::to_string(count - in.gcount()) + " bytes)");

    std::uint8_t max_label = 0;
    for (unsigned char l : raw) max_label = std::max<std::uint8_t>(max_label, l);
    for (std::uint8_t l = 0; l <= max_label; ++l) ds.label_set.push_back(std::to_string(l));
    ds.labels.reserve(count);
    for (unsigned char l : raw) ds.labels.push_back(std::to_string(l));
    return ds;
}

void save_idx_images(const std::string& path, const std::vector<std::vector<double>>& images,
                     std::size_t rows, std::size_t cols) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write IDX file: " + path);
    write_be32(out, kIdxImagesMagic);
    write_be32(out, static_cast<std::uint32_t>(images.size()));
    write_be32(out, static_cast<std::uint32_t>(rows));
    write_be32(out, static_cast<std::uint32_t>(cols));
    for (const auto& img : images) {
        if (img.size() != rows * cols) throw std::invalid_argument("save_idx_images: shape mismatch");
        for (double v : img) {
            auto byte = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
            out.put(static_cast<char>(byte));
        }
    }
}

void save_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write IDX file: " + path);
    write_be32(out, kIdxLabelsMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (std::uint8_t l : labels) out.put(static_cast<char>(l));
}

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path);
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (quoted) {
                if (c == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        cell.push_back('"');
                        ++i;
                    } else {
                        quoted = false;
                    }
                } else {
                    cell.push_back(c);
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                cells.push_back(cell);
                cell.clear();
            } else {
                cell.push_back(c);
            }
        }
        cells.push_back(cell);
        if (table.header.empty()) {
            table.header = cells;
        } else {
            if (cells.size() != table.header.size())
                throw std::runtime_error("CSV parse error: ragged row at line " +
                                         std::to_string(line_no) + " in " + path);
            table.rows.push_back(cells);
        }
    }
    if (table.header.empty()) throw std::runtime_error("CSV parse error: empty file " + path);
    return table;
}

double parse_number(const std::string& s, std::size_t line, const std::string& col) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("CSV parse error: non-numeric cell '" + s + "' at row " +
                                 std::to_string(line) + ", column '" + col + "'");
    }
}

DenseDataset csv_to_dataset(const CsvTable& table, const std::string& label_column,
                            const CsvScaling* given, CsvScaling* recorded,
                            const std::string& name) {
    std::size_t label_idx = table.header.size();
    for (std::size_t i = 0; i < table.header.size(); ++i)
        if (table.header[i] == label_column) label_idx = i;
    if (label_idx == table.header.size())
        throw std::runtime_error("CSV: label column '" + label_column + "' not found");

    std::size_t n_features = table.header.size() - 1;
    std::vector<std::vector<double>> raw(table.rows.size(), std::vector<double>(n_features));
    DenseDataset ds;
    ds.name = name;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::size_t f = 0;
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c == label_idx) continue;
            raw[r][f++] = parse_number(table.rows[r][c], r + 2, table.header[c]);
        }
        ds.labels.push_back(table.rows[r][label_idx]);
    }

    CsvScaling scaling;
    if (given != nullptr) {
        if (given->min.size() != n_features)
            throw std::invalid_argument("CSV: scaling parameter count mismatch");
        scaling = *given;
    } else {
        scaling.min.assign(n_features, 0.0);
        scaling.range.assign(n_features, 0.0);
        for (std::size_t f = 0; f < n_features; ++f) {
            double lo = raw.empty() ? 0.0 : raw[0][f];
            double hi = lo;
            for (const auto& row : raw) {
                lo = std::min(lo, row[f]);
                hi = std::max(hi, row[f]);
            }
            scaling.min[f] = lo;
            scaling.range[f] = hi - lo;
        }
    }

    ds.samples.resize(raw.size());
    for (std::size_t r = 0; r < raw.size(); ++r) {
        ds.samples[r].resize(n_features);
        for (std::size_t f = 0; f < n_features; ++f) {
            double v = scaling.range[f] == 0.0 ? 0.0 : (raw[r][f] - scaling.min[f]) / scaling.range[f];
            ds.samples[r][f] = std::clamp(v, 0.0, 1.0);
        }
    }

    std::vector<Label> uniq = ds.labels;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    ds.label_set = uniq;
    if (recorded != nullptr) *recorded = scaling;
    return ds;
}

}  // namespace

CsvLoadResult load_csv(const std::string& path, const std::string& label_column) {
    CsvTable table = read_csv(path);
    CsvLoadResult out;
    out.dataset = csv_to_dataset(table, label_column, nullptr, &out.scaling, path);
    return out;
}

DenseDataset load_csv_with(const std::string& path, const std::string& label_column,
                           const CsvScaling& scaling) {
    CsvTable table = read_csv(path);
    return csv_to_dataset(table, label_column, &scaling, nullptr, path);
}

DenseDataset synth_blobs(std::size_t classes, std::size_t dim, std::size_t per_class, double spread,
                         std::uint64_t seed) {
    if (classes < 1 || dim < 1 || per_class < 1)
        throw std::invalid_argument("synth_blobs: counts must be >= 1");
    DenseDataset ds;
    ds.name = "synth_blobs";
    SplitMix64 mean_rng(derive_seed(seed, "blobs.means"));
    std::vector<std::vector<double>> means(classes, std::vector<double>(dim));
    for (auto& m : means)
        for (double& v : m) v = mean_rng.uniform(0.2, 0.8);

    for (std::size_t c = 0; c < classes; ++c) ds.label_set.push_back(std::to_string(c));
    SplitMix64 rng(derive_seed(seed, "blobs.samples"));
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t s = 0; s < per_class; ++s) {
            std::vector<double> x(dim);
            for (std::size_t j = 0; j < dim; ++j)
                x[j] = std::clamp(means[c][j] + spread * rng.normal(), 0.0, 1.0);
            ds.samples.push_back(std::move(x));
            ds.labels.push_back(ds.label_set[c]);
        }
    }
    return ds;
}

DenseDataset synth_digits(std::size_t count, std::size_t side, double noise, std::uint64_t seed) {
    if (side < 8) throw std::invalid_argument("synth_digits: side must be >= 8");
    DenseDataset ds;
    ds.name = "synth_digits";
    for (int d = 0; d < 10; ++d) ds.label_set.push_back(std::to_string(d));

    // Segment geometry on a unit square: three horizontal bars and four
    // vertical bars, rendered with a soft edge.
    struct Seg {
        double x0, y0, x1, y1;
    };
    const Seg segs[7] = {
        {0.2, 0.08, 0.8, 0.18},  // top
        {0.14, 0.12, 0.3, 0.5},  // top-left
        {0.7, 0.12, 0.86, 0.5},  // top-right
        {0.2, 0.45, 0.8, 0.55},  // middle
        {0.14, 0.5, 0.3, 0.88},  // bottom-left
        {0.7, 0.5, 0.86, 0.88},  // bottom-right
        {0.2, 0.82, 0.8, 0.92},  // bottom
    };

    SplitMix64 rng(derive_seed(seed, "digits"));
    double cell = 1.0 / static_cast<double>(side);
    for (std::size_t i = 0; i < count; ++i) {
        int digit = static_cast<int>(i % 10);
        std::uint8_t mask = kSegmentsByDigit[digit];
        double dx = rng.uniform(-0.08, 0.08);
        double dy = rng.uniform(-0.08, 0.08);
        double gain = rng.uniform(0.75, 1.0);

        std::vector<double> img(side * side, 0.0);
        for (std::size_t py = 0; py < side; ++py) {
            for (std::size_t px = 0; px < side; ++px) {
                double cx = (px + 0.5) * cell - dx;
                double cy = (py + 0.5) * cell - dy;
                double v = 0.0;
                for (int s = 0; s < 7; ++s) {
                    if (!((mask >> (6 - s)) & 1)) continue;
                    if (cx >= segs[s].x0 && cx <= segs[s].x1 && cy >= segs[s].y0 && cy <= segs[s].y1)
                        v = 1.0;
                }
                v = v * gain + noise * rng.normal();
                img[py * side + px] = std::clamp(v, 0.0, 1.0);
            }
        }
        ds.samples.push_back(std::move(img));
        ds.labels.push_back(ds.label_set[digit]);
    }
    return ds;
}

DenseDataset downscale(const DenseDataset& dataset, std::size_t factor) {
    if (factor < 1) throw std::invalid_argument("downscale: factor must be >= 1");
    if (factor == 1) return dataset;
    DenseDataset out;
    out.labels = dataset.labels;
    out.label_set = dataset.label_set;
    out.name = dataset.name;
    out.split = dataset.split;
    out.samples.reserve(dataset.samples.size());
    for (const auto& img : dataset.samples) {
        auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(img.size()))));
        if (side * side != img.size())
            throw std::invalid_argument("downscale: samples are not square images");
        if (side % factor != 0)
            throw std::invalid_argument("downscale: factor does not divide image side");
        std::size_t out_side = side / factor;
        std::vector<double> small(out_side * out_side, 0.0);
        double inv = 1.0 / static_cast<double>(factor * factor);
        for (std::size_t oy = 0; oy < out_side; ++oy)
            for (std::size_t ox = 0; ox < out_side; ++ox) {
                double acc = 0.0;
                for (std::size_t fy = 0; fy < factor; ++fy)
                    for (std::size_t fx = 0; fx < factor; ++fx)
                        acc += img[(oy * factor + fy) * side + (ox * factor + fx)];
                small[oy * out_side + ox] = acc * inv;
            }
        out.samples.push_back(std::move(small));
    }
    return out;
}

namespace {
constexpr char kSpikeTrainMagic[4] = {'S', 'H', 'D', 'S'};
constexpr std::uint32_t kSpikeTrainVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}
void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}
std::uint32_t read_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error(std::string("spike train file: truncated ") + what);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}
std::uint64_t read_u64(std::istream& in, const char* what) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw std::runtime_error(std::string("spike train file: truncated ") + what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}
}  // namespace

void save_spike_train(const std::string& path, const SpikeTrain& train) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write spike train file: " + path);
    out.write(kSpikeTrainMagic, 4);
    write_u32(out, kSpikeTrainVersion);
    write_u64(out, train.steps);
    write_u64(out, train.channels);
    std::size_t bits = train.steps * train.channels;
    std::vector<std::uint8_t> packed((bits + 7) / 8, 0);
    for (std::size_t i = 0; i < bits; ++i)
        if (train.events[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    out.write(reinterpret_cast<const char*>(packed.data()),
              static_cast<std::streamsize>(packed.size()));
}

SpikeTrain load_spike_train(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open spike train file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kSpikeTrainMagic, 4) != 0)
        throw std::runtime_error("spike train file: bad magic in " + path);
    std::uint32_t version = read_u32(in, "version");
    if (version != kSpikeTrainVersion)
        throw std::runtime_error("spike train file: unsupported version " + std::to_string(version));
    std::uint64_t steps = read_u64(in, "steps");
    std::uint64_t channels = read_u64(in, "channels");
    std::uint64_t bits = steps * channels;
    if (bits > kMaxIdxBytes * 8) throw std::runtime_error("spike train file: dimension overflow");

    std::vector<std::uint8_t> packed((bits + 7) / 8);
    in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
    if (static_cast<std::uint64_t>(in.gcount()) != packed.size())
        throw std::runtime_error("spike train file: truncated payload (missing " +
                                 std::to_string(packed.size() - in.gcount()) + " bytes)");
    SpikeTrain train(steps, channels);
    for (std::uint64_t i = 0; i < bits; ++i)
        train.events[i] = (packed[i / 8] >> (i % 8)) & 1;
    return train;
}

}  // namespace spikehd
