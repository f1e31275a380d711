#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "spikehd/data.hpp"
#include "spikehd/rng.hpp"

using namespace spikehd;

namespace {
std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("rate coding extremes and the law of large numbers") {
    RateCodeConfig cfg;
    cfg.steps = 200;
    cfg.seed = 9;

    SpikeTrain silent = rate_encode({0.0, 0.0}, cfg, 0);
    for (auto e : silent.events) CHECK(e == 0);

    SpikeTrain constant = rate_encode({1.0}, cfg, 0);
    for (auto e : constant.events) CHECK(e == 1);

    RateCodeConfig lln;
    lln.steps = 10000;
    lln.seed = 10;
    SpikeTrain half = rate_encode({0.5}, lln, 3);
    double rate = 0.0;
    for (auto e : half.events) rate += e;
    rate /= 10000.0;
    CHECK(std::abs(rate - 0.5) <= 0.02);

    CHECK_THROWS_AS(rate_encode({1.5}, cfg, 0), std::invalid_argument);
    CHECK_THROWS_AS(rate_encode({-0.1}, cfg, 0), std::invalid_argument);
}

TEST_CASE("rate coding is deterministic per (seed, sample index)") {
    RateCodeConfig cfg;
    cfg.steps = 50;
    cfg.seed = 77;
    std::vector<double> sample{0.3, 0.8, 0.1};
    CHECK(rate_encode(sample, cfg, 4).events == rate_encode(sample, cfg, 4).events);
    CHECK(rate_encode(sample, cfg, 4).events != rate_encode(sample, cfg, 5).events);
    RateCodeConfig other = cfg;
    other.seed = 78;
    CHECK(rate_encode(sample, cfg, 4).events != rate_encode(sample, other, 4).events);
}

TEST_CASE("IDX image bytes scale to [0,1] exactly") {
    std::string path = temp_path("spikehd_idx_small");
    {
        std::ofstream out(path, std::ios::binary);
        const unsigned char header[16] = {0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2};
        out.write(reinterpret_cast<const char*>(header), 16);
        const unsigned char pixels[4] = {0, 255, 128, 64};
        out.write(reinterpret_cast<const char*>(pixels), 4);
    }
    auto images = load_idx_images(path);
    REQUIRE(images.size() == 1);
    CHECK(images[0][0] == 0.0);
    CHECK(images[0][1] == 1.0);
    CHECK(images[0][2] == doctest::Approx(128.0 / 255.0));
    CHECK(images[0][3] == doctest::Approx(64.0 / 255.0));
    std::filesystem::remove(path);
}

TEST_CASE("IDX loader names the missing byte count on truncation") {
    std::string path = temp_path("spikehd_idx_trunc");
    {
        std::ofstream out(path, std::ios::binary);
        const unsigned char header[16] = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2};
        out.write(reinterpret_cast<const char*>(header), 16);
        out.put(static_cast<char>(5));  // 1 of 8 payload bytes
    }
    try {
        load_idx_images(path);
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("7 bytes") != std::string::npos);
    }
    std::filesystem::remove(path);

    std::string bad_magic = temp_path("spikehd_idx_badmagic");
    {
        std::ofstream out(bad_magic, std::ios::binary);
        const unsigned char header[16] = {9, 9, 9, 9, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1};
        out.write(reinterpret_cast<const char*>(header), 16);
    }
    CHECK_THROWS_AS(load_idx_images(bad_magic), std::runtime_error);
    std::filesystem::remove(bad_magic);
}

TEST_CASE("IDX write-then-read of a random dataset is the identity") {
    SplitMix64 rng(15);
    std::vector<std::vector<double>> images(7, std::vector<double>(6 * 6));
    std::vector<std::uint8_t> labels(7);
    for (auto& img : images)
        for (double& v : img) v = static_cast<double>(rng.below(256)) / 255.0;
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng.below(10));

    std::string ipath = temp_path("spikehd_idx_rt_images");
    std::string lpath = temp_path("spikehd_idx_rt_labels");
    save_idx_images(ipath, images, 6, 6);
    save_idx_labels(lpath, labels);

    DenseDataset ds = load_idx(ipath, lpath);
    REQUIRE(ds.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(ds.labels[i] == std::to_string(labels[i]));
        for (std::size_t p = 0; p < 36; ++p)
            CHECK(ds.samples[i][p] == doctest::Approx(images[i][p]).epsilon(1e-12));
    }
    std::filesystem::remove(ipath);
    std::filesystem::remove(lpath);
}

TEST_CASE("CSV min-max scaling, zero-range rule, and split reuse") {
    std::string train_path = temp_path("spikehd_train.csv");
    {
        std::ofstream out(train_path);
        out << "a,b,constant,label\n";
        out << "1.0,10,5,x\n";
        out << "3.0,30,5,y\n";
    }
    CsvLoadResult loaded = load_csv(train_path, "label");
    REQUIRE(loaded.dataset.size() == 2);
    CHECK(loaded.dataset.samples[0] == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(loaded.dataset.samples[1] == std::vector<double>{1.0, 1.0, 0.0});
    CHECK(loaded.dataset.label_set == std::vector<Label>{"x", "y"});

    std::string test_path = temp_path("spikehd_test.csv");
    {
        std::ofstream out(test_path);
        out << "a,b,constant,label\n";
        out << "2.0,20,5,x\n";   // midpoint of the train ranges
        out << "5.0,40,9,y\n";   // beyond the train max: clamped
    }
    DenseDataset test = load_csv_with(test_path, "label", loaded.scaling);
    CHECK(test.samples[0][0] == doctest::Approx(0.5));
    CHECK(test.samples[0][1] == doctest::Approx(0.5));
    CHECK(test.samples[0][2] == 0.0);
    CHECK(test.samples[1][0] == 1.0);

    std::filesystem::remove(train_path);
    std::filesystem::remove(test_path);
}

TEST_CASE("CSV loader rejects ragged and non-numeric input with diagnostics") {
    std::string ragged = temp_path("spikehd_ragged.csv");
    {
        std::ofstream out(ragged);
        out << "a,b,label\n1,2,x\n1,x\n";
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(load_csv(ragged, "label")),
                         doctest::Contains("ragged"), std::runtime_error);
    std::filesystem::remove(ragged);

    std::string alpha = temp_path("spikehd_alpha.csv");
    {
        std::ofstream out(alpha);
        out << "a,label\noops,x\n";
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(load_csv(alpha, "label")),
                         doctest::Contains("non-numeric"), std::runtime_error);
    std::filesystem::remove(alpha);

    CHECK_THROWS_WITH_AS(static_cast<void>(load_csv(alpha, "label")),
                         doctest::Contains("cannot open"), std::runtime_error);
}

TEST_CASE("blobs: zero spread collapses to the class means") {
    DenseDataset ds = synth_blobs(3, 8, 4, 0.0, 5);
    REQUIRE(ds.size() == 12);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t s = 1; s < 4; ++s) CHECK(ds.samples[c * 4 + s] == ds.samples[c * 4]);
    for (const auto& sample : ds.samples)
        for (double v : sample) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
}

TEST_CASE("blobs: nearest-centroid classifies a small-spread task perfectly") {
    DenseDataset ds = synth_blobs(2, 16, 50, 0.02, 7);
    std::vector<std::vector<double>> centroids(2, std::vector<double>(16, 0.0));
    std::vector<std::size_t> counts(2, 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::size_t c = ds.labels[i] == "0" ? 0 : 1;
        for (std::size_t j = 0; j < 16; ++j) centroids[c][j] += ds.samples[i][j];
        counts[c] += 1;
    }
    for (std::size_t c = 0; c < 2; ++c)
        for (double& v : centroids[c]) v /= static_cast<double>(counts[c]);

    for (std::size_t i = 0; i < ds.size(); ++i) {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t j = 0; j < 16; ++j) {
            d0 += (ds.samples[i][j] - centroids[0][j]) * (ds.samples[i][j] - centroids[0][j]);
            d1 += (ds.samples[i][j] - centroids[1][j]) * (ds.samples[i][j] - centroids[1][j]);
        }
        CHECK(ds.labels[i] == (d0 < d1 ? "0" : "1"));
    }

    CHECK(synth_blobs(2, 16, 5, 0.1, 9).samples == synth_blobs(2, 16, 5, 0.1, 9).samples);
}

TEST_CASE("downscale block means") {
    DenseDataset ds;
    ds.samples = {{0.0, 1.0, 1.0, 0.0}};
    ds.labels = {"0"};
    ds.label_set = {"0"};

    DenseDataset same = downscale(ds, 1);
    CHECK(same.samples == ds.samples);

    DenseDataset half = downscale(ds, 2);
    CHECK(half.samples[0] == std::vector<double>{0.5});

    // 28x28 -> 14x14 against brute force
    DenseDataset img;
    SplitMix64 rng(33);
    img.samples.push_back({});
    img.labels = {"0"};
    img.label_set = {"0"};
    img.samples[0].resize(28 * 28);
    for (double& v : img.samples[0]) v = rng.uniform01();
    DenseDataset small = downscale(img, 2);
    REQUIRE(small.samples[0].size() == 14 * 14);
    for (std::size_t y = 0; y < 14; ++y)
        for (std::size_t x = 0; x < 14; ++x) {
            double acc = 0.0;
            for (std::size_t dy = 0; dy < 2; ++dy)
                for (std::size_t dx = 0; dx < 2; ++dx)
                    acc += img.samples[0][(2 * y + dy) * 28 + (2 * x + dx)];
            CHECK(small.samples[0][y * 14 + x] == doctest::Approx(acc / 4.0).epsilon(1e-12));
        }

    DenseDataset bad;
    bad.samples = {{0.0, 1.0, 0.5}};  // not square
    bad.labels = {"0"};
    CHECK_THROWS_AS(downscale(bad, 1 + 1), std::invalid_argument);
    CHECK_THROWS_AS(downscale(ds, 3), std::invalid_argument);  // 2 % 3 != 0
}

TEST_CASE("synth digits produce ten classes of plausible images") {
    DenseDataset ds = synth_digits(100, 28, 0.05, 3);
    CHECK(ds.label_set.size() == 10);
    CHECK(ds.size() == 100);
    for (const auto& s : ds.samples) {
        CHECK(s.size() == 28 * 28);
        double mass = 0.0;
        for (double v : s) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            mass += v;
        }
        CHECK(mass > 10.0);  // glyphs are not blank
    }
    CHECK(synth_digits(20, 28, 0.05, 4).samples == synth_digits(20, 28, 0.05, 4).samples);
    CHECK(synth_digits(20, 28, 0.05, 4).samples != synth_digits(20, 28, 0.05, 5).samples);
}

TEST_CASE("spike train container round-trips and detects truncation") {
    SplitMix64 rng(21);
    SpikeTrain train(37, 13);  // deliberately not byte-aligned
    for (auto& e : train.events) e = rng.bernoulli(0.3) ? 1 : 0;

    std::string path = temp_path("spikehd_train.spikes");
    save_spike_train(path, train);
    SpikeTrain back = load_spike_train(path);
    CHECK(back.steps == train.steps);
    CHECK(back.channels == train.channels);
    CHECK(back.events == train.events);

    // truncate the payload
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 10);
    CHECK_THROWS_WITH_AS(static_cast<void>(load_spike_train(path)), doctest::Contains("truncated"),
                         std::runtime_error);
    std::filesystem::remove(path);
}
