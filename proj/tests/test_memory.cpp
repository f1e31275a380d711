#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spikehd/data.hpp"
#include "spikehd/kernels.hpp"
#include "spikehd/memory.hpp"
#include "spikehd/rng.hpp"

using namespace spikehd;

namespace {

Hypervector random_real(std::size_t dim, std::uint64_t seed) {
    Hypervector h;
    h.values.resize(dim);
    SplitMix64 rng(seed);
    for (double& v : h.values) v = rng.normal();
    return h;
}

std::vector<Label> digit_labels(std::size_t k) {
    std::vector<Label> labels;
    for (std::size_t i = 0; i < k; ++i) labels.push_back(std::to_string(i));
    return labels;
}

}  // namespace

TEST_CASE("init produces an all-zero memory and rejects duplicates") {
    ClassMemory m = ClassMemory::init(digit_labels(10), 4000);
    CHECK(m.num_classes() == 10);
    CHECK(m.dim() == 4000);
    for (double v : m.classes().data) CHECK(v == 0.0);

    ClassMemory tiny = ClassMemory::init({"x"}, 1);
    CHECK(tiny.classes().size() == 1);

    CHECK_THROWS_AS(ClassMemory::init({"a", "b", "a"}, 8), std::invalid_argument);
    CHECK_THROWS_AS(ClassMemory::init({}, 8), std::invalid_argument);
}

TEST_CASE("similarities: exact row match scores 1, zero rows score 0") {
    ClassMemory m = ClassMemory::init(digit_labels(3), 64);
    Hypervector h = random_real(64, 5);
    for (std::size_t j = 0; j < 64; ++j) m.classes_mut()(1, j) = h.values[j];

    std::vector<double> sims = m.similarities(h);
    CHECK(sims[0] == 0.0);
    CHECK(sims[1] == doctest::Approx(1.0));
    CHECK(sims[2] == 0.0);

    ClassMemory zeros = ClassMemory::init(digit_labels(4), 16);
    for (double s : zeros.similarities(random_real(16, 9))) CHECK(s == 0.0);

    CHECK_THROWS_AS(m.similarities(random_real(63, 1)), std::invalid_argument);
}

TEST_CASE("similarities match a per-row brute-force oracle") {
    ClassMemory m = ClassMemory::init(digit_labels(3), 32);
    SplitMix64 rng(31);
    for (double& v : m.classes_mut().data) v = rng.normal();
    Hypervector h = random_real(32, 77);

    std::vector<double> sims = m.similarities(h);
    for (std::size_t i = 0; i < 3; ++i) {
        double dot = 0.0, nc = 0.0, nh = 0.0;
        for (std::size_t j = 0; j < 32; ++j) {
            dot += m.classes()(i, j) * h.values[j];
            nc += m.classes()(i, j) * m.classes()(i, j);
            nh += h.values[j] * h.values[j];
        }
        CHECK(std::abs(sims[i] - dot / std::sqrt(nc * nh)) < 1e-12);
    }

    CHECK(m.similarities(h) == m.similarities_serial(h));
}

TEST_CASE("predict picks the argmax and breaks ties toward the lowest index") {
    ClassMemory m = ClassMemory::init({"first", "second"}, 16);
    Hypervector h = random_real(16, 3);
    for (std::size_t j = 0; j < 16; ++j) {
        m.classes_mut()(0, j) = h.values[j];
        m.classes_mut()(1, j) = -h.values[j];
    }
    CHECK(m.predict(h) == "first");

    // exact tie: identical rows
    for (std::size_t j = 0; j < 16; ++j) m.classes_mut()(1, j) = h.values[j];
    CHECK(m.predict(h) == "first");
}

TEST_CASE("predict agrees with a linear-scan oracle on random memories") {
    ClassMemory m = ClassMemory::init(digit_labels(10), 128);
    SplitMix64 rng(41);
    for (double& v : m.classes_mut().data) v = rng.normal();

    for (std::uint64_t q = 0; q < 100; ++q) {
        Hypervector h = random_real(128, 1000 + q);
        std::vector<double> sims = m.similarities(h);
        std::size_t best = 0;
        for (std::size_t i = 1; i < sims.size(); ++i)
            if (sims[i] > sims[best]) best = i;
        CHECK(m.predict(h) == std::to_string(best));
    }
}

TEST_CASE("predict is invariant under positive scaling of the query") {
    ClassMemory m = ClassMemory::init(digit_labels(5), 64);
    SplitMix64 rng(43);
    for (double& v : m.classes_mut().data) v = rng.normal();
    for (std::uint64_t q = 0; q < 20; ++q) {
        Hypervector h = random_real(64, 2000 + q);
        Hypervector scaled = h;
        for (double& v : scaled.values) v *= 37.5;
        CHECK(m.predict(h) == m.predict(scaled));
    }
}

TEST_CASE("update_single: aligned query makes a zero correct-match delta") {
    ClassMemory m = ClassMemory::init(digit_labels(2), 32);
    Hypervector h = random_real(32, 7);
    for (std::size_t j = 0; j < 32; ++j) m.classes_mut()(0, j) = 2.0 * h.values[j];
    Matrix before = m.classes();

    HdTrainConfig cfg;
    UpdateOutcome o = m.update_single(h, "0", cfg);
    CHECK(o.was_correct);
    CHECK(o.delta_true == doctest::Approx(0.0).epsilon(1e-12));
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(m.classes().data[i] == doctest::Approx(before.data[i]).epsilon(1e-12));
}

TEST_CASE("update_single cold start seeds the true class row with eta1 * h") {
    ClassMemory m = ClassMemory::init(digit_labels(4), 32);
    Hypervector h = random_real(32, 11);
    HdTrainConfig cfg;
    cfg.eta1 = 0.7;

    UpdateOutcome o = m.update_single(h, "2", cfg);
    CHECK_FALSE(o.was_correct);        // cold-start prediction lands on the first label
    CHECK(o.predicted == "0");
    CHECK(o.delta_wrong == 0.0);       // similarity gap is 0 on an all-zero memory
    for (std::size_t j = 0; j < 32; ++j) {
        CHECK(m.classes()(2, j) == doctest::Approx(0.7 * h.values[j]));
        CHECK(m.classes()(0, j) == 0.0);
    }
}

TEST_CASE("update_single: equal-similarity mispredict leaves the wrong row unchanged") {
    ClassMemory m = ClassMemory::init(digit_labels(2), 16);
    Hypervector h = random_real(16, 13);
    // Two identical rows: prediction ties to row 0; gap is exactly 0.
    for (std::size_t j = 0; j < 16; ++j) {
        m.classes_mut()(0, j) = h.values[j] + 0.5;
        m.classes_mut()(1, j) = h.values[j] + 0.5;
    }
    std::vector<double> row0_before(16);
    for (std::size_t j = 0; j < 16; ++j) row0_before[j] = m.classes()(0, j);

    HdTrainConfig cfg;
    UpdateOutcome o = m.update_single(h, "1", cfg);
    CHECK_FALSE(o.was_correct);
    CHECK(o.delta_wrong == doctest::Approx(0.0));
    for (std::size_t j = 0; j < 16; ++j) CHECK(m.classes()(0, j) == doctest::Approx(row0_before[j]));
}

TEST_CASE("update_single flags: skip_update_when_correct and boost_correct_on_error") {
    Hypervector h = random_real(24, 17);

    ClassMemory m = ClassMemory::init(digit_labels(2), 24);
    for (std::size_t j = 0; j < 24; ++j) m.classes_mut()(0, j) = 0.5 * h.values[j];
    HdTrainConfig skip;
    skip.skip_update_when_correct = true;
    Matrix before = m.classes();
    UpdateOutcome o = m.update_single(h, "0", skip);
    CHECK(o.was_correct);
    CHECK(m.classes().data == before.data);  // bit-identical, no update at all

    // boost adds the symmetric pull on a mispredict
    ClassMemory mb = ClassMemory::init(digit_labels(2), 24);
    for (std::size_t j = 0; j < 24; ++j) mb.classes_mut()(0, j) = h.values[j];  // wrong class matches
    ClassMemory plain = mb;
    HdTrainConfig boost;
    boost.boost_correct_on_error = true;
    HdTrainConfig noboost;
    UpdateOutcome ob = mb.update_single(h, "1", boost);
    UpdateOutcome op = plain.update_single(h, "1", noboost);
    CHECK_FALSE(ob.was_correct);
    CHECK(ob.delta_true > op.delta_true);  // the boost term added eta2 * gap

    CHECK_THROWS_AS(mb.update_single(h, "no-such-label", noboost), std::invalid_argument);
}

TEST_CASE("train_single_pass folds update_single over the stream") {
    ClassMemory m = ClassMemory::init(digit_labels(3), 16);
    HdTrainConfig cfg;

    std::vector<std::pair<Hypervector, Label>> empty;
    Matrix before = m.classes();
    TrainStats st = train_single_pass(m, empty, cfg);
    CHECK(st.seen == 0);
    CHECK(m.classes().data == before.data);

    Hypervector h = random_real(16, 19);
    std::vector<std::pair<Hypervector, Label>> one{{h, "1"}};
    ClassMemory via_fold = ClassMemory::init(digit_labels(3), 16);
    ClassMemory via_single = ClassMemory::init(digit_labels(3), 16);
    train_single_pass(via_fold, one, cfg);
    via_single.update_single(h, "1", cfg);
    CHECK(via_fold.classes().data == via_single.classes().data);
}

TEST_CASE("single pass on separable blobs reaches at least 95 percent") {
    const std::size_t classes = 10, n = 64, dim = 4000;
    DenseDataset data = synth_blobs(classes, n, 100, 0.1, 99);  // 1000 samples
    EncoderBasis basis = EncoderBasis::create(n, dim, Activation::Tanh, 7);

    std::vector<std::pair<Hypervector, Label>> stream;
    for (std::size_t i = 0; i < data.size(); ++i)
        stream.emplace_back(basis.encode(data.samples[i]), data.labels[i]);
    // interleave classes so the pass sees them in mixed order
    std::vector<std::pair<Hypervector, Label>> mixed;
    for (std::size_t s = 0; s < 100; ++s)
        for (std::size_t c = 0; c < classes; ++c) mixed.push_back(stream[c * 100 + s]);

    ClassMemory m = ClassMemory::init(data.label_set, dim);
    HdTrainConfig cfg;
    train_single_pass(m, mixed, cfg);

    std::size_t correct = 0;
    for (const auto& [h, label] : mixed)
        if (m.predict(h) == label) ++correct;
    CHECK(static_cast<double>(correct) / mixed.size() >= 0.95);
}

TEST_CASE("identical stream and seed reproduce the memory bit for bit") {
    DenseDataset data = synth_blobs(4, 16, 25, 0.15, 3);
    EncoderBasis basis = EncoderBasis::create(16, 256, Activation::Tanh, 5);
    std::vector<std::pair<Hypervector, Label>> stream;
    for (std::size_t i = 0; i < data.size(); ++i)
        stream.emplace_back(basis.encode(data.samples[i]), data.labels[i]);

    HdTrainConfig cfg;
    ClassMemory a = ClassMemory::init(data.label_set, 256);
    ClassMemory b = ClassMemory::init(data.label_set, 256);
    train_single_pass(a, stream, cfg);
    train_single_pass(b, stream, cfg);
    CHECK(a.classes().data == b.classes().data);
}

TEST_CASE("repeated identical samples keep the class row bounded") {
    ClassMemory m = ClassMemory::init(digit_labels(2), 64);
    Hypervector h = random_real(64, 23);
    HdTrainConfig cfg;
    double prev_norm = 0.0;
    for (int i = 0; i < 200; ++i) {
        m.update_single(h, "0", cfg);
        prev_norm = kernels::norm(m.classes().row(0), 64);
    }
    double h_norm = kernels::norm(h.values.data(), 64);
    CHECK(prev_norm <= 1.5 * h_norm);  // the (1 - sim) factor kills growth once aligned
}

TEST_CASE("loss and gradient behave at the extremes") {
    const std::size_t k = 4, dim = 32;
    ClassMemory m = ClassMemory::init(digit_labels(k), dim);
    Hypervector h = random_real(dim, 29);

    // Strongly aligned with its class, opposed to all others.
    for (std::size_t j = 0; j < dim; ++j) {
        m.classes_mut()(1, j) = h.values[j];
        m.classes_mut()(0, j) = -h.values[j];
        m.classes_mut()(2, j) = -h.values[j];
        m.classes_mut()(3, j) = -h.values[j];
    }
    LossGrad aligned = m.loss_and_gradient(h, "1");
    // Cosine scores live in [-1, 1], so the softmax saturates at a floor of
    // -log(e / (e + (k-1)/e)); the aligned case sits on that floor, far below
    // the maximum-entropy log(k).
    double floor = -std::log(std::exp(1.0) / (std::exp(1.0) + (k - 1) * std::exp(-1.0)));
    CHECK(aligned.loss == doctest::Approx(floor).epsilon(1e-6));
    CHECK(aligned.loss < 0.5 * std::log(static_cast<double>(k)));
    double gnorm = kernels::norm(aligned.grad_h.data(), dim);
    CHECK(gnorm < 0.1);

    // All-zero memory: uniform scores, maximum-entropy loss.
    ClassMemory uniform = ClassMemory::init(digit_labels(k), dim);
    LossGrad u = uniform.loss_and_gradient(h, "2");
    CHECK(u.loss == doctest::Approx(std::log(static_cast<double>(k))));

    CHECK_THROWS_AS(m.loss_and_gradient(h, "nope"), std::invalid_argument);
}

TEST_CASE("loss gradient matches central finite differences") {
    const std::size_t k = 5, dim = 80;
    ClassMemory m = ClassMemory::init(digit_labels(k), dim);
    SplitMix64 rng(53);
    for (double& v : m.classes_mut().data) v = rng.normal();

    Hypervector h = random_real(dim, 61);
    LossGrad lg = m.loss_and_gradient(h, "3");

    const double eps = 1e-6;
    for (std::size_t j = 0; j < dim; j += 7) {  // sample coordinates
        Hypervector lo = h, hi = h;
        lo.values[j] -= eps;
        hi.values[j] += eps;
        double fd = (m.loss_and_gradient(hi, "3").loss - m.loss_and_gradient(lo, "3").loss) / (2 * eps);
        CHECK(std::abs(lg.grad_h[j] - fd) / std::max(1e-9, std::abs(fd)) < 1e-4);
    }
}
