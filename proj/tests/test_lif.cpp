#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spikehd/lif.hpp"
#include "spikehd/rng.hpp"

using namespace spikehd;

namespace {

SpikeTrain random_train(std::size_t steps, std::size_t channels, double rate, std::uint64_t seed) {
    SpikeTrain t(steps, channels);
    SplitMix64 rng(seed);
    for (auto& e : t.events) e = rng.bernoulli(rate) ? 1 : 0;
    return t;
}

LifNetwork small_net(std::uint64_t seed = 5) {
    return LifNetwork::create(6, {8, 5}, 3, LifParams{}, seed);
}

}  // namespace

TEST_CASE("reset zeroes every trace and is idempotent; weights untouched") {
    LifNetwork net = small_net();
    std::uint64_t w0 = net.weight_hash();
    net.simulate(random_train(20, 6, 0.5, 1));
    bool any_nonzero = false;
    for (const LifState& s : net.state())
        for (double v : s.filtered) any_nonzero |= v != 0.0;
    CHECK(any_nonzero);

    net.reset();
    for (const LifState& s : net.state()) {
        for (double v : s.filtered) CHECK(v == 0.0);
        for (double v : s.synaptic) CHECK(v == 0.0);
        for (double v : s.refractory) CHECK(v == 0.0);
        for (double v : s.membrane) CHECK(v == 0.0);
    }
    auto snapshot = net.state();
    net.reset();
    for (std::size_t l = 0; l < snapshot.size(); ++l)
        CHECK(net.state()[l].membrane == snapshot[l].membrane);
    CHECK(net.weight_hash() == w0);
}

TEST_CASE("zero input keeps a positive-threshold network silent") {
    LifNetwork net = LifNetwork::create(4, {6, 6, 6}, 2, LifParams{}, 3);
    SpikeTrain quiet(50, 4);  // all zeros
    NetworkRecords rec = net.simulate(quiet);
    for (const LayerRecord& layer : rec.layers)
        for (double s : layer.spikes.data) CHECK(s == 0.0);
}

TEST_CASE("single always-on input neuron matches a scalar hand-simulation") {
    LifParams p;
    LifLayer layer = LifLayer::create(1, 1, 1, p, 7, 8);
    layer.weights(0, 0) = 0.05;  // strong positive drive after filtering

    LifState st;
    st.filtered.assign(1, 0.0);
    st.synaptic.assign(1, 0.0);
    st.refractory.assign(1, 0.0);
    st.membrane.assign(1, 0.0);

    // scalar reference recurrence
    double q = 0.0, pf = 0.0, r = 0.0;
    std::size_t ref_count = 0, got_count = 0;
    bool fired_eventually = false;
    for (int t = 0; t < 120; ++t) {
        StepResult out = step(layer, st, {1.0});
        q = p.alpha_syn * q + 1.0;
        pf = p.alpha_mem * pf + q;
        double u = layer.weights(0, 0) * pf - r;
        double s = u > p.theta ? 1.0 : 0.0;
        r = p.gamma_ref * r + p.theta * s;
        ref_count += s > 0.0 ? 1 : 0;
        got_count += out.spikes[0] > 0.0 ? 1 : 0;
        CHECK(out.spikes[0] == s);
        fired_eventually |= s > 0.0;
    }
    CHECK(fired_eventually);
    CHECK(ref_count == got_count);
}

TEST_CASE("a spike depresses the next potential by theta via the refractory trace") {
    LifParams p;
    LifLayer layer = LifLayer::create(1, 1, 1, p, 7, 8);
    layer.weights(0, 0) = 0.05;

    // reference with the spike at its first firing time suppressed
    double q = 0.0, pf = 0.0, r_real = 0.0, r_nospike = 0.0;
    bool suppressed = false;
    double u_real_next = 0.0, u_nospike_next = 0.0;
    int fire_t = -1;
    for (int t = 0; t < 120 && fire_t < 0; ++t) {
        q = p.alpha_syn * q + 1.0;
        pf = p.alpha_mem * pf + q;
        double u = layer.weights(0, 0) * pf - r_real;
        double s = u > p.theta ? 1.0 : 0.0;
        if (s > 0.0 && !suppressed) {
            suppressed = true;
            fire_t = t;
            r_nospike = p.gamma_ref * r_real;  // counterfactual: no spike recorded
            r_real = p.gamma_ref * r_real + p.theta;
            // next step, same input
            double q2 = p.alpha_syn * q + 1.0;
            double pf2 = p.alpha_mem * pf + q2;
            u_real_next = layer.weights(0, 0) * pf2 - r_real;
            u_nospike_next = layer.weights(0, 0) * pf2 - r_nospike;
        } else {
            r_real = p.gamma_ref * r_real + p.theta * s;
        }
    }
    REQUIRE(fire_t >= 0);
    CHECK(u_real_next < u_nospike_next);
    CHECK(u_nospike_next - u_real_next == doctest::Approx(p.theta));
}

TEST_CASE("simulate equals folding step over time for a single layer") {
    LifNetwork net = LifNetwork::create(6, {9}, 3, LifParams{}, 11);
    SpikeTrain train = random_train(40, 6, 0.4, 13);

    NetworkRecords rec = net.simulate(train);

    LifState st;
    st.filtered.assign(6, 0.0);
    st.synaptic.assign(6, 0.0);
    st.refractory.assign(9, 0.0);
    st.membrane.assign(9, 0.0);
    for (std::size_t t = 0; t < 40; ++t) {
        std::vector<double> input(6);
        for (std::size_t j = 0; j < 6; ++j) input[j] = train.at(t, j);
        StepResult out = step(net.layer(1), st, input);
        for (std::size_t i = 0; i < 9; ++i) {
            CHECK(rec.layers[0].spikes(t, i) == out.spikes[i]);
            CHECK(rec.layers[0].membrane(t, i) == st.membrane[i]);
        }
        for (std::size_t c = 0; c < 3; ++c) CHECK(rec.layers[0].readout(t, c) == out.readout[c]);
    }
}

TEST_CASE("T = 0 simulation yields empty records and leaves state untouched") {
    LifNetwork net = small_net();
    net.simulate(random_train(10, 6, 0.5, 17));
    auto before = net.state();
    NetworkRecords rec = net.simulate(SpikeTrain(0, 6));
    CHECK(rec.layers[0].steps() == 0);
    for (std::size_t l = 0; l < before.size(); ++l) {
        CHECK(net.state()[l].membrane == before[l].membrane);
        CHECK(net.state()[l].filtered == before[l].filtered);
    }
}

TEST_CASE("simulating two halves back to back equals one full pass") {
    LifNetwork net = small_net(23);
    SpikeTrain full = random_train(60, 6, 0.3, 29);

    net.reset();
    NetworkRecords whole = net.simulate(full);

    SpikeTrain first(30, 6), second(30, 6);
    std::copy(full.events.begin(), full.events.begin() + 30 * 6, first.events.begin());
    std::copy(full.events.begin() + 30 * 6, full.events.end(), second.events.begin());

    net.reset();
    NetworkRecords a = net.simulate(first);
    NetworkRecords b = net.simulate(second);  // no reset in between

    for (std::size_t l = 0; l < whole.layers.size(); ++l) {
        double count_whole = 0.0, count_halves = 0.0;
        for (double s : whole.layers[l].spikes.data) count_whole += s;
        for (double s : a.layers[l].spikes.data) count_halves += s;
        for (double s : b.layers[l].spikes.data) count_halves += s;
        CHECK(count_whole == count_halves);
        for (std::size_t t = 0; t < 30; ++t)
            for (std::size_t i = 0; i < whole.layers[l].spikes.cols; ++i) {
                CHECK(whole.layers[l].spikes(t, i) == a.layers[l].spikes(t, i));
                CHECK(whole.layers[l].spikes(t + 30, i) == b.layers[l].spikes(t, i));
            }
    }
}

TEST_CASE("layer_activity pools records and validates its inputs") {
    LifNetwork net = small_net(31);
    SpikeTrain train = random_train(25, 6, 0.5, 37);
    net.reset();
    NetworkRecords rec = net.simulate(train);

    FeatureVector rate = layer_activity(rec, 1, Pooling::MeanRate);
    FeatureVector pot = layer_activity(rec, 1, Pooling::MeanReadoutPotential);
    for (std::size_t i = 0; i < 8; ++i) {
        double s = 0.0, u = 0.0;
        for (std::size_t t = 0; t < 25; ++t) {
            s += rec.layers[0].spikes(t, i);
            u += rec.layers[0].membrane(t, i);
        }
        CHECK(rate[i] == doctest::Approx(s / 25.0).epsilon(1e-12));
        CHECK(pot[i] == doctest::Approx(u / 25.0).epsilon(1e-12));
        CHECK(rate[i] >= 0.0);
        CHECK(rate[i] <= 1.0);
    }

    NetworkRecords empty = net.simulate(SpikeTrain(0, 6));
    CHECK_THROWS_AS(layer_activity(empty, 1, Pooling::MeanRate), std::invalid_argument);
    CHECK_THROWS_AS(layer_activity(rec, 9, Pooling::MeanRate), std::invalid_argument);

    // silent layer pools to zero; an always-firing record pools to one
    NetworkRecords quiet = net.simulate(SpikeTrain(10, 6));
    net.reset();
    for (double v : layer_activity(quiet, 2, Pooling::MeanRate)) CHECK(v == 0.0);
}

TEST_CASE("record-free pooled activity matches the record path") {
    LifNetwork net = small_net(41);
    SpikeTrain train = random_train(30, 6, 0.4, 43);

    net.reset();
    NetworkRecords rec = net.simulate(train);
    FeatureVector via_records = layer_activity(rec, 2, Pooling::MeanRate);

    auto st = net.make_state();
    FeatureVector streamed = net.pooled_activity(train, st, 2, Pooling::MeanRate);
    CHECK(streamed == via_records);
}

TEST_CASE("dropout masks are seed-deterministic and only gate the readout") {
    LifParams p;
    p.dropout_p = 0.5;
    LifNetwork net = LifNetwork::create(6, {40}, 3, p, 51);
    SpikeTrain train = random_train(20, 6, 0.5, 53);

    SimOptions a;
    a.train = true;
    a.mask_seed = 99;
    net.reset();
    NetworkRecords ra = net.simulate(train, net.state(), a);
    net.reset();
    NetworkRecords rb = net.simulate(train, net.state(), a);
    CHECK(ra.layers[0].dropout_mask == rb.layers[0].dropout_mask);
    CHECK(ra.layers[0].readout.data == rb.layers[0].readout.data);

    SimOptions c;
    c.train = true;
    c.mask_seed = 100;
    net.reset();
    NetworkRecords rc = net.simulate(train, net.state(), c);
    CHECK(ra.layers[0].dropout_mask != rc.layers[0].dropout_mask);
    // spikes are identical; dropout only changes the readout path
    CHECK(ra.layers[0].spikes.data == rc.layers[0].spikes.data);
}

TEST_CASE("local_update with zero rate reports the loss and keeps weights") {
    LifNetwork net = small_net(61);
    SpikeTrain train = random_train(20, 6, 0.5, 67);
    net.reset();
    NetworkRecords rec = net.simulate(train);
    std::uint64_t before = net.weight_hash();
    double loss = local_update(net.layer_mut(1), {1.0, 0.0, 0.0}, rec.layers[0], 0.0);
    CHECK(loss > 0.0);
    CHECK(net.weight_hash() == before);
}

TEST_CASE("surrogate gradient matches finite differences on the relaxed model") {
    // 3-neuron layer, relaxed dynamics: graded spikes, no refractory feedback.
    LifParams p;
    p.dropout_p = 0.0;
    LifNetwork net = LifNetwork::create(4, {3}, 2, p, 71);
    SpikeTrain train = random_train(12, 4, 0.5, 73);
    std::vector<double> target{1.0, 0.0};

    SimOptions soft;
    soft.soft = true;

    auto loss_of = [&](LifNetwork& n) {
        auto st = n.make_state();
        NetworkRecords rec = n.simulate(train, st, soft);
        LayerGrad g = local_gradient(n.layer(1), target, rec.layers[0]);
        return g.loss;
    };

    auto st = net.make_state();
    NetworkRecords rec = net.simulate(train, st, soft);
    LayerGrad g = local_gradient(net.layer(1), target, rec.layers[0]);

    const double eps = 1e-6;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            LifNetwork lo = net, hi = net;
            lo.layer_mut(1).weights(i, j) -= eps;
            hi.layer_mut(1).weights(i, j) += eps;
            double fd = (loss_of(hi) - loss_of(lo)) / (2.0 * eps);
            CHECK(std::abs(g.dw(i, j) - fd) / std::max(1e-8, std::abs(fd)) < 1e-3);
        }
}

TEST_CASE("repeated relaxed updates on one sample reduce its loss monotonically") {
    LifParams p;
    p.dropout_p = 0.0;
    LifNetwork net = LifNetwork::create(4, {3}, 2, p, 83);
    SpikeTrain train = random_train(12, 4, 0.5, 89);
    std::vector<double> target{0.0, 1.0};
    SimOptions soft;
    soft.soft = true;

    double prev = 1e300;
    for (int it = 0; it < 50; ++it) {
        auto st = net.make_state();
        NetworkRecords rec = net.simulate(train, st, soft);
        double loss = local_update(net.layer_mut(1), target, rec.layers[0], 0.01);
        CHECK(loss <= prev + 1e-12);
        prev = loss;
    }
}

TEST_CASE("injected gradients stop at the requested depth") {
    LifNetwork net = LifNetwork::create(6, {8, 5, 7}, 3, LifParams{}, 91);
    SpikeTrain train = random_train(20, 6, 0.5, 97);
    net.reset();
    NetworkRecords rec = net.simulate(train);

    std::vector<double> zero(5, 0.0);
    std::uint64_t before = net.weight_hash();
    inject_feature_gradient(net, 2, zero, rec, 0.1);
    CHECK(net.weight_hash() == before);  // zero error, no change anywhere

    std::vector<double> grad(5, 0.3);
    Matrix w3_before = net.layer(3).weights;
    inject_feature_gradient(net, 2, grad, rec, 0.1);
    CHECK(net.weight_hash() != before);
    CHECK(net.layer(3).weights.data == w3_before.data);  // above the depth: untouched
}

TEST_CASE("single-layer injected gradient matches finite differences of pooled activity") {
    LifParams p;
    p.dropout_p = 0.0;
    LifNetwork net = LifNetwork::create(4, {3}, 2, p, 101);
    SpikeTrain train = random_train(12, 4, 0.5, 103);
    std::vector<double> g{0.7, -0.4, 0.2};
    SimOptions soft;
    soft.soft = true;

    // L(W) = g . mean_t soft_spikes(t)
    auto loss_of = [&](LifNetwork& n) {
        auto st = n.make_state();
        NetworkRecords rec = n.simulate(train, st, soft);
        FeatureVector act = layer_activity(rec, 1, Pooling::MeanRate);
        double acc = 0.0;
        for (std::size_t i = 0; i < 3; ++i) acc += g[i] * act[i];
        return acc;
    };

    auto st = net.make_state();
    NetworkRecords rec = net.simulate(train, st, soft);
    std::vector<LayerGrad> grads = injected_gradients(net, 1, g, rec);

    const double eps = 1e-6;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            LifNetwork lo = net, hi = net;
            lo.layer_mut(1).weights(i, j) -= eps;
            hi.layer_mut(1).weights(i, j) += eps;
            double fd = (loss_of(hi) - loss_of(lo)) / (2.0 * eps);
            CHECK(std::abs(grads[0].dw(i, j) - fd) / std::max(1e-8, std::abs(fd)) < 1e-3);
        }
}

TEST_CASE("readouts are bit-identical across training operations") {
    LifNetwork net = small_net(111);
    std::uint64_t ro = net.readout_hash();
    SpikeTrain train = random_train(20, 6, 0.5, 113);
    net.reset();
    NetworkRecords rec = net.simulate(train, net.state(), {});
    local_update(net.layer_mut(1), {1.0, 0.0, 0.0}, rec.layers[0], 0.05);
    inject_feature_gradient(net, 2, std::vector<double>(5, 0.2), rec, 0.05);
    CHECK(net.readout_hash() == ro);
}

TEST_CASE("simulate never changes weights") {
    LifNetwork net = small_net(121);
    std::uint64_t w = net.weight_hash();
    for (int i = 0; i < 5; ++i) net.simulate(random_train(15, 6, 0.4, 130 + i));
    CHECK(net.weight_hash() == w);
}

TEST_CASE("network creation validates parameters") {
    LifParams bad;
    bad.alpha_mem = 1.5;
    CHECK_THROWS_AS(LifNetwork::create(4, {3}, 2, bad, 1), std::invalid_argument);
    CHECK_THROWS_AS(LifNetwork::create(0, {3}, 2, LifParams{}, 1), std::invalid_argument);
    CHECK_THROWS_AS(LifNetwork::create(4, {}, 2, LifParams{}, 1), std::invalid_argument);
    CHECK_THROWS_AS(small_net().simulate(SpikeTrain(5, 7)), std::invalid_argument);
}
