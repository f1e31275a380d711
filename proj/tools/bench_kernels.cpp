// Times the parallel kernels against their serial reference paths and checks
// that both produce identical results. Run with --workers N to size the pool.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "spikehd/encoder.hpp"
#include "spikehd/kernels.hpp"
#include "spikehd/memory.hpp"
#include "spikehd/rng.hpp"

using namespace spikehd;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_of(int iters, F&& fn) {
    auto t0 = Clock::now();
    for (int i = 0; i < iters; ++i) fn();
    return std::chrono::duration<double>(Clock::now() - t0).count() / iters;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void report(const char* name, double serial, double parallel, double diff) {
    std::printf("%-28s %10.3f ms %10.3f ms %8.2fx   max|diff| %.3g\n", name, serial * 1e3,
                parallel * 1e3, serial / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
    int workers = 2;
    for (int i = 1; i + 1 < argc + 1; ++i) {
        std::string arg = argv[i] ? argv[i] : "";
        if (arg == "--workers" && i + 1 < argc) workers = std::atoi(argv[i + 1]);
    }

    const std::size_t n = 128;
    const std::size_t dim = 8000;
    const std::size_t classes = 10;
    const int iters = 20;

    EncoderBasis basis = EncoderBasis::create(n, dim, Activation::Tanh, 42);
    SplitMix64 rng(7);
    FeatureVector f(n);
    for (double& v : f) v = rng.uniform01();

    ClassMemory memory = ClassMemory::init({"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"}, dim);
    HdTrainConfig hd;
    for (int i = 0; i < 50; ++i) {
        Hypervector h;
        h.values.resize(dim);
        for (double& v : h.values) v = rng.normal();
        memory.update_single(h, std::to_string(i % classes), hd);
    }

    Matrix m(dim, n);
    for (double& v : m.data) v = rng.normal();
    std::vector<double> x(n), y_serial(dim), y_parallel(dim);
    for (double& v : x) v = rng.normal();

    std::printf("workers: %d\n", workers);
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    kernels::set_workers(1);
    double t_mv_s = time_of(iters, [&] { kernels::matvec_serial(m, x.data(), y_serial.data()); });
    Hypervector h_serial;
    double t_enc_s = time_of(iters, [&] { h_serial = basis.encode_serial(f); });
    std::vector<double> sims_serial;
    Hypervector probe = h_serial;
    double t_sim_s = time_of(iters, [&] { sims_serial = memory.similarities_serial(probe); });

    kernels::set_workers(workers);
    double t_mv_p = time_of(iters, [&] { kernels::matvec(m, x.data(), y_parallel.data()); });
    Hypervector h_parallel;
    double t_enc_p = time_of(iters, [&] { h_parallel = basis.encode(f); });
    std::vector<double> sims_parallel;
    double t_sim_p = time_of(iters, [&] { sims_parallel = memory.similarities(probe); });

    report("matvec 8000x128", t_mv_s, t_mv_p, max_abs_diff(y_serial, y_parallel));
    report("encode 128->8000 (tanh)", t_enc_s, t_enc_p, max_abs_diff(h_serial.values, h_parallel.values));
    report("similarities 10x8000", t_sim_s, t_sim_p, max_abs_diff(sims_serial, sims_parallel));

    bool exact = max_abs_diff(y_serial, y_parallel) == 0.0 &&
                 max_abs_diff(h_serial.values, h_parallel.values) == 0.0 &&
                 max_abs_diff(sims_serial, sims_parallel) == 0.0;
    std::printf("parallel results %s serial reference\n", exact ? "match" : "DIFFER FROM");
    return exact ? 0 : 1;
}
