#pragma once

#include <cstddef>

#include "spikehd/matrix.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spikehd::kernels {

// Global worker-pool size. 1 means fully serial; every parallel loop in the
// project dispatches through this so results never depend on thread count.
void set_workers(int n);
int workers();

// y = M * x, parallelized across rows. Each row reduction is sequential,
// so the result is bit-identical for any worker count.
void matvec(const Matrix& m, const double* x, double* y);
void matvec_serial(const Matrix& m, const double* x, double* y);

// y = M^T * x (y has m.cols entries).
void matvec_t(const Matrix& m, const double* x, double* y);
void matvec_t_serial(const Matrix& m, const double* x, double* y);

// a += scale * u * v^T  (u: a.rows, v: a.cols)
void outer_acc(Matrix& a, const double* u, const double* v, double scale);

double dot(const double* a, const double* b, std::size_t n);
double norm(const double* a, std::size_t n);

// Runs body(i) for i in [0, n). Callers must make iterations independent and
// write results into per-index slots; reductions happen afterwards in index
// order so output is worker-count independent.
template <typename F>
void for_each_index(std::size_t n, F&& body) {
#ifdef _OPENMP
    int w = workers();
    if (w > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(w)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            body(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace spikehd::kernels
