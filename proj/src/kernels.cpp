#include "spikehd/kernels.hpp"

#include <atomic>
#include <cmath>

namespace spikehd::kernels {

namespace {
std::atomic<int> g_workers{1};
}

void set_workers(int n) { g_workers.store(n < 1 ? 1 : n); }

int workers() { return g_workers.load(); }

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double norm(const double* a, std::size_t n) { return std::sqrt(dot(a, a, n)); }

void matvec_serial(const Matrix& m, const double* x, double* y) {
    for (std::size_t i = 0; i < m.rows; ++i) y[i] = dot(m.row(i), x, m.cols);
}

void matvec(const Matrix& m, const double* x, double* y) {
#ifdef _OPENMP
    int w = workers();
    if (w > 1 && m.rows >= 256) {
#pragma omp parallel for schedule(static) num_threads(w)
        for (long long i = 0; i < static_cast<long long>(m.rows); ++i) {
            y[i] = dot(m.row(static_cast<std::size_t>(i)), x, m.cols);
        }
        return;
    }
#endif
    matvec_serial(m, x, y);
}

void matvec_t_serial(const Matrix& m, const double* x, double* y) {
    for (std::size_t j = 0; j < m.cols; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t j = 0; j < m.cols; ++j) y[j] += xi * r[j];
    }
}

void matvec_t(const Matrix& m, const double* x, double* y) {
#ifdef _OPENMP
    int w = workers();
    // Column-parallel variant keeps every y[j] a sequential sum over rows.
    if (w > 1 && m.cols >= 256) {
#pragma omp parallel for schedule(static) num_threads(w)
        for (long long j = 0; j < static_cast<long long>(m.cols); ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m.rows; ++i) acc += x[i] * m.data[i * m.cols + j];
            y[j] = acc;
        }
        return;
    }
#endif
    matvec_t_serial(m, x, y);
}

void outer_acc(Matrix& a, const double* u, const double* v, double scale) {
    for (std::size_t i = 0; i < a.rows; ++i) {
        double ui = scale * u[i];
        if (ui == 0.0) continue;
        double* r = a.row(i);
        for (std::size_t j = 0; j < a.cols; ++j) r[j] += ui * v[j];
    }
}

}  // namespace spikehd::kernels
