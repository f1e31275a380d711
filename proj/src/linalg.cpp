#include "spikehd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spikehd::linalg {

namespace {

// Column-major workspace: col(j) is contiguous, which is what the one-sided
// Jacobi rotations want.
struct ColMat {
    std::size_t rows, cols;
    std::vector<double> a;
    ColMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    double* col(std::size_t j) { return a.data() + j * rows; }
    const double* col(std::size_t j) const { return a.data() + j * rows; }
};

double col_dot(const ColMat& m, std::size_t p, std::size_t q) {
    const double* cp = m.col(p);
    const double* cq = m.col(q);
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) acc += cp[i] * cq[i];
    return acc;
}

void rotate_cols(ColMat& m, std::size_t p, std::size_t q, double c, double s) {
    double* cp = m.col(p);
    double* cq = m.col(q);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double vp = cp[i];
        double vq = cq[i];
        cp[i] = c * vp - s * vq;
        cq[i] = s * vp + c * vq;
    }
}

}  // namespace

ThinSvd svd_thin(const Matrix& a) {
    require(a.rows >= a.cols && a.cols >= 1, "svd_thin: matrix must be tall (rows >= cols >= 1)");
    const std::size_t m = a.rows;
    const std::size_t n = a.cols;

    ColMat g(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g.col(j)[i] = a(i, j);

    ColMat v(n, n);
    for (std::size_t j = 0; j < n; ++j) v.col(j)[j] = 1.0;

    // One-sided Jacobi: orthogonalize column pairs until all cosines vanish.
    const double tol = 1e-14;
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double worst = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = col_dot(g, p, p);
                double aqq = col_dot(g, q, q);
                double apq = col_dot(g, p, q);
                double denom = std::sqrt(app * aqq);
                if (denom == 0.0) continue;
                double cosine = std::abs(apq) / denom;
                worst = std::max(worst, cosine);
                if (cosine <= tol) continue;
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                rotate_cols(g, p, q, c, s);
                rotate_cols(v, p, q, c, s);
            }
        }
        if (worst <= tol) break;
    }

    std::vector<double> sv(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double nrm = 0.0;
        const double* cj = g.col(j);
        for (std::size_t i = 0; i < m; ++i) nrm += cj[i] * cj[i];
        sv[j] = std::sqrt(nrm);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sv[x] > sv[y]; });

    ThinSvd out;
    out.u = Matrix(m, n);
    out.v = Matrix(n, n);
    out.singular_values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t j = order[k];
        out.singular_values[k] = sv[j];
        double inv = sv[j] > 0.0 ? 1.0 / sv[j] : 0.0;
        const double* cj = g.col(j);
        for (std::size_t i = 0; i < m; ++i) out.u(i, k) = cj[i] * inv;
        const double* vj = v.col(j);
        for (std::size_t i = 0; i < n; ++i) out.v(i, k) = vj[i];
    }
    return out;
}

Matrix pinv_from_svd(const ThinSvd& svd, double rel_tol, std::size_t* effective_rank) {
    const std::size_t m = svd.u.rows;
    const std::size_t n = svd.v.rows;
    double smax = svd.singular_values.empty() ? 0.0 : svd.singular_values[0];
    double cut = rel_tol * smax;

    std::size_t rank = 0;
    for (double s : svd.singular_values)
        if (s > cut && s > 0.0) ++rank;
    if (effective_rank) *effective_rank = rank;

    // pinv = V * diag(1/s) * U^T, truncated at the tolerance.
    Matrix out(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        double* r = out.row(i);
        for (std::size_t k = 0; k < rank; ++k) {
            double w = svd.v(i, k) / svd.singular_values[k];
            const double* ucol = svd.u.data.data();  // u is row-major m x n
            for (std::size_t j = 0; j < m; ++j) r[j] += w * ucol[j * svd.u.cols + k];
        }
    }
    return out;
}

Matrix pinv(const Matrix& a, double rel_tol, std::size_t* effective_rank) {
    return pinv_from_svd(svd_thin(a), rel_tol, effective_rank);
}

}  // namespace spikehd::linalg
