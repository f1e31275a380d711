#pragma once

#include <vector>

#include "spikehd/matrix.hpp"

namespace spikehd::linalg {

// Thin SVD of a tall matrix A (rows >= cols): A = U * diag(s) * V^T with
// U rows x cols, V cols x cols, singular values sorted descending.
struct ThinSvd {
    Matrix u;
    std::vector<double> singular_values;
    Matrix v;
};

ThinSvd svd_thin(const Matrix& a);

// Moore-Penrose pseudoinverse (cols x rows) built from the thin SVD.
// Singular values below rel_tol * s_max are treated as zero; effective_rank
// reports how many survived.
Matrix pinv_from_svd(const ThinSvd& svd, double rel_tol, std::size_t* effective_rank = nullptr);

Matrix pinv(const Matrix& a, double rel_tol = 1e-10, std::size_t* effective_rank = nullptr);

}  // namespace spikehd::linalg
