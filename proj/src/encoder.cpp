#include "spikehd/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spikehd/kernels.hpp"
#include "spikehd/linalg.hpp"
#include "spikehd/rng.hpp"

namespace spikehd {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr double kAtanhClamp = 1e-6;  // keeps atanh finite at saturated components
// Largest double below 1. std::tanh rounds to +/-1 for |x| > ~19, but the
// encoding contract keeps components strictly inside (-1, 1) so the inverse
// activation stays finite.
constexpr double kTanhCeil = 1.0 - 1.1102230246251565e-16;

double activate(Activation act, double pre, double phase) {
    if (act == Activation::Tanh) return std::clamp(std::tanh(pre + phase), -kTanhCeil, kTanhCeil);
    return std::cos(pre + phase) * std::sin(pre);
}
}  // namespace

EncoderBasis EncoderBasis::create(std::size_t input_dim, std::size_t dim, Activation activation,
                                  std::uint64_t seed) {
    if (input_dim < 1 || dim < 1) throw std::invalid_argument("EncoderBasis: dimensions must be >= 1");
    if (dim < input_dim)
        throw std::invalid_argument("EncoderBasis: hyperspace dimension must be >= input dimension");

    EncoderBasis b;
    b.input_dim_ = input_dim;
    b.dim_ = dim;
    b.activation_ = activation;
    b.seed_ = seed;
    b.base_ = Matrix(dim, input_dim);
    b.phases_.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        SplitMix64 rng(derive_seed(seed, "encoder.row", i));
        double* r = b.base_.row(i);
        for (std::size_t j = 0; j < input_dim; ++j) r[j] = rng.normal();
        b.phases_[i] = rng.uniform(0.0, kTwoPi);
    }
    return b;
}

Hypervector EncoderBasis::encode_serial(const FeatureVector& f) const {
    if (f.size() != input_dim_) throw std::invalid_argument("encode: input length mismatch");
    Hypervector h;
    h.form = VectorForm::Real;
    h.values.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        double pre = kernels::dot(base_.row(i), f.data(), input_dim_);
        h.values[i] = activate(activation_, pre, phases_[i]);
    }
    return h;
}

Hypervector EncoderBasis::encode(const FeatureVector& f) const {
    if (f.size() != input_dim_) throw std::invalid_argument("encode: input length mismatch");
    Hypervector h;
    h.form = VectorForm::Real;
    h.values.resize(dim_);
    const double* x = f.data();
    double* out = h.values.data();
    kernels::for_each_index(dim_, [&](std::size_t i) {
        double pre = kernels::dot(base_.row(i), x, input_dim_);
        out[i] = activate(activation_, pre, phases_[i]);
    });
    return h;
}

const Matrix& EncoderBasis::pseudoinverse() const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    if (!cache_->value) {
        std::size_t rank = 0;
        Matrix p = linalg::pinv(base_, 1e-10, &rank);
        if (rank < input_dim_)
            throw std::runtime_error("pseudoinverse: base matrix is numerically rank-deficient (rank " +
                                     std::to_string(rank) + " < " + std::to_string(input_dim_) + ")");
        cache_->value = std::move(p);
        cache_->computations.fetch_add(1);
    }
    return *cache_->value;
}

FeatureVector EncoderBasis::backproject(const std::vector<double>& v, const Hypervector& h,
                                        BackprojectMode mode) const {
    if (activation_ != Activation::Tanh)
        throw std::invalid_argument("backproject: SinCos encodings are forward-only");
    if (v.size() != dim_ || h.values.size() != dim_)
        throw std::invalid_argument("backproject: hyperspace length mismatch");

    FeatureVector out(input_dim_, 0.0);
    if (mode == BackprojectMode::ChainRule) {
        // d h_i / d f_j = (1 - h_i^2) * B_ij, so the input gradient is
        // B^T (v .* (1 - h^2)).
        std::vector<double> scaled(dim_);
        for (std::size_t i = 0; i < dim_; ++i) scaled[i] = v[i] * (1.0 - h.values[i] * h.values[i]);
        kernels::matvec_t(base_, scaled.data(), out.data());
        return out;
    }

    // PinvTarget: invert the activation at the current and displaced points,
    // then least-squares-project the pre-activation difference.
    std::vector<double> delta(dim_);
    const double lo = -1.0 + kAtanhClamp;
    const double hi = 1.0 - kAtanhClamp;
    for (std::size_t i = 0; i < dim_; ++i) {
        double cur = std::clamp(h.values[i], lo, hi);
        double tgt = std::clamp(h.values[i] + v[i], lo, hi);
        delta[i] = std::atanh(tgt) - std::atanh(cur);
    }
    kernels::matvec(pseudoinverse(), delta.data(), out.data());
    return out;
}

double EncoderBasis::kernel_estimate(const FeatureVector& x, const FeatureVector& y,
                                     const KernelConfig& k) const {
    if (x.size() != input_dim_ || y.size() != input_dim_)
        throw std::invalid_argument("kernel_estimate: input length mismatch");
    if (!(k.sigma > 0.0)) throw std::invalid_argument("kernel_estimate: sigma must be positive");

    double inv_sigma = 1.0 / k.sigma;
    double acc = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        double px = std::cos(kernels::dot(base_.row(i), x.data(), input_dim_) * inv_sigma + phases_[i]);
        double py = std::cos(kernels::dot(base_.row(i), y.data(), input_dim_) * inv_sigma + phases_[i]);
        acc += px * py;
    }
    return acc * 2.0 / static_cast<double>(dim_);
}

Hypervector binarize(const Hypervector& h) {
    Hypervector out;
    out.form = VectorForm::Bipolar;
    out.values.resize(h.values.size());
    for (std::size_t i = 0; i < h.values.size(); ++i) out.values[i] = h.values[i] < 0.0 ? -1.0 : 1.0;
    return out;
}

double cosine_similarity(const Hypervector& a, const Hypervector& b) {
    if (a.values.size() != b.values.size())
        throw std::invalid_argument("cosine_similarity: length mismatch");
    double na = kernels::norm(a.values.data(), a.values.size());
    double nb = kernels::norm(b.values.data(), b.values.size());
    if (na == 0.0 || nb == 0.0)
        throw std::domain_error("cosine_similarity: zero-norm hypervector");
    return kernels::dot(a.values.data(), b.values.data(), a.values.size()) / (na * nb);
}

PackedBipolar pack_bipolar(const Hypervector& h) {
    if (h.form != VectorForm::Bipolar)
        throw std::invalid_argument("pack_bipolar: expected a bipolar hypervector");
    PackedBipolar p;
    p.dim = h.values.size();
    p.words.assign((p.dim + 63) / 64, 0);
    for (std::size_t i = 0; i < p.dim; ++i)
        if (h.values[i] > 0.0) p.words[i / 64] |= (1ULL << (i % 64));
    return p;
}

Hypervector unpack_bipolar(const PackedBipolar& p) {
    Hypervector h;
    h.form = VectorForm::Bipolar;
    h.values.resize(p.dim);
    for (std::size_t i = 0; i < p.dim; ++i)
        h.values[i] = (p.words[i / 64] >> (i % 64)) & 1 ? 1.0 : -1.0;
    return h;
}

double cosine_similarity(const PackedBipolar& a, const PackedBipolar& b) {
    if (a.dim != b.dim) throw std::invalid_argument("cosine_similarity: length mismatch");
    if (a.dim == 0) throw std::domain_error("cosine_similarity: empty hypervector");
    std::size_t diff = 0;
    for (std::size_t w = 0; w < a.words.size(); ++w) {
        std::uint64_t x = a.words[w] ^ b.words[w];
        if (w + 1 == a.words.size() && a.dim % 64 != 0) x &= (1ULL << (a.dim % 64)) - 1;
        diff += static_cast<std::size_t>(std::popcount(x));
    }
    // For +/-1 vectors: dot = D - 2*diff and both norms are sqrt(D).
    return 1.0 - 2.0 * static_cast<double>(diff) / static_cast<double>(a.dim);
}

}  // namespace spikehd
