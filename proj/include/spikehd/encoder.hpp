#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "spikehd/matrix.hpp"

namespace spikehd {

enum class Activation : std::uint8_t { SinCos = 0, Tanh = 1 };
enum class VectorForm : std::uint8_t { Real = 0, Bipolar = 1 };
enum class BackprojectMode : std::uint8_t { ChainRule = 0, PinvTarget = 1 };

using FeatureVector = std::vector<double>;

struct Hypervector {
    std::vector<double> values;
    VectorForm form = VectorForm::Real;

    std::size_t dim() const { return values.size(); }
};

struct KernelConfig {
    double sigma = 1.0;  // Gaussian bandwidth
};

// Random projection into high-dimensional space with a non-linear activation.
// Row i of the base matrix together with phases[i] defines one output
// component; rows are generated independently from (seed, i), so a basis of
// dimension D is a prefix of any larger basis with the same seed.
class EncoderBasis {
public:
    static EncoderBasis create(std::size_t input_dim, std::size_t dim, Activation activation,
                               std::uint64_t seed);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t dim() const { return dim_; }
    Activation activation() const { return activation_; }
    std::uint64_t seed() const { return seed_; }
    const Matrix& base() const { return base_; }
    const std::vector<double>& phases() const { return phases_; }

    // Maps an input vector to a Real-form hypervector. Tanh keeps every
    // component strictly inside (-1, 1); SinCos lands in [-1, 1].
    Hypervector encode(const FeatureVector& f) const;
    Hypervector encode_serial(const FeatureVector& f) const;  // reference path

    // Cached Moore-Penrose pseudoinverse of the base (input_dim x dim).
    // Computed at most once per basis; throws if the base is numerically
    // rank-deficient.
    const Matrix& pseudoinverse() const;
    int pinv_computations() const { return cache_->computations.load(); }

    // Maps hyperspace information back to feature space. ChainRule treats v
    // as a gradient with respect to the encoding h and returns the gradient
    // with respect to the input (Tanh only). PinvTarget treats v as a target
    // displacement in hyperspace and returns the input displacement realizing
    // it, via the inverse activation and the pseudoinverse.
    FeatureVector backproject(const std::vector<double>& v, const Hypervector& h,
                              BackprojectMode mode) const;

    // Shift-invariant random-feature estimate of the Gaussian kernel
    // exp(-|x-y|^2 / (2 sigma^2)), using sqrt(2/D) * cos(x.B_i / sigma + b_i)
    // features over this basis.
    double kernel_estimate(const FeatureVector& x, const FeatureVector& y,
                           const KernelConfig& k = {}) const;

private:
    EncoderBasis() = default;

    struct PinvCache {
        std::mutex mutex;
        std::optional<Matrix> value;
        std::atomic<int> computations{0};
    };

    std::size_t input_dim_ = 0;
    std::size_t dim_ = 0;
    Activation activation_ = Activation::Tanh;
    std::uint64_t seed_ = 0;
    Matrix base_;                 // dim x input_dim
    std::vector<double> phases_;  // dim, in [0, 2*pi)
    std::shared_ptr<PinvCache> cache_ = std::make_shared<PinvCache>();
};

// Entry-wise sign with sign(0) = +1. Accepts Real or Bipolar input; the
// result is always Bipolar, so the map is idempotent.
Hypervector binarize(const Hypervector& h);

// Throws std::domain_error when either operand has zero norm.
double cosine_similarity(const Hypervector& a, const Hypervector& b);

// Bit-packed bipolar storage: 64 components per word, +1 encoded as a set
// bit. Similarity on packed vectors is exact integer arithmetic.
struct PackedBipolar {
    std::size_t dim = 0;
    std::vector<std::uint64_t> words;
};

PackedBipolar pack_bipolar(const Hypervector& h);
Hypervector unpack_bipolar(const PackedBipolar& p);
double cosine_similarity(const PackedBipolar& a, const PackedBipolar& b);

}  // namespace spikehd
