#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "spikehd/encoder.hpp"
#include "spikehd/matrix.hpp"

namespace spikehd {

using Label = std::string;

struct HdTrainConfig {
    double eta1 = 1.0;  // learning rate for the true-class pull
    double eta2 = 1.0;  // learning rate for the mispredicted-class push
    bool boost_correct_on_error = false;  // extra eta2-weighted pull on mispredicts
    bool skip_update_when_correct = false;  // suppress all updates on correct predictions
    bool binarize_queries = false;
};

struct UpdateOutcome {
    Label predicted;
    bool was_correct = false;
    double delta_true = 0.0;   // coefficient applied to the true class row
    double delta_wrong = 0.0;  // coefficient applied to the mispredicted row (negative = push away)
};

struct TrainStats {
    std::vector<std::uint8_t> correct;  // per-sample, in stream order
    std::size_t seen = 0;
    std::size_t correct_count = 0;
    double accuracy() const {
        return seen == 0 ? 0.0 : static_cast<double>(correct_count) / static_cast<double>(seen);
    }
};

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad_h;
};

// One prototype hypervector per class; the long-term store and classifier.
// Rows accumulate real-valued deltas; queries may be real or bipolar.
class ClassMemory {
public:
    static ClassMemory init(const std::vector<Label>& labels, std::size_t dim);

    std::size_t dim() const { return classes_.cols; }
    std::size_t num_classes() const { return classes_.rows; }
    const std::vector<Label>& labels() const { return labels_; }
    const Matrix& classes() const { return classes_; }
    Matrix& classes_mut() { return classes_; }
    std::size_t index_of(const Label& l) const;

    // Cosine of the query against every class row; all-zero rows score 0.
    std::vector<double> similarities(const Hypervector& h) const;
    std::vector<double> similarities_serial(const Hypervector& h) const;

    // Argmax label; ties break toward the lowest row index. An all-zero
    // memory therefore returns the first label.
    Label predict(const Hypervector& h) const;
    std::size_t predict_index(const Hypervector& h) const;

    // Adaptive single-sample update. The true class is pulled by
    // eta1*(1 - sim_true); on a mispredict the offending row is additionally
    // pushed away by eta2*(sim_pred - sim_true).
    UpdateOutcome update_single(const Hypervector& h, const Label& label, const HdTrainConfig& cfg);

    // Cross-entropy of softmaxed similarity scores against the target label,
    // with the gradient taken through the cosine normalization.
    LossGrad loss_and_gradient(const Hypervector& h, const Label& label) const;

private:
    Matrix classes_;  // k x dim
    std::vector<Label> labels_;
    std::unordered_map<Label, std::size_t> index_;
};

template <typename SampleRange>
TrainStats train_single_pass(ClassMemory& memory, const SampleRange& samples,
                             const HdTrainConfig& cfg) {
    TrainStats stats;
    for (const auto& [h, label] : samples) {
        UpdateOutcome o = memory.update_single(h, label, cfg);
        stats.correct.push_back(o.was_correct ? 1 : 0);
        ++stats.seen;
        if (o.was_correct) ++stats.correct_count;
    }
    return stats;
}

}  // namespace spikehd
