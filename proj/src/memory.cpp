#include "spikehd/memory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spikehd/kernels.hpp"

namespace spikehd {

ClassMemory ClassMemory::init(const std::vector<Label>& labels, std::size_t dim) {
    if (labels.empty()) throw std::invalid_argument("ClassMemory: label set must be nonempty");
    if (dim < 1) throw std::invalid_argument("ClassMemory: dimension must be >= 1");
    ClassMemory m;
    m.labels_ = labels;
    m.classes_ = Matrix(labels.size(), dim);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!m.index_.emplace(labels[i], i).second)
            throw std::invalid_argument("ClassMemory: duplicate label '" + labels[i] + "'");
    }
    return m;
}

std::size_t ClassMemory::index_of(const Label& l) const {
    auto it = index_.find(l);
    if (it == index_.end()) throw std::invalid_argument("ClassMemory: unknown label '" + l + "'");
    return it->second;
}

std::vector<double> ClassMemory::similarities_serial(const Hypervector& h) const {
    if (h.values.size() != dim()) throw std::invalid_argument("similarities: length mismatch");
    double hn = kernels::norm(h.values.data(), h.values.size());
    std::vector<double> out(num_classes(), 0.0);
    for (std::size_t i = 0; i < num_classes(); ++i) {
        double cn = kernels::norm(classes_.row(i), dim());
        if (cn == 0.0 || hn == 0.0) continue;  // degenerate rows score 0
        out[i] = kernels::dot(classes_.row(i), h.values.data(), dim()) / (cn * hn);
    }
    return out;
}

std::vector<double> ClassMemory::similarities(const Hypervector& h) const {
    if (h.values.size() != dim()) throw std::invalid_argument("similarities: length mismatch");
    double hn = kernels::norm(h.values.data(), h.values.size());
    std::vector<double> out(num_classes(), 0.0);
    kernels::for_each_index(num_classes(), [&](std::size_t i) {
        double cn = kernels::norm(classes_.row(i), dim());
        if (cn == 0.0 || hn == 0.0) return;
        out[i] = kernels::dot(classes_.row(i), h.values.data(), dim()) / (cn * hn);
    });
    return out;
}

std::size_t ClassMemory::predict_index(const Hypervector& h) const {
    std::vector<double> sims = similarities(h);
    std::size_t best = 0;
    for (std::size_t i = 1; i < sims.size(); ++i)
        if (sims[i] > sims[best]) best = i;
    return best;
}

Label ClassMemory::predict(const Hypervector& h) const { return labels_[predict_index(h)]; }

UpdateOutcome ClassMemory::update_single(const Hypervector& h, const Label& label,
                                         const HdTrainConfig& cfg) {
    std::size_t true_idx = index_of(label);
    const Hypervector* query = &h;
    Hypervector binarized;
    if (cfg.binarize_queries && h.form != VectorForm::Bipolar) {
        binarized = binarize(h);
        query = &binarized;
    }

    std::vector<double> sims = similarities(*query);
    std::size_t pred = 0;
    for (std::size_t i = 1; i < sims.size(); ++i)
        if (sims[i] > sims[pred]) pred = i;

    UpdateOutcome out;
    out.predicted = labels_[pred];
    out.was_correct = (pred == true_idx);

    if (out.was_correct && cfg.skip_update_when_correct) return out;

    const double* q = query->values.data();
    // Every labeled sample pulls its own class, weighted by how much new
    // information it carries; a fully aligned query contributes nothing.
    out.delta_true = cfg.eta1 * (1.0 - sims[true_idx]);
    double* row_true = classes_.row(true_idx);
    for (std::size_t j = 0; j < dim(); ++j) row_true[j] += out.delta_true * q[j];

    if (!out.was_correct) {
        double gap = sims[pred] - sims[true_idx];
        out.delta_wrong = -cfg.eta2 * gap;
        double* row_wrong = classes_.row(pred);
        for (std::size_t j = 0; j < dim(); ++j) row_wrong[j] += out.delta_wrong * q[j];
        if (cfg.boost_correct_on_error) {
            double boost = cfg.eta2 * gap;
            out.delta_true += boost;
            for (std::size_t j = 0; j < dim(); ++j) row_true[j] += boost * q[j];
        }
    }
    return out;
}

LossGrad ClassMemory::loss_and_gradient(const Hypervector& h, const Label& label) const {
    std::size_t true_idx = index_of(label);
    if (h.values.size() != dim()) throw std::invalid_argument("loss_and_gradient: length mismatch");
    double hn = kernels::norm(h.values.data(), h.values.size());
    if (hn == 0.0) throw std::domain_error("loss_and_gradient: zero-norm query");

    std::vector<double> sims = similarities(h);

    double smax = *std::max_element(sims.begin(), sims.end());
    std::vector<double> p(sims.size());
    double z = 0.0;
    for (std::size_t i = 0; i < sims.size(); ++i) {
        p[i] = std::exp(sims[i] - smax);
        z += p[i];
    }
    for (double& v : p) v /= z;

    LossGrad out;
    out.loss = -std::log(std::max(p[true_idx], 1e-300));
    out.grad_h.assign(dim(), 0.0);

    // d sim_i / d h = C_i / (|C_i| |h|) - sim_i * h / |h|^2; zero rows have
    // constant similarity and contribute nothing.
    double hh = hn * hn;
    for (std::size_t i = 0; i < num_classes(); ++i) {
        double coeff = p[i] - (i == true_idx ? 1.0 : 0.0);
        if (coeff == 0.0) continue;
        double cn = kernels::norm(classes_.row(i), dim());
        if (cn == 0.0) continue;
        const double* c = classes_.row(i);
        double a = coeff / (cn * hn);
        double b = coeff * sims[i] / hh;
        for (std::size_t j = 0; j < dim(); ++j) out.grad_h[j] += a * c[j] - b * h.values[j];
    }
    return out;
}

}  // namespace spikehd
