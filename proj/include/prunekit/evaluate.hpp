#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "prunekit/autograd.hpp"
#include "prunekit/datasets.hpp"
#include "prunekit/errors.hpp"
#include "prunekit/forward.hpp"
#include "prunekit/model.hpp"
#include "prunekit/serialize.hpp"
#include "prunekit/tensor.hpp"

namespace prunekit {

namespace detail {

inline void require_compatible(const Model& m, const Dataset& ds) {
    if (ds.size() == 0) throw dimension_error("empty evaluation set");
    std::vector<int> sample = ds.sample_shape();
    if (sample != m.input_shape)
        throw dimension_error("dataset samples have shape " + shape_to_string(sample) +
                              " but the model expects " + shape_to_string(m.input_shape));
    if (class_count(m) < ds.class_count)
        throw dimension_error("dataset has " + std::to_string(ds.class_count) + " classes but the model only " +
                              std::to_string(class_count(m)));
}

// Index of the row maximum; ties resolve to the lowest index.
inline int argmax_row(const Tensor& t, int row) {
    int best = 0;
    float best_v = t.at(row, 0);
    for (int c = 1; c < t.dim(1); ++c) {
        if (t.at(row, c) > best_v) {
            best_v = t.at(row, c);
            best = c;
        }
    }
    return best;
}

}  // namespace detail

// Predicted class per sample, computed on the logits in chunks so big
// datasets do not blow up activation memory.
inline std::vector<int> predict(const Model& m, const Dataset& ds, int chunk = 256) {
    detail::require_compatible(m, ds);
    if (chunk < 1) throw config_error("prediction chunk size must be positive");
    Model logits_model = m;
    logits_model.layers.back().activation = ActivationKind::none;
    std::vector<int> pred(static_cast<std::size_t>(ds.size()));
    for (int start = 0; start < ds.size(); start += chunk) {
        int count = std::min(chunk, ds.size() - start);
        Tensor logits = model_forward(logits_model, ds.batch(start, count));
        for (int r = 0; r < count; ++r)
            pred[static_cast<std::size_t>(start + r)] = detail::argmax_row(logits, r);
    }
    return pred;
}

inline double accuracy(const Model& m, const Dataset& ds, int chunk = 256) {
    if (ds.size() == 0) throw dimension_error("empty evaluation set");
    std::vector<int> pred = predict(m, ds, chunk);
    std::int64_t correct = 0;
    for (int i = 0; i < ds.size(); ++i)
        if (pred[static_cast<std::size_t>(i)] == ds.labels[static_cast<std::size_t>(i)]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

// Fast gradient sign attack: x' = clip(x + eps * sign(dL/dx)). sign(0) is 0,
// so eps = 0 reproduces the input bit for bit.
struct FgsmConfig {
    double epsilon = 0.1;
    bool clip = true;
    float clip_lo = 0.0f;
    float clip_hi = 1.0f;
};

inline Tensor fgsm_attack(const Model& m, const Tensor& input, int label, const FgsmConfig& cfg = {}) {
    if (cfg.epsilon < 0.0) throw config_error("fgsm epsilon must be non-negative");
    if (cfg.clip && !(cfg.clip_lo <= cfg.clip_hi)) throw config_error("fgsm clip range is inverted");
    Tensor grad = input_gradient(m, input, label);
    Tensor adv = input;
    float eps = static_cast<float>(cfg.epsilon);
    for (std::int64_t i = 0; i < adv.numel(); ++i) {
        float g = grad[i];
        float s = g > 0.0f ? 1.0f : (g < 0.0f ? -1.0f : 0.0f);
        float v = adv[i] + eps * s;
        if (cfg.clip) v = std::clamp(v, cfg.clip_lo, cfg.clip_hi);
        adv[i] = v;
    }
    return adv;
}

// Fraction of samples still classified correctly after the attack. Each
// sample is perturbed with the gradient of its own true-label loss.
inline double fgsm_robustness(const Model& m, const Dataset& ds, const FgsmConfig& cfg = {}) {
    detail::require_compatible(m, ds);
    Model logits_model = m;
    logits_model.layers.back().activation = ActivationKind::none;
    std::int64_t correct = 0;
    for (int i = 0; i < ds.size(); ++i) {
        Tensor adv = fgsm_attack(m, ds.sample(i), ds.labels[static_cast<std::size_t>(i)], cfg);
        Tensor logits = model_forward(logits_model, adv);
        if (detail::argmax_row(logits, 0) == ds.labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

// Structural footprint of a model: live parameters and the exact number of
// bytes its serialized form occupies.
struct SizeReport {
    std::int64_t param_count = 0;
    std::int64_t file_size_bytes = 0;
};

inline SizeReport size_report(const Model& m) {
    return {param_count(m), static_cast<std::int64_t>(serialized_size(m))};
}

}  // namespace prunekit
