#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "prunekit/autograd.hpp"
#include "prunekit/datasets.hpp"
#include "prunekit/errors.hpp"
#include "prunekit/model.hpp"
#include "prunekit/tensor.hpp"

namespace prunekit {

// Compact architecture grammar for fixture models:
//   "mlp:64,32"     two relu hidden layers, then a softmax head
//   "mlp:"          logistic regression (no hidden layers)
//   "cnn:8,16/32"   3x3 same-padded relu convs of 8 and 16 channels, each
//                   followed by 2x2 max pooling, then a 32-unit relu dense
//                   layer and the softmax head
struct ArchSpec {
    bool convolutional = false;
    std::vector<int> conv_channels;
    std::vector<int> dense_hidden;
};

namespace detail {

inline std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        int value = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (ec != std::errc() || ptr != item.data() + item.size() || value < 1)
            throw config_error("bad " + what + " '" + item + "' in architecture string");
        out.push_back(value);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace detail

inline ArchSpec parse_arch(const std::string& arch) {
    std::size_t colon = arch.find(':');
    if (colon == std::string::npos)
        throw config_error("architecture '" + arch + "' is missing ':' (expected e.g. mlp:32,32 or cnn:8/32)");
    std::string kind = arch.substr(0, colon);
    std::string rest = arch.substr(colon + 1);
    ArchSpec spec;
    if (kind == "mlp") {
        if (!rest.empty()) spec.dense_hidden = detail::parse_int_list(rest, "layer width");
        return spec;
    }
    if (kind == "cnn") {
        spec.convolutional = true;
        std::size_t slash = rest.find('/');
        std::string convs = slash == std::string::npos ? rest : rest.substr(0, slash);
        if (convs.empty()) throw config_error("cnn architecture needs at least one conv layer");
        spec.conv_channels = detail::parse_int_list(convs, "channel count");
        if (slash != std::string::npos && slash + 1 < rest.size())
            spec.dense_hidden = detail::parse_int_list(rest.substr(slash + 1), "layer width");
        return spec;
    }
    throw config_error("unknown architecture kind '" + kind + "' (expected mlp or cnn)");
}

namespace detail {

// Deterministic uniform in [-limit, limit) built directly from the raw
// generator so results do not depend on the standard library's
// distribution implementation.
inline float glorot_draw(std::mt19937_64& rng, double limit) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    return static_cast<float>((2.0 * u - 1.0) * limit);
}

inline Tensor glorot_tensor(std::mt19937_64& rng, const std::vector<int>& shape, std::int64_t fan_in,
                            std::int64_t fan_out) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t(shape);
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = glorot_draw(rng, limit);
    return t;
}

}  // namespace detail

// Build an untrained model for `input_shape` (rank 1 for flat features,
// rank 3 HxWxC for images). Convolutions are 3x3, same-padded, each followed
// by 2x2 max pooling; all hidden activations are relu; the head is softmax.
inline Model build_model(const ArchSpec& spec, const std::vector<int>& input_shape, int classes,
                         std::uint64_t seed) {
    if (classes < 2) throw config_error("need at least 2 classes, got " + std::to_string(classes));
    if (input_shape.size() != 1 && input_shape.size() != 3)
        throw config_error("input shape must have rank 1 or 3, got " + shape_to_string(input_shape));
    if (spec.convolutional && input_shape.size() != 3)
        throw config_error("cnn architectures need an image input shape, got " + shape_to_string(input_shape));

    std::mt19937_64 rng(seed);
    Model m;
    m.input_shape = input_shape;
    std::vector<int> shape = input_shape;

    for (int channels : spec.conv_channels) {
        int in_c = shape[2];
        m.layers.push_back(LayerSpec::conv2d(
            detail::glorot_tensor(rng, {3, 3, in_c, channels}, 9LL * in_c, 9LL * channels),
            Tensor({channels}), 1, Padding::same, ActivationKind::relu));
        shape = layer_output_shape(m.layers.back(), shape);
        m.layers.push_back(LayerSpec::maxpool2d(2, 2));
        shape = layer_output_shape(m.layers.back(), shape);
    }
    if (shape.size() == 3) {
        m.layers.push_back(LayerSpec::flatten());
        shape = layer_output_shape(m.layers.back(), shape);
    }
    int features = shape[0];
    for (int width : spec.dense_hidden) {
        m.layers.push_back(LayerSpec::dense(detail::glorot_tensor(rng, {features, width}, features, width),
                                            Tensor({width}), ActivationKind::relu));
        features = width;
    }
    m.layers.push_back(LayerSpec::dense(detail::glorot_tensor(rng, {features, classes}, features, classes),
                                        Tensor({classes}), ActivationKind::softmax));
    validate(m);
    return m;
}

struct TrainOptions {
    int epochs = 10;
    int batch_size = 32;
    double learning_rate = 0.1;
    std::uint64_t seed = 1;
};

// Plain mini-batch gradient descent on cross-entropy. Deterministic for a
// given seed: batches are drawn by an explicit Fisher-Yates shuffle and all
// gradient sums accumulate in double in a fixed order.
inline Model train_model(Model m, const Dataset& ds, const TrainOptions& opts) {
    validate(m);
    if (opts.epochs < 1) throw training_error("training needs at least one epoch");
    if (opts.batch_size < 1) throw training_error("batch size must be positive");
    if (!(opts.learning_rate > 0.0)) throw training_error("learning rate must be positive");
    if (ds.size() == 0) throw training_error("cannot train on an empty dataset");
    if (ds.sample_shape() != m.input_shape)
        throw training_error("dataset samples have shape " + shape_to_string(ds.sample_shape()) +
                             " but the model expects " + shape_to_string(m.input_shape));
    if (ds.class_count > class_count(m))
        throw training_error("dataset has " + std::to_string(ds.class_count) + " classes but the model only " +
                             std::to_string(class_count(m)));

    std::mt19937_64 rng(opts.seed);
    std::vector<int> order(static_cast<std::size_t>(ds.size()));
    for (int i = 0; i < ds.size(); ++i) order[static_cast<std::size_t>(i)] = i;

    std::int64_t features = ds.features_per_sample();
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
        for (int start = 0; start < ds.size(); start += opts.batch_size) {
            int count = std::min(opts.batch_size, ds.size() - start);
            std::vector<int> batch_shape = m.input_shape;
            batch_shape.insert(batch_shape.begin(), count);
            Tensor inputs(batch_shape);
            std::vector<int> labels(static_cast<std::size_t>(count));
            for (int r = 0; r < count; ++r) {
                int src = order[static_cast<std::size_t>(start + r)];
                for (std::int64_t f = 0; f < features; ++f)
                    inputs[r * features + f] = ds.inputs[src * features + f];
                labels[static_cast<std::size_t>(r)] = ds.labels[static_cast<std::size_t>(src)];
            }
            std::vector<LayerGrads> grads = parameter_gradients(m, inputs, labels);
            float scale = static_cast<float>(opts.learning_rate / static_cast<double>(count));
            for (int l = 0; l < m.layer_count(); ++l) {
                LayerSpec& layer = m.layers[static_cast<std::size_t>(l)];
                if (layer.param_count() == 0) continue;
                const LayerGrads& g = grads[static_cast<std::size_t>(l)];
                for (std::int64_t i = 0; i < layer.weights.numel(); ++i) layer.weights[i] -= scale * g.weights[i];
                for (std::int64_t i = 0; i < layer.bias.numel(); ++i) layer.bias[i] -= scale * g.bias[i];
            }
        }
    }
    for (int l = 0; l < m.layer_count(); ++l) {
        const LayerSpec& layer = m.layers[static_cast<std::size_t>(l)];
        if (layer.param_count() > 0 && (!layer.weights.all_finite() || !layer.bias.all_finite()))
            throw training_error("training diverged: non-finite parameters in layer " + std::to_string(l) +
                                 " (lower the learning rate)");
    }
    return m;
}

// Convenience wrapper: parse the architecture, size it from the dataset,
// initialize and train.
inline Model train_fixture(const std::string& arch, const Dataset& ds, const TrainOptions& opts) {
    ArchSpec spec = parse_arch(arch);
    Model m = build_model(spec, ds.sample_shape(), ds.class_count, opts.seed);
    return train_model(std::move(m), ds, opts);
}

}  // namespace prunekit
