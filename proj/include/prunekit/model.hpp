#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prunekit/errors.hpp"
#include "prunekit/tensor.hpp"

namespace prunekit {

enum class LayerKind { dense, conv2d, flatten, maxpool2d };
enum class ActivationKind { none, relu, softmax };
enum class Padding { valid, same };

inline const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::flatten: return "flatten";
        case LayerKind::maxpool2d: return "maxpool2d";
    }
    return "?";
}

inline const char* to_string(ActivationKind a) {
    switch (a) {
        case ActivationKind::none: return "none";
        case ActivationKind::relu: return "relu";
        case ActivationKind::softmax: return "softmax";
    }
    return "?";
}

inline const char* to_string(Padding p) { return p == Padding::valid ? "valid" : "same"; }

// One layer record. `weights` holds dense weights [in, out] or a conv kernel
// [kh, kw, in_c, out_c]; `bias` has one entry per unit/channel.
struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    ActivationKind activation = ActivationKind::none;
    Tensor weights;
    Tensor bias;
    int stride = 1;                     // conv2d, maxpool2d
    Padding padding = Padding::valid;   // conv2d
    int pool = 2;                       // maxpool2d

    static LayerSpec dense(Tensor w, Tensor b, ActivationKind act) {
        LayerSpec l;
        l.kind = LayerKind::dense;
        l.activation = act;
        l.weights = std::move(w);
        l.bias = std::move(b);
        return l;
    }

    static LayerSpec conv2d(Tensor kernel, Tensor b, int stride, Padding pad, ActivationKind act) {
        LayerSpec l;
        l.kind = LayerKind::conv2d;
        l.activation = act;
        l.weights = std::move(kernel);
        l.bias = std::move(b);
        l.stride = stride;
        l.padding = pad;
        return l;
    }

    static LayerSpec flatten() {
        LayerSpec l;
        l.kind = LayerKind::flatten;
        return l;
    }

    static LayerSpec maxpool2d(int pool, int stride) {
        LayerSpec l;
        l.kind = LayerKind::maxpool2d;
        l.pool = pool;
        l.stride = stride;
        return l;
    }

    // Prunable unit count: dense output width / conv output channels.
    int units() const {
        if (kind == LayerKind::dense) return weights.dim(1);
        if (kind == LayerKind::conv2d) return weights.dim(3);
        return 0;
    }

    std::int64_t param_count() const {
        if (kind == LayerKind::dense || kind == LayerKind::conv2d)
            return weights.numel() + bias.numel();
        return 0;
    }
};

// Ordered layer sequence plus the per-sample input shape (no batch dim).
struct Model {
    std::vector<int> input_shape;
    std::vector<LayerSpec> layers;

    int layer_count() const { return static_cast<int>(layers.size()); }
};

inline std::int64_t param_count(const Model& m) {
    std::int64_t n = 0;
    for (const auto& l : m.layers) n += l.param_count();
    return n;
}

// Output spatial extent of a conv/pool window. `same` keeps ceil(in/stride)
// (zero padding split evenly, extra at the bottom/right).
inline int conv_out_extent(int in, int window, int stride, Padding pad) {
    if (stride < 1) throw dimension_error("stride must be >= 1");
    if (pad == Padding::same) return (in + stride - 1) / stride;
    if (in < window)
        throw dimension_error("window " + std::to_string(window) + " larger than input extent " + std::to_string(in));
    return (in - window) / stride + 1;
}

inline int same_pad_before(int in, int window, int stride) {
    int out = (in + stride - 1) / stride;
    int total = (out - 1) * stride + window - in;
    if (total < 0) total = 0;
    return total / 2;
}

// Shape a single layer produces for the given input shape; throws
// dimension_error when the layer cannot accept it.
inline std::vector<int> layer_output_shape(const LayerSpec& layer, const std::vector<int>& in) {
    switch (layer.kind) {
        case LayerKind::dense: {
            if (in.size() != 1)
                throw dimension_error("dense layer expects rank-1 input, got " + shape_to_string(in));
            if (layer.weights.rank() != 2 || layer.bias.rank() != 1)
                throw dimension_error("dense layer parameters malformed");
            if (layer.weights.dim(0) != in[0])
                throw dimension_error("dense layer expects " + std::to_string(layer.weights.dim(0)) +
                                      " inputs, got " + std::to_string(in[0]));
            if (layer.bias.dim(0) != layer.weights.dim(1))
                throw dimension_error("dense bias length does not match unit count");
            return {layer.weights.dim(1)};
        }
        case LayerKind::conv2d: {
            if (in.size() != 3)
                throw dimension_error("conv2d layer expects rank-3 input [h,w,c], got " + shape_to_string(in));
            if (layer.weights.rank() != 4 || layer.bias.rank() != 1)
                throw dimension_error("conv2d layer parameters malformed");
            if (layer.weights.dim(2) != in[2])
                throw dimension_error("conv2d kernel expects " + std::to_string(layer.weights.dim(2)) +
                                      " input channels, got " + std::to_string(in[2]));
            if (layer.bias.dim(0) != layer.weights.dim(3))
                throw dimension_error("conv2d bias length does not match channel count");
            int oh = conv_out_extent(in[0], layer.weights.dim(0), layer.stride, layer.padding);
            int ow = conv_out_extent(in[1], layer.weights.dim(1), layer.stride, layer.padding);
            return {oh, ow, layer.weights.dim(3)};
        }
        case LayerKind::flatten: {
            int n = 1;
            for (int d : in) n *= d;
            return {n};
        }
        case LayerKind::maxpool2d: {
            if (in.size() != 3)
                throw dimension_error("maxpool2d expects rank-3 input [h,w,c], got " + shape_to_string(in));
            if (layer.pool < 1 || layer.stride < 1)
                throw dimension_error("maxpool2d pool/stride must be >= 1");
            // Pool windows clamp at the borders, so the extent is ceil(in/stride).
            int oh = conv_out_extent(in[0], layer.pool, layer.stride, Padding::same);
            int ow = conv_out_extent(in[1], layer.pool, layer.stride, Padding::same);
            return {oh, ow, in[2]};
        }
    }
    throw dimension_error("unknown layer kind");
}

// Per-layer output shapes for the whole chain, index k = output of layer k.
inline std::vector<std::vector<int>> shape_chain(const Model& m) {
    std::vector<std::vector<int>> shapes;
    shapes.reserve(m.layers.size());
    std::vector<int> cur = m.input_shape;
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        try {
            cur = layer_output_shape(m.layers[k], cur);
        } catch (const dimension_error& e) {
            throw dimension_error("layer " + std::to_string(k) + " (" + to_string(m.layers[k].kind) +
                                  "): " + e.what());
        }
        shapes.push_back(cur);
    }
    return shapes;
}

// Logit/class count: element count of the final layer's output.
inline int class_count(const Model& m) {
    if (m.layers.empty()) throw dimension_error("empty model");
    auto shapes = shape_chain(m);
    int n = 1;
    for (int d : shapes.back()) n *= d;
    return n;
}

// Full structural check: consistent shape chain, softmax only as the head of
// the final dense layer, every parametric layer non-empty, finite parameters.
inline void validate(const Model& m) {
    if (m.input_shape.empty()) throw dimension_error("model has empty input shape");
    shape_numel(m.input_shape);
    if (m.layers.empty()) throw dimension_error("model has no layers");
    shape_chain(m);
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        const LayerSpec& l = m.layers[k];
        bool final_layer = (k + 1 == m.layers.size());
        if (l.activation == ActivationKind::softmax) {
            if (!final_layer)
                throw dimension_error("layer " + std::to_string(k) + ": softmax permitted only on the final layer");
            if (l.kind != LayerKind::dense)
                throw dimension_error("softmax head must be a dense layer");
        }
        if (l.kind == LayerKind::dense || l.kind == LayerKind::conv2d) {
            if (l.units() < 1)
                throw dimension_error("layer " + std::to_string(k) + " has no units");
            l.weights.require_finite("layer " + std::to_string(k) + " weights");
            l.bias.require_finite("layer " + std::to_string(k) + " bias");
        }
    }
}

}  // namespace prunekit
