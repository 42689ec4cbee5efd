#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "prunekit/errors.hpp"
#include "prunekit/model.hpp"
#include "prunekit/tensor.hpp"

namespace prunekit {

namespace detail {

// Softmax per row, numerically shifted; rows sum to 1 within f32 rounding.
inline void softmax_rows(Tensor& t) {
    int rows = t.dim(0);
    int cols = t.dim(1);
    for (int r = 0; r < rows; ++r) {
        float* row = t.data() + static_cast<std::int64_t>(r) * cols;
        float m = row[0];
        for (int c = 1; c < cols; ++c) m = std::max(m, row[c]);
        double sum = 0.0;
        for (int c = 0; c < cols; ++c) sum += std::exp(static_cast<double>(row[c]) - m);
        for (int c = 0; c < cols; ++c)
            row[c] = static_cast<float>(std::exp(static_cast<double>(row[c]) - m) / sum);
    }
}

inline void apply_activation(Tensor& t, ActivationKind act) {
    switch (act) {
        case ActivationKind::none:
            return;
        case ActivationKind::relu:
            for (float& v : t.values()) v = std::max(v, 0.0f);
            return;
        case ActivationKind::softmax:
            if (t.rank() != 2) throw dimension_error("softmax requires a rank-2 [batch, classes] tensor");
            softmax_rows(t);
            return;
    }
}

}  // namespace detail

// out = act(input . weights + bias). Dot products accumulate in double,
// ascending input index; the interval transfer in bounds.hpp mirrors this
// order so concrete activations stay inside propagated bounds bit-for-bit.
inline Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                            ActivationKind act) {
    if (input.rank() != 2) throw dimension_error("dense input must be rank-2 [batch, in]");
    if (weights.rank() != 2 || bias.rank() != 1 || bias.dim(0) != weights.dim(1))
        throw dimension_error("dense parameters malformed");
    if (input.dim(1) != weights.dim(0))
        throw dimension_error("dense shape mismatch: input " + shape_to_string(input.shape()) +
                              " vs weights " + shape_to_string(weights.shape()));
    int batch = input.dim(0);
    int in = weights.dim(0);
    int out = weights.dim(1);
    Tensor result({batch, out});
    for (int r = 0; r < batch; ++r) {
        const float* x = input.data() + static_cast<std::int64_t>(r) * in;
        for (int o = 0; o < out; ++o) {
            double acc = bias[o];
            for (int i = 0; i < in; ++i)
                acc += static_cast<double>(x[i]) * static_cast<double>(weights.at(i, o));
            result.at(r, o) = static_cast<float>(acc);
        }
    }
    detail::apply_activation(result, act);
    return result;
}

// Channels-last cross-correlation. Kernel [kh,kw,in_c,out_c], input
// [batch,h,w,in_c]; accumulation order kh, kw, in_c (mirrored by bounds.hpp).
inline Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                             int stride, Padding padding, ActivationKind act) {
    if (input.rank() != 4) throw dimension_error("conv2d input must be rank-4 [batch,h,w,c]");
    if (kernel.rank() != 4 || bias.rank() != 1 || bias.dim(0) != kernel.dim(3))
        throw dimension_error("conv2d parameters malformed");
    if (input.dim(3) != kernel.dim(2))
        throw dimension_error("conv2d channel mismatch: input " + shape_to_string(input.shape()) +
                              " vs kernel " + shape_to_string(kernel.shape()));
    if (act == ActivationKind::softmax) throw dimension_error("softmax not supported on conv2d");
    int batch = input.dim(0), h = input.dim(1), w = input.dim(2), ic = input.dim(3);
    int kh = kernel.dim(0), kw = kernel.dim(1), oc = kernel.dim(3);
    int oh = conv_out_extent(h, kh, stride, padding);
    int ow = conv_out_extent(w, kw, stride, padding);
    int pad_t = padding == Padding::same ? same_pad_before(h, kh, stride) : 0;
    int pad_l = padding == Padding::same ? same_pad_before(w, kw, stride) : 0;

    Tensor result({batch, oh, ow, oc});
    for (int b = 0; b < batch; ++b) {
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                for (int o = 0; o < oc; ++o) {
                    double acc = bias[o];
                    for (int ky = 0; ky < kh; ++ky) {
                        int iy = y * stride - pad_t + ky;
                        if (iy < 0 || iy >= h) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            int ix = x * stride - pad_l + kx;
                            if (ix < 0 || ix >= w) continue;
                            for (int c = 0; c < ic; ++c)
                                acc += static_cast<double>(input.at4(b, iy, ix, c)) *
                                       static_cast<double>(kernel.at4(ky, kx, c, o));
                        }
                    }
                    result.at4(b, y, x, o) = static_cast<float>(acc);
                }
            }
        }
    }
    detail::apply_activation(result, act);
    return result;
}

// Per-channel spatial max pooling. Output extent is ceil(in/stride); border
// windows are clamped to the input (missing cells simply don't participate),
// so extents smaller than the window still pool instead of erroring.
inline Tensor maxpool2d_forward(const Tensor& input, int pool, int stride) {
    if (input.rank() != 4) throw dimension_error("maxpool2d input must be rank-4 [batch,h,w,c]");
    if (pool < 1 || stride < 1) throw dimension_error("maxpool2d pool/stride must be >= 1");
    int batch = input.dim(0), h = input.dim(1), w = input.dim(2), ch = input.dim(3);
    int oh = conv_out_extent(h, pool, stride, Padding::same);
    int ow = conv_out_extent(w, pool, stride, Padding::same);
    int pad_t = same_pad_before(h, pool, stride);
    int pad_l = same_pad_before(w, pool, stride);
    Tensor result({batch, oh, ow, ch});
    for (int b = 0; b < batch; ++b)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x)
                for (int c = 0; c < ch; ++c) {
                    float m = -std::numeric_limits<float>::infinity();
                    for (int py = 0; py < pool; ++py) {
                        int iy = y * stride - pad_t + py;
                        if (iy < 0 || iy >= h) continue;
                        for (int px = 0; px < pool; ++px) {
                            int ix = x * stride - pad_l + px;
                            if (ix < 0 || ix >= w) continue;
                            m = std::max(m, input.at4(b, iy, ix, c));
                        }
                    }
                    result.at4(b, y, x, c) = m;
                }
    return result;
}

// [batch, ...] -> [batch, prod]; row-major layout makes this a pure reshape,
// flat index of (h,w,c) is (h*W + w)*C + c.
inline Tensor flatten_forward(const Tensor& input) {
    if (input.rank() < 2) throw dimension_error("flatten input must have a batch dimension");
    int n = 1;
    for (int i = 1; i < input.rank(); ++i) n *= input.dim(i);
    return input.reshaped({input.dim(0), n});
}

inline Tensor apply_layer(const LayerSpec& layer, const Tensor& input) {
    switch (layer.kind) {
        case LayerKind::dense:
            return dense_forward(input, layer.weights, layer.bias, layer.activation);
        case LayerKind::conv2d:
            return conv2d_forward(input, layer.weights, layer.bias, layer.stride, layer.padding,
                                  layer.activation);
        case LayerKind::flatten:
            return flatten_forward(input);
        case LayerKind::maxpool2d:
            return maxpool2d_forward(input, layer.pool, layer.stride);
    }
    throw dimension_error("unknown layer kind");
}

// Inputs to every layer plus the final output; feeds backprop and oracles.
// inputs[k] is what layer k consumed (inputs[0] = the batch itself).
struct ForwardTrace {
    std::vector<Tensor> inputs;
    Tensor output;
};

inline ForwardTrace model_forward_trace(const Model& m, const Tensor& input) {
    if (input.rank() != static_cast<int>(m.input_shape.size()) + 1)
        throw dimension_error("input rank " + std::to_string(input.rank()) + " does not match model input " +
                              shape_to_string(m.input_shape) + " plus batch dim");
    for (std::size_t i = 0; i < m.input_shape.size(); ++i)
        if (input.dim(static_cast<int>(i) + 1) != m.input_shape[i])
            throw dimension_error("input shape " + shape_to_string(input.shape()) +
                                  " does not match model input " + shape_to_string(m.input_shape));
    ForwardTrace trace;
    trace.inputs.reserve(m.layers.size());
    Tensor cur = input;
    for (int k = 0; k < m.layer_count(); ++k) {
        trace.inputs.push_back(cur);
        try {
            cur = apply_layer(m.layers[k], cur);
        } catch (const dimension_error& e) {
            throw dimension_error("layer " + std::to_string(k) + " (" + to_string(m.layers[k].kind) +
                                  "): " + e.what());
        }
    }
    trace.output = std::move(cur);
    return trace;
}

// Composition of layer forwards; output is [batch, classes] for classifier
// heads (post-softmax when the head carries one).
inline Tensor model_forward(const Model& m, const Tensor& input) {
    return model_forward_trace(m, input).output;
}

// Forward stopping before the final softmax; equals model_forward for models
// without one.
inline Tensor model_logits(const Model& m, const Tensor& input) {
    if (m.layers.empty()) throw dimension_error("empty model");
    if (m.layers.back().activation != ActivationKind::softmax) return model_forward(m, input);
    Model headless = m;
    headless.layers.back().activation = ActivationKind::none;
    return model_forward(headless, input);
}

}  // namespace prunekit
