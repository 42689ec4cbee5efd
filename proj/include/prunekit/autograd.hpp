#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "prunekit/errors.hpp"
#include "prunekit/forward.hpp"
#include "prunekit/model.hpp"

namespace prunekit {

struct LayerGrads {
    Tensor weights;  // empty for flatten/maxpool
    Tensor bias;
};

struct Gradients {
    std::vector<LayerGrads> layers;
    Tensor input;  // d loss / d input, same shape as the batch
    double loss = 0.0;
};

namespace detail {

inline void require_softmax_head(const Model& m) {
    if (m.layers.empty() || m.layers.back().activation != ActivationKind::softmax)
        throw unsupported_error("cross-entropy loss requires a softmax head");
}

// Tensor-shaped double accumulator; gradients are summed here and cast to f32
// once at the end.
struct Accum {
    std::vector<int> shape;
    std::vector<double> data;

    explicit Accum(const std::vector<int>& s) : shape(s), data(static_cast<std::size_t>(shape_numel(s)), 0.0) {}

    Tensor to_tensor() const {
        Tensor t(shape);
        for (std::size_t i = 0; i < data.size(); ++i) t[static_cast<std::int64_t>(i)] = static_cast<float>(data[i]);
        return t;
    }
};

inline Tensor relu_backward(const Tensor& post_activation, const Tensor& grad) {
    Tensor out = grad;
    for (std::int64_t i = 0; i < out.numel(); ++i)
        if (post_activation[i] <= 0.0f) out[i] = 0.0f;
    return out;
}

}  // namespace detail

// Reverse-mode gradients of the summed cross-entropy loss over a batch.
// Returns per-layer weight/bias gradients and the input gradient.
inline Gradients backprop_cross_entropy(const Model& m, const Tensor& batch, const std::vector<int>& labels) {
    detail::require_softmax_head(m);
    if (batch.dim(0) != static_cast<int>(labels.size()))
        throw dimension_error("batch size does not match label count");
    ForwardTrace trace = model_forward_trace(m, batch);
    const Tensor& probs = trace.output;  // [batch, classes]
    int batch_n = probs.dim(0);
    int classes = probs.dim(1);

    Gradients grads;
    grads.layers.resize(m.layers.size());

    double loss = 0.0;
    // d loss / d logits for softmax + cross-entropy is probs - onehot.
    Tensor g({batch_n, classes});
    for (int r = 0; r < batch_n; ++r) {
        int label = labels[static_cast<std::size_t>(r)];
        if (label < 0 || label >= classes)
            throw dimension_error("label " + std::to_string(label) + " out of range for " +
                                  std::to_string(classes) + " classes");
        loss += -std::log(std::max(static_cast<double>(probs.at(r, label)), 1e-30));
        for (int c = 0; c < classes; ++c)
            g.at(r, c) = probs.at(r, c) - (c == label ? 1.0f : 0.0f);
    }
    grads.loss = loss;

    // g carries d loss / d (pre-activation) for the layer being processed on
    // entry to the dense/conv branches; between layers it is d loss / d input.
    for (int k = m.layer_count() - 1; k >= 0; --k) {
        const LayerSpec& layer = m.layers[k];
        const Tensor& x = trace.inputs[static_cast<std::size_t>(k)];
        switch (layer.kind) {
            case LayerKind::dense: {
                if (layer.activation == ActivationKind::relu) {
                    Tensor post = k + 1 < m.layer_count() ? trace.inputs[static_cast<std::size_t>(k) + 1]
                                                          : trace.output;
                    g = detail::relu_backward(post, g);
                }
                int in = layer.weights.dim(0), out = layer.weights.dim(1);
                detail::Accum dw(layer.weights.shape());
                detail::Accum db(layer.bias.shape());
                Tensor dx({batch_n, in});
                for (int r = 0; r < batch_n; ++r) {
                    for (int o = 0; o < out; ++o) {
                        double gz = g.at(r, o);
                        db.data[static_cast<std::size_t>(o)] += gz;
                        for (int i = 0; i < in; ++i)
                            dw.data[static_cast<std::size_t>(i) * out + o] += static_cast<double>(x.at(r, i)) * gz;
                    }
                    for (int i = 0; i < in; ++i) {
                        double acc = 0.0;
                        for (int o = 0; o < out; ++o)
                            acc += static_cast<double>(g.at(r, o)) * static_cast<double>(layer.weights.at(i, o));
                        dx.at(r, i) = static_cast<float>(acc);
                    }
                }
                grads.layers[static_cast<std::size_t>(k)] = {dw.to_tensor(), db.to_tensor()};
                g = std::move(dx);
                break;
            }
            case LayerKind::conv2d: {
                if (layer.activation == ActivationKind::relu) {
                    Tensor post = k + 1 < m.layer_count() ? trace.inputs[static_cast<std::size_t>(k) + 1]
                                                          : trace.output;
                    g = detail::relu_backward(post, g);
                }
                int h = x.dim(1), w = x.dim(2), ic = x.dim(3);
                int kh = layer.weights.dim(0), kw = layer.weights.dim(1), oc = layer.weights.dim(3);
                int oh = g.dim(1), ow = g.dim(2);
                int pad_t = layer.padding == Padding::same ? same_pad_before(h, kh, layer.stride) : 0;
                int pad_l = layer.padding == Padding::same ? same_pad_before(w, kw, layer.stride) : 0;
                detail::Accum dk(layer.weights.shape());
                detail::Accum db(layer.bias.shape());
                detail::Accum dxa(x.shape());
                for (int b = 0; b < batch_n; ++b)
                    for (int y = 0; y < oh; ++y)
                        for (int xx = 0; xx < ow; ++xx)
                            for (int o = 0; o < oc; ++o) {
                                double gz = g.at4(b, y, xx, o);
                                if (gz == 0.0) continue;
                                db.data[static_cast<std::size_t>(o)] += gz;
                                for (int ky = 0; ky < kh; ++ky) {
                                    int iy = y * layer.stride - pad_t + ky;
                                    if (iy < 0 || iy >= h) continue;
                                    for (int kx = 0; kx < kw; ++kx) {
                                        int ix = xx * layer.stride - pad_l + kx;
                                        if (ix < 0 || ix >= w) continue;
                                        for (int c = 0; c < ic; ++c) {
                                            dk.data[static_cast<std::size_t>(layer.weights.index4(ky, kx, c, o))] +=
                                                static_cast<double>(x.at4(b, iy, ix, c)) * gz;
                                            dxa.data[static_cast<std::size_t>(x.index4(b, iy, ix, c))] +=
                                                static_cast<double>(layer.weights.at4(ky, kx, c, o)) * gz;
                                        }
                                    }
                                }
                            }
                grads.layers[static_cast<std::size_t>(k)] = {dk.to_tensor(), db.to_tensor()};
                g = dxa.to_tensor();
                break;
            }
            case LayerKind::flatten: {
                g = g.reshaped(x.shape());
                break;
            }
            case LayerKind::maxpool2d: {
                // Route gradient to the first maximum in window scan order;
                // windows mirror maxpool2d_forward (clamped at the borders).
                int h = x.dim(1), w = x.dim(2), ch = x.dim(3);
                int oh = g.dim(1), ow = g.dim(2);
                int pad_t = same_pad_before(h, layer.pool, layer.stride);
                int pad_l = same_pad_before(w, layer.pool, layer.stride);
                Tensor dx(x.shape());
                for (int b = 0; b < batch_n; ++b)
                    for (int y = 0; y < oh; ++y)
                        for (int xx = 0; xx < ow; ++xx)
                            for (int c = 0; c < ch; ++c) {
                                int best_y = -1, best_x = -1;
                                float best = 0.0f;
                                for (int py = 0; py < layer.pool; ++py) {
                                    int iy = y * layer.stride - pad_t + py;
                                    if (iy < 0 || iy >= h) continue;
                                    for (int px = 0; px < layer.pool; ++px) {
                                        int ix = xx * layer.stride - pad_l + px;
                                        if (ix < 0 || ix >= w) continue;
                                        if (best_y < 0 || x.at4(b, iy, ix, c) > best) {
                                            best = x.at4(b, iy, ix, c);
                                            best_y = iy;
                                            best_x = ix;
                                        }
                                    }
                                }
                                dx.at4(b, best_y, best_x, c) += g.at4(b, y, xx, c);
                            }
                g = std::move(dx);
                break;
            }
        }
    }
    grads.input = std::move(g);
    return grads;
}

// Gradient of the cross-entropy loss w.r.t. a single input sample [1, ...].
inline Tensor input_gradient(const Model& m, const Tensor& input, int label) {
    if (input.dim(0) != 1) throw dimension_error("input_gradient expects a single-sample batch [1, ...]");
    return backprop_cross_entropy(m, input, {label}).input;
}

// Per-layer weight/bias gradients summed over the batch.
inline std::vector<LayerGrads> parameter_gradients(const Model& m, const Tensor& batch,
                                                   const std::vector<int>& labels) {
    return backprop_cross_entropy(m, batch, labels).layers;
}

}  // namespace prunekit
