#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "prunekit/errors.hpp"
#include "prunekit/interval.hpp"
#include "prunekit/model.hpp"
#include "prunekit/tensor.hpp"

namespace prunekit {

// Sound interval image of an affine layer: any concrete x inside the input
// intervals maps inside the output intervals. Accumulation mirrors
// dense_forward (double, ascending input index) so the containment also holds
// against the engine's rounded f32 activations.
inline IntervalVector interval_affine(const IntervalVector& in, const Tensor& weights, const Tensor& bias) {
    if (weights.rank() != 2 || bias.rank() != 1 || bias.dim(0) != weights.dim(1))
        throw dimension_error("interval_affine: malformed parameters");
    if (static_cast<int>(in.size()) != weights.dim(0))
        throw dimension_error("interval_affine: input length " + std::to_string(in.size()) +
                              " vs weights " + shape_to_string(weights.shape()));
    int n_in = weights.dim(0), n_out = weights.dim(1);
    IntervalVector out(static_cast<std::size_t>(n_out));
    for (int o = 0; o < n_out; ++o) {
        double lo = bias[o], hi = bias[o];
        for (int i = 0; i < n_in; ++i) {
            double w = weights.at(i, o);
            const Interval& iv = in[static_cast<std::size_t>(i)];
            if (w >= 0.0) {
                lo += w * iv.lo;
                hi += w * iv.hi;
            } else {
                lo += w * iv.hi;
                hi += w * iv.lo;
            }
        }
        out[static_cast<std::size_t>(o)] = detail::DInterval{lo, hi}.to_f32();
    }
    return out;
}

inline IntervalVector interval_relu(IntervalVector v) {
    for (Interval& iv : v) iv = Interval(std::max(iv.lo, 0.0f), std::max(iv.hi, 0.0f));
    return v;
}

namespace detail {

// Interval counterpart of conv2d_forward over a flat [h,w,c] interval grid.
inline IntervalVector interval_conv2d(const IntervalVector& in, int h, int w, const LayerSpec& layer) {
    const Tensor& kernel = layer.weights;
    int kh = kernel.dim(0), kw = kernel.dim(1), ic = kernel.dim(2), oc = kernel.dim(3);
    int oh = conv_out_extent(h, kh, layer.stride, layer.padding);
    int ow = conv_out_extent(w, kw, layer.stride, layer.padding);
    int pad_t = layer.padding == Padding::same ? same_pad_before(h, kh, layer.stride) : 0;
    int pad_l = layer.padding == Padding::same ? same_pad_before(w, kw, layer.stride) : 0;
    IntervalVector out(static_cast<std::size_t>(oh) * ow * oc);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            for (int o = 0; o < oc; ++o) {
                double lo = layer.bias[o], hi = layer.bias[o];
                for (int ky = 0; ky < kh; ++ky) {
                    int iy = y * layer.stride - pad_t + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < kw; ++kx) {
                        int ix = x * layer.stride - pad_l + kx;
                        if (ix < 0 || ix >= w) continue;
                        for (int c = 0; c < ic; ++c) {
                            double wv = kernel.at4(ky, kx, c, o);
                            const Interval& iv = in[static_cast<std::size_t>((iy * w + ix) * ic + c)];
                            if (wv >= 0.0) {
                                lo += wv * iv.lo;
                                hi += wv * iv.hi;
                            } else {
                                lo += wv * iv.hi;
                                hi += wv * iv.lo;
                            }
                        }
                    }
                }
                out[static_cast<std::size_t>((y * ow + x) * oc + o)] = DInterval{lo, hi}.to_f32();
            }
    return out;
}

// Interval max over the same clamped windows maxpool2d_forward uses.
inline IntervalVector interval_maxpool2d(const IntervalVector& in, int h, int w, int ch, int pool, int stride) {
    int oh = conv_out_extent(h, pool, stride, Padding::same);
    int ow = conv_out_extent(w, pool, stride, Padding::same);
    int pad_t = same_pad_before(h, pool, stride);
    int pad_l = same_pad_before(w, pool, stride);
    IntervalVector out(static_cast<std::size_t>(oh) * ow * ch);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            for (int c = 0; c < ch; ++c) {
                float lo = -std::numeric_limits<float>::infinity();
                float hi = -std::numeric_limits<float>::infinity();
                for (int py = 0; py < pool; ++py) {
                    int iy = y * stride - pad_t + py;
                    if (iy < 0 || iy >= h) continue;
                    for (int px = 0; px < pool; ++px) {
                        int ix = x * stride - pad_l + px;
                        if (ix < 0 || ix >= w) continue;
                        const Interval& iv = in[static_cast<std::size_t>((iy * w + ix) * ch + c)];
                        lo = std::max(lo, iv.lo);
                        hi = std::max(hi, iv.hi);
                    }
                }
                out[static_cast<std::size_t>((y * ow + x) * ch + c)] = Interval(lo, hi);
            }
    return out;
}

}  // namespace detail

// Per-layer activation bounds over a declared input box (flat, row-major,
// one interval per feature). layers[k] bounds the post-activation output of
// layer k; for a softmax head the entry holds logit bounds instead, since
// everything downstream of the propagation consumes logits.
struct ActivationBounds {
    IntervalVector input;
    std::vector<IntervalVector> layers;

    // What layer l consumes.
    const IntervalVector& layer_input(int l) const {
        return l == 0 ? input : layers[static_cast<std::size_t>(l) - 1];
    }
};

inline ActivationBounds activation_bounds(const Model& m, const IntervalVector& input_box) {
    validate(m);
    if (static_cast<std::int64_t>(input_box.size()) != shape_numel(m.input_shape))
        throw dimension_error("input box has " + std::to_string(input_box.size()) + " intervals, model input " +
                              shape_to_string(m.input_shape) + " needs " + std::to_string(shape_numel(m.input_shape)));
    auto shapes = shape_chain(m);

    ActivationBounds bounds;
    bounds.input = input_box;
    bounds.layers.reserve(m.layers.size());
    IntervalVector cur = input_box;
    std::vector<int> cur_shape = m.input_shape;
    for (int k = 0; k < m.layer_count(); ++k) {
        const LayerSpec& layer = m.layers[k];
        switch (layer.kind) {
            case LayerKind::dense:
                cur = interval_affine(cur, layer.weights, layer.bias);
                if (layer.activation == ActivationKind::relu) cur = interval_relu(std::move(cur));
                break;
            case LayerKind::conv2d:
                cur = detail::interval_conv2d(cur, cur_shape[0], cur_shape[1], layer);
                if (layer.activation == ActivationKind::relu) cur = interval_relu(std::move(cur));
                break;
            case LayerKind::flatten:
                break;  // row-major flat order is already the storage order
            case LayerKind::maxpool2d:
                cur = detail::interval_maxpool2d(cur, cur_shape[0], cur_shape[1], cur_shape[2], layer.pool,
                                                 layer.stride);
                break;
        }
        cur_shape = shapes[static_cast<std::size_t>(k)];
        bounds.layers.push_back(cur);
    }
    return bounds;
}

// Default estimation box: [lo, hi] on every input feature.
inline IntervalVector default_input_box(const Model& m, float lo = 0.0f, float hi = 1.0f) {
    return uniform_box(shape_numel(m.input_shape), lo, hi);
}

}  // namespace prunekit
