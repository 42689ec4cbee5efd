#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "prunekit/errors.hpp"
#include "prunekit/model.hpp"
#include "prunekit/tensor.hpp"

namespace prunekit {

// Saliency of one conv output channel: the sum of L1 norms of every filter
// slice feeding it. Small scale = weak channel = pruned first.
struct ChannelScore {
    int layer_index = 0;
    int channel = 0;
    float scale = 0.0f;
};

inline std::vector<ChannelScore> channel_scales(const Model& m, int layer_index) {
    if (layer_index < 0 || layer_index >= m.layer_count())
        throw dimension_error("layer index " + std::to_string(layer_index) + " out of range");
    const LayerSpec& layer = m.layers[static_cast<std::size_t>(layer_index)];
    if (layer.kind != LayerKind::conv2d)
        throw unsupported_error("channel_scales: layer " + std::to_string(layer_index) + " is " +
                                to_string(layer.kind) + ", not conv2d");
    int kh = layer.weights.dim(0), kw = layer.weights.dim(1), ic = layer.weights.dim(2), oc = layer.weights.dim(3);
    std::vector<ChannelScore> scores(static_cast<std::size_t>(oc));
    for (int o = 0; o < oc; ++o) {
        double sum = 0.0;
        for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx)
                for (int c = 0; c < ic; ++c) sum += std::fabs(layer.weights.at4(ky, kx, c, o));
        scores[static_cast<std::size_t>(o)] = {layer_index, o, static_cast<float>(sum)};
    }
    return scores;
}

// Channels ordered for pruning: ascending scale, ties broken by lower index.
inline std::vector<int> rank_conv_channels(std::vector<ChannelScore> scores) {
    if (scores.empty()) throw dimension_error("rank_conv_channels: empty score list");
    std::stable_sort(scores.begin(), scores.end(), [](const ChannelScore& a, const ChannelScore& b) {
        if (a.scale != b.scale) return a.scale < b.scale;
        return a.channel < b.channel;
    });
    std::vector<int> order(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) order[i] = scores[i].channel;
    return order;
}

namespace detail {

// Remove index `idx` along axis `axis` of a rank-4 tensor.
inline Tensor drop_axis4(const Tensor& t, int axis, int idx) {
    std::vector<int> shape = t.shape();
    shape[static_cast<std::size_t>(axis)] -= 1;
    Tensor out(shape);
    std::int64_t w = 0;
    for (int a = 0; a < t.dim(0); ++a)
        for (int b = 0; b < t.dim(1); ++b)
            for (int c = 0; c < t.dim(2); ++c)
                for (int d = 0; d < t.dim(3); ++d) {
                    int pos[4] = {a, b, c, d};
                    if (pos[axis] == idx) continue;
                    out[w++] = t.at4(a, b, c, d);
                }
    return out;
}

inline Tensor drop_vector_entry(const Tensor& v, int idx) {
    std::vector<float> data;
    data.reserve(static_cast<std::size_t>(v.numel()) - 1);
    for (std::int64_t i = 0; i < v.numel(); ++i)
        if (i != idx) data.push_back(v[i]);
    return Tensor({static_cast<int>(v.numel()) - 1}, std::move(data));
}

// Remove a set of rows from dense weights [in, out]; `keep` marks survivors.
inline Tensor drop_dense_rows(const Tensor& w, const std::vector<bool>& keep) {
    int in = w.dim(0), out = w.dim(1);
    int kept = static_cast<int>(std::count(keep.begin(), keep.end(), true));
    Tensor result({kept, out});
    int r = 0;
    for (int i = 0; i < in; ++i) {
        if (!keep[static_cast<std::size_t>(i)]) continue;
        for (int o = 0; o < out; ++o) result.at(r, o) = w.at(i, o);
        ++r;
    }
    return result;
}

}  // namespace detail

// Delete output channel `channel` of conv layer `layer_index` and repair the
// first parametric layer downstream: a following conv loses the matching
// kernel input slice; a dense layer reached through flatten loses the weight
// rows at flat indices (h*W + w)*C + channel for every spatial position of
// the feature map entering the flatten (pooling passes the channel through).
inline Model prune_conv_channel(const Model& m, int layer_index, int channel) {
    if (layer_index < 0 || layer_index >= m.layer_count())
        throw dimension_error("layer index " + std::to_string(layer_index) + " out of range");
    const LayerSpec& conv = m.layers[static_cast<std::size_t>(layer_index)];
    if (conv.kind != LayerKind::conv2d)
        throw unsupported_error("prune_conv_channel: layer " + std::to_string(layer_index) + " is not conv2d");
    int oc = conv.weights.dim(3);
    if (channel < 0 || channel >= oc)
        throw dimension_error("channel " + std::to_string(channel) + " out of range for " + std::to_string(oc) +
                              " channels");
    if (oc <= 1)
        throw surgery_error("refusing to remove the last channel of layer " + std::to_string(layer_index));

    auto shapes = shape_chain(m);
    Model out = m;
    LayerSpec& c = out.layers[static_cast<std::size_t>(layer_index)];
    c.weights = detail::drop_axis4(c.weights, 3, channel);
    c.bias = detail::drop_vector_entry(c.bias, channel);

    // Spatial extent of the (pre-deletion) feature map as it flows downstream.
    int fh = shapes[static_cast<std::size_t>(layer_index)][0];
    int fw = shapes[static_cast<std::size_t>(layer_index)][1];
    for (int k = layer_index + 1; k < m.layer_count(); ++k) {
        LayerSpec& next = out.layers[static_cast<std::size_t>(k)];
        switch (next.kind) {
            case LayerKind::maxpool2d:
                fh = shapes[static_cast<std::size_t>(k)][0];
                fw = shapes[static_cast<std::size_t>(k)][1];
                continue;
            case LayerKind::flatten:
                continue;
            case LayerKind::conv2d:
                next.weights = detail::drop_axis4(next.weights, 2, channel);
                return out;
            case LayerKind::dense: {
                std::vector<bool> keep(static_cast<std::size_t>(next.weights.dim(0)), true);
                for (int y = 0; y < fh; ++y)
                    for (int x = 0; x < fw; ++x)
                        keep[static_cast<std::size_t>((y * fw + x) * oc + channel)] = false;
                next.weights = detail::drop_dense_rows(next.weights, keep);
                return out;
            }
        }
    }
    throw surgery_error("conv layer " + std::to_string(layer_index) +
                        " has no downstream parametric layer to repair");
}

}  // namespace prunekit
