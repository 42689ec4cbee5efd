#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "prunekit/bounds.hpp"
#include "prunekit/errors.hpp"
#include "prunekit/interval.hpp"
#include "prunekit/model.hpp"
#include "prunekit/tensor.hpp"

namespace prunekit {

// How merge candidates are ordered within an epoch.
enum class Strategy {
    joint,            // combined rank of L1 impact and entropy deficit
    l1_only,          // ascending L1 impact alone
    entropy_only,     // ascending entropy deficit alone
    random_baseline,  // seeded shuffle, used as a control
};

inline std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::joint: return "joint";
        case Strategy::l1_only: return "l1_only";
        case Strategy::entropy_only: return "entropy_only";
        case Strategy::random_baseline: return "random_baseline";
    }
    return "?";
}

inline Strategy parse_strategy(const std::string& name) {
    if (name == "joint") return Strategy::joint;
    if (name == "l1_only") return Strategy::l1_only;
    if (name == "entropy_only") return Strategy::entropy_only;
    if (name == "random_baseline") return Strategy::random_baseline;
    throw config_error("unknown strategy '" + name +
                       "' (expected joint, l1_only, entropy_only or random_baseline)");
}

// One proposed merge: unit `drop_unit` of a dense layer is deleted and its
// outgoing weights are folded into `keep_unit`. `impact` bounds the change
// each logit can experience; `l1` and `entropy_deficit` are its summaries.
struct PairCandidate {
    int layer_index = 0;
    int drop_unit = 0;
    int keep_unit = 0;
    IntervalVector impact;
    double l1 = 0.0;
    double entropy_deficit = 0.0;

    int lo_unit() const { return std::min(drop_unit, keep_unit); }
    int hi_unit() const { return std::max(drop_unit, keep_unit); }
};

namespace detail {

// First dense layer after `layer_index`, or -1 when none exists (output
// layers and layers feeding conv/pool stages cannot be merged).
inline int next_dense_layer(const Model& m, int layer_index) {
    for (int k = layer_index + 1; k < m.layer_count(); ++k) {
        const LayerSpec& l = m.layers[static_cast<std::size_t>(k)];
        if (l.kind == LayerKind::dense) return k;
        if (l.kind == LayerKind::flatten) continue;
        return -1;
    }
    return -1;
}

inline void require_mergeable_dense(const Model& m, int layer_index) {
    if (layer_index < 0 || layer_index >= m.layer_count())
        throw dimension_error("layer index " + std::to_string(layer_index) + " out of range");
    const LayerSpec& l = m.layers[static_cast<std::size_t>(layer_index)];
    if (l.kind != LayerKind::dense)
        throw unsupported_error("layer " + std::to_string(layer_index) + " is " + to_string(l.kind) +
                                ", not dense");
    if (next_dense_layer(m, layer_index) < 0)
        throw unsupported_error("layer " + std::to_string(layer_index) +
                                " has no dense successor; its units cannot be merged");
}

}  // namespace detail

// L1 norm of the incoming weight column of one unit (bias excluded).
inline double incoming_column_l1(const Tensor& weights, int unit) {
    double sum = 0.0;
    for (int i = 0; i < weights.dim(0); ++i) sum += std::fabs(weights.at(i, unit));
    return sum;
}

// Interval on each logit's change caused by merging `drop_unit` into
// `keep_unit`. The pre-activation gap z_keep - z_drop is bounded as one
// linear form over the layer's input box (so shared inputs do not double
// count), widened to hull(0, .) for the relu, scaled by the dropped unit's
// outgoing weights, and pushed through the remaining dense layers with the
// same hull(0, .) rule. Propagation runs in double; the result is rounded
// outward to f32 intervals.
inline IntervalVector pair_impact(const Model& m, const ActivationBounds& bounds, int layer_index,
                                  int drop_unit, int keep_unit) {
    detail::require_mergeable_dense(m, layer_index);
    const LayerSpec& layer = m.layers[static_cast<std::size_t>(layer_index)];
    int width = layer.units();
    if (drop_unit < 0 || drop_unit >= width || keep_unit < 0 || keep_unit >= width)
        throw dimension_error("unit index out of range for width " + std::to_string(width));
    if (drop_unit == keep_unit)
        throw dimension_error("cannot merge unit " + std::to_string(drop_unit) + " with itself");

    // Gap of the two pre-activations over the input box, as a single linear
    // form with coefficients w_keep - w_drop (double accumulation, ascending
    // input index).
    const IntervalVector& in = bounds.layer_input(layer_index);
    detail::DInterval gap = detail::DInterval::point(static_cast<double>(layer.bias[keep_unit]) -
                                                     static_cast<double>(layer.bias[drop_unit]));
    for (int u = 0; u < layer.weights.dim(0); ++u) {
        double c = static_cast<double>(layer.weights.at(u, keep_unit)) -
                   static_cast<double>(layer.weights.at(u, drop_unit));
        detail::DInterval term = detail::DInterval::of(in[static_cast<std::size_t>(u)]).scaled(c);
        gap = gap + term;
    }
    if (layer.activation == ActivationKind::relu) gap = gap.hull_zero();

    // Pre-activation change at the next dense layer: only the dropped unit's
    // outgoing row matters, each entry scaled by the activation gap.
    int next = detail::next_dense_layer(m, layer_index);
    const LayerSpec& nl = m.layers[static_cast<std::size_t>(next)];
    std::vector<detail::DInterval> delta(static_cast<std::size_t>(nl.units()));
    for (int k = 0; k < nl.units(); ++k)
        delta[static_cast<std::size_t>(k)] = gap.scaled(static_cast<double>(nl.weights.at(drop_unit, k)));

    // Push through any remaining layers until the logits.
    int cursor = next;
    while (cursor != m.layer_count() - 1) {
        const LayerSpec& cur = m.layers[static_cast<std::size_t>(cursor)];
        if (cur.activation == ActivationKind::relu)
            for (auto& d : delta) d = d.hull_zero();
        int after = detail::next_dense_layer(m, cursor);
        if (after < 0)
            throw unsupported_error("cannot propagate merge impact past layer " + std::to_string(cursor));
        const LayerSpec& al = m.layers[static_cast<std::size_t>(after)];
        std::vector<detail::DInterval> out(static_cast<std::size_t>(al.units()));
        for (int k = 0; k < al.units(); ++k) {
            detail::DInterval acc = detail::DInterval::point(0.0);
            for (int u = 0; u < al.weights.dim(0); ++u)
                acc = acc + delta[static_cast<std::size_t>(u)].scaled(
                                static_cast<double>(al.weights.at(u, k)));
            out[static_cast<std::size_t>(k)] = acc;
        }
        delta = std::move(out);
        cursor = after;
    }

    IntervalVector impact;
    impact.reserve(delta.size());
    for (const auto& d : delta) impact.push_back(d.to_f32());
    return impact;
}

// L1 impact: sum over logits of the largest absolute change each can see.
inline double impact_l1(const IntervalVector& impact) {
    double sum = 0.0;
    for (const Interval& iv : impact) sum += static_cast<double>(iv.magnitude());
    return sum;
}

// How far the impact distribution is from uniform, in bits. A merge whose
// damage concentrates on few classes scores high and is pruned later.
inline double impact_entropy_deficit(const IntervalVector& impact) {
    if (impact.empty()) throw dimension_error("impact_entropy_deficit: empty impact vector");
    double sum = 0.0;
    for (const Interval& iv : impact) sum += static_cast<double>(iv.magnitude());
    if (sum == 0.0) return 0.0;
    double entropy = 0.0;
    for (const Interval& iv : impact) {
        double p = static_cast<double>(iv.magnitude()) / sum;
        if (p > 0.0) entropy -= p * std::log2(p);
    }
    return std::max(0.0, std::log2(static_cast<double>(impact.size())) - entropy);
}

// Candidate pairs for one dense layer. Small layers are enumerated
// exhaustively; wide ones only pair each unit with its nearest neighbours by
// incoming-weight distance. The member with the smaller incoming L1 norm is
// dropped (ties drop the higher index). Impacts are left unscored.
inline std::vector<PairCandidate> enumerate_dense_pairs(const Model& m, int layer_index,
                                                        int max_exhaustive_width = 256,
                                                        int knn_neighbors = 16) {
    detail::require_mergeable_dense(m, layer_index);
    const LayerSpec& layer = m.layers[static_cast<std::size_t>(layer_index)];
    int width = layer.units();
    if (width < 2) return {};

    std::vector<double> col_l1(static_cast<std::size_t>(width));
    for (int u = 0; u < width; ++u) col_l1[static_cast<std::size_t>(u)] = incoming_column_l1(layer.weights, u);

    std::set<std::pair<int, int>> pairs;
    if (width <= max_exhaustive_width) {
        for (int i = 0; i < width; ++i)
            for (int j = i + 1; j < width; ++j) pairs.emplace(i, j);
    } else {
        for (int u = 0; u < width; ++u) {
            // Squared euclidean distance between incoming columns.
            std::vector<std::pair<double, int>> dist;
            dist.reserve(static_cast<std::size_t>(width) - 1);
            for (int v = 0; v < width; ++v) {
                if (v == u) continue;
                double d2 = 0.0;
                for (int i = 0; i < layer.weights.dim(0); ++i) {
                    double d = static_cast<double>(layer.weights.at(i, u)) -
                               static_cast<double>(layer.weights.at(i, v));
                    d2 += d * d;
                }
                dist.emplace_back(d2, v);
            }
            int take = std::min<int>(knn_neighbors, static_cast<int>(dist.size()));
            std::partial_sort(dist.begin(), dist.begin() + take, dist.end());
            for (int t = 0; t < take; ++t)
                pairs.emplace(std::min(u, dist[static_cast<std::size_t>(t)].second),
                              std::max(u, dist[static_cast<std::size_t>(t)].second));
        }
    }

    std::vector<PairCandidate> out;
    out.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        PairCandidate c;
        c.layer_index = layer_index;
        double li = col_l1[static_cast<std::size_t>(i)], lj = col_l1[static_cast<std::size_t>(j)];
        if (li < lj) {
            c.drop_unit = i;
            c.keep_unit = j;
        } else if (lj < li) {
            c.drop_unit = j;
            c.keep_unit = i;
        } else {
            c.drop_unit = j;  // equal norms: the higher index dies
            c.keep_unit = i;
        }
        out.push_back(std::move(c));
    }
    return out;
}

// Fill impact intervals and both summary scores for every candidate.
inline void score_pair_candidates(const Model& m, const ActivationBounds& bounds,
                                  std::vector<PairCandidate>& candidates) {
    for (PairCandidate& c : candidates) {
        c.impact = pair_impact(m, bounds, c.layer_index, c.drop_unit, c.keep_unit);
        c.l1 = impact_l1(c.impact);
        c.entropy_deficit = impact_entropy_deficit(c.impact);
    }
}

namespace detail {

// Competition ranking ("1224"): tied values share the smallest rank.
inline std::vector<std::size_t> competition_ranks(const std::vector<double>& values) {
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> ranks(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), values[i]);
        ranks[i] = static_cast<std::size_t>(it - sorted.begin()) + 1;
    }
    return ranks;
}

inline bool candidate_id_less(const PairCandidate& a, const PairCandidate& b) {
    if (a.layer_index != b.layer_index) return a.layer_index < b.layer_index;
    if (a.lo_unit() != b.lo_unit()) return a.lo_unit() < b.lo_unit();
    return a.hi_unit() < b.hi_unit();
}

}  // namespace detail

// Order candidates so the cheapest merges come first. `seed` only matters
// for the random baseline; callers should vary it per epoch and layer.
inline std::vector<PairCandidate> rank_dense_pairs(std::vector<PairCandidate> candidates,
                                                   Strategy strategy, std::uint64_t seed = 0) {
    switch (strategy) {
        case Strategy::joint: {
            std::vector<double> l1s(candidates.size()), defs(candidates.size());
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                l1s[i] = candidates[i].l1;
                defs[i] = candidates[i].entropy_deficit;
            }
            auto r1 = detail::competition_ranks(l1s);
            auto r2 = detail::competition_ranks(defs);
            std::vector<std::size_t> idx(candidates.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                std::size_t sa = r1[a] + r2[a], sb = r1[b] + r2[b];
                if (sa != sb) return sa < sb;
                if (candidates[a].l1 != candidates[b].l1) return candidates[a].l1 < candidates[b].l1;
                return detail::candidate_id_less(candidates[a], candidates[b]);
            });
            std::vector<PairCandidate> out;
            out.reserve(candidates.size());
            for (std::size_t i : idx) out.push_back(std::move(candidates[i]));
            return out;
        }
        case Strategy::l1_only:
            std::sort(candidates.begin(), candidates.end(), [](const PairCandidate& a, const PairCandidate& b) {
                if (a.l1 != b.l1) return a.l1 < b.l1;
                return detail::candidate_id_less(a, b);
            });
            return candidates;
        case Strategy::entropy_only:
            std::sort(candidates.begin(), candidates.end(), [](const PairCandidate& a, const PairCandidate& b) {
                if (a.entropy_deficit != b.entropy_deficit) return a.entropy_deficit < b.entropy_deficit;
                return detail::candidate_id_less(a, b);
            });
            return candidates;
        case Strategy::random_baseline: {
            // Explicit Fisher-Yates so the permutation is identical on every
            // platform for a given seed.
            std::sort(candidates.begin(), candidates.end(), detail::candidate_id_less);
            std::mt19937_64 rng(seed);
            for (std::size_t i = candidates.size(); i > 1; --i)
                std::swap(candidates[i - 1], candidates[static_cast<std::size_t>(rng() % i)]);
            return candidates;
        }
    }
    throw config_error("unhandled strategy");
}

// Perform one merge: fold the dropped unit's outgoing weights into the
// survivor's, then remove the dropped unit's incoming column, bias entry and
// outgoing row. Downstream unit indices above `drop_unit` shift down by one.
inline Model merge_dense_pair(const Model& m, int layer_index, int drop_unit, int keep_unit) {
    detail::require_mergeable_dense(m, layer_index);
    const LayerSpec& layer = m.layers[static_cast<std::size_t>(layer_index)];
    int width = layer.units();
    if (drop_unit < 0 || drop_unit >= width || keep_unit < 0 || keep_unit >= width)
        throw dimension_error("unit index out of range for width " + std::to_string(width));
    if (drop_unit == keep_unit)
        throw dimension_error("cannot merge unit " + std::to_string(drop_unit) + " with itself");
    if (width < 2) throw surgery_error("refusing to remove the last unit of layer " + std::to_string(layer_index));

    Model out = m;
    LayerSpec& l = out.layers[static_cast<std::size_t>(layer_index)];

    // Incoming side: drop the column and bias entry of the dead unit.
    int fan_in = l.weights.dim(0);
    Tensor w({fan_in, width - 1});
    for (int i = 0; i < fan_in; ++i) {
        int c = 0;
        for (int j = 0; j < width; ++j) {
            if (j == drop_unit) continue;
            w.at(i, c++) = l.weights.at(i, j);
        }
    }
    l.weights = std::move(w);
    std::vector<float> bias;
    bias.reserve(static_cast<std::size_t>(width) - 1);
    for (int j = 0; j < width; ++j)
        if (j != drop_unit) bias.push_back(l.bias[j]);
    l.bias = Tensor({width - 1}, std::move(bias));

    // Outgoing side: survivor absorbs the dead unit's row, then the row goes.
    int next = detail::next_dense_layer(m, layer_index);
    LayerSpec& nl = out.layers[static_cast<std::size_t>(next)];
    int fan_out = nl.weights.dim(1);
    for (int k = 0; k < fan_out; ++k) nl.weights.at(keep_unit, k) += nl.weights.at(drop_unit, k);
    Tensor nw({width - 1, fan_out});
    int r = 0;
    for (int u = 0; u < width; ++u) {
        if (u == drop_unit) continue;
        for (int k = 0; k < fan_out; ++k) nw.at(r, k) = nl.weights.at(u, k);
        ++r;
    }
    nl.weights = std::move(nw);
    return out;
}

}  // namespace prunekit
