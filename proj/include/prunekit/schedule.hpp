#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "prunekit/bounds.hpp"
#include "prunekit/channel_prune.hpp"
#include "prunekit/errors.hpp"
#include "prunekit/model.hpp"
#include "prunekit/pair_prune.hpp"

namespace prunekit {

// Epoch-wise pruning plan. Every prunable layer loses `step` of its original
// width per epoch until `target` is reached; counts are rounded down, and a
// layer is never emptied completely.
struct PruneConfig {
    double target = 0.5;
    double step = 0.05;
    Strategy strategy = Strategy::joint;
    std::uint64_t seed = 0;
    int max_exhaustive_width = 256;
    int knn_neighbors = 16;
    float box_lo = 0.0f;  // input box for impact estimation
    float box_hi = 1.0f;
};

inline void validate(const PruneConfig& cfg) {
    if (!(cfg.target > 0.0) || !(cfg.target <= 1.0))
        throw config_error("target fraction must be in (0, 1], got " + std::to_string(cfg.target));
    if (!(cfg.step > 0.0) || !(cfg.step <= cfg.target))
        throw config_error("step fraction must be in (0, target], got " + std::to_string(cfg.step));
    if (cfg.knn_neighbors < 1) throw config_error("knn_neighbors must be at least 1");
    if (cfg.max_exhaustive_width < 2) throw config_error("max_exhaustive_width must be at least 2");
    if (!(cfg.box_lo <= cfg.box_hi)) throw config_error("input box is inverted");
}

inline int epoch_count(const PruneConfig& cfg) {
    validate(cfg);
    // Small slack so exact ratios like 0.5 / 0.05 do not round to an extra
    // epoch.
    return static_cast<int>(std::ceil(cfg.target / cfg.step - 1e-9));
}

// Scheduled cumulative fraction after `epoch` epochs.
inline double scheduled_fraction(const PruneConfig& cfg, int epoch) {
    return std::min(static_cast<double>(epoch) * cfg.step, cfg.target);
}

// One structural edit: a conv channel removed, or a dense unit merged away.
// Indices refer to the model as it was immediately before this edit.
struct SurgeryRecord {
    int epoch = 0;
    int layer_index = 0;
    LayerKind kind = LayerKind::dense;
    int removed_index = 0;
    int merged_into = -1;       // survivor unit; -1 for conv channels
    double score_l1 = 0.0;      // impact L1 (dense) or channel scale (conv)
    double score_deficit = 0.0; // entropy deficit (dense only)
};

struct EpochSummary {
    int epoch = 0;
    double fraction_pruned = 0.0;
    std::vector<SurgeryRecord> surgeries;
};

struct ScheduleState {
    Model model;
    PruneConfig config;
    std::vector<int> original_widths;  // 0 marks layers the schedule skips
    std::vector<int> removed;          // cumulative removals per layer
    int epoch = 0;
};

namespace detail {

// Conv layers need some parametric layer downstream to absorb the deleted
// channel; dense layers need a dense successor to absorb merged units.
inline bool conv_prunable(const Model& m, int layer_index) {
    for (int k = layer_index + 1; k < m.layer_count(); ++k) {
        LayerKind kind = m.layers[static_cast<std::size_t>(k)].kind;
        if (kind == LayerKind::conv2d || kind == LayerKind::dense) return true;
    }
    return false;
}

inline bool layer_prunable(const Model& m, int layer_index) {
    const LayerSpec& l = m.layers[static_cast<std::size_t>(layer_index)];
    if (l.kind == LayerKind::conv2d) return conv_prunable(m, layer_index);
    if (l.kind == LayerKind::dense) return next_dense_layer(m, layer_index) >= 0;
    return false;
}

// Per-layer shuffle seeds for the random baseline.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t x = seed + 0x9E3779B97F4A7C15ull * (a + 1) + 0xBF58476D1CE4E5B9ull * (b + 1) +
                      0x94D049BB133111EBull * (c + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

}  // namespace detail

inline ScheduleState init_schedule_state(const Model& m, const PruneConfig& cfg) {
    validate(cfg);
    validate(m);
    ScheduleState state;
    state.model = m;
    state.config = cfg;
    state.original_widths.assign(static_cast<std::size_t>(m.layer_count()), 0);
    state.removed.assign(static_cast<std::size_t>(m.layer_count()), 0);
    bool any = false;
    for (int l = 0; l < m.layer_count(); ++l) {
        if (!detail::layer_prunable(m, l)) continue;
        state.original_widths[static_cast<std::size_t>(l)] = m.layers[static_cast<std::size_t>(l)].units();
        any = true;
    }
    if (!any) throw unsupported_error("nothing to prune: model has no conv channels or dense hidden units");
    return state;
}

namespace detail {

// Cumulative removals layer `l` should have seen after `epoch` epochs.
inline int cumulative_quota(const PruneConfig& cfg, int original, int epoch) {
    double frac = scheduled_fraction(cfg, epoch);
    int by_fraction = static_cast<int>(std::floor(frac * static_cast<double>(original) + 1e-9));
    int cap = static_cast<int>(std::floor(cfg.target * static_cast<double>(original) + 1e-9));
    return std::min({by_fraction, cap, original - 1});
}

inline bool strategy_needs_impacts(Strategy s) { return s != Strategy::random_baseline; }

// Remove `count` dense units from layer `l` of `work`. Candidates are
// ranked once, then disjoint pairs are taken greedily; if the ranked list
// runs dry (possible under sparse neighbour graphs) the remainder is
// re-ranked on the updated model.
inline void prune_dense_units(Model& work, int l, int count, const PruneConfig& cfg, int epoch,
                              std::vector<SurgeryRecord>& log) {
    int remaining = count;
    int round = 0;
    while (remaining > 0) {
        auto candidates = enumerate_dense_pairs(work, l, cfg.max_exhaustive_width, cfg.knn_neighbors);
        if (candidates.empty())
            throw surgery_error("layer " + std::to_string(l) + " ran out of mergeable unit pairs");
        if (strategy_needs_impacts(cfg.strategy)) {
            ActivationBounds bounds = activation_bounds(work, default_input_box(work, cfg.box_lo, cfg.box_hi));
            score_pair_candidates(work, bounds, candidates);
        }
        auto ranked = rank_dense_pairs(std::move(candidates), cfg.strategy,
                                       mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch),
                                                static_cast<std::uint64_t>(l),
                                                static_cast<std::uint64_t>(round)));

        // Greedy disjoint selection in rank order.
        std::unordered_set<int> consumed;
        std::vector<PairCandidate> merges;  // pre-merge indices
        for (const PairCandidate& c : ranked) {
            if (static_cast<int>(merges.size()) == remaining) break;
            if (consumed.count(c.drop_unit) || consumed.count(c.keep_unit)) continue;
            consumed.insert(c.drop_unit);
            consumed.insert(c.keep_unit);
            merges.push_back(c);
        }

        // Apply in selection order, shifting indices past earlier deletions.
        std::vector<int> deleted;
        for (const PairCandidate& c : merges) {
            auto shift = [&deleted](int idx) {
                int s = 0;
                for (int d : deleted) s += d < idx ? 1 : 0;
                return idx - s;
            };
            int drop_now = shift(c.drop_unit), keep_now = shift(c.keep_unit);
            work = merge_dense_pair(work, l, drop_now, keep_now);
            log.push_back({epoch, l, LayerKind::dense, drop_now, keep_now, c.l1, c.entropy_deficit});
            deleted.push_back(c.drop_unit);
        }
        remaining -= static_cast<int>(merges.size());
        ++round;
    }
}

}  // namespace detail

// Advance the schedule by one epoch. The state is only updated when the
// whole epoch succeeds.
inline EpochSummary prune_epoch(ScheduleState& state) {
    const PruneConfig& cfg = state.config;
    int epoch = state.epoch + 1;
    if (epoch > epoch_count(cfg)) throw surgery_error("pruning schedule is already complete");

    Model work = state.model;
    std::vector<int> removed = state.removed;
    EpochSummary summary;
    summary.epoch = epoch;
    summary.fraction_pruned = scheduled_fraction(cfg, epoch);

    for (int l = 0; l < work.layer_count(); ++l) {
        int original = state.original_widths[static_cast<std::size_t>(l)];
        if (original == 0) continue;
        int quota = detail::cumulative_quota(cfg, original, epoch);
        int need = quota - removed[static_cast<std::size_t>(l)];
        if (need <= 0) continue;

        if (work.layers[static_cast<std::size_t>(l)].kind == LayerKind::conv2d) {
            // Channel-scale ranking for conv layers under every strategy.
            for (int n = 0; n < need; ++n) {
                auto scores = channel_scales(work, l);
                auto order = rank_conv_channels(scores);
                double scale = scores[static_cast<std::size_t>(order.front())].scale;
                work = prune_conv_channel(work, l, order.front());
                summary.surgeries.push_back({epoch, l, LayerKind::conv2d, order.front(), -1, scale, 0.0});
            }
        } else {
            detail::prune_dense_units(work, l, need, cfg, epoch, summary.surgeries);
        }
        removed[static_cast<std::size_t>(l)] += need;
    }

    validate(work);
    state.model = std::move(work);
    state.removed = std::move(removed);
    state.epoch = epoch;
    return summary;
}

struct ScheduleResult {
    Model model;
    std::vector<EpochSummary> epochs;
};

// Called with (epoch, scheduled fraction, model) after every completed epoch.
using EvalHook = std::function<void(int, double, const Model&)>;

inline ScheduleResult run_schedule(const Model& m, const PruneConfig& cfg, const EvalHook& hook = {}) {
    ScheduleState state = init_schedule_state(m, cfg);
    ScheduleResult result;
    int total = epoch_count(cfg);
    result.epochs.reserve(static_cast<std::size_t>(total));
    for (int e = 0; e < total; ++e) {
        result.epochs.push_back(prune_epoch(state));
        if (hook) hook(state.epoch, result.epochs.back().fraction_pruned, state.model);
    }
    result.model = std::move(state.model);
    return result;
}

}  // namespace prunekit
