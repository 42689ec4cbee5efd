// Acceptance gate: one executable check per release criterion, printing a
// single PASS/FAIL line each. argv[1] must point at the prunekit CLI binary
// (the build wires in the target location). Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli_utils.hpp"
#include "test_utils.hpp"

namespace pk = prunekit;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

pk::PruneConfig make_cfg(double target, double step, pk::Strategy strategy, std::uint64_t seed = 0) {
    pk::PruneConfig cfg;
    cfg.target = target;
    cfg.step = step;
    cfg.strategy = strategy;
    cfg.seed = seed;
    return cfg;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------- criterion 1

void criterion_param_arithmetic(tc::Suite& s) {
    // 100-100-100-10 mlp: 21210 parameters, exactly 8110 after halving both
    // hidden layers.
    std::mt19937_64 rng(1001);
    pk::Model m = tu::random_mlp(rng, {100, 100, 100, 10});
    s.expect_eq(pk::param_count(m), static_cast<std::int64_t>(21210), "initial parameter count");

    auto t0 = std::chrono::steady_clock::now();
    pk::ScheduleResult res = pk::run_schedule(m, make_cfg(0.5, 0.05, pk::Strategy::random_baseline, 1));
    double elapsed = seconds_since(t0);

    s.expect_eq(res.epochs.size(), std::size_t{10}, "epoch count");
    s.expect_eq(pk::param_count(res.model), static_cast<std::int64_t>(8110), "final parameter count");
    s.expect_eq(res.model.layers[0].units(), 50, "hidden layer 0 width");
    s.expect_eq(res.model.layers[1].units(), 50, "hidden layer 1 width");
    s.expect(elapsed < 1.0, "structural pruning took " + fmt(elapsed) + "s, budget 1s");

    // Mixed fixtures land in the 55-80% size-reduction band at 50% width.
    struct Fixture {
        std::string name;
        pk::Model model;
        std::int64_t before;
        std::int64_t after;
    };
    std::vector<Fixture> fixtures;
    fixtures.push_back({"mlp 20-64-64-64-2", tu::random_mlp(rng, {20, 64, 64, 64, 2}), 9794, 2850});
    fixtures.push_back({"mlp 32-48-48-6", tu::random_mlp(rng, {32, 48, 48, 6}), 4230, 1542});
    fixtures.push_back({"cnn 16,32/64 on 12x12", tu::random_cnn(rng, 12, 12, 1, {16, 32}, {64}, 5), 23621, 6053});
    fixtures.push_back({"cnn 8/32 on 8x8", tu::random_cnn(rng, 8, 8, 1, {8}, {32}, 3), 4307, 1131});

    for (const Fixture& f : fixtures) {
        s.expect_eq(pk::param_count(f.model), f.before, f.name + " initial params");
        pk::ScheduleResult r = pk::run_schedule(f.model, make_cfg(0.5, 0.05, pk::Strategy::random_baseline, 1));
        s.expect_eq(pk::param_count(r.model), f.after, f.name + " final params");
        double reduction =
            1.0 - static_cast<double>(pk::param_count(r.model)) / static_cast<double>(f.before);
        s.expect(reduction >= 0.55 && reduction <= 0.80,
                 f.name + " reduction " + fmt(100.0 * reduction) + "% outside the 55-80% band");
    }
}

// ---------------------------------------------------------------- criterion 2

void criterion_cli_schedule(tc::Suite& s, const std::string& cli) {
    tu::TempDir dir;
    std::mt19937_64 rng(1002);
    pk::Model m = tu::random_mlp(rng, {4, 20, 20, 3});
    pk::save_model(m, dir.file("in.pdm"));

    tc::CliResult r = tc::run_cli(cli, "prune --model '" + dir.file("in.pdm") + "' -o '" +
                                           dir.file("out.pdm") + "' --report '" + dir.file("r.csv") + "'");
    s.expect_eq(r.exit_code, 0, "prune exit code (output: " + r.output + ")");

    auto lines = tc::split_lines(tu::read_text(dir.file("r.csv")));
    s.expect_eq(lines.size(), std::size_t{11}, "csv line count (header + 10 epochs)");
    if (lines.empty()) return;
    s.expect_eq(lines[0], std::string("epoch,fraction_pruned,param_count,file_size_bytes,test_accuracy,fgsm_accuracy"),
                "csv header");

    std::int64_t prev_params = pk::param_count(m);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto cells = tc::split_csv_row(lines[i]);
        if (cells.size() != 6) {
            s.expect(false, "row " + std::to_string(i) + " has " + std::to_string(cells.size()) + " cells");
            continue;
        }
        s.expect_eq(cells[0], std::to_string(i), "epoch column of row " + std::to_string(i));
        char want[16];
        std::snprintf(want, sizeof want, "%.2f", 0.05 * static_cast<double>(i));
        s.expect_eq(cells[1], std::string(want), "fraction column of row " + std::to_string(i));
        std::int64_t params = std::stoll(cells[2]);
        s.expect(params < prev_params, "params must shrink every epoch (row " + std::to_string(i) + ")");
        prev_params = params;
        s.expect(cells[4].empty() && cells[5].empty(),
                 "accuracy cells must stay empty without a dataset (row " + std::to_string(i) + ")");
    }

    pk::Model out = pk::load_model(dir.file("out.pdm"));
    s.expect_eq(out.layers[0].units(), 10, "pruned hidden width 0");
    s.expect_eq(out.layers[1].units(), 10, "pruned hidden width 1");
}

// ---------------------------------------------------------------- criterion 3

void criterion_accuracy_decay(tc::Suite& s) {
    auto t0 = std::chrono::steady_clock::now();
    constexpr int kSeeds = 5;
    constexpr int kEpochs = 5;  // target 0.25 in 0.05 steps

    double clean_sum = 0.0;
    std::vector<double> joint_sum(kEpochs, 0.0), random_sum(kEpochs, 0.0);

    for (int seed = 1; seed <= kSeeds; ++seed) {
        pk::Dataset train = pk::synthetic_dataset(static_cast<std::uint64_t>(seed), 600, 2);
        pk::Dataset held = pk::synthetic_dataset(static_cast<std::uint64_t>(seed + 100), 400, 2);

        pk::TrainOptions opts;
        opts.epochs = 10;
        opts.seed = static_cast<std::uint64_t>(seed);
        pk::Model m = pk::train_fixture("mlp:32,32", train, opts);
        clean_sum += pk::accuracy(m, held);

        auto measure = [&](pk::Strategy strategy, std::vector<double>& acc) {
            pk::run_schedule(m, make_cfg(0.25, 0.05, strategy, static_cast<std::uint64_t>(seed)),
                             [&](int epoch, double, const pk::Model& cur) {
                                 acc[static_cast<std::size_t>(epoch - 1)] += pk::accuracy(cur, held);
                             });
        };
        measure(pk::Strategy::joint, joint_sum);
        measure(pk::Strategy::random_baseline, random_sum);
    }

    double clean = clean_sum / kSeeds;
    s.expect(clean >= 0.90, "mean clean accuracy " + fmt(clean) + " below 0.90");
    for (int e = 0; e < kEpochs; ++e) {
        double j = joint_sum[static_cast<std::size_t>(e)] / kSeeds;
        double r = random_sum[static_cast<std::size_t>(e)] / kSeeds;
        s.expect(j >= r - 0.02, "epoch " + std::to_string(e + 1) + ": joint " + fmt(j) +
                                    " fell more than 2 points behind random " + fmt(r));
    }
    double final_joint = joint_sum[kEpochs - 1] / kSeeds;
    s.expect(clean - final_joint <= 0.05,
             "25% pruning lost " + fmt(100.0 * (clean - final_joint)) + " accuracy points (budget 5)");

    double elapsed = seconds_since(t0);
    s.expect(elapsed < 120.0, "decay study took " + fmt(elapsed) + "s, budget 120s");
}

// ---------------------------------------------------------------- criterion 4

void criterion_impact_soundness(tc::Suite& s) {
    std::mt19937_64 rng(1004);
    int models = 0;
    long violations = 0;
    long checks = 0;

    while (models < 100) {
        pk::Model m;
        if (models % 5 == 4) {
            m = tu::random_cnn(rng, 6, 6, 1, {3}, {8}, 3);
        } else {
            std::vector<int> widths{3 + models % 4, 6 + models % 7, 5 + models % 5, 2 + models % 3};
            m = tu::random_mlp(rng, widths);
        }
        pk::ActivationBounds bounds = pk::activation_bounds(m, pk::default_input_box(m));

        int layer = -1;
        for (int l = 0; l + 1 < m.layer_count(); ++l)
            if (m.layers[static_cast<std::size_t>(l)].kind == pk::LayerKind::dense) {
                layer = l;
                break;
            }
        auto candidates = pk::enumerate_dense_pairs(m, layer);
        std::vector<std::size_t> picks{0, candidates.size() / 2};

        pk::Tensor batch = tu::random_batch(rng, m, 100);
        pk::Tensor before = pk::model_logits(m, batch);
        for (std::size_t pick : picks) {
            const pk::PairCandidate& c = candidates[pick];
            pk::IntervalVector impact = pk::pair_impact(m, bounds, layer, c.drop_unit, c.keep_unit);
            pk::Model merged = pk::merge_dense_pair(m, layer, c.drop_unit, c.keep_unit);
            pk::Tensor after = pk::model_logits(merged, batch);
            for (int r = 0; r < before.dim(0); ++r)
                for (int k = 0; k < before.dim(1); ++k) {
                    double delta =
                        static_cast<double>(after.at(r, k)) - static_cast<double>(before.at(r, k));
                    if (!impact[static_cast<std::size_t>(k)].contains(delta)) ++violations;
                    ++checks;
                }
        }
        ++models;
    }

    s.expect(models >= 100, "model count");
    s.expect(checks >= 100 * 100, "only " + std::to_string(checks) + " containment checks ran");
    s.expect_eq(violations, 0L, "impact interval violations");
}

// ---------------------------------------------------------------- criterion 5

void criterion_duplicate_unit(tc::Suite& s) {
    std::mt19937_64 rng(1005);
    pk::Model m = tu::random_mlp(rng, {4, 10, 6, 3});
    for (int i = 0; i < 4; ++i) m.layers[0].weights.at(i, 7) = m.layers[0].weights.at(i, 2);
    m.layers[0].bias[7] = m.layers[0].bias[2];

    pk::ActivationBounds bounds = pk::activation_bounds(m, pk::default_input_box(m));
    auto candidates = pk::enumerate_dense_pairs(m, 0);
    pk::score_pair_candidates(m, bounds, candidates);
    auto ranked = pk::rank_dense_pairs(std::move(candidates), pk::Strategy::joint);

    s.expect(!ranked.empty() && ranked.front().lo_unit() == 2 && ranked.front().hi_unit() == 7,
             "joint ranking must surface the duplicated pair first");
    s.expect_eq(ranked.front().l1, 0.0, "duplicate pair impact L1");

    pk::Model merged = pk::merge_dense_pair(m, 0, ranked.front().drop_unit, ranked.front().keep_unit);
    pk::Tensor batch = tu::random_batch(rng, m, 1000);
    pk::Tensor a = pk::model_forward(m, batch);
    pk::Tensor b = pk::model_forward(merged, batch);
    float worst = 0.0f;
    for (std::int64_t i = 0; i < a.numel(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
    s.expect(worst <= 1e-5f, "merged duplicate moved outputs by " + fmt(worst));
}

// ---------------------------------------------------------------- criterion 6

void criterion_conv_surgery(tc::Suite& s) {
    std::mt19937_64 rng(1006);

    // Near-dead channel: outputs shift by less than 1e-6.
    {
        pk::Model m = tu::random_cnn(rng, 6, 6, 1, {4}, {10}, 3);
        for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) m.layers[0].weights.at4(ky, kx, 0, 1) = 1e-9f;
        m.layers[0].bias[1] = 0.0f;
        pk::Model pruned = pk::prune_conv_channel(m, 0, 1);
        pk::Tensor batch = tu::random_batch(rng, m, 50);
        pk::Tensor a = pk::model_logits(m, batch);
        pk::Tensor b = pk::model_logits(pruned, batch);
        float worst = 0.0f;
        for (std::int64_t i = 0; i < a.numel(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
        s.expect(worst <= 1e-6f, "dead-channel removal moved logits by " + fmt(worst));
    }

    // Flatten bookkeeping: removing channel 1 of 3 on a 2x2 map must drop
    // dense rows 1, 4, 7, 10; verify against an independently built model.
    {
        pk::Model m;
        m.input_shape = {2, 2, 1};
        m.layers.push_back(pk::LayerSpec::conv2d(tu::random_tensor(rng, {1, 1, 1, 3}), tu::random_tensor(rng, {3}),
                                                 1, pk::Padding::valid, pk::ActivationKind::relu));
        m.layers.push_back(pk::LayerSpec::flatten());
        m.layers.push_back(pk::LayerSpec::dense(tu::random_tensor(rng, {12, 4}), tu::random_tensor(rng, {4}),
                                                pk::ActivationKind::softmax));
        pk::validate(m);

        pk::Model pruned = pk::prune_conv_channel(m, 0, 1);

        pk::Model expected = m;
        expected.layers[0].weights = pk::Tensor({1, 1, 1, 2}, {m.layers[0].weights[0], m.layers[0].weights[2]});
        expected.layers[0].bias = pk::Tensor({2}, {m.layers[0].bias[0], m.layers[0].bias[2]});
        pk::Tensor dw({8, 4});
        int r = 0;
        for (int row = 0; row < 12; ++row) {
            if (row % 3 == 1) continue;  // rows 1, 4, 7, 10
            for (int o = 0; o < 4; ++o) dw.at(r, o) = m.layers[2].weights.at(row, o);
            ++r;
        }
        expected.layers[2].weights = dw;

        bool same = pruned.layers[0].weights == expected.layers[0].weights &&
                    pruned.layers[0].bias == expected.layers[0].bias &&
                    pruned.layers[2].weights == expected.layers[2].weights &&
                    pruned.layers[2].bias == expected.layers[2].bias;
        s.expect(same, "pruned parameters differ from the hand-built oracle");

        pk::Tensor batch = tu::random_batch(rng, pruned, 50);
        s.expect(pk::model_logits(pruned, batch) == pk::model_logits(expected, batch),
                 "pruned model and oracle disagree on logits");
    }

    // Exact parameter deltas.
    {
        pk::Model m = tu::random_cnn(rng, 8, 8, 1, {4, 5}, {6}, 3);
        std::int64_t d = pk::param_count(m) - pk::param_count(pk::prune_conv_channel(m, 0, 1));
        s.expect_eq(d, static_cast<std::int64_t>(3 * 3 * 1 + 1 + 3 * 3 * 5), "conv->conv delta");

        pk::Model m2 = tu::random_cnn(rng, 8, 8, 1, {8}, {32}, 3);
        std::int64_t d2 = pk::param_count(m2) - pk::param_count(pk::prune_conv_channel(m2, 0, 3));
        s.expect_eq(d2, static_cast<std::int64_t>(3 * 3 * 1 + 1 + 4 * 4 * 32), "conv->flatten->dense delta");

        pk::Model m3 = tu::random_mlp(rng, {6, 9, 4});
        std::int64_t d3 = pk::param_count(m3) - pk::param_count(pk::merge_dense_pair(m3, 0, 2, 5));
        s.expect_eq(d3, static_cast<std::int64_t>(6 + 1 + 4), "dense merge delta (fan_in + 1 + fan_out)");
    }
}

// ---------------------------------------------------------------- criterion 7

void criterion_gradients(tc::Suite& s) {
    std::mt19937_64 rng(1007);

    auto sweep = [&](const pk::Model& m, int batch_n, std::int64_t weight_stride) {
        pk::Tensor batch = tu::random_batch(rng, m, batch_n);
        std::vector<int> labels = tu::random_labels(rng, batch_n, pk::class_count(m));
        std::vector<pk::LayerGrads> grads = pk::parameter_gradients(m, batch, labels);

        double max_rel = 0.0;
        long checked = 0;
        for (int l = 0; l < m.layer_count(); ++l) {
            const pk::LayerSpec& layer = m.layers[static_cast<std::size_t>(l)];
            if (layer.param_count() == 0) continue;
            for (std::int64_t i = 0; i < layer.weights.numel(); i += weight_stride) {
                double a = grads[static_cast<std::size_t>(l)].weights[i];
                if (std::fabs(a) <= 1e-4) continue;
                auto fd = tu::fd_param_grad_smooth(m, l, false, i, batch, labels);
                if (!fd) continue;  // relu kink inside the stencil
                max_rel = std::max(max_rel, std::fabs(*fd - a) / std::max(std::fabs(a), std::fabs(*fd)));
                ++checked;
            }
            for (std::int64_t i = 0; i < layer.bias.numel(); i += 2) {
                double a = grads[static_cast<std::size_t>(l)].bias[i];
                if (std::fabs(a) <= 1e-4) continue;
                auto fd = tu::fd_param_grad_smooth(m, l, true, i, batch, labels);
                if (!fd) continue;
                max_rel = std::max(max_rel, std::fabs(*fd - a) / std::max(std::fabs(a), std::fabs(*fd)));
                ++checked;
            }
        }
        return std::make_pair(max_rel, checked);
    };

    auto [mlp_rel, mlp_checked] = sweep(tu::random_mlp(rng, {6, 10, 8, 3}), 3, 5);
    s.expect(mlp_checked > 20, "mlp sweep covered only " + std::to_string(mlp_checked) + " parameters");
    s.expect(mlp_rel <= 1e-2, "mlp gradient relative error " + fmt(mlp_rel));

    auto [cnn_rel, cnn_checked] = sweep(tu::random_cnn(rng, 6, 6, 1, {3}, {8}, 3), 2, 5);
    s.expect(cnn_checked > 20, "cnn sweep covered only " + std::to_string(cnn_checked) + " parameters");
    s.expect(cnn_rel <= 1e-2, "cnn gradient relative error " + fmt(cnn_rel));

    s.expect(mlp_checked + cnn_checked > 50,
             "combined sweep covered only " + std::to_string(mlp_checked + cnn_checked) + " parameters");
}

// ---------------------------------------------------------------- criterion 8

void criterion_fgsm(tc::Suite& s) {
    pk::Dataset train = pk::synthetic_dataset(8, 240, 2);
    pk::TrainOptions opts;
    opts.epochs = 6;
    pk::Model m = pk::train_fixture("mlp:16", train, opts);
    pk::Dataset held = pk::synthetic_dataset(9, 80, 2);

    // Perturbation geometry.
    std::mt19937_64 rng(1008);
    for (int i = 0; i < 30; ++i) {
        pk::Tensor x = tu::random_tensor(rng, {1, 2}, 0.0, 1.0);
        pk::FgsmConfig cfg;
        cfg.epsilon = 0.1;
        pk::Tensor adv = pk::fgsm_attack(m, x, i % 2, cfg);
        for (int f = 0; f < 2; ++f) {
            s.expect(std::fabs(adv[f] - x[f]) <= 0.1f + 1e-6f, "perturbation exceeded epsilon");
            s.expect(adv[f] >= 0.0f && adv[f] <= 1.0f, "perturbation escaped the clip box");
        }
        cfg.epsilon = 0.0;
        s.expect(pk::fgsm_attack(m, x, i % 2, cfg) == x, "epsilon 0 must reproduce the input exactly");
    }

    // Zero-epsilon robustness equals clean accuracy; decay is monotone.
    double clean = pk::accuracy(m, held);
    std::vector<double> curve;
    for (double eps : {0.0, 0.05, 0.1, 0.2}) {
        pk::FgsmConfig cfg;
        cfg.epsilon = eps;
        curve.push_back(pk::fgsm_robustness(m, held, cfg));
    }
    s.expect_eq(curve[0], clean, "robustness at epsilon 0");
    for (std::size_t i = 1; i < curve.size(); ++i)
        s.expect(curve[i] <= curve[i - 1],
                 "robustness rose from " + fmt(curve[i - 1]) + " to " + fmt(curve[i]) + " at step " +
                     std::to_string(i));
}

// ---------------------------------------------------------------- criterion 9

void criterion_serialization(tc::Suite& s) {
    std::mt19937_64 rng(1009);

    for (int trial = 0; trial < 100; ++trial) {
        pk::Model m;
        if (trial % 2 == 0) {
            std::vector<int> widths{2 + trial % 5, 4 + trial % 9, 3 + trial % 4};
            m = tu::random_mlp(rng, widths, trial % 4 != 0);
        } else {
            m = tu::random_cnn(rng, 5 + trial % 4, 5 + trial % 3, 1 + trial % 2, {2 + trial % 3},
                               {4 + trial % 5}, 2 + trial % 3);
        }
        std::vector<std::uint8_t> bytes = pk::serialize_model(m);
        pk::Model back = pk::parse_model(bytes.data(), bytes.size());
        std::vector<std::uint8_t> bytes2 = pk::serialize_model(back);
        if (bytes != bytes2) {
            s.expect(false, "round trip " + std::to_string(trial) + " not byte-identical");
            return;
        }
        std::uint32_t manifest_len = static_cast<std::uint32_t>(bytes[4]) |
                                     (static_cast<std::uint32_t>(bytes[5]) << 8) |
                                     (static_cast<std::uint32_t>(bytes[6]) << 16) |
                                     (static_cast<std::uint32_t>(bytes[7]) << 24);
        std::size_t want = 8 + manifest_len + 4 * static_cast<std::size_t>(pk::param_count(m));
        if (bytes.size() != want || pk::serialized_size(m) != static_cast<std::int64_t>(bytes.size())) {
            s.expect(false, "size formula failed on trial " + std::to_string(trial));
            return;
        }
    }

    // Random corruption never crashes and never throws anything unstructured.
    pk::Model victim = tu::random_cnn(rng, 6, 6, 1, {3}, {7}, 3);
    std::vector<std::uint8_t> base = pk::serialize_model(victim);
    long unstructured = 0;
    for (int i = 0; i < 300; ++i) {
        std::vector<std::uint8_t> bytes = base;
        switch (i % 3) {
            case 0:  // flip one byte
                bytes[rng() % bytes.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
                break;
            case 1:  // truncate
                bytes.resize(rng() % bytes.size());
                break;
            default:  // tamper with the manifest length field
                bytes[4 + rng() % 4] = static_cast<std::uint8_t>(rng());
                break;
        }
        try {
            pk::Model mm = pk::parse_model(bytes.data(), bytes.size());
            (void)mm;  // corruption that still parses cleanly is acceptable
        } catch (const pk::error&) {
            // structured failure: expected
        } catch (...) {
            ++unstructured;
        }
    }
    s.expect_eq(unstructured, 0L, "unstructured exceptions while parsing corrupted files");
}

// --------------------------------------------------------------- criterion 10

void criterion_cli_determinism(tc::Suite& s, const std::string& cli) {
    tu::TempDir dir;
    std::mt19937_64 rng(1010);
    pk::Model m = tu::random_mlp(rng, {2, 12, 3});
    pk::save_model(m, dir.file("in.pdm"));

    auto run = [&](const std::string& tag) {
        std::string args = "prune --model '" + dir.file("in.pdm") + "' -o '" + dir.file(tag + ".pdm") +
                           "' --report '" + dir.file(tag + ".csv") + "' --report-json '" +
                           dir.file(tag + ".json") +
                           "' --target 0.3 --step 0.1 --strategy random_baseline --seed 5"
                           " --dataset synthetic --synthetic-n 96 --synthetic-classes 3 --fgsm-eps 0.1";
        return tc::run_cli(cli, args);
    };

    tc::CliResult a = run("a");
    tc::CliResult b = run("b");
    s.expect_eq(a.exit_code, 0, "first run exit code (output: " + a.output + ")");
    s.expect_eq(b.exit_code, 0, "second run exit code");

    s.expect(tu::read_bytes(dir.file("a.pdm")) == tu::read_bytes(dir.file("b.pdm")),
             "pruned models differ between identical runs");
    s.expect(tu::read_text(dir.file("a.csv")) == tu::read_text(dir.file("b.csv")),
             "csv reports differ between identical runs");
    s.expect(tu::read_text(dir.file("a.json")) == tu::read_text(dir.file("b.json")),
             "json reports differ between identical runs");

    // sanity: the report carried accuracy and robustness numbers
    auto lines = tc::split_lines(tu::read_text(dir.file("a.csv")));
    s.expect_eq(lines.size(), std::size_t{4}, "csv line count (header + 3 epochs)");
    if (lines.size() == 4) {
        auto cells = tc::split_csv_row(lines[3]);
        s.expect(cells.size() == 6 && !cells[4].empty() && !cells[5].empty(),
                 "final row must carry test and fgsm accuracy");
    }
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-prunekit-cli>\n", argv[0]);
        return 64;
    }
    std::string cli = argv[1];

    tc::Suite s;
    s.run("criterion 1: structural pruning arithmetic and size bands", [&] { criterion_param_arithmetic(s); });
    s.run("criterion 2: default CLI schedule emits ten 5% epochs", [&] { criterion_cli_schedule(s, cli); });
    s.run("criterion 3: joint strategy tracks accuracy through 25% pruning", [&] { criterion_accuracy_decay(s); });
    s.run("criterion 4: merge impact intervals contain realized logit changes", [&] { criterion_impact_soundness(s); });
    s.run("criterion 5: duplicate units rank first and merge losslessly", [&] { criterion_duplicate_unit(s); });
    s.run("criterion 6: conv channel surgery bookkeeping", [&] { criterion_conv_surgery(s); });
    s.run("criterion 7: analytic gradients match finite differences", [&] { criterion_gradients(s); });
    s.run("criterion 8: fgsm attack properties", [&] { criterion_fgsm(s); });
    s.run("criterion 9: serialization round-trips and corruption handling", [&] { criterion_serialization(s); });
    s.run("criterion 10: identical CLI runs produce identical artifacts", [&] { criterion_cli_determinism(s, cli); });

    if (s.failures == 0) std::printf("all %d criteria passed\n", 10);
    return s.failures;
}
