// prunekit: inspect, train, prune and evaluate serialized mlp/cnn models.
//
// Exit codes: 0 success, 1 runtime failure (I/O, incompatible data, diverged
// training), 2 usage or input-format errors (bad flags, unparseable model).

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "prunekit/prunekit.hpp"

namespace pk = prunekit;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- data flags

struct DataOptions {
    std::string dataset;  // synthetic | idx | csv; empty means "no data"
    std::string data_dir;
    std::string label_column = "label";
    bool no_normalize = false;
    std::uint64_t data_seed = 42;
    int synthetic_n = 512;
    int synthetic_classes = 3;
    int limit = -1;  // negative keeps everything
};

void add_data_options(CLI::App* cmd, DataOptions& d, const std::string& default_kind) {
    d.dataset = default_kind;
    auto* opt = cmd->add_option("--dataset", d.dataset, "data source: synthetic, idx or csv");
    if (!default_kind.empty()) opt->capture_default_str();
    cmd->add_option("--data-dir", d.data_dir,
                    "idx: directory holding the image/label files; csv: path of the csv file");
    cmd->add_option("--label-column", d.label_column, "csv label column name")->capture_default_str();
    cmd->add_flag("--no-normalize", d.no_normalize, "csv: skip per-column min-max scaling");
    cmd->add_option("--data-seed", d.data_seed, "synthetic generator seed")->capture_default_str();
    cmd->add_option("--synthetic-n", d.synthetic_n, "synthetic sample count")->capture_default_str();
    cmd->add_option("--synthetic-classes", d.synthetic_classes, "synthetic class count")->capture_default_str();
    cmd->add_option("--limit", d.limit, "use only the first N samples")
        ->check(CLI::NonNegativeNumber);
}

// Locate an image/label file pair in a directory of idx files. Evaluation
// prefers the t10k-* (test) pair, training the train-* pair; a lone matching
// pair with any shared prefix works too.
std::pair<std::string, std::string> find_idx_pair(const std::string& dir, bool prefer_train) {
    if (!fs::is_directory(dir)) throw pk::io_error("'" + dir + "' is not a directory");
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());

    auto pick = [&](const std::string& prefix) -> std::pair<std::string, std::string> {
        std::string images, labels;
        for (const std::string& n : names) {
            if (!prefix.empty() && n.rfind(prefix, 0) != 0) continue;
            if (images.empty() && n.find("images") != std::string::npos && n.find("idx3") != std::string::npos)
                images = n;
            if (labels.empty() && n.find("labels") != std::string::npos && n.find("idx1") != std::string::npos)
                labels = n;
        }
        if (images.empty() || labels.empty()) return {};
        return {(fs::path(dir) / images).string(), (fs::path(dir) / labels).string()};
    };

    std::vector<std::string> order = prefer_train ? std::vector<std::string>{"train-", "t10k-", ""}
                                                  : std::vector<std::string>{"t10k-", "train-", ""};
    for (const std::string& prefix : order) {
        auto pair = pick(prefix);
        if (!pair.first.empty()) return pair;
    }
    throw pk::io_error("no idx image/label file pair found in '" + dir + "'");
}

pk::Dataset truncate_dataset(const pk::Dataset& ds, int n) {
    pk::Dataset out;
    out.inputs = ds.batch(0, n);
    out.labels.assign(ds.labels.begin(), ds.labels.begin() + n);
    out.class_count = ds.class_count;
    return out;
}

pk::Dataset load_data(const DataOptions& d, bool prefer_train) {
    if (d.limit == 0) throw pk::config_error("empty evaluation set: --limit 0 selects no samples");
    pk::Dataset ds;
    if (d.dataset == "synthetic") {
        ds = pk::synthetic_dataset(d.data_seed, d.synthetic_n, d.synthetic_classes);
    } else if (d.dataset == "idx") {
        if (d.data_dir.empty()) throw pk::config_error("--data-dir is required for idx data");
        auto [images, labels] = find_idx_pair(d.data_dir, prefer_train);
        return pk::load_idx(images, labels, d.limit > 0 ? std::optional<int>(d.limit) : std::nullopt);
    } else if (d.dataset == "csv") {
        if (d.data_dir.empty()) throw pk::config_error("--data-dir must point at the csv file");
        ds = pk::load_csv(d.data_dir, d.label_column, !d.no_normalize);
    } else {
        throw pk::config_error("unknown dataset kind '" + d.dataset + "'");
    }
    if (d.limit > 0 && d.limit < ds.size()) ds = truncate_dataset(ds, d.limit);
    return ds;
}

// ---------------------------------------------------------------- subcommands

int cmd_inspect(const std::string& path, bool as_json) {
    pk::Model m = pk::load_model(path);
    auto shapes = pk::shape_chain(m);
    pk::SizeReport size = pk::size_report(m);

    if (as_json) {
        nlohmann::json layers = nlohmann::json::array();
        for (int l = 0; l < m.layer_count(); ++l) {
            const pk::LayerSpec& layer = m.layers[static_cast<std::size_t>(l)];
            layers.push_back({{"index", l},
                              {"kind", pk::to_string(layer.kind)},
                              {"activation", pk::to_string(layer.activation)},
                              {"output_shape", shapes[static_cast<std::size_t>(l)]},
                              {"param_count", layer.param_count()}});
        }
        nlohmann::json doc{{"input_shape", m.input_shape},
                           {"layers", std::move(layers)},
                           {"param_count", size.param_count},
                           {"file_size_bytes", size.file_size_bytes}};
        std::printf("%s\n", doc.dump(2).c_str());
        return 0;
    }

    std::printf("model: %s\n", path.c_str());
    std::printf("input: %s\n", pk::shape_to_string(m.input_shape).c_str());
    std::printf("%-6s %-10s %-11s %-14s %s\n", "layer", "kind", "activation", "output", "params");
    for (int l = 0; l < m.layer_count(); ++l) {
        const pk::LayerSpec& layer = m.layers[static_cast<std::size_t>(l)];
        std::printf("%-6d %-10s %-11s %-14s %lld\n", l, pk::to_string(layer.kind),
                    pk::to_string(layer.activation),
                    pk::shape_to_string(shapes[static_cast<std::size_t>(l)]).c_str(),
                    static_cast<long long>(layer.param_count()));
    }
    std::printf("total params: %lld\n", static_cast<long long>(size.param_count));
    std::printf("file bytes: %lld\n", static_cast<long long>(size.file_size_bytes));
    return 0;
}

int cmd_train(const std::string& arch, const std::string& out, const pk::TrainOptions& opts,
              const DataOptions& data) {
    pk::Dataset ds = load_data(data, /*prefer_train=*/true);
    pk::Model m = pk::train_fixture(arch, ds, opts);
    std::int64_t bytes = pk::save_model_atomic(m, out);
    double acc = pk::accuracy(m, ds);
    std::printf("trained %s: %lld params, %lld bytes, train accuracy %.6f\n", arch.c_str(),
                static_cast<long long>(pk::param_count(m)), static_cast<long long>(bytes), acc);
    return 0;
}

struct PruneArgs {
    std::string model_path;
    std::string out_path;
    std::string report_path;
    std::string report_json_path;
    double target = 0.5;
    double step = 0.05;
    std::string strategy = "joint";
    std::uint64_t seed = 0;
    float input_low = 0.0f;
    float input_high = 1.0f;
    double fgsm_eps = 0.1;
    bool fgsm_explicit = false;
    DataOptions data;
};

int cmd_prune(const PruneArgs& args) {
    pk::Model m = pk::load_model(args.model_path);
    pk::PruneConfig cfg;
    cfg.target = args.target;
    cfg.step = args.step;
    cfg.strategy = pk::parse_strategy(args.strategy);
    cfg.seed = args.seed;
    cfg.box_lo = args.input_low;
    cfg.box_hi = args.input_high;
    pk::validate(cfg);
    if (args.fgsm_eps < 0.0) throw pk::config_error("--fgsm-eps must be non-negative");

    std::optional<pk::Dataset> ds;
    if (!args.data.dataset.empty()) ds = load_data(args.data, /*prefer_train=*/false);
    bool with_fgsm = ds && (args.fgsm_explicit || ds->inputs.rank() == 4);

    pk::PruneReport report;
    auto write_reports = [&]() {
        if (!args.report_path.empty()) pk::write_report_csv(report, args.report_path);
        if (!args.report_json_path.empty()) pk::write_report_json(report, args.report_json_path);
    };

    try {
        pk::ScheduleResult result = pk::run_schedule(m, cfg, [&](int epoch, double frac, const pk::Model& cur) {
            pk::EpochRow row;
            row.epoch = epoch;
            row.fraction_pruned = frac;
            pk::SizeReport size = pk::size_report(cur);
            row.param_count = size.param_count;
            row.file_size_bytes = size.file_size_bytes;
            if (ds) {
                row.test_accuracy = pk::accuracy(cur, *ds);
                if (with_fgsm) {
                    pk::FgsmConfig fgsm;
                    fgsm.epsilon = args.fgsm_eps;
                    row.fgsm_accuracy = pk::fgsm_robustness(cur, *ds, fgsm);
                }
            }
            report.rows.push_back(std::move(row));
        });
        pk::save_model_atomic(result.model, args.out_path);
    } catch (...) {
        // Keep whatever rows completed; the CSV gains a "# error:" line.
        try {
            throw;
        } catch (const std::exception& e) {
            report.error = e.what();
        }
        write_reports();
        throw;
    }
    write_reports();

    const pk::EpochRow& last = report.rows.back();
    std::printf("pruned %s: %lld -> %lld params over %d epochs (report: %s)\n", args.model_path.c_str(),
                static_cast<long long>(pk::param_count(m)), static_cast<long long>(last.param_count),
                last.epoch, args.report_path.c_str());
    return 0;
}

int cmd_eval(const std::string& model_path, const DataOptions& data, double fgsm_eps, bool fgsm_explicit,
             int chunk) {
    pk::Model m = pk::load_model(model_path);
    if (fgsm_eps < 0.0) throw pk::config_error("--fgsm-eps must be non-negative");
    pk::Dataset ds = load_data(data, /*prefer_train=*/false);
    pk::SizeReport size = pk::size_report(m);
    double acc = pk::accuracy(m, ds, chunk);
    std::string fgsm_cell;
    if (fgsm_explicit || ds.inputs.rank() == 4) {
        pk::FgsmConfig fgsm;
        fgsm.epsilon = fgsm_eps;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", pk::fgsm_robustness(m, ds, fgsm));
        fgsm_cell = buf;
    }
    std::printf("param_count,file_size_bytes,test_accuracy,fgsm_accuracy\n");
    std::printf("%lld,%lld,%.6f,%s\n", static_cast<long long>(size.param_count),
                static_cast<long long>(size.file_size_bytes), acc, fgsm_cell.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structured pruning toolkit for serialized mlp/cnn models"};
    app.require_subcommand(1);

    // inspect
    auto* inspect = app.add_subcommand("inspect", "print a model's layer table and size");
    std::string inspect_path;
    bool inspect_json = false;
    inspect->add_option("model", inspect_path, "model file")->required();
    inspect->add_flag("--json", inspect_json, "emit json instead of a table");

    // train
    auto* train = app.add_subcommand("train", "train a small fixture model");
    std::string train_arch = "mlp:16";
    std::string train_out;
    pk::TrainOptions train_opts;
    DataOptions train_data;
    train->add_option("--arch", train_arch, "architecture, e.g. mlp:32,32 or cnn:8,16/32")
        ->capture_default_str();
    train->add_option("-o,--out", train_out, "output model file")->required();
    train->add_option("--epochs", train_opts.epochs, "training epochs")->capture_default_str();
    train->add_option("--batch-size", train_opts.batch_size, "mini-batch size")->capture_default_str();
    train->add_option("--lr", train_opts.learning_rate, "learning rate")->capture_default_str();
    train->add_option("--seed", train_opts.seed, "init and shuffle seed")->capture_default_str();
    add_data_options(train, train_data, "synthetic");

    // prune
    auto* prune = app.add_subcommand("prune", "run the epoch-wise pruning schedule");
    PruneArgs prune_args;
    prune->add_option("--model", prune_args.model_path, "input model file")->required();
    prune->add_option("-o,--out", prune_args.out_path, "output model file")->required();
    prune->add_option("--report", prune_args.report_path, "per-epoch csv report")->required();
    prune->add_option("--report-json", prune_args.report_json_path, "optional json mirror of the report");
    prune->add_option("--target", prune_args.target, "fraction of units to remove per prunable layer")
        ->capture_default_str();
    prune->add_option("--step", prune_args.step, "fraction removed per epoch")->capture_default_str();
    prune->add_option("--strategy", prune_args.strategy, "joint, l1_only, entropy_only or random_baseline")
        ->capture_default_str();
    prune->add_option("--seed", prune_args.seed, "random_baseline shuffle seed")->capture_default_str();
    prune->add_option("--input-low", prune_args.input_low, "lower bound of the input box used for impact bounds")
        ->capture_default_str();
    prune->add_option("--input-high", prune_args.input_high, "upper bound of the input box used for impact bounds")
        ->capture_default_str();
    auto* prune_eps = prune->add_option("--fgsm-eps", prune_args.fgsm_eps, "fgsm perturbation budget")
                          ->capture_default_str();
    add_data_options(prune, prune_args.data, "");

    // eval
    auto* eval = app.add_subcommand("eval", "measure accuracy (and robustness) of a model");
    std::string eval_model;
    DataOptions eval_data;
    double eval_eps = 0.1;
    int eval_chunk = 256;
    eval->add_option("--model", eval_model, "model file")->required();
    auto* eval_eps_opt = eval->add_option("--fgsm-eps", eval_eps, "fgsm perturbation budget")
                             ->capture_default_str();
    eval->add_option("--chunk", eval_chunk, "forward-pass batch size")->capture_default_str();
    add_data_options(eval, eval_data, "synthetic");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    prune_args.fgsm_explicit = prune_eps->count() > 0;

    try {
        if (app.got_subcommand(inspect)) return cmd_inspect(inspect_path, inspect_json);
        if (app.got_subcommand(train)) return cmd_train(train_arch, train_out, train_opts, train_data);
        if (app.got_subcommand(prune)) return cmd_prune(prune_args);
        if (app.got_subcommand(eval))
            return cmd_eval(eval_model, eval_data, eval_eps, eval_eps_opt->count() > 0, eval_chunk);
    } catch (const pk::parse_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const pk::config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;  // unreachable with require_subcommand(1)
}
