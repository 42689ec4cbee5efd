// End-to-end checks of the command-line tool: flag handling, exit codes,
// report files and output formats. argv[1] must point at the CLI binary.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli_utils.hpp"
#include "test_utils.hpp"

namespace pk = prunekit;

namespace {

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

double cell_value(const std::string& cell) { return std::stod(cell); }

bool in_unit_range(const std::string& cell) {
    if (cell.empty()) return false;
    double v = cell_value(cell);
    return v >= 0.0 && v <= 1.0;
}

// Small two-feature classifier used by most prune/eval tests.
std::string save_small_mlp(tu::TempDir& dir, std::uint64_t seed = 301) {
    std::mt19937_64 rng(seed);
    pk::Model m = tu::random_mlp(rng, {2, 12, 3});
    std::string path = dir.file("model.pdm");
    pk::save_model(m, path);
    return path;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-prunekit-cli>\n", argv[0]);
        return 64;
    }
    std::string cli = argv[1];
    tc::Suite s;

    s.run("cli: missing subcommand or unknown flag is a usage error", [&] {
        s.expect_eq(tc::run_cli(cli, "").exit_code, 2, "bare invocation");
        s.expect_eq(tc::run_cli(cli, "inspect --bogus x").exit_code, 2, "unknown flag");
    });

    s.run("cli: inspect prints a layer table", [&] {
        tu::TempDir dir;
        std::mt19937_64 rng(302);
        pk::Model m = tu::random_cnn(rng, 6, 6, 1, {3}, {7}, 3);
        pk::save_model(m, dir.file("m.pdm"));

        tc::CliResult r = tc::run_cli(cli, "inspect '" + dir.file("m.pdm") + "'");
        s.expect_eq(r.exit_code, 0, "exit code (output: " + r.output + ")");
        s.expect(tc::contains(r.output, "input: [6,6,1]"), "input shape line");
        for (const char* kind : {"conv2d", "maxpool2d", "flatten", "dense"})
            s.expect(tc::contains(r.output, kind), std::string("layer kind ") + kind);
        s.expect(tc::contains(r.output, "total params: " + std::to_string(pk::param_count(m))),
                 "total parameter line");
        s.expect(tc::contains(r.output, "file bytes: " + std::to_string(pk::serialized_size(m))),
                 "file size line");
    });

    s.run("cli: inspect --json emits machine-readable structure", [&] {
        tu::TempDir dir;
        std::mt19937_64 rng(303);
        pk::Model m = tu::random_cnn(rng, 6, 6, 1, {3}, {7}, 3);
        pk::save_model(m, dir.file("m.pdm"));

        tc::CliResult r = tc::run_cli(cli, "inspect --json '" + dir.file("m.pdm") + "'");
        s.expect_eq(r.exit_code, 0, "exit code");
        nlohmann::json doc = nlohmann::json::parse(r.output);
        s.expect(doc["input_shape"] == nlohmann::json({6, 6, 1}), "input_shape field");
        s.expect_eq(doc["param_count"].get<std::int64_t>(), pk::param_count(m), "param_count field");
        s.expect_eq(doc["file_size_bytes"].get<std::int64_t>(), pk::serialized_size(m),
                    "file_size_bytes field");
        s.expect_eq(doc["layers"].size(), std::size_t{5}, "layer array size");
        s.expect_eq(doc["layers"][0]["kind"].get<std::string>(), std::string("conv2d"), "first layer kind");
        s.expect_eq(doc["layers"][4]["activation"].get<std::string>(), std::string("softmax"),
                    "head activation");
    });

    s.run("cli: inspect distinguishes corrupt files from missing ones", [&] {
        tu::TempDir dir;
        tu::write_bytes(dir.file("junk.pdm"), {'n', 'o', 't', ' ', 'a', ' ', 'm', 'o', 'd', 'e', 'l'});
        tc::CliResult corrupt = tc::run_cli(cli, "inspect '" + dir.file("junk.pdm") + "'");
        s.expect_eq(corrupt.exit_code, 2, "corrupt file exit code");
        s.expect(tc::contains(corrupt.output, "error:"), "corrupt file error message");

        tc::CliResult missing = tc::run_cli(cli, "inspect '" + dir.file("absent.pdm") + "'");
        s.expect_eq(missing.exit_code, 1, "missing file exit code");
        s.expect(tc::contains(missing.output, "error:"), "missing file error message");
    });

    s.run("cli: train is deterministic for a fixed seed", [&] {
        tu::TempDir dir;
        std::string flags = "train --arch mlp:8 --epochs 3 --seed 9 --data-seed 3 --synthetic-n 120 -o ";
        tc::CliResult a = tc::run_cli(cli, flags + "'" + dir.file("a.pdm") + "'");
        tc::CliResult b = tc::run_cli(cli, flags + "'" + dir.file("b.pdm") + "'");
        s.expect_eq(a.exit_code, 0, "first run exit code (output: " + a.output + ")");
        s.expect_eq(b.exit_code, 0, "second run exit code");
        s.expect(tc::contains(a.output, "trained mlp:8:"), "summary line");
        s.expect(tc::contains(a.output, "train accuracy"), "accuracy in summary");
        s.expect(tu::read_bytes(dir.file("a.pdm")) == tu::read_bytes(dir.file("b.pdm")),
                 "same seed must produce identical model files");
    });

    s.run("cli: train rejects a malformed architecture", [&] {
        tu::TempDir dir;
        tc::CliResult r = tc::run_cli(cli, "train --arch transformer:4 -o '" + dir.file("x.pdm") + "'");
        s.expect_eq(r.exit_code, 2, "exit code");
        s.expect(tc::contains(r.output, "error:"), "error message");
    });

    s.run("cli: prune without data leaves accuracy cells empty", [&] {
        tu::TempDir dir;
        std::string model = save_small_mlp(dir);
        tc::CliResult r = tc::run_cli(cli, "prune --model '" + model + "' -o '" + dir.file("out.pdm") +
                                               "' --report '" + dir.file("r.csv") + "' --report-json '" +
                                               dir.file("r.json") + "' --target 0.3 --step 0.1");
        s.expect_eq(r.exit_code, 0, "exit code (output: " + r.output + ")");
        s.expect(tc::contains(r.output, "pruned"), "summary line");

        auto lines = tc::split_lines(tu::read_text(dir.file("r.csv")));
        s.expect_eq(lines.size(), std::size_t{4}, "csv line count");
        // 12 hidden units, 10% per epoch: widths 11, 10, 9.
        std::vector<std::string> want_fraction{"0.10", "0.20", "0.30"};
        std::vector<std::string> want_params{"69", "63", "57"};
        for (std::size_t i = 1; i < lines.size() && i <= 3; ++i) {
            auto cells = tc::split_csv_row(lines[i]);
            if (cells.size() != 6) {
                s.expect(false, "row " + std::to_string(i) + " malformed: " + lines[i]);
                continue;
            }
            s.expect_eq(cells[0], std::to_string(i), "epoch cell");
            s.expect_eq(cells[1], want_fraction[i - 1], "fraction cell");
            s.expect_eq(cells[2], want_params[i - 1], "param cell");
            s.expect(cells[4].empty() && cells[5].empty(), "accuracy cells must be empty");
        }

        pk::Model out = pk::load_model(dir.file("out.pdm"));
        s.expect_eq(out.layers[0].units(), 9, "pruned hidden width");

        nlohmann::json rows = nlohmann::json::parse(tu::read_text(dir.file("r.json")));
        s.expect(rows.is_array() && rows.size() == 3, "json mirror is a 3-row array");
        for (const auto& row : rows) {
            s.expect(row["test_accuracy"].is_null() && row["fgsm_accuracy"].is_null(),
                     "json accuracy fields must be null");
            s.expect(row["epoch"].is_number_integer() && row["param_count"].is_number_integer(),
                     "json numeric fields");
        }
    });

    s.run("cli: synthetic data fills accuracy; explicit epsilon adds robustness", [&] {
        tu::TempDir dir;
        std::string model = save_small_mlp(dir);
        std::string common = "prune --model '" + model + "' --target 0.25 --step 0.25" +
                             " --dataset synthetic --data-seed 7 --synthetic-n 80 --synthetic-classes 3";

        tc::CliResult plain = tc::run_cli(cli, common + " -o '" + dir.file("a.pdm") + "' --report '" +
                                                   dir.file("a.csv") + "'");
        s.expect_eq(plain.exit_code, 0, "plain run exit code (output: " + plain.output + ")");
        auto lines = tc::split_lines(tu::read_text(dir.file("a.csv")));
        s.expect_eq(lines.size(), std::size_t{2}, "plain csv line count");
        auto cells = tc::split_csv_row(lines.back());
        s.expect(cells.size() == 6 && in_unit_range(cells[4]), "test accuracy cell");
        s.expect(cells.size() == 6 && cells[5].empty(), "fgsm cell must stay empty for flat data");

        tc::CliResult fgsm = tc::run_cli(cli, common + " --fgsm-eps 0.1 -o '" + dir.file("b.pdm") +
                                                  "' --report '" + dir.file("b.csv") + "'");
        s.expect_eq(fgsm.exit_code, 0, "fgsm run exit code");
        auto fcells = tc::split_csv_row(tc::split_lines(tu::read_text(dir.file("b.csv"))).back());
        s.expect(fcells.size() == 6 && in_unit_range(fcells[4]), "fgsm run accuracy cell");
        s.expect(fcells.size() == 6 && in_unit_range(fcells[5]), "fgsm robustness cell");
    });

    s.run("cli: prune --target 0 is a usage error", [&] {
        tu::TempDir dir;
        std::string model = save_small_mlp(dir);
        tc::CliResult r = tc::run_cli(cli, "prune --model '" + model + "' -o '" + dir.file("o.pdm") +
                                               "' --report '" + dir.file("r.csv") + "' --target 0");
        s.expect_eq(r.exit_code, 2, "exit code");
        s.expect(tc::contains(r.output, "target fraction"), "error message");
        s.expect(!file_exists(dir.file("r.csv")), "no report for usage errors");
    });

    s.run("cli: prune rejects unknown strategies", [&] {
        tu::TempDir dir;
        std::string model = save_small_mlp(dir);
        tc::CliResult r = tc::run_cli(cli, "prune --model '" + model + "' -o '" + dir.file("o.pdm") +
                                               "' --report '" + dir.file("r.csv") + "' --strategy fisher");
        s.expect_eq(r.exit_code, 2, "exit code");
        s.expect(tc::contains(r.output, "unknown strategy"), "error message");
    });

    s.run("cli: prune --limit 0 fails before any surgery", [&] {
        tu::TempDir dir;
        std::string model = save_small_mlp(dir);
        tc::CliResult r =
            tc::run_cli(cli, "prune --model '" + model + "' -o '" + dir.file("o.pdm") + "' --report '" +
                                 dir.file("r.csv") + "' --dataset synthetic --limit 0");
        s.expect_eq(r.exit_code, 2, "exit code");
        s.expect(tc::contains(r.output, "empty evaluation set"), "error message");
        s.expect(!file_exists(dir.file("r.csv")), "no report written");
        s.expect(!file_exists(dir.file("o.pdm")), "no model written");
    });

    s.run("cli: un-prunable model leaves an error report and no output model", [&] {
        tu::TempDir dir;
        std::mt19937_64 rng(304);
        pk::Model m = tu::random_mlp(rng, {4, 3});  // single softmax layer, nothing to merge
        pk::save_model(m, dir.file("m.pdm"));

        tc::CliResult r = tc::run_cli(cli, "prune --model '" + dir.file("m.pdm") + "' -o '" +
                                               dir.file("o.pdm") + "' --report '" + dir.file("r.csv") + "'");
        s.expect_eq(r.exit_code, 1, "exit code (output: " + r.output + ")");
        auto lines = tc::split_lines(tu::read_text(dir.file("r.csv")));
        s.expect_eq(lines.size(), std::size_t{2}, "report line count");
        s.expect(lines.size() == 2 && lines[1].rfind("# error: nothing to prune", 0) == 0,
                 "error row in report");
        s.expect(!file_exists(dir.file("o.pdm")), "no model written on failure");
    });

    s.run("cli: incompatible data stops the run with a partial report", [&] {
        tu::TempDir dir;
        std::mt19937_64 rng(305);
        pk::Model m = tu::random_mlp(rng, {3, 8, 2});  // three features; synthetic data has two
        pk::save_model(m, dir.file("m.pdm"));

        tc::CliResult r = tc::run_cli(cli, "prune --model '" + dir.file("m.pdm") + "' -o '" +
                                               dir.file("o.pdm") + "' --report '" + dir.file("r.csv") +
                                               "' --dataset synthetic --synthetic-classes 2");
        s.expect_eq(r.exit_code, 1, "exit code (output: " + r.output + ")");
        auto lines = tc::split_lines(tu::read_text(dir.file("r.csv")));
        s.expect(!lines.empty() && lines.back().rfind("# error:", 0) == 0, "error row present");
        s.expect(!file_exists(dir.file("o.pdm")), "no model written on failure");
    });

    s.run("cli: eval prints one size and accuracy row", [&] {
        tu::TempDir dir;
        std::string model = save_small_mlp(dir);
        std::mt19937_64 rng(301);
        pk::Model m = tu::random_mlp(rng, {2, 12, 3});  // same seed as save_small_mlp

        tc::CliResult r = tc::run_cli(
            cli, "eval --model '" + model + "' --dataset synthetic --data-seed 11 --synthetic-n 100");
        s.expect_eq(r.exit_code, 0, "exit code (output: " + r.output + ")");
        auto lines = tc::split_lines(r.output);
        s.expect_eq(lines.size(), std::size_t{2}, "output line count");
        if (lines.size() != 2) return;
        s.expect_eq(lines[0], std::string("param_count,file_size_bytes,test_accuracy,fgsm_accuracy"),
                    "header");
        auto cells = tc::split_csv_row(lines[1]);
        s.expect_eq(cells.size(), std::size_t{4}, "cell count");
        if (cells.size() != 4) return;
        s.expect_eq(cells[0], std::to_string(pk::param_count(m)), "param cell");
        s.expect_eq(cells[1], std::to_string(pk::serialized_size(m)), "size cell");
        s.expect(in_unit_range(cells[2]), "accuracy cell");
        s.expect(cells[3].empty(), "fgsm cell empty for flat data without --fgsm-eps");
    });

    s.run("cli: eval --fgsm-eps 0 reproduces the accuracy cell", [&] {
        tu::TempDir dir;
        std::string model = save_small_mlp(dir);
        tc::CliResult r = tc::run_cli(cli, "eval --model '" + model +
                                               "' --dataset synthetic --data-seed 11 --fgsm-eps 0");
        s.expect_eq(r.exit_code, 0, "exit code");
        auto cells = tc::split_csv_row(tc::split_lines(r.output).back());
        s.expect(cells.size() == 4 && !cells[3].empty(), "fgsm cell present");
        if (cells.size() == 4) s.expect_eq(cells[3], cells[2], "zero-epsilon robustness equals accuracy");
    });

    s.run("cli: eval accuracy is chunk-size invariant", [&] {
        tu::TempDir dir;
        std::string model = save_small_mlp(dir);
        std::string base = "eval --model '" + model + "' --dataset synthetic --data-seed 19";
        auto cell = [&](const std::string& extra) {
            tc::CliResult r = tc::run_cli(cli, base + extra);
            s.expect_eq(r.exit_code, 0, "exit code for '" + extra + "'");
            return tc::split_csv_row(tc::split_lines(r.output).back())[2];
        };
        std::string dflt = cell("");
        s.expect_eq(cell(" --chunk 7"), dflt, "chunk 7");
        s.expect_eq(cell(" --chunk 1000"), dflt, "chunk 1000");
    });

    s.run("cli: idx training and evaluation round-trip", [&] {
        tu::TempDir dir;
        constexpr int n = 40, side = 6;
        std::vector<std::uint8_t> pixels;
        std::vector<std::uint8_t> labels;
        for (int i = 0; i < n; ++i) {
            std::uint8_t cls = static_cast<std::uint8_t>(i % 2);
            labels.push_back(cls);
            for (int p = 0; p < side * side; ++p)
                pixels.push_back(static_cast<std::uint8_t>((cls ? 200 : 20) + (i + p) % 20));
        }
        tu::write_idx_pair(dir.file("train-images-idx3-ubyte"), dir.file("train-labels-idx1-ubyte"),
                           pixels, n, side, side, labels);

        tc::CliResult train = tc::run_cli(cli, "train --arch cnn:2 --dataset idx --data-dir '" + dir.path.string() +
                                                   "' --epochs 3 --seed 4 -o '" + dir.file("m.pdm") + "'");
        s.expect_eq(train.exit_code, 0, "train exit code (output: " + train.output + ")");

        tc::CliResult eval = tc::run_cli(
            cli, "eval --model '" + dir.file("m.pdm") + "' --dataset idx --data-dir '" + dir.path.string() + "'");
        s.expect_eq(eval.exit_code, 0, "eval exit code (output: " + eval.output + ")");
        auto cells = tc::split_csv_row(tc::split_lines(eval.output).back());
        s.expect(cells.size() == 4 && in_unit_range(cells[2]), "accuracy cell");
        s.expect(cells.size() == 4 && in_unit_range(cells[3]),
                 "image data must trigger the fgsm column automatically");
    });

    s.run("cli: prune and eval agree on the pruned model's accuracy", [&] {
        tu::TempDir dir;
        std::string model = save_small_mlp(dir);
        std::string data_flags = " --dataset synthetic --data-seed 13 --synthetic-n 90 --synthetic-classes 3";

        tc::CliResult pr = tc::run_cli(cli, "prune --model '" + model + "' -o '" + dir.file("out.pdm") +
                                                "' --report '" + dir.file("r.csv") +
                                                "' --target 0.25 --step 0.25" + data_flags);
        s.expect_eq(pr.exit_code, 0, "prune exit code (output: " + pr.output + ")");
        auto report_cells = tc::split_csv_row(tc::split_lines(tu::read_text(dir.file("r.csv"))).back());
        s.expect(report_cells.size() == 6 && !report_cells[4].empty(), "report accuracy cell");

        tc::CliResult ev = tc::run_cli(cli, "eval --model '" + dir.file("out.pdm") + "'" + data_flags);
        s.expect_eq(ev.exit_code, 0, "eval exit code");
        auto eval_cells = tc::split_csv_row(tc::split_lines(ev.output).back());
        s.expect(eval_cells.size() == 4, "eval cell count");
        if (report_cells.size() == 6 && eval_cells.size() == 4)
            s.expect_eq(eval_cells[2], report_cells[4], "accuracy of the saved model");
    });

    if (s.failures == 0) std::printf("all cli checks passed\n");
    return s.failures;
}
