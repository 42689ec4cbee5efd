#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prunekit/errors.hpp"

namespace prunekit {

// One measurement row of a pruning run, taken after that epoch's surgery.
// Accuracy fields are empty when no dataset was evaluated.
struct EpochRow {
    int epoch = 0;
    double fraction_pruned = 0.0;
    std::int64_t param_count = 0;
    std::int64_t file_size_bytes = 0;
    std::optional<double> test_accuracy;
    std::optional<double> fgsm_accuracy;
};

struct PruneReport {
    std::vector<EpochRow> rows;
    std::string error;  // non-empty when the run stopped early
};

namespace detail {

inline std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace detail

// CSV with a fixed header; a failed run ends with a "# error: ..." line so
// partial results stay parseable.
inline std::string report_csv(const PruneReport& report) {
    std::string out = "epoch,fraction_pruned,param_count,file_size_bytes,test_accuracy,fgsm_accuracy\n";
    for (const EpochRow& r : report.rows) {
        out += std::to_string(r.epoch);
        out += ',';
        out += detail::format_fixed(r.fraction_pruned, 2);
        out += ',';
        out += std::to_string(r.param_count);
        out += ',';
        out += std::to_string(r.file_size_bytes);
        out += ',';
        if (r.test_accuracy) out += detail::format_fixed(*r.test_accuracy, 6);
        out += ',';
        if (r.fgsm_accuracy) out += detail::format_fixed(*r.fgsm_accuracy, 6);
        out += '\n';
    }
    if (!report.error.empty()) out += "# error: " + report.error + "\n";
    return out;
}

// JSON mirror of the CSV: a plain array of row objects with the same
// fields. Skipped measurements serialize as null; a run error is reported
// through the CSV comment row and the process exit code, not here.
inline nlohmann::json report_json(const PruneReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const EpochRow& r : report.rows) {
        nlohmann::json row{
            {"epoch", r.epoch},
            {"fraction_pruned", r.fraction_pruned},
            {"param_count", r.param_count},
            {"file_size_bytes", r.file_size_bytes},
            {"test_accuracy", nullptr},
            {"fgsm_accuracy", nullptr},
        };
        if (r.test_accuracy) row["test_accuracy"] = *r.test_accuracy;
        if (r.fgsm_accuracy) row["fgsm_accuracy"] = *r.fgsm_accuracy;
        rows.push_back(std::move(row));
    }
    return rows;
}

// Write via a temp file and rename so readers never observe a half-written
// file.
inline void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw io_error("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        std::error_code ec2;
        fs::remove(tmp, ec2);
        throw io_error("failed to move '" + tmp.string() + "' to '" + target.string() + "': " + ec.message());
    }
}

inline void write_report_csv(const PruneReport& report, const std::string& path) {
    write_text_atomic(path, report_csv(report));
}

inline void write_report_json(const PruneReport& report, const std::string& path) {
    write_text_atomic(path, report_json(report).dump(2) + "\n");
}

}  // namespace prunekit
