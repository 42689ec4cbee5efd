#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "prunekit/errors.hpp"
#include "prunekit/tensor.hpp"

namespace prunekit {

// Labelled evaluation/training data. inputs is [n, ...]; labels[i] in
// [0, class_count).
struct Dataset {
    Tensor inputs;
    std::vector<int> labels;
    int class_count = 0;

    int size() const { return inputs.empty() ? 0 : inputs.dim(0); }

    std::vector<int> sample_shape() const {
        std::vector<int> s(inputs.shape().begin() + 1, inputs.shape().end());
        return s;
    }

    std::int64_t features_per_sample() const { return size() == 0 ? 0 : inputs.numel() / size(); }

    // Contiguous batch [count, ...] starting at `start`.
    Tensor batch(int start, int count) const {
        if (start < 0 || count < 1 || start + count > size())
            throw dimension_error("batch [" + std::to_string(start) + ", " + std::to_string(start + count) +
                                  ") out of range for dataset of " + std::to_string(size()));
        std::vector<int> shape = inputs.shape();
        shape[0] = count;
        std::int64_t per = features_per_sample();
        std::vector<float> data(inputs.values().begin() + start * per,
                                inputs.values().begin() + (start + count) * per);
        return Tensor(std::move(shape), std::move(data));
    }

    Tensor sample(int i) const { return batch(i, 1); }
};

namespace detail {

inline std::uint32_t get_u32be(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "'");
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace detail

// IDX image/label pair (the MNIST container format): big-endian headers,
// magic 0x00000803 for images and 0x00000801 for labels. Pixels are scaled
// to [0,1] by /255. `limit` keeps only the first records.
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                        std::optional<int> limit = std::nullopt) {
    std::vector<std::uint8_t> img = detail::read_file(images_path);
    std::vector<std::uint8_t> lab = detail::read_file(labels_path);

    if (img.size() < 16) throw parse_error(images_path + ": truncated IDX image header", img.size());
    std::uint32_t img_magic = detail::get_u32be(img.data());
    if (img_magic != 0x00000803u)
        throw parse_error(images_path + ": bad IDX image magic " + std::to_string(img_magic), 0);
    std::uint32_t n = detail::get_u32be(img.data() + 4);
    std::uint32_t rows = detail::get_u32be(img.data() + 8);
    std::uint32_t cols = detail::get_u32be(img.data() + 12);
    if (img.size() != 16 + static_cast<std::size_t>(n) * rows * cols)
        throw parse_error(images_path + ": expected " + std::to_string(16 + static_cast<std::size_t>(n) * rows * cols) +
                              " bytes, got " + std::to_string(img.size()),
                          img.size());

    if (lab.size() < 8) throw parse_error(labels_path + ": truncated IDX label header", lab.size());
    std::uint32_t lab_magic = detail::get_u32be(lab.data());
    if (lab_magic != 0x00000801u)
        throw parse_error(labels_path + ": bad IDX label magic " + std::to_string(lab_magic), 0);
    std::uint32_t n_lab = detail::get_u32be(lab.data() + 4);
    if (lab.size() != 8 + static_cast<std::size_t>(n_lab))
        throw parse_error(labels_path + ": expected " + std::to_string(8 + n_lab) + " bytes, got " +
                              std::to_string(lab.size()),
                          lab.size());
    if (n != n_lab)
        throw parse_error("image count " + std::to_string(n) + " does not match label count " + std::to_string(n_lab),
                          4);

    int keep = static_cast<int>(n);
    if (limit) {
        if (*limit < 0) throw config_error("limit must be >= 0");
        keep = std::min(keep, *limit);
    }
    if (keep == 0) throw parse_error("IDX dataset is empty after applying limit");

    Dataset ds;
    ds.inputs = Tensor({keep, static_cast<int>(rows), static_cast<int>(cols), 1});
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(keep) * rows * cols; ++i)
        ds.inputs[i] = static_cast<float>(img[16 + static_cast<std::size_t>(i)]) / 255.0f;
    ds.labels.resize(static_cast<std::size_t>(keep));
    int max_label = 0;
    for (int i = 0; i < keep; ++i) {
        ds.labels[static_cast<std::size_t>(i)] = lab[8 + static_cast<std::size_t>(i)];
        max_label = std::max(max_label, ds.labels[static_cast<std::size_t>(i)]);
    }
    ds.class_count = max_label + 1;
    return ds;
}

// CSV with a header row; every non-label column is parsed as f32, the named
// label column as a non-negative integer class id. With `normalize`, each
// feature column is min-max scaled to [0,1] (constant columns map to 0).
inline Dataset load_csv(const std::string& path, const std::string& label_column, bool normalize) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");

    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                cells.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur.push_back(ch);
            }
        }
        cells.push_back(cur);
        return cells;
    };

    std::string line;
    if (!std::getline(in, line) || line.empty()) throw parse_error(path + ": empty file");
    std::vector<std::string> header = split(line);
    int label_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_col = static_cast<int>(i);
    if (label_col < 0) throw config_error(path + ": no column named '" + label_column + "'");
    int n_features = static_cast<int>(header.size()) - 1;
    if (n_features < 1) throw parse_error(path + ": no feature columns besides the label");

    auto parse_cell = [](const std::string& cell, int row, const std::string& col) {
        double v = 0.0;
        const char* first = cell.data();
        const char* last = cell.data() + cell.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v))
            throw parse_error("row " + std::to_string(row) + ", column '" + col + "': cannot parse '" + cell +
                              "' as a number");
        return v;
    };

    std::vector<float> features;
    std::vector<int> labels;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> cells = split(line);
        if (cells.size() != header.size())
            throw parse_error("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                              " cells, got " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = parse_cell(cells[c], row, header[c]);
            if (static_cast<int>(c) == label_col) {
                double r = std::round(v);
                if (r < 0 || std::fabs(v - r) > 1e-9)
                    throw parse_error("row " + std::to_string(row) + ", column '" + header[c] +
                                      "': label must be a non-negative integer, got '" + cells[c] + "'");
                labels.push_back(static_cast<int>(r));
            } else {
                features.push_back(static_cast<float>(v));
            }
        }
    }
    if (labels.empty()) throw parse_error(path + ": no data rows");

    int n = static_cast<int>(labels.size());
    if (normalize) {
        for (int c = 0; c < n_features; ++c) {
            float lo = std::numeric_limits<float>::infinity();
            float hi = -std::numeric_limits<float>::infinity();
            for (int r = 0; r < n; ++r) {
                float v = features[static_cast<std::size_t>(r) * n_features + c];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            float span = hi - lo;
            for (int r = 0; r < n; ++r) {
                float& v = features[static_cast<std::size_t>(r) * n_features + c];
                v = span > 0.0f ? (v - lo) / span : 0.0f;
            }
        }
    }

    Dataset ds;
    ds.inputs = Tensor({n, n_features}, std::move(features));
    ds.labels = std::move(labels);
    ds.class_count = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    return ds;
}

// Deterministic 2-D Gaussian blobs in the unit square, one blob per class.
// Blob centers depend only on the class count (a ring around (0.5, 0.5)), so
// different seeds draw train/held-out splits from the same distribution.
inline Dataset synthetic_dataset(std::uint64_t seed, int n, int classes) {
    if (n <= 0) throw config_error("synthetic dataset needs n > 0");
    if (classes < 2) throw config_error("synthetic dataset needs >= 2 classes");

    constexpr double kRing = 0.32;
    constexpr double kSigma = 0.08;
    std::vector<std::pair<double, double>> centers(static_cast<std::size_t>(classes));
    for (int k = 0; k < classes; ++k) {
        double angle = 2.0 * 3.14159265358979323846 * k / classes;
        centers[static_cast<std::size_t>(k)] = {0.5 + kRing * std::cos(angle), 0.5 + kRing * std::sin(angle)};
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, kSigma);
    Dataset ds;
    ds.inputs = Tensor({n, 2});
    ds.labels.resize(static_cast<std::size_t>(n));
    ds.class_count = classes;
    for (int i = 0; i < n; ++i) {
        int k = i % classes;
        auto [cx, cy] = centers[static_cast<std::size_t>(k)];
        ds.inputs[2 * i] = static_cast<float>(std::clamp(cx + noise(rng), 0.0, 1.0));
        ds.inputs[2 * i + 1] = static_cast<float>(std::clamp(cy + noise(rng), 0.0, 1.0));
        ds.labels[static_cast<std::size_t>(i)] = k;
    }
    return ds;
}

}  // namespace prunekit
