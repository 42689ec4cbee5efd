#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "prunekit/errors.hpp"
#include "prunekit/model.hpp"
#include "prunekit/tensor.hpp"

namespace prunekit {

// PDM ("portable dense model") file layout, bit-exact:
//
//   bytes 0..3   magic "PDM1"
//   bytes 4..7   u32 little-endian manifest length L
//   bytes 8..8+L UTF-8 JSON manifest (layer kinds, activations, tensor
//                {offset, shape} entries; offsets relative to blob start)
//   remainder    tensor blob: f32 little-endian, row-major, packed in layer
//                order (weights then bias), no gaps
//
// File size is therefore 8 + L + 4 * param_count exactly.
inline constexpr char kPdmMagic[4] = {'P', 'D', 'M', '1'};

namespace detail {

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32le(std::vector<std::uint8_t>& out, float f) {
    put_u32le(out, std::bit_cast<std::uint32_t>(f));
}

inline float get_f32le(const std::uint8_t* p) { return std::bit_cast<float>(get_u32le(p)); }

inline nlohmann::json tensor_entry(std::int64_t offset, const Tensor& t) {
    return nlohmann::json{{"offset", offset}, {"shape", t.shape()}};
}

// Manifest with blob offsets assigned in layer order; offsets are returned
// implicitly via the entries.
inline nlohmann::json build_manifest(const Model& m) {
    nlohmann::json manifest;
    manifest["format"] = "pdm";
    manifest["version"] = 1;
    manifest["input_shape"] = m.input_shape;
    nlohmann::json layers = nlohmann::json::array();
    std::int64_t offset = 0;
    for (const LayerSpec& l : m.layers) {
        nlohmann::json entry;
        entry["kind"] = to_string(l.kind);
        switch (l.kind) {
            case LayerKind::dense:
                entry["activation"] = to_string(l.activation);
                entry["weights"] = tensor_entry(offset, l.weights);
                offset += 4 * l.weights.numel();
                entry["bias"] = tensor_entry(offset, l.bias);
                offset += 4 * l.bias.numel();
                break;
            case LayerKind::conv2d:
                entry["activation"] = to_string(l.activation);
                entry["stride"] = l.stride;
                entry["padding"] = to_string(l.padding);
                entry["kernel"] = tensor_entry(offset, l.weights);
                offset += 4 * l.weights.numel();
                entry["bias"] = tensor_entry(offset, l.bias);
                offset += 4 * l.bias.numel();
                break;
            case LayerKind::flatten:
                break;
            case LayerKind::maxpool2d:
                entry["pool"] = l.pool;
                entry["stride"] = l.stride;
                break;
        }
        layers.push_back(std::move(entry));
    }
    manifest["layers"] = std::move(layers);
    return manifest;
}

inline ActivationKind parse_activation(const std::string& s) {
    if (s == "none") return ActivationKind::none;
    if (s == "relu") return ActivationKind::relu;
    if (s == "softmax") return ActivationKind::softmax;
    throw parse_error("unknown activation '" + s + "'", 8);
}

inline Padding parse_padding(const std::string& s) {
    if (s == "valid") return Padding::valid;
    if (s == "same") return Padding::same;
    throw parse_error("unknown padding '" + s + "'", 8);
}

inline Tensor read_tensor(const nlohmann::json& entry, const std::uint8_t* blob, std::size_t blob_size,
                          std::size_t blob_file_offset, const std::string& what) {
    if (!entry.is_object() || !entry.contains("offset") || !entry.contains("shape"))
        throw parse_error(what + ": tensor entry must carry offset and shape", 8);
    std::int64_t offset = entry["offset"].get<std::int64_t>();
    std::vector<int> shape = entry["shape"].get<std::vector<int>>();
    std::int64_t count = shape_numel(shape);
    if (offset < 0 || offset + 4 * count > static_cast<std::int64_t>(blob_size))
        throw parse_error(what + ": tensor extends past end of blob (need " + std::to_string(offset + 4 * count) +
                              " blob bytes, have " + std::to_string(blob_size) + ")",
                          blob_file_offset + static_cast<std::size_t>(offset < 0 ? 0 : offset));
    std::vector<float> data(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        float v = get_f32le(blob + offset + 4 * i);
        if (!std::isfinite(v))
            throw parse_error(what + ": non-finite value at element " + std::to_string(i),
                              blob_file_offset + static_cast<std::size_t>(offset + 4 * i));
        data[static_cast<std::size_t>(i)] = v;
    }
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace detail

// Full file image of the model.
inline std::vector<std::uint8_t> serialize_model(const Model& m) {
    validate(m);
    std::string manifest = detail::build_manifest(m).dump();
    std::vector<std::uint8_t> out;
    out.reserve(8 + manifest.size() + static_cast<std::size_t>(4 * param_count(m)));
    out.insert(out.end(), kPdmMagic, kPdmMagic + 4);
    detail::put_u32le(out, static_cast<std::uint32_t>(manifest.size()));
    out.insert(out.end(), manifest.begin(), manifest.end());
    for (const LayerSpec& l : m.layers) {
        if (l.kind != LayerKind::dense && l.kind != LayerKind::conv2d) continue;
        for (float v : l.weights.values()) detail::put_f32le(out, v);
        for (float v : l.bias.values()) detail::put_f32le(out, v);
    }
    return out;
}

inline std::int64_t serialized_size(const Model& m) {
    return 8 + static_cast<std::int64_t>(detail::build_manifest(m).dump().size()) + 4 * param_count(m);
}

// Parse a PDM image. Every failure is a parse_error carrying a byte offset.
inline Model parse_model(const std::uint8_t* data, std::size_t size) {
    if (size < 8) throw parse_error("file too small for PDM header (" + std::to_string(size) + " bytes)", 0);
    if (!std::equal(kPdmMagic, kPdmMagic + 4, data)) throw parse_error("bad magic, expected 'PDM1'", 0);
    std::uint32_t manifest_len = detail::get_u32le(data + 4);
    if (8 + static_cast<std::size_t>(manifest_len) > size)
        throw parse_error("manifest length " + std::to_string(manifest_len) + " exceeds file size " +
                              std::to_string(size),
                          4);
    const std::size_t blob_off = 8 + manifest_len;
    const std::uint8_t* blob = data + blob_off;
    const std::size_t blob_size = size - blob_off;

    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(data + 8, data + 8 + manifest_len);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("manifest is not valid JSON: ") + e.what(), 8);
    }

    Model m;
    try {
        if (manifest.value("format", "") != "pdm") throw parse_error("manifest missing format 'pdm'", 8);
        if (manifest.value("version", 0) != 1)
            throw parse_error("unsupported PDM version " + std::to_string(manifest.value("version", 0)), 8);
        m.input_shape = manifest.at("input_shape").get<std::vector<int>>();
        std::int64_t expected_blob = 0;
        for (const auto& entry : manifest.at("layers")) {
            std::string kind = entry.at("kind").get<std::string>();
            LayerSpec l;
            if (kind == "dense") {
                l = LayerSpec::dense(detail::read_tensor(entry.at("weights"), blob, blob_size, blob_off, "dense weights"),
                                     detail::read_tensor(entry.at("bias"), blob, blob_size, blob_off, "dense bias"),
                                     detail::parse_activation(entry.at("activation").get<std::string>()));
            } else if (kind == "conv2d") {
                l = LayerSpec::conv2d(detail::read_tensor(entry.at("kernel"), blob, blob_size, blob_off, "conv kernel"),
                                      detail::read_tensor(entry.at("bias"), blob, blob_size, blob_off, "conv bias"),
                                      entry.at("stride").get<int>(),
                                      detail::parse_padding(entry.at("padding").get<std::string>()),
                                      detail::parse_activation(entry.at("activation").get<std::string>()));
            } else if (kind == "flatten") {
                l = LayerSpec::flatten();
            } else if (kind == "maxpool2d") {
                l = LayerSpec::maxpool2d(entry.at("pool").get<int>(), entry.at("stride").get<int>());
            } else {
                throw parse_error("unknown layer kind '" + kind + "'", 8);
            }
            expected_blob += 4 * l.param_count();
            m.layers.push_back(std::move(l));
        }
        if (expected_blob != static_cast<std::int64_t>(blob_size))
            throw parse_error("model blob: expected " + std::to_string(expected_blob) + " bytes, got " +
                                  std::to_string(blob_size),
                              blob_off);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("manifest field error: ") + e.what(), 8);
    } catch (const dimension_error& e) {
        throw parse_error(std::string("manifest shape error: ") + e.what(), 8);
    }

    try {
        validate(m);
    } catch (const error& e) {
        throw parse_error(std::string("shape chain: ") + e.what(), 8);
    }
    return m;
}

// Write the model to `path`; returns the byte count (the file-size metric).
inline std::int64_t save_model(const Model& m, const std::string& path) {
    std::vector<std::uint8_t> bytes = serialize_model(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw io_error("short write to '" + path + "'");
    return static_cast<std::int64_t>(bytes.size());
}

// Write via a temp file in the same directory plus rename, so a failing run
// never leaves a partially written model behind.
inline std::int64_t save_model_atomic(const Model& m, const std::string& path) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    std::int64_t n = save_model(m, tmp.string());
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw io_error("cannot move temp file onto '" + path + "': " + ec.message());
    }
    return n;
}

inline Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_model(bytes.data(), bytes.size());
}

}  // namespace prunekit
