#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prunekit {

// Base of everything thrown by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape or index disagreement between tensors/layers.
struct dimension_error : error {
    using error::error;
};

// Malformed model or dataset file. `offset` is the byte position the parser
// was examining when it gave up; SIZE_MAX when no meaningful offset exists.
struct parse_error : error {
    std::size_t offset;

    explicit parse_error(const std::string& msg)
        : error(msg), offset(static_cast<std::size_t>(-1)) {}

    parse_error(const std::string& msg, std::size_t at)
        : error(msg + " (at byte " + std::to_string(at) + ")"), offset(at) {}
};

struct io_error : error {
    using error::error;
};

// NaN/Inf where finite values are required, or an invalid interval.
struct numeric_error : error {
    using error::error;
};

// Invalid caller-supplied configuration: bad fraction, unknown strategy,
// malformed arch string, bad column name.
struct config_error : error {
    using error::error;
};

// Operation applied to a layer kind or model head that cannot support it.
struct unsupported_error : error {
    using error::error;
};

// Structural surgery refused (would empty a layer, no downstream layer).
struct surgery_error : error {
    using error::error;
};

// Fixture training diverged.
struct training_error : error {
    using error::error;
};

}  // namespace prunekit
