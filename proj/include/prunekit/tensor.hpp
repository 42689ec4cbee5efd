#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "prunekit/errors.hpp"

namespace prunekit {

inline std::string shape_to_string(const std::vector<int>& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

inline std::int64_t shape_numel(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw dimension_error("non-positive dimension in shape " + shape_to_string(shape));
        n *= d;
    }
    return n;
}

// Dense row-major f32 array; the single numeric carrier for weights,
// activations and dataset samples.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape)
        : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_numel(shape_)), 0.0f) {}

    Tensor(std::vector<int> shape, std::vector<float> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (static_cast<std::int64_t>(data_.size()) != shape_numel(shape_))
            throw dimension_error("tensor data length " + std::to_string(data_.size()) +
                                  " does not match shape " + shape_to_string(shape_));
    }

    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
    int rank() const { return static_cast<int>(shape_.size()); }
    std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::vector<float>& values() { return data_; }
    const std::vector<float>& values() const { return data_; }

    float operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
    float& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }

    // rank-2 [rows, cols]
    float at(int r, int c) const { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }
    float& at(int r, int c) { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }

    // rank-4 [a,b,c,d], row-major
    std::int64_t index4(int a, int b, int c, int d) const {
        return ((static_cast<std::int64_t>(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d;
    }
    float at4(int a, int b, int c, int d) const { return data_[static_cast<std::size_t>(index4(a, b, c, d))]; }
    float& at4(int a, int b, int c, int d) { return data_[static_cast<std::size_t>(index4(a, b, c, d))]; }

    // Same data, new shape; element count must be preserved.
    Tensor reshaped(std::vector<int> shape) const {
        if (shape_numel(shape) != numel())
            throw dimension_error("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
        return Tensor(std::move(shape), data_);
    }

    bool all_finite() const {
        for (float v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void require_finite(const std::string& what) const {
        if (!all_finite()) throw numeric_error("non-finite value in " + what);
    }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    std::vector<int> shape_;
    std::vector<float> data_;
};

}  // namespace prunekit
