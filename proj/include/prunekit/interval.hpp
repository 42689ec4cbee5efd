#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "prunekit/errors.hpp"

namespace prunekit {

// Closed f32 interval [lo, hi]; invariant lo <= hi (NaN endpoints rejected).
struct Interval {
    float lo = 0.0f;
    float hi = 0.0f;

    Interval() = default;
    Interval(float lo_, float hi_) : lo(lo_), hi(hi_) {
        if (!(lo <= hi)) throw numeric_error("invalid interval [" + std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
    }

    bool contains(float x) const { return lo <= x && x <= hi; }
    bool contains(double x) const { return static_cast<double>(lo) <= x && x <= static_cast<double>(hi); }
    float width() const { return hi - lo; }
    float magnitude() const { return std::max(std::fabs(lo), std::fabs(hi)); }

    friend bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }
};

using IntervalVector = std::vector<Interval>;

inline IntervalVector uniform_box(std::int64_t n, float lo, float hi) {
    return IntervalVector(static_cast<std::size_t>(n), Interval(lo, hi));
}

namespace detail {

// f32 conversions rounded toward -inf / +inf; exact values stay exact, so a
// degenerate interval through exact arithmetic remains a point.
inline float f32_down(double x) {
    float f = static_cast<float>(x);
    if (static_cast<double>(f) > x) f = std::nextafterf(f, -std::numeric_limits<float>::infinity());
    return f;
}

inline float f32_up(double x) {
    float f = static_cast<float>(x);
    if (static_cast<double>(f) < x) f = std::nextafterf(f, std::numeric_limits<float>::infinity());
    return f;
}

// Double-precision working interval used inside bound/impact propagation.
struct DInterval {
    double lo = 0.0;
    double hi = 0.0;

    DInterval() = default;
    DInterval(double lo_, double hi_) : lo(lo_), hi(hi_) {}

    static DInterval point(double v) { return {v, v}; }
    static DInterval of(const Interval& iv) { return {iv.lo, iv.hi}; }

    DInterval scaled(double w) const { return w >= 0.0 ? DInterval{w * lo, w * hi} : DInterval{w * hi, w * lo}; }

    DInterval operator+(const DInterval& o) const { return {lo + o.lo, hi + o.hi}; }
    void operator+=(const DInterval& o) {
        lo += o.lo;
        hi += o.hi;
    }

    // Smallest interval containing this one and zero; the image of a ReLU
    // difference d in [lo,hi] is always inside hull(0, [lo,hi]).
    DInterval hull_zero() const { return {std::min(lo, 0.0), std::max(hi, 0.0)}; }

    Interval to_f32() const {
        if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw numeric_error("non-finite interval in propagation");
        return Interval(f32_down(lo), f32_up(hi));
    }

    double magnitude() const { return std::max(std::fabs(lo), std::fabs(hi)); }
};

}  // namespace detail

}  // namespace prunekit
