#pragma once

// Small dense vector helpers and the Signal value type.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

#include "sharplad/common.hpp"

namespace sharplad {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm1(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += std::abs(v);
    return s;
}

/// a + scale * b
inline Vec axpy(std::span<const double> a, double scale, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("axpy: dimension mismatch");
    Vec out(a.begin(), a.end());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += scale * b[i];
    return out;
}

inline Vec scaled(std::span<const double> a, double scale) {
    Vec out(a.begin(), a.end());
    for (double& v : out) v *= scale;
    return out;
}

/// Real n-vector with n >= 1 and finite entries.
class Signal {
public:
    Signal() = default;
    explicit Signal(Vec entries) : entries_(std::move(entries)) {
        if (entries_.empty()) throw DomainError("Signal: dimension must be at least 1");
        for (double v : entries_)
            if (!std::isfinite(v)) throw DomainError("Signal: entries must be finite");
    }
    Signal(std::initializer_list<double> entries) : Signal(Vec(entries)) {}

    std::size_t n() const { return entries_.size(); }
    std::span<const double> values() const { return entries_; }
    const Vec& vec() const { return entries_; }
    double operator[](std::size_t i) const { return entries_[i]; }
    double norm() const { return norm2(entries_); }

    Signal operator-() const { return Signal(scaled(entries_, -1.0)); }

private:
    Vec entries_;
};

}  // namespace sharplad
