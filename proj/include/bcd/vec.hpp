#pragma once

#include <cmath>
#include <span>

namespace bcd {

// Left-to-right accumulation everywhere: reproducibility beats the last ulp.

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

}  // namespace bcd
