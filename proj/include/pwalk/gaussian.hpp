#pragma once

#include <cmath>

namespace pwalk {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kSqrt2 = 1.41421356237309504880168872420969808;

/// Standard normal density.
inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

/// Standard normal CDF via erfc; accurate in both tails.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / kSqrt2);
}

/// Heat kernel (2*pi*t)^(-1/2) exp(-x^2 / 2t).
inline double heat_kernel(double t, double x) {
    return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * kPi * t);
}

} // namespace pwalk
