#pragma once

// Euler representation of intensities: x in [0,1] maps to
// (1/sqrt 2) exp(i * alpha * pi * x), a point of constant modulus.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cmf/linalg.hpp"

namespace cmf {

struct EulerParams {
    double alpha = 1.9;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 2.0))
            throw std::invalid_argument("transform.alpha must lie in (0, 2), got " +
                                        std::to_string(alpha));
    }
};

inline constexpr double kEulerModulus = 0.70710678118654752440; // 1/sqrt(2)

namespace detail {
inline std::string index_str(Eigen::Index i, Eigen::Index j) {
    return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}
} // namespace detail

inline RealMatrix normalize_pixels(const IntMatrix &raw, int maxval) {
    if (maxval <= 0)
        throw std::invalid_argument("normalize_pixels: maxval must be positive");
    RealMatrix x(raw.rows(), raw.cols());
    for (Eigen::Index i = 0; i < raw.rows(); ++i)
        for (Eigen::Index j = 0; j < raw.cols(); ++j) {
            int v = raw(i, j);
            if (v < 0 || v > maxval)
                throw std::out_of_range("normalize_pixels: entry " + std::to_string(v) +
                                        " at " + detail::index_str(i, j) +
                                        " outside [0, " + std::to_string(maxval) + "]");
            x(i, j) = static_cast<double>(v) / maxval;
        }
    return x;
}

inline ComplexMatrix euler_map(const RealMatrix &x, const EulerParams &p = {}) {
    p.validate();
    const double gain = std::numbers::pi * p.alpha;
    ComplexMatrix z(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            double v = x(i, j);
            if (!(v >= 0.0 && v <= 1.0))
                throw std::out_of_range("euler_map: entry outside [0,1] at " +
                                        detail::index_str(i, j));
            z(i, j) = std::polar(kEulerModulus, gain * v);
        }
    return z;
}

// Inverse map with the phase taken on [0, 2*pi).
inline RealMatrix euler_invert(const ComplexMatrix &z, const EulerParams &p = {}) {
    p.validate();
    const double gain = std::numbers::pi * p.alpha;
    RealMatrix x(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            Complex v = z(i, j);
            if (v == Complex(0.0, 0.0))
                throw std::domain_error("euler_invert: zero entry at " +
                                        detail::index_str(i, j) + " has no phase");
            double phase = std::arg(v);
            if (phase < 0.0) phase += 2.0 * std::numbers::pi;
            x(i, j) = phase / gain;
        }
    return x;
}

} // namespace cmf
