#ifndef BUNDLESCOPE_FLOAT_FORMAT_HPP
#define BUNDLESCOPE_FLOAT_FORMAT_HPP

#include <cmath>
#include <limits>
#include <string>

#include "bundlescope/errors.hpp"

namespace bundlescope {

// Binary32 is the working format for training and bundle measurement;
// Binary64 exists for the verification oracles.
enum class FloatFormat { Binary32, Binary64 };

inline std::string to_string(FloatFormat f) {
    return f == FloatFormat::Binary32 ? "binary32" : "binary64";
}

inline FloatFormat float_format_from_string(const std::string& s) {
    if (s == "binary32") return FloatFormat::Binary32;
    if (s == "binary64") return FloatFormat::Binary64;
    throw format_error("unknown float format: " + s);
}

template <typename T>
struct format_of;

template <>
struct format_of<float> {
    static constexpr FloatFormat value = FloatFormat::Binary32;
};

template <>
struct format_of<double> {
    static constexpr FloatFormat value = FloatFormat::Binary64;
};

// Spacing between `value` and the next representable number above it.
// ulp(0) is the smallest positive subnormal of the format.
inline double ulp(double value, FloatFormat format) {
    if (std::isnan(value) || std::isinf(value) || value < 0.0)
        throw domain_error("ulp: value must be finite and non-negative");
    if (format == FloatFormat::Binary32) {
        const float v = static_cast<float>(value);
        if (std::isinf(v))
            throw domain_error("ulp: value exceeds binary32 range");
        return static_cast<double>(std::nextafter(v, std::numeric_limits<float>::infinity()) - v);
    }
    return std::nextafter(value, std::numeric_limits<double>::infinity()) - value;
}

} // namespace bundlescope

#endif
