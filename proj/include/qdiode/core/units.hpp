#pragma once

#include <numbers>

namespace qdiode {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// External (file/CLI) frequencies are quoted as value/2pi in Hz; everything
// inside the library is an angular frequency. The two wrappers keep the single
// conversion boundary explicit.
struct Hertz {
    double value = 0.0;
};

struct RadPerSec {
    double value = 0.0;
};

constexpr RadPerSec to_angular(Hertz f) { return {f.value * kTwoPi}; }
constexpr Hertz to_hertz(RadPerSec w) { return {w.value / kTwoPi}; }

}  // namespace qdiode
