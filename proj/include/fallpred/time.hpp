#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace fallpred {

// Event times (fault onset, fall, window ends, detections) are kept as integer
// microseconds so that differences between them are exact.
using Micros = std::chrono::microseconds;

inline Micros to_micros(double seconds) {
  return Micros{static_cast<std::int64_t>(std::llround(seconds * 1e6))};
}

inline double to_seconds(Micros t) { return static_cast<double>(t.count()) / 1e6; }

}  // namespace fallpred
