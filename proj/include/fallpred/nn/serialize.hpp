#pragma once

#include <iosfwd>

#include "fallpred/nn/network.hpp"

namespace fallpred::nn {

/// Versioned little-endian binary form of a network: magic, format version,
/// architecture hash and fields, then each tensor as name + float64 values.
/// Reading back yields bit-identical parameters.
inline constexpr std::uint32_t kParamFormatVersion = 1;

void write_network(std::ostream& out, const Network& net);
/// Throws ModelError on a bad magic, an unknown version or a hash mismatch.
Network read_network(std::istream& in);

}  // namespace fallpred::nn
