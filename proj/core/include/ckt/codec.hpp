#pragma once

#include <cstdint>
#include <vector>

#include "ckt/constraints.hpp"

namespace ckt {

/// Encoded stream: a fixed 31-byte header followed by the range-coder
/// payload. bit_length counts payload bits only (always a multiple of 8; the
/// header is bookkeeping, not code).
struct BitBuffer {
  std::vector<std::uint8_t> bytes;
  std::int64_t bit_length = 0;
};

/// Parsed header fields. Layout, big-endian throughout:
/// magic "CKTF" (4) | version 0x01 (1) | m (2) | n (8) | seed (8) |
/// constraints digest (8).
struct CodecHeader {
  int m = 0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t constraints_digest = 0;
};

CodecHeader read_header(const BitBuffer& buf);

/// Compresses a 1-based symbol sequence with the sequential constrained
/// estimator driving a 32-bit range coder at 16-bit probability resolution.
/// Deterministic given (x, S, cfg, seed).
BitBuffer encode(const std::vector<int>& x, const ConstraintSet& s, const IntegrationConfig& cfg,
                 std::uint64_t seed);

/// Exact inverse of encode. The header's m, seed, and constraints digest must
/// match the arguments; payload truncation or trailing garbage is an error.
std::vector<int> decode(const BitBuffer& buf, const ConstraintSet& s, const IntegrationConfig& cfg,
                        std::uint64_t seed);

/// The ideal codelength -log2 M(x) the coder approaches (no quantization, no
/// termination overhead).
double codelength_bits(const std::vector<int>& x, const ConstraintSet& s,
                       const IntegrationConfig& cfg);

}  // namespace ckt
