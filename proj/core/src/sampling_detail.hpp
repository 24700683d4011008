#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace ckt::detail {

// Fills out[count * m] with Dirichlet(alpha) samples, row-major, one simplex
// point per row. Same chunked deterministic scheme as ckt::sample_dirichlet.
void sample_dirichlet_flat(std::span<const double> alpha, std::int64_t count,
                           std::uint64_t seed, double* out);

// Streams the same sample sequence one row at a time without materializing
// the full matrix; fn receives a pointer to m doubles valid for the call.
void foreach_dirichlet(std::span<const double> alpha, std::int64_t count, std::uint64_t seed,
                       const std::function<void(const double*)>& fn);

}  // namespace ckt::detail
