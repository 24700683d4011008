#pragma once

#include <cstdint>
#include <vector>

#include "ckt/constraints.hpp"

namespace ckt {

/// Symbol counts k_1..k_m with their total n.
struct CountVector {
  std::vector<std::int64_t> k;
  std::int64_t n = 0;

  CountVector() = default;
  explicit CountVector(std::vector<std::int64_t> counts);
  int m() const { return static_cast<int>(k.size()); }
};

/// argmax of prod theta_i^{k_i} over S. Returns the empirical distribution
/// k/n unchanged (bit for bit) whenever it already lies in S; otherwise
/// projects via water-filling (box) or Frank-Wolfe over the vertex hull
/// (polytope). Requires n >= 1.
SimplexPoint constrained_mle(const ConstraintSet& s, const CountVector& counts);

/// sup over S of ln prod theta_i^{k_i}, with 0 ln 0 = 0. Zero for n = 0.
double sup_log_prob(const ConstraintSet& s, const CountVector& counts);

/// ln of the Shtarkov sum over length-n sequences, split by whether the
/// maximizing parameter is interior (empirical type in S) or pushed to the
/// boundary of S. log_sum is the log-sum-exp of the two parts.
struct ShtarkovResult {
  double log_sum = 0.0;
  double log_interior_sum = 0.0;
  double log_boundary_sum = 0.0;
  std::int64_t n = 0;
  int m = 0;
};

/// Exact enumeration over all types; guarded to at most 1e8 types.
ShtarkovResult shtarkov_sum(const ConstraintSet& s, std::int64_t n);

/// ln of the normalized-maximum-likelihood probability of a sequence with
/// the given counts: sup_log_prob - log_sum. Errors if the result was
/// computed for a different n or alphabet size.
double nml_log_prob(const ShtarkovResult& result, const ConstraintSet& s,
                    const CountVector& counts);

}  // namespace ckt
