#pragma once

#include <span>
#include <vector>

namespace ckt::detail {

// Maximizes sum_i w_i ln(theta_i) over {theta: lower_i <= theta_i <= upper_i,
// sum theta_i = 1} by water-filling (clip k_i/lambda to the bounds, bisect on
// lambda). Weights are nonnegative reals; zero-weight coordinates sit at their
// lower bound unless the simplex constraint forces them up, in which case the
// deficit is pushed onto the highest-indexed zero-weight coordinates so the
// result is the lexicographically smallest maximizer. Bounds have size m.
std::vector<double> box_weighted_mle(std::span<const double> w, std::span<const double> lower,
                                     std::span<const double> upper);

// Maximizes sum_i w_i ln(theta_i) over conv(vertices) by away-step
// Frank-Wolfe with exact line search; the linear subproblems enumerate the
// vertex list. Throws (reporting the achieved gap) if the duality gap does
// not reach gap_tol within max_iter iterations. If gap_out is non-null the
// achieved gap is stored there.
std::vector<double> polytope_weighted_mle(std::span<const double> w,
                                          const std::vector<std::vector<double>>& vertices,
                                          double gap_tol, int max_iter = 10000,
                                          double* gap_out = nullptr);

}  // namespace ckt::detail
