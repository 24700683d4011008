#include "simplex_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace ckt::detail {

namespace {

double clip(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

double sum_at(std::span<const double> w, std::span<const double> lower,
              std::span<const double> upper, double lambda) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    s += w[i] > 0.0 ? clip(w[i] / lambda, lower[i], upper[i]) : lower[i];
  }
  return s;
}


}  // namespace

std::vector<double> box_weighted_mle(std::span<const double> w, std::span<const double> lower,
                                     std::span<const double> upper) {
  const std::size_t m = w.size();
  std::vector<double> theta(m);

  double lower_sum = 0.0, cap_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    lower_sum += lower[i];
    cap_sum += w[i] > 0.0 ? upper[i] : lower[i];
  }
  if (lower_sum > 1.0 + 1e-12) throw std::invalid_argument("box_weighted_mle: infeasible bounds");
  if (1.0 - lower_sum < 1e-15) return {lower.begin(), lower.end()};

  if (cap_sum <= 1.0) {
    // Even with every positive-weight coordinate at its cap the simplex is
    // not filled: the objective is maximized at the caps and the leftover
    // mass goes to zero-weight coordinates, latest indices first, which keeps
    // the result lexicographically smallest among the maximizers.
    double deficit = 1.0 - cap_sum;
    for (std::size_t i = 0; i < m; ++i) theta[i] = w[i] > 0.0 ? upper[i] : lower[i];
    for (std::size_t j = m; j-- > 0 && deficit > 0.0;) {
      if (w[j] > 0.0) continue;
      const double room = upper[j] - theta[j];
      const double add = std::min(room, deficit);
      theta[j] += add;
      deficit -= add;
    }
    if (deficit > 1e-12) throw std::invalid_argument("box_weighted_mle: bounds cannot sum to 1");
    return theta;
  }

  // Bracket lambda: the clipped sum is nonincreasing in lambda.
  double lo = 1.0, hi = 1.0;
  for (int guard = 0; sum_at(w, lower, upper, lo) < 1.0 && guard < 2000; ++guard) lo /= 2.0;
  for (int guard = 0; sum_at(w, lower, upper, hi) > 1.0 && guard < 2000; ++guard) hi *= 2.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (sum_at(w, lower, upper, mid) >= 1.0 ? lo : hi) = mid;
  }
  const double lambda = 0.5 * (lo + hi);

  double clipped_sum = 0.0, interior_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    theta[i] = w[i] > 0.0 ? clip(w[i] / lambda, lower[i], upper[i]) : lower[i];
    const bool interior = w[i] > 0.0 && theta[i] > lower[i] && theta[i] < upper[i];
    (interior ? interior_sum : clipped_sum) += theta[i];
  }
  // Rescale the unclipped coordinates so the sum is exactly 1; they are all
  // proportional to w_i/lambda, so this is just a refinement of lambda.
  if (interior_sum > 0.0) {
    const double scale = (1.0 - clipped_sum) / interior_sum;
    for (std::size_t i = 0; i < m; ++i) {
      if (w[i] > 0.0 && theta[i] > lower[i] && theta[i] < upper[i]) {
        theta[i] = clip(theta[i] * scale, lower[i], upper[i]);
      }
    }
  }
  return theta;
}

std::vector<double> polytope_weighted_mle(std::span<const double> w,
                                          const std::vector<std::vector<double>>& vertices,
                                          double gap_tol, int max_iter, double* gap_out) {
  if (vertices.empty()) throw std::invalid_argument("polytope_weighted_mle: no vertices");
  const std::size_t m = w.size();
  const std::size_t nv = vertices.size();

  // Start from the vertex centroid and track the active convex combination so
  // away steps are available.
  std::vector<double> coef(nv, 1.0 / static_cast<double>(nv));
  std::vector<double> x(m, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t i = 0; i < m; ++i) x[i] += coef[v] * vertices[v][i];
  }

  std::vector<double> grad(m);
  double gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < m; ++i) grad[i] = w[i] > 0.0 ? w[i] / x[i] : 0.0;

    std::size_t fw = 0, away = 0;
    double fw_score = -std::numeric_limits<double>::infinity();
    double away_score = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < nv; ++v) {
      double score = 0.0;
      for (std::size_t i = 0; i < m; ++i) score += grad[i] * vertices[v][i];
      if (score > fw_score) {
        fw_score = score;
        fw = v;
      }
      if (coef[v] > 0.0 && score < away_score) {
        away_score = score;
        away = v;
      }
    }
    double x_score = 0.0;
    for (std::size_t i = 0; i < m; ++i) x_score += grad[i] * x[i];

    gap = fw_score - x_score;
    if (gap <= gap_tol) break;

    // Pick the steeper of the forward and away directions.
    const bool use_away = (x_score - away_score) > (fw_score - x_score);
    std::vector<double> dir(m);
    double gamma_max;
    if (use_away) {
      for (std::size_t i = 0; i < m; ++i) dir[i] = x[i] - vertices[away][i];
      gamma_max = coef[away] / (1.0 - coef[away]);
    } else {
      for (std::size_t i = 0; i < m; ++i) dir[i] = vertices[fw][i] - x[i];
      gamma_max = 1.0;
    }

    // Exact line search on the concave 1-D slice g(t) = f(x + t dir) by
    // bisection on g'(t), guarding the log domain.
    auto slope = [&](double t) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (w[i] > 0.0) s += w[i] * dir[i] / (x[i] + t * dir[i]);
      }
      return s;
    };
    double t_hi = gamma_max;
    for (std::size_t i = 0; i < m; ++i) {
      if (w[i] > 0.0 && dir[i] < 0.0) {
        t_hi = std::min(t_hi, -x[i] / dir[i] * (1.0 - 1e-12));
      }
    }
    double t = t_hi;
    if (slope(t_hi) < 0.0) {
      double a = 0.0, b = t_hi;
      for (int k = 0; k < 100 && (b - a) > 1e-16 * t_hi; ++k) {
        const double mid = 0.5 * (a + b);
        (slope(mid) > 0.0 ? a : b) = mid;
      }
      t = 0.5 * (a + b);
    }
    if (t <= 0.0) break;

    if (use_away) {
      const double ratio = 1.0 + t;
      for (std::size_t v = 0; v < nv; ++v) coef[v] *= ratio;
      coef[away] -= t;
      if (coef[away] < 1e-15) coef[away] = 0.0;
    } else {
      for (std::size_t v = 0; v < nv; ++v) coef[v] *= (1.0 - t);
      coef[fw] += t;
    }
    for (std::size_t i = 0; i < m; ++i) x[i] += t * dir[i];

    // Periodically rebuild x from the convex coefficients to cancel drift.
    if ((it & 127) == 127) {
      std::fill(x.begin(), x.end(), 0.0);
      for (std::size_t v = 0; v < nv; ++v) {
        if (coef[v] == 0.0) continue;
        for (std::size_t i = 0; i < m; ++i) x[i] += coef[v] * vertices[v][i];
      }
    }
  }

  if (gap_out != nullptr) *gap_out = gap;
  if (gap > gap_tol) {
    throw std::runtime_error("polytope_weighted_mle: did not converge, achieved duality gap " +
                             std::to_string(gap));
  }
  return x;
}

}  // namespace ckt::detail
