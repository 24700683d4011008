#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ckt/constraints.hpp"
#include "sampling_detail.hpp"

namespace ckt {

namespace {

constexpr std::int64_t kChunk = 4096;

// One chunk's generator: mt19937_64 plus the distributions we need, all
// hand-rolled on top of raw 64-bit draws so the byte stream is pinned down
// (std::normal_distribution etc. are not bit-stable across standard libraries).
class ChunkRng {
 public:
  explicit ChunkRng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on (0, 1]; never zero, so logs are safe.
  double next_double() {
    return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via the polar method.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Gamma(alpha, 1) via Marsaglia-Tsang squeeze; alpha < 1 boosted through
  // Gamma(alpha + 1) * U^(1/alpha).
  double next_gamma(double alpha) {
    if (alpha < 1.0) {
      const double g = next_gamma(alpha + 1.0);
      return g * std::pow(next_double(), 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x, v;
      do {
        x = next_normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_double();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // SplitMix64 finalizer over the combined state.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace detail {

void foreach_dirichlet(std::span<const double> alpha, std::int64_t count, std::uint64_t seed,
                       const std::function<void(const double*)>& fn) {
  const int m = static_cast<int>(alpha.size());
  for (double a : alpha) {
    if (!(a > 0.0)) throw std::domain_error("sample_dirichlet: requires alpha_i > 0");
  }
  std::vector<double> row(m);
  for (std::int64_t chunk = 0; chunk * kChunk < count; ++chunk) {
    ChunkRng rng(derive_seed(seed, static_cast<std::uint64_t>(chunk)));
    const std::int64_t begin = chunk * kChunk;
    const std::int64_t end = std::min(count, begin + kChunk);
    for (std::int64_t s = begin; s < end; ++s) {
      double total = 0.0;
      for (int i = 0; i < m; ++i) {
        row[i] = rng.next_gamma(alpha[i]);
        total += row[i];
      }
      // A zero total is only reachable through underflow of every gamma
      // variate at once; fall back to the uniform center rather than NaN.
      if (total <= 0.0) {
        for (int i = 0; i < m; ++i) row[i] = 1.0 / m;
      } else {
        for (int i = 0; i < m; ++i) row[i] /= total;
      }
      fn(row.data());
    }
  }
}

void sample_dirichlet_flat(std::span<const double> alpha, std::int64_t count,
                           std::uint64_t seed, double* out) {
  const int m = static_cast<int>(alpha.size());
  double* dst = out;
  foreach_dirichlet(alpha, count, seed, [&](const double* row) {
    std::copy(row, row + m, dst);
    dst += m;
  });
}

}  // namespace detail

std::vector<SimplexPoint> sample_dirichlet(const DirichletParams& alpha, std::int64_t count,
                                           std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_dirichlet: count must be >= 1");
  const int m = static_cast<int>(alpha.alpha.size());
  if (m < 2) throw std::invalid_argument("sample_dirichlet: need at least 2 coordinates");
  std::vector<double> flat(static_cast<std::size_t>(count) * m);
  detail::sample_dirichlet_flat(alpha.alpha, count, seed, flat.data());
  std::vector<SimplexPoint> points(count);
  for (std::int64_t s = 0; s < count; ++s) {
    points[s].theta.assign(flat.begin() + s * m, flat.begin() + (s + 1) * m);
  }
  return points;
}

}  // namespace ckt
