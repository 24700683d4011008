#include "ckt/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "ckt/special_functions.hpp"

namespace ckt {

namespace {

constexpr double kProbFloor = 1e-12;

std::uint64_t counts_digest(const CountVector& counts) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(counts.n));
  for (std::int64_t c : counts.k) mix(static_cast<std::uint64_t>(c));
  return h;
}

// Per-step integration config: sampled backends get a seed derived from the
// estimator seed and the full count state, so encoder and decoder walk
// identical sample streams.
IntegrationConfig step_config(const EstimatorState& state) {
  IntegrationConfig cfg = state.cfg;
  cfg.seed = derive_seed(state.rng_seed, counts_digest(state.counts));
  return cfg;
}

DirichletParams posterior_params(const CountVector& counts) {
  DirichletParams alpha;
  alpha.alpha.resize(counts.m());
  for (int i = 0; i < counts.m(); ++i) {
    alpha.alpha[i] = static_cast<double>(counts.k[i]) + 0.5;
  }
  return alpha;
}

}  // namespace

EstimatorState new_estimator(const ConstraintSet& s, const IntegrationConfig& cfg,
                             std::uint64_t seed) {
  EstimatorState state{s, {}, {}, 0.0, cfg, seed, 0};
  state.counts.k.assign(s.m(), 0);
  state.counts.n = 0;
  state.log_dir_current =
      dirichlet_measure(state.constraints, posterior_params(state.counts), step_config(state));
  return state;
}

PredictiveDistribution predict(const EstimatorState& state) {
  MomentRatioResult r = constrained_moment_ratio_detail(
      state.constraints, posterior_params(state.counts), step_config(state));
  PredictiveDistribution out;
  out.probs = std::move(r.probs);
  out.std_errors = std::move(r.std_errors);
  double total = 0.0;
  for (double& p : out.probs) {
    if (p < kProbFloor) {
      p = kProbFloor;
      ++out.clamped;
    }
    total += p;
  }
  if (out.clamped > 0) {
    for (double& p : out.probs) p /= total;
  }
  return out;
}

void update(EstimatorState& state, int symbol, const PredictiveDistribution& pred) {
  if (symbol < 1 || symbol > state.counts.m()) {
    throw std::invalid_argument("update: symbol out of range");
  }
  state.log_mixture_accum += std::log(pred.probs[symbol - 1]);
  state.clamp_events += pred.clamped;
  state.counts.k[symbol - 1] += 1;
  state.counts.n += 1;
  state.log_dir_current =
      dirichlet_measure(state.constraints, posterior_params(state.counts), step_config(state));
}

void update(EstimatorState& state, int symbol) { update(state, symbol, predict(state)); }

double log_mixture_direct(const CountVector& counts, const ConstraintSet& s,
                          const IntegrationConfig& cfg) {
  if (counts.m() != s.m()) throw std::invalid_argument("log_mixture_direct: dimension mismatch");
  const int m = s.m();
  DirichletParams half, post = posterior_params(counts);
  half.alpha.assign(m, 0.5);

  IntegrationConfig base_cfg = cfg;
  base_cfg.seed = derive_seed(cfg.seed, 1);
  IntegrationConfig post_cfg = cfg;
  post_cfg.seed = derive_seed(cfg.seed, 2);

  const double log_c = dirichlet_measure(s, half, base_cfg).log_value;
  const double log_dir = dirichlet_measure(s, post, post_cfg).log_value;
  return log_beta(post.alpha) - log_beta(half.alpha) - log_c + log_dir;
}

double log_mixture_direct(const std::vector<int>& x, const ConstraintSet& s,
                          const IntegrationConfig& cfg) {
  CountVector counts;
  counts.k.assign(s.m(), 0);
  for (int sym : x) {
    if (sym < 1 || sym > s.m()) {
      throw std::invalid_argument("log_mixture_direct: symbol out of range");
    }
    counts.k[sym - 1] += 1;
    counts.n += 1;
  }
  return log_mixture_direct(counts, s, cfg);
}

}  // namespace ckt
