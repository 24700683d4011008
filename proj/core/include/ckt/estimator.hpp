#pragma once

#include <cstdint>
#include <vector>

#include "ckt/constraints.hpp"
#include "ckt/mle.hpp"

namespace ckt {

/// One step's conditional distribution over the next symbol. std_errors are
/// zero for exact backends. clamped counts coordinates raised to the 1e-12
/// probability floor before renormalization.
struct PredictiveDistribution {
  std::vector<double> probs;
  std::vector<double> std_errors;
  int clamped = 0;
};

/// Sequential add-1/2 estimator conditioned on a constraint set. counts holds
/// the symbol tallies seen so far; log_dir_current caches ln Dir(S; counts +
/// 1/2) with its uncertainty; log_mixture_accum is the running ln of the
/// sequence probability assigned by the mixture.
struct EstimatorState {
  ConstraintSet constraints;
  CountVector counts;
  MeasureEstimate log_dir_current;
  double log_mixture_accum = 0.0;
  IntegrationConfig cfg;
  std::uint64_t rng_seed = 0;
  std::int64_t clamp_events = 0;
};

EstimatorState new_estimator(const ConstraintSet& s, const IntegrationConfig& cfg,
                             std::uint64_t seed);

/// probs_i = E[theta_i | theta in S] under Dirichlet(counts + 1/2): equals
/// (N_i + 1/2)/(n + m/2) scaled by the measure ratio Dir(S; counts + e_i +
/// 1/2)/Dir(S; counts + 1/2). Unconstrained S reduces to plain add-1/2.
/// Deterministic given the state: sampled backends reseed per step from
/// (rng_seed, counts).
PredictiveDistribution predict(const EstimatorState& state);

/// Records symbol (1-based), adds ln predict(state).probs[symbol] to the
/// mixture accumulator, and refreshes the cached measure at the new counts.
/// The second form reuses an already-computed prediction for this state.
void update(EstimatorState& state, int symbol);
void update(EstimatorState& state, int symbol, const PredictiveDistribution& pred);

/// ln M(x) of the mixture over the truncated Jeffreys prior, from counts
/// alone: ln B(k+1/2) - ln B(1/2) - ln C(S) + ln Dir(S; k+1/2). Equals the
/// telescoped sum of sequential conditionals.
double log_mixture_direct(const CountVector& counts, const ConstraintSet& s,
                          const IntegrationConfig& cfg);
/// Sequence form; symbols are 1-based. The value depends on x only through
/// its counts.
double log_mixture_direct(const std::vector<int>& x, const ConstraintSet& s,
                          const IntegrationConfig& cfg);

}  // namespace ckt
