#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace ckt {

/// A point on the probability simplex: theta_i >= 0, sum theta_i = 1
/// (within 1e-12, enforced by producers rather than by this struct).
struct SimplexPoint {
  std::vector<double> theta;
};

/// Dirichlet parameter vector, all alpha_i > 0.
struct DirichletParams {
  std::vector<double> alpha;
};

/// One linear constraint coeff . theta <= bound.
struct HalfSpace {
  std::vector<double> coeff;
  double bound = 0.0;
};

enum class ConstraintForm { Full, Box, Polytope };

enum class Backend { Exact, Quadrature, MonteCarlo };

/// Result of a Dirichlet-measure computation. log_value is ln of the measure
/// (<= 0), std_error is 0 for deterministic backends and the sample standard
/// error for Monte Carlo.
struct MeasureEstimate {
  double log_value = 0.0;
  double std_error = 0.0;
  Backend backend = Backend::Exact;
};

/// Knobs for the numerical-integration backends.
struct IntegrationConfig {
  std::int64_t samples = 100000;  // Monte Carlo sample count
  double quad_tol = 1e-9;         // adaptive quadrature tolerance
  int quadrature_max_m = 4;       // boxes up to this dimension use quadrature
  double mass_floor = 1e-3;       // below this conditioning mass, escalate
  std::uint64_t seed = 0;         // Monte Carlo seed
};

/// A convex subset of the probability simplex: the whole simplex, a box of
/// per-coordinate bounds on the first m-1 coordinates, or an intersection of
/// half-spaces. Immutable after construction; construction validates that the
/// set has positive measure (lower-dimensional faces are rejected).
class ConstraintSet {
 public:
  static ConstraintSet full(int m);
  /// lower/upper bound the first m-1 coordinates; both have size m-1.
  static ConstraintSet box(int m, std::vector<double> lower, std::vector<double> upper);
  static ConstraintSet polytope(int m, std::vector<HalfSpace> halfspaces);

  /// Parses the text format: one directive per line, '#' starts a comment.
  ///   alphabet <m>
  ///   box <i> <a_i> <b_i>          (1-based coordinate, i <= m-1)
  ///   halfspace <c_1> ... <c_m> <d>
  /// No box/halfspace lines means the full simplex.
  static ConstraintSet parse(std::istream& in);
  static ConstraintSet parse_file(const std::string& path);

  int m() const { return m_; }
  ConstraintForm form() const { return form_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<HalfSpace>& halfspaces() const { return halfspaces_; }
  /// Vertices of the feasible region (polytope form only).
  const std::vector<std::vector<double>>& vertices() const { return vertices_; }

  /// Membership with tolerance 1e-12 on every inequality.
  bool contains(const SimplexPoint& p) const;

  /// Normalized text form; equal sets serialize identically.
  std::string canonical_text() const;
  /// FNV-1a 64 digest of canonical_text(), used by the codec header.
  std::uint64_t digest() const;

 private:
  ConstraintSet() = default;

  int m_ = 0;
  ConstraintForm form_ = ConstraintForm::Full;
  std::vector<double> lower_, upper_;        // box form, size m-1
  std::vector<HalfSpace> halfspaces_;        // polytope form
  std::vector<std::vector<double>> vertices_;  // polytope form
};

/// Free-function spelling of ConstraintSet::contains.
bool contains(const ConstraintSet& s, const SimplexPoint& p);

/// For m = 2 only: the feasible range of theta_1 (every m=2 form reduces to
/// an interval). Throws for m > 2.
std::pair<double, double> theta1_range(const ConstraintSet& s);

/// Dir(S; alpha) = P(Dirichlet(alpha) in S). Backend selection: Full is the
/// exact constant 1; any m=2 set reduces to exact incomplete-beta interval
/// masses; boxes with 3 <= m <= cfg.quadrature_max_m use recursive
/// stick-breaking adaptive quadrature; everything else is Monte Carlo with
/// cfg.samples and cfg.seed. A certified tail bound short-circuits boxes whose
/// complement mass is provably below 1e-13.
MeasureEstimate dirichlet_measure(const ConstraintSet& s, const DirichletParams& alpha,
                                  const IntegrationConfig& cfg);

/// The raw Monte Carlo backend of dirichlet_measure, exposed for backend
/// cross-checks; always samples regardless of what the dispatcher would pick.
MeasureEstimate dirichlet_measure_monte_carlo(const ConstraintSet& s,
                                              const DirichletParams& alpha,
                                              const IntegrationConfig& cfg);

/// C(S) = Dir(S; 1/2).
MeasureEstimate jeffreys_constant(const ConstraintSet& s, const IntegrationConfig& cfg);

/// i.i.d. Dirichlet(alpha) draws via normalized Gamma variates. Deterministic
/// given (alpha, count, seed): samples are generated in fixed-size chunks with
/// per-chunk derived seeds, so the result never depends on scheduling.
std::vector<SimplexPoint> sample_dirichlet(const DirichletParams& alpha, std::int64_t count,
                                           std::uint64_t seed);

/// Posterior mean of theta under Dirichlet(alpha) conditioned on theta in S:
/// r_i = E[theta_i 1_S] / E[1_S]. Returns a probability vector.
std::vector<double> constrained_moment_ratio(const ConstraintSet& s, const DirichletParams& alpha,
                                             const IntegrationConfig& cfg);

/// Extended form of constrained_moment_ratio carrying per-coordinate standard
/// errors, the conditioning mass, and the backend used.
struct MomentRatioResult {
  std::vector<double> probs;
  std::vector<double> std_errors;
  MeasureEstimate mass;  // Dir(S; alpha), the denominator
};
MomentRatioResult constrained_moment_ratio_detail(const ConstraintSet& s,
                                                  const DirichletParams& alpha,
                                                  const IntegrationConfig& cfg);

/// SplitMix64-style seed derivation; used everywhere a reproducible stream of
/// sub-seeds is needed (sampling chunks, per-step estimator seeds).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ckt
