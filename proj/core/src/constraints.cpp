#include "ckt/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ckt/special_functions.hpp"
#include "sampling_detail.hpp"
#include "simplex_opt.hpp"

namespace ckt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kContainTol = 1e-12;   // slack on membership inequalities
constexpr double kInteriorTol = 1e-9;   // strictness for the positive-measure check
constexpr double kTailCert = 1e-13;     // certified tail-bound short-circuit level

std::string format_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Solves the n x n system a.x = rhs in place; false if singular.
bool solve_linear(std::vector<double>& a, std::vector<double>& rhs, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (std::abs(a[pivot * n + col]) < 1e-12) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(rhs[col], rhs[pivot]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int i = 0; i < n; ++i) rhs[i] /= a[i * n + i];
  return true;
}

bool contains_raw(const ConstraintSet& s, const double* th) {
  const int m = s.m();
  for (int i = 0; i < m; ++i) {
    if (th[i] < -kContainTol) return false;
  }
  switch (s.form()) {
    case ConstraintForm::Full:
      return true;
    case ConstraintForm::Box:
      for (int i = 0; i + 1 < m; ++i) {
        if (th[i] < s.lower()[i] - kContainTol || th[i] > s.upper()[i] + kContainTol) return false;
      }
      return true;
    case ConstraintForm::Polytope:
      for (const HalfSpace& h : s.halfspaces()) {
        double dot = 0.0;
        for (int i = 0; i < m; ++i) dot += h.coeff[i] * th[i];
        if (dot > h.bound + kContainTol) return false;
      }
      return true;
  }
  return false;
}

// ln of the Beta(a,b) mass of [lo, hi], evaluated from whichever tail avoids
// cancellation; falls back to shifted log-domain quadrature when even that
// cancels (possible only for masses tiny relative to both tails).
double log_interval_quadrature(double lo, double hi, double a, double b) {
  const double lb = log_beta(a, b);
  auto log_density = [&](double t) {
    return (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t) - lb;
  };
  double shift = std::max(log_density(lo), log_density(hi));
  if (a > 1.0 && b > 1.0) {
    const double mode = (a - 1.0) / (a + b - 2.0);
    if (mode > lo && mode < hi) shift = std::max(shift, log_density(mode));
  }
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double t) { return std::exp(log_density(t) - shift); }, lo, hi, 12, 1e-11, &err);
  if (!(val > 0.0)) return kNegInf;
  return shift + std::log(val);
}

double log_beta_interval_mass(double lo, double hi, double a, double b) {
  lo = std::clamp(lo, 0.0, 1.0);
  hi = std::clamp(hi, 0.0, 1.0);
  if (hi <= lo) return kNegInf;
  double d, ref;
  const double t1 = reg_inc_beta(hi, a, b);
  if (t1 <= 0.5) {
    d = t1 - reg_inc_beta(lo, a, b);
    ref = t1;
  } else {
    const double u0 = reg_inc_beta(1.0 - lo, b, a);  // upper tail at lo
    if (u0 <= 0.5) {
      d = u0 - reg_inc_beta(1.0 - hi, b, a);
      ref = u0;
    } else {
      d = 1.0 - reg_inc_beta(lo, a, b) - reg_inc_beta(1.0 - hi, b, a);
      ref = 1.0;
    }
  }
  if (d > 0.0 && d >= 1e-8 * ref) return std::log(d);
  return log_interval_quadrature(lo, hi, a, b);
}

// theta_1 range of an m=2 constraint set (every m=2 form is an interval).
void m2_interval(const ConstraintSet& s, double& lo, double& hi) {
  lo = 0.0;
  hi = 1.0;
  if (s.form() == ConstraintForm::Box) {
    lo = std::max(lo, s.lower()[0]);
    hi = std::min(hi, s.upper()[0]);
  } else if (s.form() == ConstraintForm::Polytope) {
    for (const HalfSpace& h : s.halfspaces()) {
      // c1 t + c2 (1 - t) <= d  =>  (c1 - c2) t <= d - c2
      const double coeff = h.coeff[0] - h.coeff[1];
      const double rhs = h.bound - h.coeff[1];
      if (std::abs(coeff) < 1e-300) continue;  // feasibility settled at construction
      if (coeff > 0.0) {
        hi = std::min(hi, rhs / coeff);
      } else {
        lo = std::max(lo, rhs / coeff);
      }
    }
  }
}

// Union bound on the Dirichlet mass outside a box, via the Beta marginals of
// each bounded coordinate. Always valid; useful when it is tiny.
double box_tail_bound(const ConstraintSet& s, std::span<const double> alpha) {
  const int m = s.m();
  double total = 0.0;
  for (double a : alpha) total += a;
  double delta = 0.0;
  for (int i = 0; i + 1 < m; ++i) {
    const double ai = s.lower()[i], bi = s.upper()[i];
    if (ai > 0.0) delta += reg_inc_beta(ai, alpha[i], total - alpha[i]);
    if (bi < 1.0) delta += reg_inc_beta(1.0 - bi, total - alpha[i], alpha[i]);
  }
  return delta;
}

// Recursive stick-breaking quadrature over a box: numeric Gauss-Kronrod
// levels over the first m-2 coordinates, exact interval-Beta base case for
// the last two. The running weight is carried in log scale and 1/B(alpha) is
// folded in at the base, so intermediate values stay inside double range.
class BoxQuadrature {
 public:
  BoxQuadrature(const ConstraintSet& s, std::span<const double> alpha, double tol)
      : s_(s), alpha_(alpha), tol_(tol), m_(s.m()), log_beta_all_(log_beta(alpha)) {}

  double integrate(double* error_out) {
    const double v = level(0, 1.0, 0.0, error_out);
    return v;
  }

 private:
  double bound_lo(int i) const { return i + 1 < m_ ? s_.lower()[i] : 0.0; }
  double bound_hi(int i) const { return i + 1 < m_ ? s_.upper()[i] : 1.0; }

  double base_pair(double remaining, double log_weight) const {
    if (remaining <= 0.0) return 0.0;
    const int i = m_ - 2;
    const double p = alpha_[i], q = alpha_[i + 1];
    const double lo = bound_lo(i) / remaining;
    const double hi = std::min(bound_hi(i), remaining) / remaining;
    const double log_mass = log_beta_interval_mass(lo, hi, p, q);
    if (log_mass == kNegInf) return 0.0;
    const double lv = log_weight + (p + q - 1.0) * std::log(remaining) + log_beta(p, q) +
                      log_mass - log_beta_all_;
    return std::exp(lv);
  }

  // The tail integral over coordinates beyond j changes analytic form
  // whenever the mass left for them crosses a partial sum of the deeper
  // interval endpoints (a min()/max() in the nesting switches), leaving
  // square-root kinks. Enumerate those locations so each quadrature piece
  // is smooth inside.
  std::vector<double> cut_points(int j, double remaining, double lo, double hi) const {
    std::vector<double> sums{0.0};
    for (int i = j + 1; i <= m_ - 2 && sums.size() <= 4096; ++i) {
      const std::size_t base = sums.size();
      for (std::size_t k = 0; k < base; ++k) {
        if (bound_lo(i) > 0.0) sums.push_back(sums[k] + bound_lo(i));
        sums.push_back(sums[k] + bound_hi(i));
      }
    }
    std::vector<double> cuts;
    for (double s : sums) {
      const double t = remaining - s;
      if (t > lo + 1e-12 && t < hi - 1e-12) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double x, double y) { return std::abs(x - y) < 1e-12; }),
               cuts.end());
    return cuts;
  }

  double level(int j, double remaining, double log_weight, double* error_out) const {
    if (j == m_ - 2) return base_pair(remaining, log_weight);
    const double lo = std::max(bound_lo(j), 0.0);
    const double hi = std::min(bound_hi(j), remaining);
    if (hi <= lo || remaining <= 0.0) return 0.0;
    const double a = alpha_[j];
    // Integrate piecewise between the tail cusps, mapping each piece with
    // theta_j = c0 + d sin^2 u. The substitution soaks up the t^(alpha-1)
    // endpoint singularity at zero (alpha >= 1/2 always, counts plus a
    // half) and flattens the square-root kinks at the piece endpoints, so
    // Gauss-Kronrod converges and its error estimate is honest.
    std::vector<double> knots{lo};
    for (double c : cut_points(j, remaining, lo, hi)) knots.push_back(c);
    knots.push_back(hi);
    constexpr double kHalfPi = std::numbers::pi / 2.0;
    double total = 0.0;
    double total_err = 0.0;
    for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
      const double c0 = knots[p];
      const double d = knots[p + 1] - knots[p];
      if (!(d > 0.0)) continue;
      const double base_lw = log_weight + std::log(d) + std::log(2.0);
      double err = 0.0;
      total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          [&](double u) {
            const double su = std::sin(u), cu = std::cos(u);
            if (su <= 0.0 || cu <= 0.0) return 0.0;
            const double t = c0 + d * su * su;
            double lw = base_lw + std::log(su) + std::log(cu);
            lw += c0 > 0.0 ? (a - 1.0) * std::log(t)
                           : (a - 1.0) * (std::log(d) + 2.0 * std::log(su));
            return level(j + 1, remaining - t, lw, nullptr);
          },
          0.0, kHalfPi, 12, tol_, &err);
      total_err += err;
    }
    if (error_out != nullptr) *error_out = total_err;
    return total;
  }

  const ConstraintSet& s_;
  std::span<const double> alpha_;
  double tol_;
  int m_;
  double log_beta_all_;
};

void validate_params(const ConstraintSet& s, const DirichletParams& alpha) {
  if (static_cast<int>(alpha.alpha.size()) != s.m()) {
    throw std::invalid_argument("dirichlet parameters do not match the constraint dimension");
  }
  for (double a : alpha.alpha) {
    if (!(a > 0.0)) throw std::domain_error("dirichlet parameters must be positive");
  }
}

struct McMoments {
  std::vector<double> theta_sum;   // sum of theta_i over in-set samples
  std::vector<double> theta_sq;    // sum of theta_i^2 over in-set samples
  std::int64_t hits = 0;
  std::int64_t total = 0;
};

McMoments mc_moments(const ConstraintSet& s, std::span<const double> alpha, std::int64_t n,
                     std::uint64_t seed) {
  const int m = static_cast<int>(alpha.size());
  McMoments acc;
  acc.theta_sum.assign(m, 0.0);
  acc.theta_sq.assign(m, 0.0);
  acc.total = n;
  detail::foreach_dirichlet(alpha, n, seed, [&](const double* th) {
    if (!contains_raw(s, th)) return;
    acc.hits += 1;
    for (int i = 0; i < m; ++i) {
      acc.theta_sum[i] += th[i];
      acc.theta_sq[i] += th[i] * th[i];
    }
  });
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConstraintSet construction and basic queries
// ---------------------------------------------------------------------------

ConstraintSet ConstraintSet::full(int m) {
  if (m < 2) throw std::invalid_argument("ConstraintSet: alphabet size must be >= 2");
  ConstraintSet s;
  s.m_ = m;
  s.form_ = ConstraintForm::Full;
  return s;
}

ConstraintSet ConstraintSet::box(int m, std::vector<double> lower, std::vector<double> upper) {
  if (m < 2) throw std::invalid_argument("ConstraintSet: alphabet size must be >= 2");
  if (static_cast<int>(lower.size()) != m - 1 || static_cast<int>(upper.size()) != m - 1) {
    throw std::invalid_argument("ConstraintSet: box bounds must cover coordinates 1..m-1");
  }
  double lower_sum = 0.0;
  for (int i = 0; i + 1 < m; ++i) {
    const double a = lower[i], b = upper[i];
    if (!(a >= 0.0) || !(b <= 1.0) || !(a <= b)) {
      throw std::invalid_argument("ConstraintSet: box bounds must satisfy 0 <= a_i <= b_i <= 1");
    }
    if (a >= b) {
      throw std::invalid_argument("ConstraintSet: box has zero measure (a_i = b_i)");
    }
    lower_sum += a;
  }
  if (lower_sum >= 1.0) {
    throw std::invalid_argument("ConstraintSet: box has empty or zero-measure intersection");
  }
  ConstraintSet s;
  s.m_ = m;
  s.form_ = ConstraintForm::Box;
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

ConstraintSet ConstraintSet::polytope(int m, std::vector<HalfSpace> halfspaces) {
  if (m < 2) throw std::invalid_argument("ConstraintSet: alphabet size must be >= 2");
  for (const HalfSpace& h : halfspaces) {
    if (static_cast<int>(h.coeff.size()) != m) {
      throw std::invalid_argument("ConstraintSet: half-space coefficient count must equal m");
    }
  }
  ConstraintSet s;
  s.m_ = m;
  s.form_ = ConstraintForm::Polytope;
  s.halfspaces_ = std::move(halfspaces);

  // Enumerate vertices: pick m-1 active constraints among {theta_i = 0} and
  // {c_j . theta = d_j}, always joined with sum(theta) = 1.
  const int total = m + static_cast<int>(s.halfspaces_.size());
  double combos = 1.0;
  for (int i = 0; i < m - 1; ++i) combos *= static_cast<double>(total - i) / (i + 1);
  if (combos > 2e5) {
    throw std::invalid_argument("ConstraintSet: too many half-spaces for vertex enumeration");
  }

  std::vector<int> pick(m - 1);
  for (int i = 0; i < m - 1; ++i) pick[i] = i;
  std::vector<double> mat(static_cast<std::size_t>(m) * m), rhs(m), sol;
  for (;;) {
    mat.assign(static_cast<std::size_t>(m) * m, 0.0);
    rhs.assign(m, 0.0);
    for (int c = 0; c < m; ++c) mat[c] = 1.0;
    rhs[0] = 1.0;
    for (int r = 0; r < m - 1; ++r) {
      const int idx = pick[r];
      if (idx < m) {
        mat[(r + 1) * m + idx] = 1.0;
        rhs[r + 1] = 0.0;
      } else {
        const HalfSpace& h = s.halfspaces_[idx - m];
        for (int c = 0; c < m; ++c) mat[(r + 1) * m + c] = h.coeff[c];
        rhs[r + 1] = h.bound;
      }
    }
    sol = rhs;
    if (solve_linear(mat, sol, m)) {
      bool ok = true;
      for (int i = 0; i < m && ok; ++i) ok = sol[i] >= -1e-10;
      for (const HalfSpace& h : s.halfspaces_) {
        if (!ok) break;
        double dot = 0.0, scale = std::max(1.0, std::abs(h.bound));
        for (int i = 0; i < m; ++i) {
          dot += h.coeff[i] * sol[i];
          scale = std::max(scale, std::abs(h.coeff[i]));
        }
        ok = dot <= h.bound + 1e-10 * scale;
      }
      if (ok) {
        bool dup = false;
        for (const auto& v : s.vertices_) {
          double dist = 0.0;
          for (int i = 0; i < m; ++i) dist = std::max(dist, std::abs(v[i] - sol[i]));
          if (dist < 1e-9) {
            dup = true;
            break;
          }
        }
        if (!dup) s.vertices_.push_back(sol);
      }
    }
    // next combination
    int i = m - 2;
    while (i >= 0 && pick[i] == total - (m - 1) + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < m - 1; ++j) pick[j] = pick[j - 1] + 1;
  }

  if (static_cast<int>(s.vertices_.size()) < m) {
    throw std::invalid_argument("ConstraintSet: polytope has empty or zero-measure intersection");
  }
  // The vertex centroid lies in the relative interior; positive measure means
  // it must be strictly inside the simplex and strictly slack on every
  // half-space.
  std::vector<double> centroid(m, 0.0);
  for (const auto& v : s.vertices_) {
    for (int i = 0; i < m; ++i) centroid[i] += v[i];
  }
  for (int i = 0; i < m; ++i) centroid[i] /= static_cast<double>(s.vertices_.size());
  for (int i = 0; i < m; ++i) {
    if (centroid[i] < kInteriorTol) {
      throw std::invalid_argument("ConstraintSet: polytope has zero measure in the simplex");
    }
  }
  for (const HalfSpace& h : s.halfspaces_) {
    double dot = 0.0, scale = std::max(1.0, std::abs(h.bound));
    for (int i = 0; i < m; ++i) {
      dot += h.coeff[i] * centroid[i];
      scale = std::max(scale, std::abs(h.coeff[i]));
    }
    if (dot > h.bound - kInteriorTol * scale) {
      throw std::invalid_argument("ConstraintSet: polytope has zero measure in the simplex");
    }
  }
  return s;
}

bool ConstraintSet::contains(const SimplexPoint& p) const {
  if (static_cast<int>(p.theta.size()) != m_) {
    throw std::invalid_argument("contains: dimension mismatch");
  }
  return contains_raw(*this, p.theta.data());
}

bool contains(const ConstraintSet& s, const SimplexPoint& p) { return s.contains(p); }

std::pair<double, double> theta1_range(const ConstraintSet& s) {
  if (s.m() != 2) throw std::invalid_argument("theta1_range: defined for m = 2 only");
  double lo, hi;
  m2_interval(s, lo, hi);
  return {lo, hi};
}

std::string ConstraintSet::canonical_text() const {
  std::string out = "alphabet " + std::to_string(m_) + "\n";
  if (form_ == ConstraintForm::Box) {
    for (int i = 0; i + 1 < m_; ++i) {
      out += "box " + std::to_string(i + 1) + " " + format_num(lower_[i]) + " " +
             format_num(upper_[i]) + "\n";
    }
  } else if (form_ == ConstraintForm::Polytope) {
    for (const HalfSpace& h : halfspaces_) {
      out += "halfspace";
      for (double c : h.coeff) out += " " + format_num(c);
      out += " " + format_num(h.bound) + "\n";
    }
  }
  return out;
}

std::uint64_t ConstraintSet::digest() const { return fnv1a64(canonical_text()); }

ConstraintSet ConstraintSet::parse(std::istream& in) {
  int m = 0;
  bool have_alphabet = false;
  std::vector<double> lower, upper;
  std::vector<bool> box_seen;
  bool any_box = false;
  std::vector<HalfSpace> halfspaces;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string directive;
    if (!(ls >> directive)) continue;
    const std::string where = " (line " + std::to_string(line_no) + ")";
    if (directive == "alphabet") {
      if (have_alphabet) throw std::invalid_argument("constraint file: duplicate alphabet" + where);
      if (!(ls >> m) || m < 2) {
        throw std::invalid_argument("constraint file: alphabet must be an integer >= 2" + where);
      }
      have_alphabet = true;
      lower.assign(m - 1, 0.0);
      upper.assign(m - 1, 1.0);
      box_seen.assign(m - 1, false);
    } else if (directive == "box") {
      if (!have_alphabet) throw std::invalid_argument("constraint file: alphabet must come first" + where);
      int i = 0;
      double a = 0.0, b = 0.0;
      if (!(ls >> i >> a >> b)) {
        throw std::invalid_argument("constraint file: box needs <i> <a> <b>" + where);
      }
      if (i < 1 || i > m - 1) {
        throw std::invalid_argument("constraint file: box coordinate out of range" + where);
      }
      if (box_seen[i - 1]) {
        throw std::invalid_argument("constraint file: duplicate box coordinate" + where);
      }
      box_seen[i - 1] = true;
      any_box = true;
      lower[i - 1] = a;
      upper[i - 1] = b;
    } else if (directive == "halfspace") {
      if (!have_alphabet) throw std::invalid_argument("constraint file: alphabet must come first" + where);
      HalfSpace h;
      h.coeff.resize(m);
      for (int c = 0; c < m; ++c) {
        if (!(ls >> h.coeff[c])) {
          throw std::invalid_argument("constraint file: halfspace needs m coefficients and a bound" + where);
        }
      }
      if (!(ls >> h.bound)) {
        throw std::invalid_argument("constraint file: halfspace needs m coefficients and a bound" + where);
      }
      halfspaces.push_back(std::move(h));
    } else {
      throw std::invalid_argument("constraint file: unknown directive '" + directive + "'" + where);
    }
    std::string extra;
    if (ls >> extra) {
      throw std::invalid_argument("constraint file: trailing tokens" + where);
    }
  }
  if (!have_alphabet) throw std::invalid_argument("constraint file: missing alphabet directive");

  if (halfspaces.empty() && !any_box) return full(m);
  if (halfspaces.empty()) return box(m, std::move(lower), std::move(upper));
  // Mixed directives: fold box lines into half-spaces.
  for (int i = 0; i + 1 < m; ++i) {
    if (!box_seen[i]) continue;
    if (lower[i] > 0.0) {
      HalfSpace h;
      h.coeff.assign(m, 0.0);
      h.coeff[i] = -1.0;
      h.bound = -lower[i];
      halfspaces.push_back(std::move(h));
    }
    if (upper[i] < 1.0) {
      HalfSpace h;
      h.coeff.assign(m, 0.0);
      h.coeff[i] = 1.0;
      h.bound = upper[i];
      halfspaces.push_back(std::move(h));
    }
  }
  return polytope(m, std::move(halfspaces));
}

ConstraintSet ConstraintSet::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constraint file: " + path);
  return parse(in);
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

MeasureEstimate dirichlet_measure_monte_carlo(const ConstraintSet& s, const DirichletParams& alpha,
                                              const IntegrationConfig& cfg) {
  validate_params(s, alpha);
  const std::int64_t n = std::max<std::int64_t>(cfg.samples, 1);
  const McMoments acc = mc_moments(s, alpha.alpha, n, cfg.seed);
  const double p = static_cast<double>(acc.hits) / static_cast<double>(n);
  MeasureEstimate est;
  est.backend = Backend::MonteCarlo;
  est.log_value = acc.hits == 0 ? kNegInf : std::log(p);
  if (acc.hits == 0 || acc.hits == n) {
    // The plug-in binomial error vanishes at the extremes although the
    // estimate is not exact; report the Jeffreys posterior width instead.
    const double a = acc.hits + 0.5, b = n - acc.hits + 0.5;
    est.std_error = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
  } else {
    est.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  }
  return est;
}

MeasureEstimate dirichlet_measure(const ConstraintSet& s, const DirichletParams& alpha,
                                  const IntegrationConfig& cfg) {
  validate_params(s, alpha);
  const int m = s.m();
  if (s.form() == ConstraintForm::Full) return {0.0, 0.0, Backend::Exact};

  if (m == 2) {
    double lo, hi;
    m2_interval(s, lo, hi);
    return {log_beta_interval_mass(lo, hi, alpha.alpha[0], alpha.alpha[1]), 0.0, Backend::Exact};
  }

  if (s.form() == ConstraintForm::Box) {
    const double delta = box_tail_bound(s, alpha.alpha);
    if (delta <= kTailCert) {
      // Certified: the mass outside the box is at most delta.
      return {-0.5 * delta, delta, Backend::Quadrature};
    }
    if (m <= cfg.quadrature_max_m) {
      BoxQuadrature quad(s, alpha.alpha, cfg.quad_tol);
      double err = 0.0;
      const double v = quad.integrate(&err);
      if (!(v >= 0.0) || err > 100.0 * cfg.quad_tol * std::max(1.0, v)) {
        throw std::runtime_error("dirichlet_measure: quadrature did not converge");
      }
      MeasureEstimate est;
      est.backend = Backend::Quadrature;
      est.log_value = v > 0.0 ? std::min(0.0, std::log(v)) : kNegInf;
      est.std_error = std::max(err, cfg.quad_tol);
      return est;
    }
  }
  return dirichlet_measure_monte_carlo(s, alpha, cfg);
}

MeasureEstimate jeffreys_constant(const ConstraintSet& s, const IntegrationConfig& cfg) {
  DirichletParams half;
  half.alpha.assign(s.m(), 0.5);
  return dirichlet_measure(s, half, cfg);
}

// ---------------------------------------------------------------------------
// Posterior moment ratios
// ---------------------------------------------------------------------------

namespace {

// Self-normalized importance sampling fallback for posteriors whose mass has
// nearly left S: proposal Dirichlet concentrated at the point of S closest in
// KL divergence to the posterior mean direction.
MomentRatioResult importance_sampled_ratio(const ConstraintSet& s, std::span<const double> alpha,
                                           const IntegrationConfig& cfg) {
  const int m = s.m();
  double total = 0.0;
  for (double a : alpha) total += a;

  std::vector<double> w(m);
  for (int i = 0; i < m; ++i) w[i] = std::max(alpha[i] - 0.5, 0.0);
  std::vector<double> anchor;
  if (s.form() == ConstraintForm::Box) {
    std::vector<double> lo(s.lower().begin(), s.lower().end());
    std::vector<double> hi(s.upper().begin(), s.upper().end());
    lo.push_back(0.0);
    hi.push_back(1.0);
    anchor = detail::box_weighted_mle(w, lo, hi);
  } else {
    try {
      anchor = detail::polytope_weighted_mle(w, s.vertices(), 1e-8);
    } catch (const std::exception&) {
      anchor.assign(m, 0.0);  // fall back to the vertex centroid
      for (const auto& v : s.vertices()) {
        for (int i = 0; i < m; ++i) anchor[i] += v[i];
      }
      for (int i = 0; i < m; ++i) anchor[i] /= static_cast<double>(s.vertices().size());
    }
  }

  std::vector<double> nu(m);
  for (int i = 0; i < m; ++i) nu[i] = std::max(anchor[i] * total, 0.5);

  const std::int64_t n = std::max<std::int64_t>(cfg.samples, 1);
  std::vector<double> thetas(static_cast<std::size_t>(n) * m);
  detail::sample_dirichlet_flat(nu, n, derive_seed(cfg.seed, 0x15CA1Eull), thetas.data());

  const double log_ratio_const = log_beta(nu) - log_beta(alpha);
  std::vector<double> lw(n, kNegInf);
  double shift = kNegInf;
  for (std::int64_t t = 0; t < n; ++t) {
    const double* th = thetas.data() + t * m;
    if (!contains_raw(s, th)) continue;
    double l = log_ratio_const;
    for (int i = 0; i < m; ++i) l += (alpha[i] - nu[i]) * std::log(th[i]);
    lw[t] = l;
    shift = std::max(shift, l);
  }
  if (shift == kNegInf) {
    throw std::runtime_error(
        "constrained_moment_ratio: conditioning mass collapsed below mass_floor and importance "
        "sampling found no feasible mass");
  }

  MomentRatioResult res;
  res.probs.assign(m, 0.0);
  res.std_errors.assign(m, 0.0);
  double wsum = 0.0, wsq = 0.0;
  for (std::int64_t t = 0; t < n; ++t) {
    if (lw[t] == kNegInf) continue;
    const double v = std::exp(lw[t] - shift);
    wsum += v;
    wsq += v * v;
    const double* th = thetas.data() + t * m;
    for (int i = 0; i < m; ++i) res.probs[i] += v * th[i];
  }
  for (int i = 0; i < m; ++i) res.probs[i] /= wsum;
  for (std::int64_t t = 0; t < n; ++t) {
    if (lw[t] == kNegInf) continue;
    const double v = std::exp(lw[t] - shift) / wsum;
    const double* th = thetas.data() + t * m;
    for (int i = 0; i < m; ++i) {
      const double dev = th[i] - res.probs[i];
      res.std_errors[i] += v * v * dev * dev;
    }
  }
  for (int i = 0; i < m; ++i) res.std_errors[i] = std::sqrt(res.std_errors[i]);

  // Mean importance weight estimates the conditioning mass (log domain: the
  // shift can be far below what a linear double represents).
  res.mass.backend = Backend::MonteCarlo;
  res.mass.log_value = std::min(0.0, std::log(wsum / static_cast<double>(n)) + shift);
  const double vbar = wsum / static_cast<double>(n);
  double var = 0.0;
  for (std::int64_t t = 0; t < n; ++t) {
    const double v = lw[t] == kNegInf ? 0.0 : std::exp(lw[t] - shift);
    var += (v - vbar) * (v - vbar);
  }
  const double denom = static_cast<double>(n) * static_cast<double>(std::max<std::int64_t>(n - 1, 1));
  res.mass.std_error = std::sqrt(var / denom) / vbar * std::exp(res.mass.log_value);
  return res;
}

MomentRatioResult monte_carlo_ratio(const ConstraintSet& s, std::span<const double> alpha,
                                    const IntegrationConfig& cfg) {
  const int m = s.m();
  const std::int64_t n = std::max<std::int64_t>(cfg.samples, 1);
  const McMoments acc = mc_moments(s, alpha, n, cfg.seed);
  const double p = static_cast<double>(acc.hits) / static_cast<double>(n);
  if (p < cfg.mass_floor) return importance_sampled_ratio(s, alpha, cfg);

  MomentRatioResult res;
  res.probs.assign(m, 0.0);
  res.std_errors.assign(m, 0.0);
  const double hits = static_cast<double>(acc.hits);
  for (int i = 0; i < m; ++i) {
    const double r = acc.theta_sum[i] / hits;
    res.probs[i] = r;
    // Delta-method standard error of the ratio estimator.
    const double m2 = acc.theta_sq[i] - 2.0 * r * acc.theta_sum[i] + r * r * hits;
    res.std_errors[i] = std::sqrt(std::max(0.0, m2)) / hits;
  }
  res.mass.backend = Backend::MonteCarlo;
  res.mass.log_value = std::log(p);
  res.mass.std_error = std::sqrt(std::max(0.0, p * (1.0 - p) / static_cast<double>(n)));
  return res;
}

}  // namespace

MomentRatioResult constrained_moment_ratio_detail(const ConstraintSet& s,
                                                  const DirichletParams& alpha,
                                                  const IntegrationConfig& cfg) {
  validate_params(s, alpha);
  const int m = s.m();
  double total = 0.0;
  for (double a : alpha.alpha) total += a;

  if (s.form() == ConstraintForm::Full) {
    MomentRatioResult res;
    res.probs.resize(m);
    res.std_errors.assign(m, 0.0);
    for (int i = 0; i < m; ++i) res.probs[i] = alpha.alpha[i] / total;
    res.mass = {0.0, 0.0, Backend::Exact};
    return res;
  }

  if (m == 2) {
    double lo, hi;
    m2_interval(s, lo, hi);
    const double a0 = alpha.alpha[0], a1 = alpha.alpha[1];
    const double lm = log_beta_interval_mass(lo, hi, a0, a1);
    if (lm == kNegInf) {
      throw std::runtime_error("constrained_moment_ratio: conditioning mass is zero");
    }
    const double r0 = std::exp(std::log(a0 / total) + log_beta_interval_mass(lo, hi, a0 + 1.0, a1) - lm);
    const double r1 = std::exp(std::log(a1 / total) + log_beta_interval_mass(lo, hi, a0, a1 + 1.0) - lm);
    const double sum = r0 + r1;
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::runtime_error("constrained_moment_ratio: renormalization residual exceeds 1e-9");
    }
    MomentRatioResult res;
    res.probs = {r0 / sum, r1 / sum};
    res.std_errors = {0.0, 0.0};
    res.mass = {lm, 0.0, Backend::Exact};
    return res;
  }

  if (s.form() == ConstraintForm::Box) {
    double delta = box_tail_bound(s, alpha.alpha);
    if (delta <= kTailCert) {
      std::vector<double> shifted(alpha.alpha.begin(), alpha.alpha.end());
      for (int i = 0; i < m && delta <= kTailCert; ++i) {
        shifted[i] += 1.0;
        delta = std::max(delta, box_tail_bound(s, shifted));
        shifted[i] -= 1.0;
      }
      if (delta <= kTailCert) {
        // All m+1 posteriors are certified inside the box up to delta, so the
        // constrained ratios equal the unconstrained ones up to 2*delta.
        MomentRatioResult res;
        res.probs.resize(m);
        res.std_errors.assign(m, 2.0 * delta);
        double sum = 0.0;
        for (int i = 0; i < m; ++i) sum += alpha.alpha[i];
        for (int i = 0; i < m; ++i) res.probs[i] = alpha.alpha[i] / sum;
        res.mass = {-0.5 * delta, delta, Backend::Quadrature};
        return res;
      }
    }
    if (m <= cfg.quadrature_max_m) {
      const MeasureEstimate base = dirichlet_measure(s, alpha, cfg);
      if (std::exp(base.log_value) < cfg.mass_floor) {
        return importance_sampled_ratio(s, alpha.alpha, cfg);
      }
      MomentRatioResult res;
      res.probs.resize(m);
      res.std_errors.assign(m, 2.0 * cfg.quad_tol);
      DirichletParams bumped = alpha;
      double sum = 0.0;
      for (int i = 0; i < m; ++i) {
        bumped.alpha[i] += 1.0;
        const MeasureEstimate up = dirichlet_measure(s, bumped, cfg);
        bumped.alpha[i] -= 1.0;
        res.probs[i] = std::exp(std::log(alpha.alpha[i] / total) + up.log_value - base.log_value);
        sum += res.probs[i];
      }
      if (std::abs(sum - 1.0) > 1e-6) {
        throw std::runtime_error("constrained_moment_ratio: quadrature renormalization residual too large");
      }
      for (int i = 0; i < m; ++i) res.probs[i] /= sum;
      res.mass = base;
      return res;
    }
  }
  return monte_carlo_ratio(s, alpha.alpha, cfg);
}

std::vector<double> constrained_moment_ratio(const ConstraintSet& s, const DirichletParams& alpha,
                                             const IntegrationConfig& cfg) {
  return constrained_moment_ratio_detail(s, alpha, cfg).probs;
}

}  // namespace ckt
