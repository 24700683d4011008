#include "ckt/mle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ckt/special_functions.hpp"
#include "simplex_opt.hpp"

namespace ckt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

SimplexPoint empirical(const CountVector& counts) {
  SimplexPoint p;
  p.theta.resize(counts.m());
  for (int i = 0; i < counts.m(); ++i) {
    p.theta[i] = static_cast<double>(counts.k[i]) / static_cast<double>(counts.n);
  }
  return p;
}

double log_prob_at(const std::vector<double>& theta, const CountVector& counts) {
  double v = 0.0;
  for (int i = 0; i < counts.m(); ++i) {
    if (counts.k[i] > 0) v += static_cast<double>(counts.k[i]) * std::log(theta[i]);
  }
  return v;
}

}  // namespace

CountVector::CountVector(std::vector<std::int64_t> counts) : k(std::move(counts)) {
  if (k.size() < 2) throw std::invalid_argument("CountVector: need at least 2 symbols");
  for (std::int64_t c : k) {
    if (c < 0) throw std::invalid_argument("CountVector: counts must be nonnegative");
    n += c;
  }
}

SimplexPoint constrained_mle(const ConstraintSet& s, const CountVector& counts) {
  if (counts.m() != s.m()) throw std::invalid_argument("constrained_mle: dimension mismatch");
  if (counts.n < 1) throw std::invalid_argument("constrained_mle: empty sample");

  SimplexPoint emp = empirical(counts);
  if (s.contains(emp)) return emp;

  std::vector<double> w(counts.m());
  for (int i = 0; i < counts.m(); ++i) w[i] = static_cast<double>(counts.k[i]);

  SimplexPoint out;
  if (s.form() == ConstraintForm::Box) {
    std::vector<double> lo(s.lower().begin(), s.lower().end());
    std::vector<double> hi(s.upper().begin(), s.upper().end());
    lo.push_back(0.0);
    hi.push_back(1.0);
    out.theta = detail::box_weighted_mle(w, lo, hi);
  } else {
    out.theta = detail::polytope_weighted_mle(w, s.vertices(), 1e-8);
  }
  return out;
}

double sup_log_prob(const ConstraintSet& s, const CountVector& counts) {
  if (counts.n == 0) return 0.0;
  return log_prob_at(constrained_mle(s, counts).theta, counts);
}

ShtarkovResult shtarkov_sum(const ConstraintSet& s, std::int64_t n) {
  const int m = s.m();
  ShtarkovResult res;
  res.n = n;
  res.m = m;
  if (n == 0) {
    res.log_sum = 0.0;
    res.log_interior_sum = 0.0;
    res.log_boundary_sum = kNegInf;
    return res;
  }

  double type_count = 1.0;  // C(n + m - 1, m - 1)
  for (int i = 1; i < m; ++i) type_count *= static_cast<double>(n + i) / i;
  if (type_count > 1e8) {
    throw std::runtime_error("shtarkov_sum: type enumeration guard exceeded (> 1e8 types)");
  }

  std::vector<double> log_fact(n + 1);
  for (std::int64_t i = 0; i <= n; ++i) log_fact[i] = log_gamma(static_cast<double>(i) + 1.0);

  LogValue interior, boundary;  // both start at zero mass
  CountVector counts;
  counts.k.assign(m, 0);
  counts.n = n;
  SimplexPoint emp;
  emp.theta.resize(m);

  // Walk every composition of n into m parts; the last part takes the
  // remainder so the recursion only branches over the first m-1.
  std::vector<std::int64_t>& k = counts.k;
  auto walk = [&](auto&& self, int level, std::int64_t used) -> void {
    if (level == m - 1) {
      k[m - 1] = n - used;
      double log_mult = log_fact[n];
      for (int i = 0; i < m; ++i) log_mult -= log_fact[k[i]];
      for (int i = 0; i < m; ++i) {
        emp.theta[i] = static_cast<double>(k[i]) / static_cast<double>(n);
      }
      const double term = log_mult + sup_log_prob(s, counts);
      (s.contains(emp) ? interior : boundary) += LogValue::from_log(term);
      return;
    }
    for (std::int64_t v = 0; v <= n - used; ++v) {
      k[level] = v;
      self(self, level + 1, used + v);
    }
  };
  walk(walk, 0, 0);

  res.log_interior_sum = interior.log();
  res.log_boundary_sum = boundary.log();
  res.log_sum = log_add_exp(res.log_interior_sum, res.log_boundary_sum);
  return res;
}

double nml_log_prob(const ShtarkovResult& result, const ConstraintSet& s,
                    const CountVector& counts) {
  if (counts.n != result.n || counts.m() != result.m || s.m() != result.m) {
    throw std::invalid_argument("nml_log_prob: result was computed for different (n, m)");
  }
  return sup_log_prob(s, counts) - result.log_sum;
}

}  // namespace ckt
