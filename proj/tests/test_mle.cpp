#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "ckt/mle.hpp"

using namespace ckt;

namespace {

double log_prob_at(const SimplexPoint& p, const CountVector& counts) {
  double acc = 0.0;
  for (int i = 0; i < counts.m(); ++i) {
    if (counts.k[i] == 0) continue;
    acc += static_cast<double>(counts.k[i]) * std::log(p.theta[i]);
  }
  return acc;
}

// Independent binary oracle: clamp the empirical rate into [lo, hi].
double clamp_mle_binary(double lo, double hi, std::int64_t k1, std::int64_t n) {
  const double emp = static_cast<double>(k1) / static_cast<double>(n);
  return std::min(hi, std::max(lo, emp));
}

}  // namespace

TEST_CASE("count vector validation") {
  CHECK_NOTHROW(CountVector({0, 3}));
  CHECK_THROWS(CountVector({5}));        // alphabet of one
  CHECK_THROWS(CountVector({-1, 2}));
  CHECK(CountVector({2, 3, 5}).n == 10);
  CHECK(CountVector({2, 3, 5}).m() == 3);
}

TEST_CASE("interior counts return the empirical distribution bit for bit") {
  const auto s = ConstraintSet::box(3, {0.1, 0.1}, {0.8, 0.8});
  const CountVector counts({3, 3, 4});
  const auto mle = constrained_mle(s, counts);
  CHECK(mle.theta[0] == 3.0 / 10.0);  // exact division, no solver noise
  CHECK(mle.theta[1] == 3.0 / 10.0);
  CHECK(mle.theta[2] == 4.0 / 10.0);
  const auto full = constrained_mle(ConstraintSet::full(2), CountVector({3, 1}));
  CHECK(full.theta[0] == 0.75);
  CHECK(full.theta[1] == 0.25);
}

TEST_CASE("clamped binary maximizer") {
  const auto s = ConstraintSet::box(2, {0.0}, {0.6});
  const auto mle = constrained_mle(s, CountVector({3, 1}));
  CHECK(mle.theta[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(mle.theta[1] == doctest::Approx(0.4).epsilon(1e-12));
  // zero count on a bounded coordinate sits at its lower bound
  const auto s2 = ConstraintSet::box(2, {0.2}, {0.6});
  const auto mle2 = constrained_mle(s2, CountVector({0, 5}));
  CHECK(mle2.theta[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(mle2.theta[1] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("water-filling matches the binary clamp oracle") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ulo(0.0, 0.5);
  std::uniform_real_distribution<double> uw(0.1, 0.5);
  std::uniform_int_distribution<std::int64_t> un(1, 50);
  for (int i = 0; i < 500; ++i) {
    const double lo = ulo(rng);
    const double hi = std::min(1.0, lo + uw(rng));
    const std::int64_t n = un(rng);
    std::uniform_int_distribution<std::int64_t> uk(0, n);
    const std::int64_t k1 = uk(rng);
    const auto s = ConstraintSet::box(2, {lo}, {hi});
    const auto mle = constrained_mle(s, CountVector({k1, n - k1}));
    CHECK(mle.theta[0] == doctest::Approx(clamp_mle_binary(lo, hi, k1, n)).epsilon(1e-10));
  }
}

TEST_CASE("projected maximizer beats random feasible points") {
  std::mt19937_64 rng(32);
  const auto s = ConstraintSet::box(3, {0.05, 0.1}, {0.4, 0.5});
  const CountVector counts({14, 2, 4});  // empirical (0.7, 0.1, 0.2) infeasible
  const auto mle = constrained_mle(s, counts);
  CHECK(contains(s, mle));
  const double best = log_prob_at(mle, counts);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int audited = 0;
  while (audited < 1000) {
    const double t0 = 0.05 + u(rng) * 0.35;
    const double t1 = 0.1 + u(rng) * 0.4;
    const double t2 = 1.0 - t0 - t1;
    if (t2 < 0.0) continue;
    SimplexPoint p{{t0, t1, t2}};
    if (!contains(s, p)) continue;
    ++audited;
    CHECK(log_prob_at(p, counts) <= best + 1e-9);
  }
}

TEST_CASE("halfspace projection finds the symmetric optimum") {
  // maximize 8 ln t1 + ln t2 + ln t3 subject to t1 <= 0.5:
  // t1 pins at 0.5, the rest split evenly.
  const auto s = ConstraintSet::polytope(3, {HalfSpace{{1.0, 0.0, 0.0}, 0.5}});
  const auto mle = constrained_mle(s, CountVector({8, 1, 1}));
  CHECK(contains(s, mle));
  CHECK(mle.theta[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(mle.theta[1] == doctest::Approx(0.25).epsilon(1e-5));
  CHECK(mle.theta[2] == doctest::Approx(0.25).epsilon(1e-5));
}

TEST_CASE("constrained_mle rejects bad input") {
  CHECK_THROWS(constrained_mle(ConstraintSet::full(2), CountVector({0, 0})));   // n = 0
  CHECK_THROWS(constrained_mle(ConstraintSet::full(3), CountVector({1, 2})));   // m mismatch
}

TEST_CASE("sup_log_prob at pinned points") {
  const auto box = ConstraintSet::box(2, {0.2}, {0.6});
  CHECK(sup_log_prob(box, CountVector({10, 0})) ==
        doctest::Approx(10.0 * std::log(0.6)).epsilon(1e-12));
  CHECK(sup_log_prob(ConstraintSet::full(2), CountVector({4, 0})) == 0.0);
  CHECK(sup_log_prob(ConstraintSet::full(2), CountVector({0, 0})) == 0.0);
  CHECK(sup_log_prob(ConstraintSet::full(2), CountVector({1, 1})) ==
        doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("shtarkov sum at pinned sizes") {
  for (int m : {2, 3, 5}) {
    const auto r = shtarkov_sum(ConstraintSet::full(m), 1);
    CHECK(r.log_sum == doctest::Approx(std::log(static_cast<double>(m))).epsilon(1e-12));
  }
  // n=2, m=2: types (2,0),(1,1),(0,2) contribute 1 + 0.5 + 1
  CHECK(shtarkov_sum(ConstraintSet::full(2), 2).log_sum ==
        doctest::Approx(std::log(2.5)).epsilon(1e-12));
  // Box [0.2,0.6]: 0.36 + 0.5 + 0.64
  CHECK(shtarkov_sum(ConstraintSet::box(2, {0.2}, {0.6}), 2).log_sum ==
        doctest::Approx(std::log(1.5)).epsilon(1e-12));
}

TEST_CASE("type enumeration equals per-sequence brute force") {
  // Direct sum over all m^n sequences with the empirical (or clamped)
  // maximizer computed locally, independent of the library's solvers.
  for (int m : {2, 3}) {
    const auto s = ConstraintSet::full(m);
    for (std::int64_t n = 1; n <= 8; ++n) {
      double direct = 0.0;
      std::vector<int> x(n, 0);
      while (true) {
        std::vector<std::int64_t> k(m, 0);
        for (int sym : x) ++k[sym];
        double lp = 0.0;
        for (int i = 0; i < m; ++i) {
          if (k[i] > 0) lp += k[i] * std::log(static_cast<double>(k[i]) / n);
        }
        direct += std::exp(lp);
        int pos = 0;
        while (pos < n && ++x[pos] == m) x[pos++] = 0;
        if (pos == n) break;
      }
      const auto r = shtarkov_sum(s, n);
      CHECK(std::exp(r.log_sum) == doctest::Approx(direct).epsilon(1e-9));
    }
  }
}

TEST_CASE("binary box enumeration equals the clamped brute force") {
  const double lo = 0.2, hi = 0.6;
  const auto s = ConstraintSet::box(2, {lo}, {hi});
  for (std::int64_t n = 1; n <= 10; ++n) {
    double direct = 0.0;
    for (std::int64_t k = 0; k <= n; ++k) {
      const double t = clamp_mle_binary(lo, hi, k, n);
      double lp = 0.0;
      if (k > 0) lp += k * std::log(t);
      if (n - k > 0) lp += (n - k) * std::log(1.0 - t);
      // binomial coefficient via lgamma
      lp += std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
      direct += std::exp(lp);
    }
    CHECK(std::exp(shtarkov_sum(s, n).log_sum) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("interior and boundary parts rebuild the total") {
  const auto s = ConstraintSet::box(2, {0.2}, {0.6});
  const auto r = shtarkov_sum(s, 50);
  const double rebuilt =
      std::exp(r.log_interior_sum) + std::exp(r.log_boundary_sum);
  CHECK(rebuilt == doctest::Approx(std::exp(r.log_sum)).epsilon(1e-12));
  CHECK(r.n == 50);
  CHECK(r.m == 2);
}

TEST_CASE("boundary contribution settles near one") {
  const auto s = ConstraintSet::box(2, {0.2}, {0.6});
  const auto r = shtarkov_sum(s, 10000);
  CHECK(std::fabs(std::exp(r.log_boundary_sum) - 1.0) <= 0.1);
}

TEST_CASE("empty sequence sums") {
  const auto r = shtarkov_sum(ConstraintSet::full(3), 0);
  CHECK(r.log_sum == 0.0);  // the single empty sequence has probability 1
}

TEST_CASE("normalized maximum likelihood sums to one") {
  for (int m : {2, 3}) {
    const auto s = ConstraintSet::full(m);
    for (std::int64_t n = 4; n <= 8; n += 2) {
      const auto r = shtarkov_sum(s, n);
      // sum over types: multiplicity * exp(nml log prob)
      double total = 0.0;
      std::vector<std::int64_t> k(m, 0);
      const std::function<void(int, std::int64_t)> walk = [&](int coord, std::int64_t left) {
        if (coord == m - 1) {
          k[coord] = left;
          double lmult = std::lgamma(n + 1.0);
          for (int i = 0; i < m; ++i) lmult -= std::lgamma(k[i] + 1.0);
          total += std::exp(lmult + nml_log_prob(r, s, CountVector(k)));
          return;
        }
        for (std::int64_t v = 0; v <= left; ++v) {
          k[coord] = v;
          walk(coord + 1, left - v);
        }
      };
      walk(0, n);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("nml_log_prob rejects mismatched queries") {
  const auto s = ConstraintSet::full(2);
  const auto r = shtarkov_sum(s, 5);
  CHECK_THROWS(nml_log_prob(r, s, CountVector({2, 2})));      // wrong n
  CHECK_THROWS(nml_log_prob(r, s, CountVector({2, 2, 1})));   // wrong m
  CHECK_NOTHROW(nml_log_prob(r, s, CountVector({3, 2})));
}

TEST_CASE("enumeration guard reports feasibility") {
  const auto s = ConstraintSet::full(8);
  CHECK_THROWS(shtarkov_sum(s, 1000000));  // C(n+m-1, m-1) far beyond the guard
}
