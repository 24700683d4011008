// Acceptance gate: one line per criterion, execution stops for nothing.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ckt/codec.hpp"
#include "ckt/estimator.hpp"
#include "ckt/mle.hpp"
#include "ckt/redundancy.hpp"

using namespace ckt;

namespace {

int g_failures = 0;

class Criterion {
 public:
  explicit Criterion(std::string name) : name_(std::move(name)), start_(clock_t::now()) {}

  void finish(bool pass, const std::string& detail) {
    const double secs =
        std::chrono::duration<double>(clock_t::now() - start_).count();
    std::printf("%-22s %s  %s  [%.1f s]\n", name_.c_str(), pass ? "PASS" : "FAIL",
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++g_failures;
  }

 private:
  using clock_t = std::chrono::steady_clock;
  std::string name_;
  clock_t::time_point start_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

IntegrationConfig base_cfg() {
  IntegrationConfig cfg;
  cfg.samples = 20000;
  cfg.seed = 1;
  return cfg;
}

// 1. Unconstrained prediction reduces to the add-half rule.
void criterion_1() {
  Criterion c("criterion 1");
  const double tol = 1e-12;
  double worst = 0.0;
  std::mt19937_64 rng(101);
  int states = 0;
  for (int m : {2, 3, 8}) {
    const auto s = ConstraintSet::full(m);
    auto state = new_estimator(s, base_cfg(), 0);
    std::uniform_int_distribution<std::int64_t> un(0, 1000);
    for (int trial = 0; trial < 3334; ++trial) {
      const std::int64_t n = un(rng);
      std::vector<std::int64_t> k(m, 0);
      for (std::int64_t i = 0; i < n; ++i) ++k[rng() % m];
      state.counts = CountVector(k);
      const auto pred = predict(state);
      for (int i = 0; i < m; ++i) {
        const double kt = (k[i] + 0.5) / (static_cast<double>(n) + m / 2.0);
        worst = std::max(worst, std::fabs(pred.probs[i] - kt));
      }
      ++states;
    }
  }
  c.finish(worst <= tol,
           "add-half reduction: max|diff|=" + fmt(worst) + " tol=" + fmt(tol) + " over " +
               std::to_string(states) + " states, m in {2,3,8}");
}

// 2. Sequential conditionals telescope to the closed-form mixture.
void criterion_2() {
  Criterion c("criterion 2");
  const double tol = 1e-8;
  const auto cfg = base_cfg();
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> ulo(0.05, 0.45);
  std::uniform_real_distribution<double> uw(0.15, 0.5);
  std::uniform_int_distribution<int> ulen(1, 200);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const double lo = ulo(rng);
    const double hi = std::min(0.95, lo + uw(rng));
    const auto s = ConstraintSet::box(2, {lo}, {hi});
    const int n = ulen(rng);
    std::bernoulli_distribution coin(0.5 * (lo + hi));
    auto state = new_estimator(s, cfg, 0);
    std::vector<int> x;
    for (int i = 0; i < n; ++i) {
      const int sym = coin(rng) ? 1 : 2;
      x.push_back(sym);
      update(state, sym);
    }
    worst = std::max(worst,
                     std::fabs(state.log_mixture_accum - log_mixture_direct(x, s, cfg)));
  }
  c.finish(worst <= tol, "telescoping: max|diff|=" + fmt(worst) + " tol=" + fmt(tol) +
                             " over 500 sequences, n<=200, binary boxes");
}

// 3. Exact minimax redundancy vs its first-order expansion, m=2 full simplex.
void criterion_3() {
  Criterion c("criterion 3");
  const auto s = ConstraintSet::full(2);
  bool pass = true;
  std::string detail = "log2 S_n vs (1/2)log2(n pi/2):";
  for (std::int64_t n : {256, 1024, 4096}) {
    const double exact = worst_case_exact(n, s);
    const double approx = 0.5 * std::log2(static_cast<double>(n) * std::numbers::pi / 2.0);
    const double gap = std::fabs(exact - approx);
    const double tol = 2.0 / std::sqrt(static_cast<double>(n));
    pass = pass && gap <= tol;
    detail += " n=" + std::to_string(n) + " gap=" + fmt(gap) + " tol=" + fmt(tol);
  }
  c.finish(pass, detail);
}

// 4. Restricting the parameter set shifts the redundancy by log2 C(S).
void criterion_4() {
  Criterion c("criterion 4");
  const double tol = 0.1;
  const std::int64_t n = 4096;
  const auto box = ConstraintSet::box(2, {0.2}, {0.6});
  const auto full = ConstraintSet::full(2);
  const double shift = worst_case_exact(n, box) - worst_case_exact(n, full);
  const double log2_c =
      jeffreys_constant(box, base_cfg()).log_value * std::numbers::log2e;
  const double gap = std::fabs(shift - log2_c);
  c.finish(gap <= tol, "constant shift at n=4096: |(log2 S_box - log2 S_full) - log2 C|=" +
                           fmt(gap) + " tol=" + fmt(tol));
}

// 5. The boundary part of the split sum settles at a constant near 1.
void criterion_5() {
  Criterion c("criterion 5");
  const double tol = 0.1;
  const auto r = shtarkov_sum(ConstraintSet::box(2, {0.2}, {0.6}), 10000);
  const double gap = std::fabs(std::exp(r.log_boundary_sum) - 1.0);
  c.finish(gap <= tol,
           "boundary sum at n=10000: |exp(log_boundary_sum)-1|=" + fmt(gap) + " tol=" + fmt(tol));
}

// 6. Two independent routes to the average redundancy, plus the normal-limit form.
void criterion_6() {
  Criterion c("criterion 6");
  const double route_tol = 1e-6;
  const double stirling_tol = 0.15;
  const auto s = ConstraintSet::full(2);
  const auto cfg = base_cfg();
  bool pass = true;
  double worst_route = 0.0;
  for (std::int64_t n : {1, 8, 32, 64}) {
    const double quad = average_exact(n, s, cfg);
    const double psi = average_exact_psi(n, 2);
    worst_route = std::max(worst_route, std::fabs(quad - psi));
  }
  pass = pass && worst_route <= route_tol;
  const double target = 0.5 * std::log2(64.0 / (2.0 * std::numbers::pi * std::numbers::e)) +
                        std::log2(std::numbers::pi);
  const double gap_quad = std::fabs(average_exact(64, s, cfg) - target);
  const double gap_psi = std::fabs(average_exact_psi(64, 2) - target);
  pass = pass && gap_quad <= stirling_tol && gap_psi <= stirling_tol;
  c.finish(pass, "average cross-oracle: max|route diff|=" + fmt(worst_route) + " tol=" +
                     fmt(route_tol) + "; normal-limit gaps " + fmt(gap_quad) + "/" +
                     fmt(gap_psi) + " tol=" + fmt(stirling_tol));
}

// 7. The worst/average formula pair differs by exactly (m-1)/2 log2 e.
void criterion_7() {
  Criterion c("criterion 7");
  const double tol = 1e-12;
  const auto cfg = base_cfg();
  std::mt19937_64 rng(107);
  std::uniform_int_distribution<std::int64_t> un(2, 1000000);
  double worst = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 4);
    const std::int64_t n = un(rng);
    ConstraintSet s = ConstraintSet::full(m);
    if (m == 2 && trial % 2 == 0) s = ConstraintSet::box(2, {0.1}, {0.7});
    const double expect = ((m - 1) / 2.0) * std::numbers::log2e;
    const double gap1 = worst_case_asymptotic(n, s, cfg) - average_asymptotic(n, s, cfg);
    const double gap2 = unconstrained_large_m(n, m, RedundancyKind::Worst) -
                        unconstrained_large_m(n, m, RedundancyKind::Average);
    worst = std::max({worst, std::fabs(gap1 - expect), std::fabs(gap2 - expect)});
  }
  c.finish(worst <= tol, "pair identity: max|gap - (m-1)/2 log2 e|=" + fmt(worst) +
                             " tol=" + fmt(tol) + " over 60 randomized (n,m,S)");
}

// 8. The mixture code tracks the minimax value to a bounded excess.
void criterion_8() {
  Criterion c("criterion 8");
  const double tol = 1.5;
  const auto s = ConstraintSet::full(2);
  const auto cfg = base_cfg();
  bool pass = true;
  std::string detail = "mixture excess over log2 S_n:";
  for (std::int64_t n : {64, 128, 256, 512}) {
    const double excess = mixture_worst_regret(n, s, cfg) - worst_case_exact(n, s);
    pass = pass && excess >= 0.0 && excess <= tol;
    detail += " n=" + std::to_string(n) + ": " + fmt(excess);
  }
  c.finish(pass, detail + "  bounds=[0," + fmt(tol) + "]");
}

// 9. The expected-regret gap constant stays bounded for binary alphabets.
void criterion_9() {
  Criterion c("criterion 9");
  const double tol = 2.0;
  const auto s = ConstraintSet::full(2);
  const auto cfg = base_cfg();
  bool pass = true;
  double worst = 0.0;
  for (std::int64_t n : {16, 32, 64, 128, 256, 512}) {
    const double g = cn_gap(n, s, cfg);
    worst = std::max(worst, g);
    pass = pass && g <= tol;
  }
  c.finish(pass, "c_n boundedness: max c_n=" + fmt(worst) + " tol=" + fmt(tol) +
                     " over n in {16..512}");
}

// 10. Codec: lossless everywhere, with a pinned length-overhead budget.
void criterion_10() {
  Criterion c("criterion 10");
  bool pass = true;
  double worst_overhead = 0.0;
  double least_overhead = 1e300;
  // exhaustive binary part
  {
    const auto s = ConstraintSet::full(2);
    const auto cfg = base_cfg();
    for (int n = 1; n <= 10 && pass; ++n) {
      const double budget = n * std::pow(2.0, -16.0) * std::numbers::log2e + 64.0;
      for (unsigned bits = 0; bits < (1u << n); ++bits) {
        std::vector<int> x(n);
        for (int i = 0; i < n; ++i) x[i] = ((bits >> i) & 1u) + 1;
        const auto buf = encode(x, s, cfg, 17);
        if (decode(buf, s, cfg, 17) != x) {
          pass = false;
          break;
        }
        const double overhead =
            static_cast<double>(buf.bit_length) - codelength_bits(x, s, cfg);
        worst_overhead = std::max(worst_overhead, overhead);
        least_overhead = std::min(least_overhead, overhead);
        if (overhead < 0.0 || overhead > budget) {
          pass = false;
          break;
        }
      }
    }
  }
  // randomized 4-ary boxes, sampled probabilities under the hood
  int trials_done = 0;
  if (pass) {
    IntegrationConfig cfg = base_cfg();
    cfg.quadrature_max_m = 2;  // route through the sampling backend
    cfg.samples = 1024;
    const std::int64_t n = 500;
    const double budget = n * std::pow(2.0, -16.0) * std::numbers::log2e + 64.0;
    std::mt19937_64 rng(110);
    std::uniform_real_distribution<double> ub(0.55, 0.85);
    std::uniform_int_distribution<int> sym(1, 4);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto s = ConstraintSet::box(4, {0.0, 0.0, 0.0}, {ub(rng), ub(rng), ub(rng)});
      std::vector<int> x(n);
      for (int& v : x) v = sym(rng);
      const auto buf = encode(x, s, cfg, 2000 + trial);
      if (decode(buf, s, cfg, 2000 + trial) != x) {
        pass = false;
        break;
      }
      const double overhead =
          static_cast<double>(buf.bit_length) - codelength_bits(x, s, cfg);
      worst_overhead = std::max(worst_overhead, overhead);
      least_overhead = std::min(least_overhead, overhead);
      if (overhead < 0.0 || overhead > budget) {
        pass = false;
        break;
      }
      ++trials_done;
    }
  }
  c.finish(pass, "codec identity: 2046 exhaustive + " + std::to_string(trials_done) +
                     " randomized trips; overhead in [" + fmt(least_overhead) + "," +
                     fmt(worst_overhead) + "] budget [0," + fmt(64.011) + "]");
}

// 11. Monte Carlo measures agree with exact binary values within 4 sigma.
void criterion_11() {
  Criterion c("criterion 11");
  auto cfg = base_cfg();
  std::mt19937_64 rng(111);
  std::uniform_real_distribution<double> ulo(0.0, 0.6);
  std::uniform_real_distribution<double> uw(0.1, 0.35);
  std::uniform_real_distribution<double> ua(0.5, 8.0);
  bool pass = true;
  double worst_pulls = 0.0;
  for (int i = 0; i < 100; ++i) {
    cfg.seed = 9000 + i;
    const double lo = ulo(rng);
    const double hi = std::min(1.0, lo + uw(rng));
    const auto s = ConstraintSet::box(2, {lo}, {hi});
    const DirichletParams alpha{{ua(rng), ua(rng)}};
    const auto exact = dirichlet_measure(s, alpha, cfg);
    const auto mc = dirichlet_measure_monte_carlo(s, alpha, cfg);
    const double pulls = std::fabs(std::exp(mc.log_value) - std::exp(exact.log_value)) /
                         std::max(mc.std_error, 1e-300);
    worst_pulls = std::max(worst_pulls, pulls);
    pass = pass && pulls <= 4.0;
  }
  c.finish(pass, "backend agreement: worst |mc-exact|/std_error=" + fmt(worst_pulls) +
                     " tol=4 over 100 randomized (box, alpha)");
}

// Large-alphabet closed form: within 1 bit of the exact sum at desk scale,
// and its worst/average pair keeps the exact gap.
void large_m_check() {
  Criterion c("large-m formula");
  const double tol = 1.0;
  const double id_tol = 1e-12;
  bool pass = true;
  std::string detail = "large-m formula vs exact:";
  const struct {
    std::int64_t n;
    int m;
  } points[] = {{4096, 2}, {2048, 3}};
  for (const auto& p : points) {
    const double exact = worst_case_exact(p.n, ConstraintSet::full(p.m));
    const double fast = unconstrained_large_m(p.n, p.m, RedundancyKind::Worst);
    const double gap = std::fabs(fast - exact);
    pass = pass && gap <= tol;
    const double pair_gap = fast - unconstrained_large_m(p.n, p.m, RedundancyKind::Average);
    pass = pass && std::fabs(pair_gap - ((p.m - 1) / 2.0) * std::numbers::log2e) <= id_tol;
    detail += " (n=" + std::to_string(p.n) + ",m=" + std::to_string(p.m) + ") gap=" +
              fmt(gap);
  }
  c.finish(pass, detail + " tol=" + fmt(tol) + "; pair identity tol=" + fmt(id_tol));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  large_m_check();
  std::printf("%d of 12 checks failed\n", g_failures);
  return g_failures;
}
