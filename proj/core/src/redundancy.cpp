#include "ckt/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ckt/estimator.hpp"
#include "ckt/special_functions.hpp"
#include "sampling_detail.hpp"

namespace ckt {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kPi = std::numbers::pi;
constexpr double kLog2E = std::numbers::log2e;

double type_count(std::int64_t n, int m) {
  double c = 1.0;
  for (int i = 1; i < m; ++i) c *= static_cast<double>(n + i) / i;
  return c;
}

// Enumerates compositions of n into m parts.
template <typename Fn>
void foreach_type(std::int64_t n, int m, std::vector<std::int64_t>& k, Fn&& fn) {
  auto walk = [&](auto&& self, int level, std::int64_t used) -> void {
    if (level == m - 1) {
      k[m - 1] = n - used;
      fn();
      return;
    }
    for (std::int64_t v = 0; v <= n - used; ++v) {
      k[level] = v;
      self(self, level + 1, used + v);
    }
  };
  walk(walk, 0, 0);
}

}  // namespace

double worst_case_asymptotic(std::int64_t n, const ConstraintSet& s,
                             const IntegrationConfig& cfg) {
  if (n < 1) throw std::invalid_argument("worst_case_asymptotic: n must be >= 1");
  const int m = s.m();
  const double log2_c = jeffreys_constant(s, cfg).log_value * kLog2E;
  return 0.5 * (m - 1) * std::log2(static_cast<double>(n) / 2.0) -
         log_gamma(m / 2.0) * kLog2E + log2_c + 0.5 * std::log2(kPi);
}

double average_asymptotic(std::int64_t n, const ConstraintSet& s, const IntegrationConfig& cfg) {
  return worst_case_asymptotic(n, s, cfg) - 0.5 * (s.m() - 1) * kLog2E;
}

double unconstrained_large_m(std::int64_t n, int m, RedundancyKind kind) {
  if (n < 1 || m < 2) throw std::invalid_argument("unconstrained_large_m: need n >= 1, m >= 2");
  const double worst_nats = 0.5 * (m - 1) * std::log(std::numbers::e * static_cast<double>(n) / m) +
                            0.5 * (1.0 - kLn2);
  const double worst = worst_nats * kLog2E;
  if (kind == RedundancyKind::Worst) return worst;
  return worst - 0.5 * (m - 1) * kLog2E;
}

bool type_enumeration_feasible(std::int64_t n, int m) { return type_count(n, m) <= 1e8; }

double worst_case_exact(std::int64_t n, const ConstraintSet& s) {
  return shtarkov_sum(s, n).log_sum * kLog2E;
}

namespace {

// Per-type log mixture probabilities for m = 2 over the feasible interval.
std::vector<double> m2_log_mixture_table(std::int64_t n, const ConstraintSet& s,
                                         const IntegrationConfig& cfg, double* log_c_out) {
  DirichletParams half;
  half.alpha = {0.5, 0.5};
  const double log_c = dirichlet_measure(s, half, cfg).log_value;
  if (log_c_out != nullptr) *log_c_out = log_c;
  const double log_beta_half = log_beta(0.5, 0.5);
  std::vector<double> log_mix(n + 1);
  for (std::int64_t k = 0; k <= n; ++k) {
    DirichletParams post;
    post.alpha = {static_cast<double>(k) + 0.5, static_cast<double>(n - k) + 0.5};
    const double log_dir = dirichlet_measure(s, post, cfg).log_value;
    log_mix[k] = log_beta(post.alpha[0], post.alpha[1]) - log_beta_half - log_c + log_dir;
  }
  return log_mix;
}

double average_exact_m2(std::int64_t n, const ConstraintSet& s, const IntegrationConfig& cfg,
                        double* std_error_out) {
  auto [lo, hi] = theta1_range(s);
  double log_c = 0.0;
  const std::vector<double> log_mix = m2_log_mixture_table(n, s, cfg, &log_c);
  std::vector<double> log_binom(n + 1);
  const double log_fact_n = log_gamma(static_cast<double>(n) + 1.0);
  for (std::int64_t k = 0; k <= n; ++k) {
    log_binom[k] = log_fact_n - log_gamma(static_cast<double>(k) + 1.0) -
                   log_gamma(static_cast<double>(n - k) + 1.0);
  }

  // theta = sin^2 u flattens the arcsine prior to a constant density
  // 2/(pi C(S)) du, and gives ln theta = 2 ln sin u, ln(1-theta) = 2 ln cos u
  // without cancellation at either end.
  auto divergence = [&](double u) {
    const double log_t = 2.0 * std::log(std::sin(u));
    const double log_q = 2.0 * std::log(std::cos(u));
    double acc = 0.0;
    for (std::int64_t k = 0; k <= n; ++k) {
      const double log_p = static_cast<double>(k) * log_t + static_cast<double>(n - k) * log_q;
      const double w = std::exp(log_binom[k] + log_p);
      if (w == 0.0) continue;
      acc += w * (log_p - log_mix[k]);
    }
    return acc;
  };

  const double u_lo = std::asin(std::sqrt(std::clamp(lo, 0.0, 1.0)));
  const double u_hi = std::asin(std::sqrt(std::clamp(hi, 0.0, 1.0)));
  double err = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      divergence, u_lo, u_hi, 12, cfg.quad_tol, &err);
  const double scale = 2.0 / (kPi * std::exp(log_c));
  if (std_error_out != nullptr) *std_error_out = scale * err * kLog2E;
  return scale * integral * kLog2E;
}

double average_exact_sampled(std::int64_t n, const ConstraintSet& s, const IntegrationConfig& cfg,
                             double* std_error_out) {
  const int m = s.m();
  const double types = type_count(n, m);
  if (types > 1e6) {
    throw std::runtime_error("average_exact: type enumeration guard exceeded (> 1e6 types)");
  }
  const std::int64_t samples = std::max<std::int64_t>(cfg.samples, 1);
  if (types * static_cast<double>(samples) > 1e9) {
    throw std::runtime_error("average_exact: samples x types guard exceeded (> 1e9 evaluations)");
  }

  // Per-type constants: multinomial coefficient and ln M(type).
  std::vector<std::vector<std::int64_t>> type_list;
  std::vector<double> log_mult, log_mix;
  const double log_fact_n = log_gamma(static_cast<double>(n) + 1.0);
  std::vector<std::int64_t> k(m);
  std::uint64_t type_index = 0;
  foreach_type(n, m, k, [&]() {
    double lm = log_fact_n;
    for (int i = 0; i < m; ++i) lm -= log_gamma(static_cast<double>(k[i]) + 1.0);
    CountVector counts;
    counts.k = k;
    counts.n = n;
    IntegrationConfig type_cfg = cfg;
    type_cfg.seed = derive_seed(cfg.seed, 0xA7E0000 + type_index);
    type_list.push_back(k);
    log_mult.push_back(lm);
    log_mix.push_back(log_mixture_direct(counts, s, type_cfg));
    ++type_index;
  });

  // Rejection-sample theta ~ w* (Dirichlet(1/2) restricted to S) and average
  // the exact per-theta divergence.
  DirichletParams half;
  half.alpha.assign(m, 0.5);
  double sum = 0.0, sum_sq = 0.0;
  std::int64_t accepted = 0, produced = 0;
  const std::int64_t max_draws = samples * 100;
  SimplexPoint p;
  std::uint64_t chunk_seed_stream = 0;
  while (accepted < samples && produced < max_draws) {
    const std::int64_t want = std::min<std::int64_t>(samples - accepted + 64, 4096);
    std::vector<double> flat(static_cast<std::size_t>(want) * m);
    detail::sample_dirichlet_flat(half.alpha, want,
                                  derive_seed(cfg.seed, 0xACC0000 + chunk_seed_stream),
                                  flat.data());
    ++chunk_seed_stream;
    produced += want;
    for (std::int64_t t = 0; t < want && accepted < samples; ++t) {
      p.theta.assign(flat.begin() + t * m, flat.begin() + (t + 1) * m);
      if (!s.contains(p)) continue;
      ++accepted;
      std::vector<double> log_theta(m);
      for (int i = 0; i < m; ++i) log_theta[i] = std::log(p.theta[i]);
      double v = 0.0;
      for (std::size_t ti = 0; ti < type_list.size(); ++ti) {
        double log_p = 0.0;
        bool dead = false;
        for (int i = 0; i < m; ++i) {
          if (type_list[ti][i] == 0) continue;
          if (p.theta[i] <= 0.0) {
            dead = true;
            break;
          }
          log_p += static_cast<double>(type_list[ti][i]) * log_theta[i];
        }
        if (dead) continue;
        const double w = std::exp(log_mult[ti] + log_p);
        if (w == 0.0) continue;
        v += w * (log_p - log_mix[ti]);
      }
      sum += v;
      sum_sq += v * v;
    }
  }
  if (accepted < samples) {
    throw std::runtime_error("average_exact: rejection sampling acceptance too low");
  }
  const double mean = sum / static_cast<double>(accepted);
  const double var =
      std::max(0.0, sum_sq / static_cast<double>(accepted) - mean * mean);
  if (std_error_out != nullptr) {
    *std_error_out = std::sqrt(var / static_cast<double>(accepted)) * kLog2E;
  }
  return mean * kLog2E;
}

}  // namespace

double average_exact(std::int64_t n, const ConstraintSet& s, const IntegrationConfig& cfg,
                     double* std_error_out) {
  if (n < 1) throw std::invalid_argument("average_exact: n must be >= 1");
  if (s.m() == 2) return average_exact_m2(n, s, cfg, std_error_out);
  return average_exact_sampled(n, s, cfg, std_error_out);
}

double average_exact_psi(std::int64_t n, int m) {
  if (n < 1 || m < 2) throw std::invalid_argument("average_exact_psi: need n >= 1, m >= 2");
  if (type_count(n, m) > 1e8) {
    throw std::runtime_error("average_exact_psi: type enumeration guard exceeded");
  }

  std::vector<double> log_fact(n + 1), log_gamma_half(n + 1), psi_half(n + 1);
  for (std::int64_t j = 0; j <= n; ++j) {
    log_fact[j] = log_gamma(static_cast<double>(j) + 1.0);
    log_gamma_half[j] = log_gamma(static_cast<double>(j) + 0.5);
    psi_half[j] = digamma(static_cast<double>(j) + 0.5);
  }
  const double psi_total = digamma(static_cast<double>(n) + m / 2.0);
  std::vector<double> half(m, 0.5);
  const double log_beta_half = log_beta(half);
  const double log_gamma_total = log_gamma(static_cast<double>(n) + m / 2.0);

  // R-bar = sum over types of  w_type * [sum_i k_i (psi(k_i + 1/2) -
  // psi(n + m/2)) - ln B(k+1/2) + ln B(1/2)]  with  w_type = multinomial *
  // B(k+1/2)/B(1/2); the weights sum to one.
  double acc = 0.0;
  std::vector<std::int64_t> k(m);
  foreach_type(n, m, k, [&]() {
    double log_mult = log_fact[n];
    double log_beta_post = -log_gamma_total;
    double inner = 0.0;
    for (int i = 0; i < m; ++i) {
      log_mult -= log_fact[k[i]];
      log_beta_post += log_gamma_half[k[i]];
      inner += static_cast<double>(k[i]) * (psi_half[k[i]] - psi_total);
    }
    const double w = std::exp(log_mult + log_beta_post - log_beta_half);
    acc += w * (inner - log_beta_post + log_beta_half);
  });
  return acc * kLog2E;
}

double mixture_worst_regret(std::int64_t n, const ConstraintSet& s, const IntegrationConfig& cfg) {
  const int m = s.m();
  if (type_count(n, m) > 1e8) {
    throw std::runtime_error("mixture_worst_regret: type enumeration guard exceeded");
  }
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> k(m);
  std::uint64_t type_index = 0;
  foreach_type(n, m, k, [&]() {
    CountVector counts;
    counts.k = k;
    counts.n = n;
    IntegrationConfig type_cfg = cfg;
    type_cfg.seed = derive_seed(cfg.seed, 0x4E6 + type_index);
    const double regret = sup_log_prob(s, counts) - log_mixture_direct(counts, s, type_cfg);
    best = std::max(best, regret);
    ++type_index;
  });
  return best * kLog2E;
}

double cn_gap(std::int64_t n, const ConstraintSet& s, const IntegrationConfig& cfg) {
  (void)cfg;
  if (s.m() != 2) throw std::invalid_argument("cn_gap: implemented for m = 2 only");
  if (n < 1) throw std::invalid_argument("cn_gap: n must be >= 1");

  std::vector<double> log_binom(n + 1), sup_log(n + 1);
  const double log_fact_n = log_gamma(static_cast<double>(n) + 1.0);
  for (std::int64_t k = 0; k <= n; ++k) {
    log_binom[k] = log_fact_n - log_gamma(static_cast<double>(k) + 1.0) -
                   log_gamma(static_cast<double>(n - k) + 1.0);
    CountVector counts;
    counts.k = {k, n - k};
    counts.n = n;
    sup_log[k] = sup_log_prob(s, counts);
  }

  // Expected regret at theta, in nats: sum over types of
  // binom * theta^k (1-theta)^(n-k) * [sup_log - k ln theta - (n-k) ln(1-theta)].
  auto expected_regret = [&](double theta) {
    const double t = std::clamp(theta, 0.0, 1.0);
    double acc = 0.0;
    const double log_t = std::log(t), log_q = std::log1p(-t);
    for (std::int64_t k = 0; k <= n; ++k) {
      double log_p = 0.0;
      if (k > 0) log_p += static_cast<double>(k) * log_t;
      if (k < n) log_p += static_cast<double>(n - k) * log_q;
      const double w = std::exp(log_binom[k] + log_p);
      if (w == 0.0) continue;
      acc += w * (sup_log[k] - log_p);
    }
    return acc;
  };

  auto [lo, hi] = theta1_range(s);
  // Dense grid at resolution 1e-3, then golden-section refinement around the
  // best grid point.
  double best_theta = lo, best_val = expected_regret(lo);
  const double step = 1e-3;
  for (double t = lo; t <= hi + 1e-15; t += step) {
    const double v = expected_regret(std::min(t, hi));
    if (v > best_val) {
      best_val = v;
      best_theta = std::min(t, hi);
    }
  }
  double a = std::max(lo, best_theta - step), b = std::min(hi, best_theta + step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = expected_regret(x1), f2 = expected_regret(x2);
  for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = expected_regret(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = expected_regret(x1);
    }
  }
  best_val = std::max({best_val, f1, f2});
  return best_val * kLog2E;
}

std::string redundancy_csv_header() {
  return "n,m,constraints_id,log2_C,exact_worst,asym_worst,asym_avg,exact_avg,"
         "mixture_worst_regret,cn_gap";
}

namespace {

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string csv_opt(const std::optional<double>& v) { return v ? csv_num(*v) : std::string(); }

}  // namespace

std::string redundancy_csv_row(const RedundancyReport& report, const std::string& constraints_id) {
  std::string row = std::to_string(report.n) + "," + std::to_string(report.m) + "," +
                    constraints_id + "," + csv_num(report.log2_jeffreys) + "," +
                    csv_opt(report.log2_shtarkov) + "," + csv_num(report.asym_worst) + "," +
                    csv_num(report.asym_avg) + "," + csv_opt(report.avg_exact) + "," +
                    csv_opt(report.mixture_worst_regret) + "," + csv_opt(report.cn_gap);
  return row;
}

}  // namespace ckt
