#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ckt/constraints.hpp"
#include "ckt/mle.hpp"

namespace ckt {

enum class RedundancyKind { Worst, Average };

/// One row of the redundancy table. All values in bits; optional fields are
/// absent when not requested or when an enumeration guard was exceeded.
struct RedundancyReport {
  std::int64_t n = 0;
  int m = 0;
  double log2_jeffreys = 0.0;  // log2 C(S)
  std::optional<double> log2_shtarkov;
  double asym_worst = 0.0;
  double asym_avg = 0.0;
  std::optional<double> avg_exact;
  std::optional<double> avg_exact_std_error;
  std::optional<double> mixture_worst_regret;
  std::optional<double> cn_gap;
};

/// ((m-1)/2) log2(n/2) - log2 Gamma(m/2) + log2 C(S) + (1/2) log2 pi.
double worst_case_asymptotic(std::int64_t n, const ConstraintSet& s, const IntegrationConfig& cfg);

/// The average-case companion; implemented as worst_case_asymptotic minus
/// ((m-1)/2) log2 e so the pair identity holds exactly in floating point.
double average_asymptotic(std::int64_t n, const ConstraintSet& s, const IntegrationConfig& cfg);

/// Unconstrained large-alphabet formulas: worst = ((m-1)/2) log2(e n/m) +
/// (1 - ln 2)/(2 ln 2); average subtracts ((m-1)/2) log2 e structurally.
double unconstrained_large_m(std::int64_t n, int m, RedundancyKind kind);

/// True when the number of types C(n+m-1, m-1) is within the 1e8 enumeration
/// guard shared by the exact calculators.
bool type_enumeration_feasible(std::int64_t n, int m);

/// log2 of the exact Shtarkov sum (type enumeration; guarded).
double worst_case_exact(std::int64_t n, const ConstraintSet& s);

/// Average redundancy of the truncated-Jeffreys mixture code under the prior
/// itself: the expectation over theta ~ w* of D(P_theta^n || M). Exact
/// quadrature for m = 2; Monte Carlo over w* otherwise (std_error_out then
/// reports the sampling uncertainty, zero for quadrature).
double average_exact(std::int64_t n, const ConstraintSet& s, const IntegrationConfig& cfg,
                     double* std_error_out = nullptr);

/// Independent digamma-form evaluation of the unconstrained average
/// redundancy; cross-oracle for average_exact at S = full simplex.
double average_exact_psi(std::int64_t n, int m);

/// max over types of [sup_log_prob - ln M(type)] / ln 2: the worst regret of
/// the mixture code against the maximized likelihood.
double mixture_worst_regret(std::int64_t n, const ConstraintSet& s, const IntegrationConfig& cfg);

/// sup over theta in S of E_theta[log2(sup-likelihood / likelihood)]: the
/// expected-regret gap constant. m = 2 only; dense grid plus golden-section.
double cn_gap(std::int64_t n, const ConstraintSet& s, const IntegrationConfig& cfg);

/// CSV report plumbing: fixed column order, empty cells for absent optionals.
std::string redundancy_csv_header();
std::string redundancy_csv_row(const RedundancyReport& report, const std::string& constraints_id);

}  // namespace ckt
