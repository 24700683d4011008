#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace ckt {

/// A nonnegative quantity stored as its natural log. The default value is an
/// exact zero (log = -inf). Sums are always max-shifted, never exponentiated
/// naively, so accumulating many tiny terms stays stable.
class LogValue {
 public:
  constexpr LogValue() = default;

  static LogValue from_log(double log_x) {
    LogValue v;
    v.log_ = log_x;
    return v;
  }

  static LogValue from_linear(double x);

  double log() const { return log_; }
  double linear() const { return std::exp(log_); }
  bool is_zero() const { return log_ == -std::numeric_limits<double>::infinity(); }

  LogValue& operator+=(LogValue other);
  LogValue& operator*=(LogValue other) {
    log_ += other.log_;
    return *this;
  }

  friend LogValue operator+(LogValue a, LogValue b) { return a += b; }
  friend LogValue operator*(LogValue a, LogValue b) { return a *= b; }

 private:
  double log_ = -std::numeric_limits<double>::infinity();
};

/// ln Gamma(x) for x > 0. Throws std::domain_error otherwise.
double log_gamma(double x);

/// ln B(alpha) = sum ln Gamma(alpha_i) - ln Gamma(sum alpha_i), length >= 2.
double log_beta(std::span<const double> alpha);

/// Two-parameter convenience overload of log_beta.
double log_beta(double a, double b);

/// Digamma function Psi(x) = Gamma'(x)/Gamma(x) for x > 0.
double digamma(double x);

/// Regularized incomplete beta function I_x(a,b) for x in [0,1], a,b > 0.
double reg_inc_beta(double x, double a, double b);

/// ln(e^a + e^b), max-shifted; -inf inputs act as absorbing zeros.
double log_add_exp(double a, double b);

/// ln sum_i e^{v_i} over a nonempty vector, max-shifted.
double log_sum_exp(std::span<const double> values);

}  // namespace ckt
