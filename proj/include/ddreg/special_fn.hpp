#pragma once

// Log-beta, regularized incomplete beta, and the normalizing constants of the
// beta density with a multiplicative penalty e^{-j} below a threshold.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddreg/errors.hpp"

namespace ddreg {

struct ShapePair {
  double a = 1.0;
  double b = 1.0;
};

namespace detail {

inline void check_shapes(const ShapePair& s) {
  if (!(s.a > 0.0) || !(s.b > 0.0) || !std::isfinite(s.a) || !std::isfinite(s.b))
    throw std::domain_error("beta shapes must be positive and finite (a=" + std::to_string(s.a) +
                            ", b=" + std::to_string(s.b) + ")");
}

// lgamma without touching the global signgam.
inline double lgamma_pos(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

inline constexpr double kCfTolerance = 1e-12;
inline constexpr int kCfMaxIter = 300;

// Modified Lentz evaluation of the incomplete-beta continued fraction.
// Converges quickly for x < (a + 1) / (a + b + 2).
inline double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kCfMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kCfTolerance) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge (a=" +
                       std::to_string(a) + ", b=" + std::to_string(b) +
                       ", x=" + std::to_string(x) + ")");
}

}  // namespace detail

inline double log_beta(const ShapePair& s) {
  detail::check_shapes(s);
  return detail::lgamma_pos(s.a) + detail::lgamma_pos(s.b) - detail::lgamma_pos(s.a + s.b);
}

// I_x(a,b) together with its complement 1 - I_x(a,b). Whichever tail the
// continued fraction produces directly carries full relative precision.
struct BetaCdf {
  double lower = 0.0;
  double upper = 1.0;
};

inline BetaCdf reg_inc_beta_pair(double x, const ShapePair& s, double log_b) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("incomplete beta argument outside [0,1]: " + std::to_string(x));
  if (x == 0.0) return {0.0, 1.0};
  if (x == 1.0) return {1.0, 0.0};
  const double log_front = s.a * std::log(x) + s.b * std::log1p(-x) - log_b;
  if (x < (s.a + 1.0) / (s.a + s.b + 2.0)) {
    const double lower = std::exp(log_front) * detail::beta_cf(s.a, s.b, x) / s.a;
    return {lower, 1.0 - lower};
  }
  const double upper = std::exp(log_front) * detail::beta_cf(s.b, s.a, 1.0 - x) / s.b;
  return {1.0 - upper, upper};
}

inline BetaCdf reg_inc_beta_pair(double x, const ShapePair& s) {
  detail::check_shapes(s);
  return reg_inc_beta_pair(x, s, log_beta(s));
}

inline double reg_inc_beta(double x, const ShapePair& s) { return reg_inc_beta_pair(x, s).lower; }

// I_hi - I_lo for lo <= hi, taken on the tail where the subtraction does not cancel.
inline double beta_mass_between(const BetaCdf& lo, const BetaCdf& hi) {
  if (hi.lower <= 0.5) return hi.lower - lo.lower;
  if (lo.upper <= 0.5) return lo.upper - hi.upper;
  return 1.0 - lo.lower - hi.upper;
}

// ln c(t; j, a, b) = ln of the integral over (0,1) of y^{a-1}(1-y)^{b-1} e^{-j I(y<t)}.
// Evaluated as ln B + ln{(1 - I_t) + e^{-j} I_t}, a sum of non-negative terms.
inline double log_norm_const(double t, double j, const ShapePair& s) {
  if (!(t > 0.0 && t < 1.0)) throw std::domain_error("threshold must lie in (0,1)");
  if (!(j >= 0.0)) throw std::domain_error("jump size must be non-negative");
  const double lb = log_beta(s);
  if (j == 0.0) return lb;
  const BetaCdf at_t = reg_inc_beta_pair(t, s, lb);
  return lb + std::log(at_t.upper + std::exp(-j) * at_t.lower);
}

// Same integral restricted to [t1, t2], t1 <= t <= t2.
inline double log_norm_const_trunc(double t, double j, const ShapePair& s, double t1, double t2) {
  if (!(t1 >= 0.0 && t2 <= 1.0 && t1 < t2))
    throw std::domain_error("truncation interval must satisfy 0 <= t1 < t2 <= 1");
  if (!(t >= t1 && t <= t2)) throw std::domain_error("threshold outside truncation interval");
  if (!(j >= 0.0)) throw std::domain_error("jump size must be non-negative");
  const double lb = log_beta(s);
  const BetaCdf lo = reg_inc_beta_pair(t1, s, lb);
  const BetaCdf hi = reg_inc_beta_pair(t2, s, lb);
  if (j == 0.0) return lb + std::log(beta_mass_between(lo, hi));
  const BetaCdf mid = reg_inc_beta_pair(t, s, lb);
  return lb + std::log(beta_mass_between(mid, hi) + std::exp(-j) * beta_mass_between(lo, mid));
}

// Batch forms over aligned inputs.

inline std::vector<double> log_beta(std::span<const ShapePair> s) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = log_beta(s[i]);
  return out;
}

inline std::vector<double> reg_inc_beta(std::span<const double> x, std::span<const ShapePair> s) {
  if (x.size() != s.size()) throw std::invalid_argument("reg_inc_beta: misaligned batch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = reg_inc_beta(x[i], s[i]);
  return out;
}

inline std::vector<double> log_norm_const(double t, std::span<const double> j,
                                          std::span<const ShapePair> s) {
  if (j.size() != s.size()) throw std::invalid_argument("log_norm_const: misaligned batch");
  std::vector<double> out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out[i] = log_norm_const(t, j[i], s[i]);
  return out;
}

inline std::vector<double> log_norm_const_trunc(double t, std::span<const double> j,
                                                std::span<const ShapePair> s, double t1,
                                                double t2) {
  if (j.size() != s.size()) throw std::invalid_argument("log_norm_const_trunc: misaligned batch");
  std::vector<double> out(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out[i] = log_norm_const_trunc(t, j[i], s[i], t1, t2);
  return out;
}

}  // namespace ddreg
