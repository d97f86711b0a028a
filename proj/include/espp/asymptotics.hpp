#pragma once

#include <cstdint>
#include <string>

#include "espp/sumprod.hpp"

namespace espp {

// Choice of the weight function g(x) in the sandwich inequality. The default
// is g(x) = x * e^{-sqrt(log x)}, the choice used to derive the asymptotics;
// sqrt gives g(x) = sqrt(x); constant gives g(x) = c. Admissibility
// 1 <= g(x) <= 2x is checked at evaluation time.
struct GChoice {
  enum class Kind { Default, Sqrt, Constant };
  Kind kind = Kind::Default;
  double c = 0.0;

  double operator()(double x) const;
  bool admissible(double x) const;
  std::string name() const;

  static GChoice standard() { return {Kind::Default, 0.0}; }
  static GChoice sqrt_x() { return {Kind::Sqrt, 0.0}; }
  static GChoice constant(double c) { return {Kind::Constant, c}; }
  // Parses "default", "sqrt", or a positive number.
  static GChoice parse(const std::string& text);
};

// Main term x * e^{2 sqrt(log x)} / (2 sqrt(pi) (log x)^{3/4}), natural log.
// Domain x > 1.
double main_term_estimate(double x);

// Exact sandwich f(x) - x < sum_{2<=n<=x} N(n) <= f(x+g(x)) + x*f(2x(1+log2 x)/g(x)).
// All three quantities are integers; f arguments are formed with a documented
// 1e-9 upward nudge before the floor.
struct BoundReport {
  uint64_t x = 0;
  std::string g_name;
  int64_t lower = 0;        // f(x) - x
  uint64_t middle = 0;      // sum of N(n)
  uint64_t upper = 0;       // f(x + g(x)) + x * f(2x(1+log2 x)/g(x))
  bool lower_ok = false;    // lower < middle
  bool upper_ok = false;    // middle <= upper
  // evaluation details
  uint64_t f_x = 0;
  uint64_t upper_arg1 = 0;  // floor(x + g(x))
  uint64_t upper_arg2 = 0;  // floor(2x(1+log2 x)/g(x))
  uint64_t f_upper1 = 0;
  uint64_t f_upper2 = 0;

  bool ok() const { return lower_ok && upper_ok; }
};

BoundReport sandwich_check(uint64_t x, const GChoice& g, const CountTable& table,
                          int jobs = 1);

// (sum of N(n) up to x) / main_term_estimate(x).
double main_term_ratio(uint64_t x, const CountTable& table);

// Frequency of n <= X violating (log n)^{log 2 - eps} < N(n) < e^{2 sqrt(log n)}.
struct AlmostAllReport {
  uint64_t x = 0;
  double epsilon = 0.0;
  uint64_t total = 0;
  uint64_t lower_violations = 0;  // N(n) <= (log n)^{log 2 - eps}
  uint64_t upper_violations = 0;  // N(n) >= e^{2 sqrt(log n)}
  double lower_fraction = 0.0;
  double upper_fraction = 0.0;
};

AlmostAllReport almost_all_report(uint64_t X, double epsilon,
                                  const CountTable& table);

// Max over e^e < n <= X of (1 - log a_n / log n) * log log n / log log log n.
struct ExponentReport {
  uint64_t x = 0;
  uint64_t considered = 0;
  double max_exponent = 0.0;
  uint64_t argmax = 0;
};

ExponentReport exponent_report(uint64_t X, std::span<const uint32_t> a_table);

}  // namespace espp
