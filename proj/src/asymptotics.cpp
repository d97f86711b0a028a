#include "espp/asymptotics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "espp/table_io.hpp"

namespace espp {

double GChoice::operator()(double x) const {
  switch (kind) {
    case Kind::Default:
      return x * std::exp(-std::sqrt(std::log(x)));
    case Kind::Sqrt:
      return std::sqrt(x);
    case Kind::Constant:
      return c;
  }
  return 0.0;
}

bool GChoice::admissible(double x) const {
  if (!(x >= 2.0)) return false;
  double g = (*this)(x);
  return std::isfinite(g) && g >= 1.0 && g <= 2.0 * x;
}

std::string GChoice::name() const {
  switch (kind) {
    case Kind::Default:
      return "default";
    case Kind::Sqrt:
      return "sqrt";
    case Kind::Constant:
      return "c=" + format_real(c);
  }
  return "?";
}

GChoice GChoice::parse(const std::string& text) {
  std::string t;
  for (char ch : text) t.push_back(static_cast<char>(std::tolower(ch)));
  if (t == "default") return standard();
  if (t == "sqrt") return sqrt_x();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("g must be 'default', 'sqrt', or a number");
  }
  if (pos != t.size() || !(v > 0.0))
    throw std::invalid_argument("g must be 'default', 'sqrt', or a positive number");
  return constant(v);
}

double main_term_estimate(double x) {
  if (!(x > 1.0))
    throw std::invalid_argument("the main term is evaluated for x > 1");
  double L = std::log(x);
  return x * std::exp(2.0 * std::sqrt(L)) /
         (2.0 * std::sqrt(std::numbers::pi) * std::pow(L, 0.75));
}

namespace {

// Floor with a fixed upward nudge: the bound arguments are exact reals whose
// double images can land a hair under an integer.
uint64_t floor_arg(double v) {
  if (!(v >= 0.0) || v >= 9223372036854775808.0)
    throw CapacityError("bound argument leaves the 64-bit domain");
  return static_cast<uint64_t>(std::floor(v + 1e-9));
}

}  // namespace

BoundReport sandwich_check(uint64_t x, const GChoice& g, const CountTable& table,
                          int jobs) {
  if (!table.covers(x))
    throw std::invalid_argument("table does not cover x");
  double xd = static_cast<double>(x);
  if (!g.admissible(xd))
    throw std::invalid_argument("g is not admissible at this x (needs 1 <= g(x) <= 2x)");
  BoundReport r;
  r.x = x;
  r.g_name = g.name();
  r.middle = table.total(x);
  r.f_x = f_count(xd, jobs);
  r.lower = static_cast<int64_t>(r.f_x) - static_cast<int64_t>(x);
  double gx = g(xd);
  r.upper_arg1 = floor_arg(xd + gx);
  r.upper_arg2 = floor_arg(2.0 * xd * (1.0 + std::log2(xd)) / gx);
  r.f_upper1 = f_count(static_cast<double>(r.upper_arg1), jobs);
  r.f_upper2 = f_count(static_cast<double>(r.upper_arg2), jobs);
  r.upper = r.f_upper1 + x * r.f_upper2;
  r.lower_ok = r.lower < static_cast<int64_t>(r.middle);
  r.upper_ok = r.middle <= r.upper;
  return r;
}

double main_term_ratio(uint64_t x, const CountTable& table) {
  if (!table.covers(x))
    throw std::invalid_argument("table does not cover x");
  return static_cast<double>(table.total(x)) /
         main_term_estimate(static_cast<double>(x));
}

AlmostAllReport almost_all_report(uint64_t X, double epsilon,
                                  const CountTable& table) {
  if (!table.covers(X))
    throw std::invalid_argument("table does not cover X");
  if (!(epsilon > 0.0) || !(epsilon < std::numbers::ln2))
    throw std::invalid_argument("epsilon must lie in (0, log 2)");
  AlmostAllReport r;
  r.x = X;
  r.epsilon = epsilon;
  for (uint64_t n = 2; n <= X; ++n) {
    double L = std::log(static_cast<double>(n));
    double nv = table[n];
    if (nv <= std::pow(L, std::numbers::ln2 - epsilon)) ++r.lower_violations;
    if (nv >= std::exp(2.0 * std::sqrt(L))) ++r.upper_violations;
    ++r.total;
  }
  r.lower_fraction =
      static_cast<double>(r.lower_violations) / static_cast<double>(r.total);
  r.upper_fraction =
      static_cast<double>(r.upper_violations) / static_cast<double>(r.total);
  return r;
}

ExponentReport exponent_report(uint64_t X, std::span<const uint32_t> a_table) {
  if (a_table.size() < X + 1)
    throw std::invalid_argument("a_n table does not cover X");
  ExponentReport r;
  r.x = X;
  // e^e = 15.15..., so the normalized exponent is evaluated from n = 16 on
  for (uint64_t n = 16; n <= X; ++n) {
    double logn = std::log(static_cast<double>(n));
    double loglog = std::log(logn);
    double val = (1.0 - std::log(static_cast<double>(a_table[n])) / logn) *
                 loglog / std::log(loglog);
    ++r.considered;
    if (val > r.max_exponent || r.considered == 1) {
      r.max_exponent = val;
      r.argmax = n;
    }
  }
  return r;
}

}  // namespace espp
