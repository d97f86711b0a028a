#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "espp/errors.hpp"

namespace espp {

// Largest admissible product bound. Requests above this raise CapacityError
// instead of widening to a larger integer type.
inline constexpr uint64_t kMaxProductBound = (uint64_t{1} << 63) - 1;

// A canonical unordered factorization: factors nonincreasing, each >= 2.
struct FactorMultiset {
  std::vector<uint64_t> factors;
  uint64_t product = 1;
  uint64_t sum = 0;

  std::size_t length() const { return factors.size(); }

  static FactorMultiset from_factors(std::vector<uint64_t> fs) {
    FactorMultiset m;
    m.factors = std::move(fs);
    std::sort(m.factors.begin(), m.factors.end(), std::greater<>());
    for (uint64_t y : m.factors) {
      m.product *= y;
      m.sum += y;
    }
    return m;
  }
};

// Half-open range [lo, hi) restricting the largest factor of an enumeration.
struct FactorRange {
  uint64_t lo = 2;
  uint64_t hi = 0;

  bool empty() const { return hi <= lo; }
  bool operator==(const FactorRange&) const = default;
};

struct EnumerationSpec {
  uint64_t product_bound = 0;
  uint32_t min_length = 1;
  std::optional<FactorRange> shard;
};

// View of the multiset currently visited by enumerate_factorizations. The
// span aliases the enumerator's working buffer; copy it if it must outlive
// the callback.
struct FactorView {
  std::span<const uint64_t> factors;
  uint64_t product;
  uint64_t sum;

  std::size_t length() const { return factors.size(); }
};

namespace detail {

template <typename Visit>
void descend_factors(uint64_t remaining, uint64_t max_factor,
                     std::vector<uint64_t>& buf, uint64_t product, uint64_t sum,
                     uint32_t min_length, Visit& visit) {
  uint64_t limit = std::min(max_factor, remaining);
  for (uint64_t y = 2; y <= limit; ++y) {
    buf.push_back(y);
    uint64_t p = product * y;  // p <= product_bound, so no overflow
    uint64_t s = sum + y;
    if (buf.size() >= min_length) visit(FactorView{buf, p, s});
    descend_factors(remaining / y, y, buf, p, s, min_length, visit);
    buf.pop_back();
  }
}

}  // namespace detail

// Emits every multiset {y_1 >= ... >= y_k >= 2} with product <= product_bound
// and k >= min_length, exactly once, in a deterministic order (largest factor
// ascending, then recursively nonincreasing continuations ascending). With a
// shard, only multisets whose largest factor lies in [lo, hi) are emitted.
template <typename Visit>
void enumerate_factorizations(const EnumerationSpec& spec, Visit&& visit) {
  if (spec.product_bound > kMaxProductBound)
    throw CapacityError("product bound exceeds the 64-bit engine domain");
  if (spec.min_length < 1)
    throw std::invalid_argument("min_length must be >= 1");
  uint64_t bound = spec.product_bound;
  if (bound < 2) return;
  uint64_t first_lo = 2;
  uint64_t first_hi = bound;  // inclusive
  if (spec.shard) {
    if (spec.shard->empty()) return;
    first_lo = std::max<uint64_t>(first_lo, spec.shard->lo);
    first_hi = std::min<uint64_t>(first_hi, spec.shard->hi - 1);
  }
  std::vector<uint64_t> buf;
  buf.reserve(64);
  for (uint64_t y1 = first_lo; y1 <= first_hi; ++y1) {
    buf.push_back(y1);
    if (spec.min_length <= 1) visit(FactorView{buf, y1, y1});
    detail::descend_factors(bound / y1, y1, buf, y1, y1, spec.min_length,
                            visit);
    buf.pop_back();
  }
}

// Count of multisets with product exactly n (the multiplicative partition
// number a_n). n >= 2.
uint64_t count_a(uint64_t n);

// f(x): number of multisets with product <= floor(x), any length >= 1.
// x is floored once at entry; x < 2 gives 0.
uint64_t f_count(double x, int jobs = 1);

// a_n for every n in [0, X] as a dense table (entries 0 and 1 are zero).
// One enumeration pass bucketed by product.
std::vector<uint32_t> sieve_a(uint64_t X, int jobs = 1);

// Splits the largest-factor domain [2, product_bound] into at most
// shard_count disjoint half-open ranges covering it exactly. Boundaries grow
// geometrically so the work-heavy small-factor end is cut finer.
std::vector<FactorRange> plan_shards(uint64_t product_bound,
                                     std::size_t shard_count);

}  // namespace espp
