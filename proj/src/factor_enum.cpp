#include "espp/factor_enum.hpp"

#include <atomic>
#include <cmath>

#include "espp/parallel.hpp"

namespace espp {

uint64_t count_a(uint64_t n) {
  if (n < 2) throw std::invalid_argument("a_n is defined for n >= 2");
  if (n > kMaxProductBound)
    throw CapacityError("n exceeds the 64-bit engine domain");
  uint64_t count = 0;
  EnumerationSpec spec;
  spec.product_bound = n;
  spec.min_length = 1;
  enumerate_factorizations(spec, [&](const FactorView& v) {
    if (v.product == n) ++count;
  });
  return count;
}

uint64_t f_count(double x, int jobs) {
  if (!(x >= 0.0)) throw std::invalid_argument("f(x) needs x >= 0");
  if (x >= 9223372036854775808.0)  // 2^63
    throw CapacityError("x exceeds the 64-bit engine domain");
  uint64_t bound = static_cast<uint64_t>(std::floor(x));
  if (bound < 2) return 0;
  if (jobs <= 1) {
    uint64_t count = 0;
    EnumerationSpec spec;
    spec.product_bound = bound;
    enumerate_factorizations(spec, [&](const FactorView&) { ++count; });
    return count;
  }
  auto shards = plan_shards(bound, static_cast<std::size_t>(jobs) * 8);
  std::atomic<uint64_t> total{0};
  parallel_for_index(shards.size(), jobs, [&](std::size_t i) {
    uint64_t local = 0;
    EnumerationSpec spec;
    spec.product_bound = bound;
    spec.shard = shards[i];
    enumerate_factorizations(spec, [&](const FactorView&) { ++local; });
    total.fetch_add(local, std::memory_order_relaxed);
  });
  return total.load();
}

std::vector<uint32_t> sieve_a(uint64_t X, int jobs) {
  if (X > kMaxProductBound)
    throw CapacityError("X exceeds the 64-bit engine domain");
  std::vector<uint32_t> a(X + 1, 0);
  if (X < 2) return a;
  if (jobs <= 1) {
    EnumerationSpec spec;
    spec.product_bound = X;
    enumerate_factorizations(spec,
                             [&](const FactorView& v) { ++a[v.product]; });
    return a;
  }
  auto shards = plan_shards(X, static_cast<std::size_t>(jobs) * 8);
  parallel_for_index(shards.size(), jobs, [&](std::size_t i) {
    EnumerationSpec spec;
    spec.product_bound = X;
    spec.shard = shards[i];
    enumerate_factorizations(spec, [&](const FactorView& v) {
      std::atomic_ref<uint32_t> cell(a[v.product]);
      cell.fetch_add(1, std::memory_order_relaxed);
    });
  });
  return a;
}

std::vector<FactorRange> plan_shards(uint64_t product_bound,
                                     std::size_t shard_count) {
  std::vector<FactorRange> out;
  if (product_bound < 2 || shard_count == 0) return out;
  uint64_t end = product_bound + 1;  // exclusive upper bound on the factor
  uint64_t domain = product_bound - 1;
  uint64_t count = std::min<uint64_t>(shard_count, domain);
  double ratio = std::pow(static_cast<double>(end) / 2.0,
                          1.0 / static_cast<double>(count));
  // Exactly `count` nonempty ranges, deterministically: replanning with the
  // returned size reproduces the same boundaries (checkpoint resume relies on
  // this).
  uint64_t lo = 2;
  for (uint64_t i = 1; i <= count; ++i) {
    uint64_t hi;
    if (i == count) {
      hi = end;
    } else {
      double edge = 2.0 * std::pow(ratio, static_cast<double>(i));
      uint64_t e =
          edge >= static_cast<double>(end) ? end : static_cast<uint64_t>(edge);
      uint64_t room = end - (count - i);  // leave width for later ranges
      hi = std::clamp(e, lo + 1, room);
    }
    out.push_back(FactorRange{lo, hi});
    lo = hi;
  }
  return out;
}

}  // namespace espp
