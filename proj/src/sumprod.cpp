#include "espp/sumprod.hpp"

#include <algorithm>
#include <atomic>
#include <limits>

#include "espp/parallel.hpp"

namespace espp {

void CountTable::merge(const CountTable& other) {
  if (other.max_n != max_n)
    throw std::invalid_argument("merging tables with different ranges");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    uint64_t v = uint64_t{counts[i]} + other.counts[i];
    if (v > std::numeric_limits<uint32_t>::max())
      throw CapacityError("count cell saturated in merge");
    counts[i] = static_cast<uint32_t>(v);
  }
}

uint64_t CountTable::total(uint64_t x) const {
  if (x == 0 || x > max_n) x = max_n;
  uint64_t sum = 0;
  for (uint64_t n = 2; n <= x; ++n) sum += counts[n];
  return sum;
}

DivisorSieve DivisorSieve::up_to(uint64_t max_m) {
  DivisorSieve s;
  s.max_m = max_m;
  s.d.assign(max_m + 1, 0);
  for (uint64_t i = 1; i <= max_m; ++i)
    for (uint64_t j = i; j <= max_m; j += i) ++s.d[j];
  return s;
}

uint64_t n_of_factorization(const FactorMultiset& f) {
  if (f.length() < 2)
    throw std::invalid_argument("the solution map needs length >= 2");
  // product >= sum holds for every multiset of >= 2 factors >= 2
  return f.product - f.sum + f.length();
}

uint64_t count_N(uint64_t n) {
  if (n < 2) throw std::invalid_argument("N(n) is defined for n >= 2");
  if (n > kMaxProductBound / 2)
    throw CapacityError("2n exceeds the 64-bit engine domain");
  uint64_t count = 0;
  EnumerationSpec spec;
  spec.product_bound = 2 * n;
  spec.min_length = 2;
  enumerate_factorizations(spec, [&](const FactorView& v) {
    if (v.product - v.sum + v.length() == n) ++count;
  });
  return count;
}

void sieve_N_into(uint64_t X, std::span<const FactorRange> shards, int jobs,
                  CountTable& accum) {
  if (accum.max_n < X)
    throw std::invalid_argument("accumulator does not cover the sieve range");
  uint64_t bound = 2 * X;
  uint32_t* cells = accum.counts.data();
  parallel_for_index(shards.size(), jobs, [&](std::size_t i) {
    EnumerationSpec spec;
    spec.product_bound = bound;
    spec.min_length = 2;
    spec.shard = shards[i];
    enumerate_factorizations(spec, [&](const FactorView& v) {
      uint64_t n = v.product - v.sum + v.length();
      if (n <= X) {
        std::atomic_ref<uint32_t> cell(cells[n]);
        if (cell.fetch_add(1, std::memory_order_relaxed) ==
            std::numeric_limits<uint32_t>::max())
          throw CapacityError("count cell saturated in sieve");
      }
    });
  });
}

CountTable sieve_N(uint64_t X, const SieveOptions& options) {
  if (X < 2) throw std::invalid_argument("sieve needs X >= 2");
  if (X > kMaxProductBound / 2)
    throw CapacityError("2X exceeds the 64-bit engine domain");
  int jobs = std::max(1, options.jobs);
  CountTable table(X);
  std::vector<FactorRange> shards;
  if (options.shards) {
    shards = *options.shards;
  } else {
    shards = plan_shards(
        2 * X, options.shards_per_job * static_cast<std::size_t>(jobs));
  }
  sieve_N_into(X, shards, jobs, table);
  return table;
}

std::vector<SolutionTuple> solutions_of(uint64_t n) {
  if (n < 2) throw std::invalid_argument("solutions need n >= 2");
  if (n > 1000000)
    throw CapacityError("solution listing is offered for n <= 1000000");
  std::vector<SolutionTuple> out;
  EnumerationSpec spec;
  spec.product_bound = 2 * n;
  spec.min_length = 2;
  enumerate_factorizations(spec, [&](const FactorView& v) {
    if (v.product - v.sum + v.length() != n) return;
    SolutionTuple t;
    t.core.factors.assign(v.factors.begin(), v.factors.end());
    t.core.product = v.product;
    t.core.sum = v.sum;
    t.ones = n - v.length();
    t.n = n;
    out.push_back(std::move(t));
  });
  std::sort(out.begin(), out.end(),
            [](const SolutionTuple& a, const SolutionTuple& b) {
              return a.core.factors > b.core.factors;
            });
  return out;
}

std::vector<uint64_t> exceptional_from_table(const CountTable& table) {
  std::vector<uint64_t> out;
  for (uint64_t n = 2; n <= table.max_n; ++n)
    if (table[n] == 1) out.push_back(n);
  return out;
}

std::vector<uint64_t> exceptional_scan(uint64_t X, const SieveOptions& opts) {
  return exceptional_from_table(sieve_N(X, opts));
}

DivisorBoundReport divisor_bound_check_from_table(const CountTable& table) {
  DivisorBoundReport r;
  r.x = table.max_n;
  if (table.max_n < 3) return r;
  DivisorSieve ds = DivisorSieve::up_to(table.max_n - 1);
  r.min_slack = std::numeric_limits<int64_t>::max();
  for (uint64_t n = 3; n <= table.max_n; ++n) {
    int64_t slack = 2 * int64_t{table[n]} - int64_t{ds.d[n - 1]};
    if (slack < r.min_slack) {
      r.min_slack = slack;
      r.argmin = n;
    }
    if (slack < 0) r.violations.push_back(n);
    ++r.checked;
  }
  return r;
}

DivisorBoundReport divisor_bound_check(uint64_t X, const SieveOptions& opts) {
  return divisor_bound_check_from_table(sieve_N(X, opts));
}

}  // namespace espp
