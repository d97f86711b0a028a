#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "espp/factor_enum.hpp"

namespace espp {

// One solution of the equal-sum-product equation for a given n: the factors
// >= 2 plus a count of trailing ones.
struct SolutionTuple {
  FactorMultiset core;  // length >= 2
  uint64_t ones = 0;
  uint64_t n = 0;
};

// Dense table of N(n) over [2, max_n]. counts[n] indexes directly by n;
// entries 0 and 1 are unused and stay zero.
struct CountTable {
  uint64_t max_n = 0;
  std::vector<uint32_t> counts;

  CountTable() = default;
  explicit CountTable(uint64_t x) : max_n(x), counts(x + 1, 0) {}

  uint32_t operator[](uint64_t n) const { return counts[n]; }
  bool covers(uint64_t x) const { return max_n >= x && x >= 2; }

  // Pointwise addition; ranges must match. Saturation raises CapacityError.
  void merge(const CountTable& other);

  // Sum of N(n) over 2 <= n <= x (x defaults to the full range).
  uint64_t total(uint64_t x = 0) const;

  bool operator==(const CountTable&) const = default;
};

// Divisor-count table d[m] for 1 <= m <= max_m.
struct DivisorSieve {
  uint64_t max_m = 0;
  std::vector<uint32_t> d;

  static DivisorSieve up_to(uint64_t max_m);
};

// n = product - sum + k for a factor multiset with length >= 2. Always >= 2.
uint64_t n_of_factorization(const FactorMultiset& f);

// N(n): the number of equal-sum-product solutions of length n, computed by
// enumerating factor multisets with k >= 2 and product <= 2n.
uint64_t count_N(uint64_t n);

// Options for the bulk sieve.
struct SieveOptions {
  int jobs = 1;
  // Over-decomposition: number of shards = shards_per_job * max(jobs, 1),
  // unless an explicit shard list is given.
  std::size_t shards_per_job = 8;
  std::optional<std::vector<FactorRange>> shards;
};

// counts[n] = N(n) for every 2 <= n <= X, via one enumeration pass over
// product <= 2X. With an explicit shard list, only contributions from
// multisets whose largest factor falls in those ranges are accumulated
// (shard tables merge by addition to the full table).
CountTable sieve_N(uint64_t X, const SieveOptions& options = {});

// Adds the contribution of the given shards to `accum` (range [2, X]).
// Used by sieve_N and by the checkpointed runner.
void sieve_N_into(uint64_t X, std::span<const FactorRange> shards, int jobs,
                  CountTable& accum);

// All solutions for a given n, sorted lexicographically descending by core.
// Materialization is offered for n <= 1'000'000 only.
std::vector<SolutionTuple> solutions_of(uint64_t n);

// All n <= X with N(n) = 1, ascending.
std::vector<uint64_t> exceptional_scan(uint64_t X, const SieveOptions& = {});
std::vector<uint64_t> exceptional_from_table(const CountTable& table);

// Check 2*N(n) >= d(n-1) over 3 <= n <= X.
struct DivisorBoundReport {
  uint64_t x = 0;
  uint64_t checked = 0;
  std::vector<uint64_t> violations;  // expected empty
  int64_t min_slack = 0;             // min of 2*N(n) - d(n-1)
  uint64_t argmin = 0;
};

DivisorBoundReport divisor_bound_check(uint64_t X, const SieveOptions& = {});
DivisorBoundReport divisor_bound_check_from_table(const CountTable& table);

}  // namespace espp
