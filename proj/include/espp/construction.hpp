#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace espp {

// First m primes via a sieve with the standard n-th prime overshoot bound,
// re-sieving on shortfall.
std::vector<uint64_t> first_primes(std::size_t m);

// Exact primorials P_0 = 1, P_j = p_1 ... p_j.
struct PrimorialTable {
  std::vector<uint64_t> primes;   // p_1..p_m
  std::vector<mpz_class> values;  // P_0..P_m

  static PrimorialTable first(std::size_t m);
  const mpz_class& P(std::size_t j) const { return values[j]; }
};

mpz_class primorial(std::size_t m);

// B_k via the Bell triangle.
mpz_class bell_number(unsigned k);

// L = floor(log k), natural log. k >= 3 (so L >= 1).
unsigned segment_count(unsigned k);

// M_k = max over 0 <= i <= floor(log k) of P_{(i+1)k} / P_{ik}, exact.
mpz_class max_segment_ratio(unsigned k);

// A set partition of {1,...,k} stored as a restricted growth string:
// rgs[0] = 0 and rgs[i] <= 1 + max(rgs[0..i-1]).
struct SetPartition {
  unsigned k = 0;
  std::vector<uint8_t> rgs;

  // Blocks in first-occurrence order; elements are 1-based.
  std::vector<std::vector<unsigned>> blocks() const;
  unsigned block_count() const;
};

// Lexicographic RGS order over all partitions of {1,...,k}, with exact
// rank/unrank. The rank of a partition is its canonical index.
class SetPartitionSpace {
 public:
  explicit SetPartitionSpace(unsigned k);

  unsigned k() const { return k_; }
  const mpz_class& count() const { return count_; }  // B_k

  static std::vector<uint8_t> first(unsigned k) {
    return std::vector<uint8_t>(k, 0);
  }
  // Advances to the lex successor; false when rgs was the last one.
  static bool next(std::vector<uint8_t>& rgs);

  void unrank(uint64_t index, std::vector<uint8_t>& out) const;
  uint64_t rank(std::span<const uint8_t> rgs) const;

 private:
  unsigned k_;
  mpz_class count_;
  // completions_[pos][m]: suffixes from position pos with current max label m.
  std::vector<std::vector<mpz_class>> completions_;
};

// Emits all B_k partitions in lex RGS order.
template <typename Visit>
void enumerate_set_partitions(unsigned k, Visit&& visit) {
  if (k < 1) throw std::invalid_argument("set partitions need k >= 1");
  std::vector<uint8_t> rgs = SetPartitionSpace::first(k);
  do {
    visit(static_cast<const std::vector<uint8_t>&>(rgs));
  } while (SetPartitionSpace::next(rgs));
}

// One constructed solution: for the index tuple (i_1,...,i_L), segment j
// contributes one core value per block V of partition i_j, namely the product
// of p_{(j-1)k+s} over s in V; the core is the nonincreasing concatenation and
// n = P_{kL} - sum(core) + (number of blocks).
struct ConstructionOutput {
  std::vector<uint64_t> index_tuple;  // 1-based partition indices, length L
  std::vector<mpz_class> core;        // nonincreasing
  mpz_class core_sum;
  uint64_t block_total = 0;
  mpz_class n;
  bool degenerate = false;  // block_total == 1 forces n = 1

  mpz_class ones() const { return n - static_cast<unsigned long>(block_total); }
};

inline constexpr uint64_t kDefaultSampleSeed = 1729;

struct VerifyConstructionReport {
  unsigned k = 0;
  unsigned segments = 0;  // L
  mpz_class bell_k;
  mpz_class tuple_space;  // B_k^L
  mpz_class m_k;
  mpz_class product;      // P_{kL}
  bool sampled = false;
  uint64_t seed = 0;
  uint64_t checked = 0;     // tuples examined (including the degenerate one)
  uint64_t degenerate = 0;  // tuples excluded for block_total == 1
  uint64_t eq_failures = 0;
  uint64_t window_failures = 0;
  uint64_t roundtrip_failures = 0;
  std::vector<std::string> failure_examples;  // first few offending tuples

  uint64_t failures() const {
    return eq_failures + window_failures + roundtrip_failures;
  }
  bool ok() const { return failures() == 0; }
};

// Shared state for the primorial construction at a fixed k.
class ConstructionEngine {
 public:
  explicit ConstructionEngine(unsigned k);  // k >= 3

  unsigned k() const { return k_; }
  unsigned segments() const { return segments_; }
  const mpz_class& bell() const { return space_.count(); }
  const mpz_class& tuple_space() const { return tuple_space_; }
  const mpz_class& target_product() const { return primorials_.P(k_ * segments_); }
  const mpz_class& m_k() const { return m_k_; }
  const PrimorialTable& primorials() const { return primorials_; }
  const SetPartitionSpace& partition_space() const { return space_; }

  // Builds the output for a tuple of 0-based partition ranks (length L).
  ConstructionOutput build(std::span<const uint64_t> ranks) const;

  // Recovers the 0-based rank tuple from a core by factoring each value over
  // its segment's prime window. Returns false if the core is malformed.
  bool decode(std::span<const mpz_class> core,
              std::vector<uint64_t>& ranks) const;

 private:
  unsigned k_;
  unsigned segments_;
  PrimorialTable primorials_;
  SetPartitionSpace space_;
  mpz_class tuple_space_;
  mpz_class m_k_;
};

// Full enumeration of the index-tuple space in lexicographic tuple order
// (i_L fastest). Degenerate outputs are passed through with the flag set so
// the caller can count them; emit returns false to stop early.
void construct_solutions(
    unsigned k, const std::function<bool(const ConstructionOutput&)>& emit);

// Verifies, over all tuples (or a fixed-seed uniform sample when B_k^L
// exceeds sample_size): exact equality of sum and product, the window
// P_{kL} - L*M_k < n <= P_{kL}, and decode round-trip. The tuple space is
// split lexicographically across jobs.
VerifyConstructionReport verify_construction(
    unsigned k, std::optional<uint64_t> sample_size, int jobs = 1,
    uint64_t seed = kDefaultSampleSeed);

}  // namespace espp
