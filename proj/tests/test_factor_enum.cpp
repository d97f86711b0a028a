#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "espp/factor_enum.hpp"
#include "oracles.hpp"

using namespace espp;

TEST_CASE("enumeration emits each canonical multiset exactly once") {
  std::set<std::vector<uint64_t>> seen;
  uint64_t visits = 0;
  EnumerationSpec spec;
  spec.product_bound = 60;
  enumerate_factorizations(spec, [&](const FactorView& v) {
    ++visits;
    std::vector<uint64_t> fs(v.factors.begin(), v.factors.end());
    CHECK(std::is_sorted(fs.rbegin(), fs.rend()));
    uint64_t p = 1, s = 0;
    for (uint64_t y : fs) {
      CHECK(y >= 2);
      p *= y;
      s += y;
    }
    CHECK(p == v.product);
    CHECK(s == v.sum);
    CHECK(p <= 60);
    CHECK(seen.insert(fs).second);  // never the same multiset twice
  });
  CHECK(visits == oracle::f_sum(60));
}

TEST_CASE("min_length filters exactly the singleton multisets") {
  uint64_t all = 0, at_least_two = 0;
  EnumerationSpec spec;
  spec.product_bound = 50;
  enumerate_factorizations(spec, [&](const FactorView&) { ++all; });
  spec.min_length = 2;
  enumerate_factorizations(spec, [&](const FactorView&) { ++at_least_two; });
  // singletons are exactly the integers 2..50
  CHECK(all - at_least_two == 49);
}

TEST_CASE("count_a matches the divisor-recursion oracle") {
  for (uint64_t n = 2; n <= 400; ++n) CHECK(count_a(n) == oracle::count_a(n));
}

TEST_CASE("count_a at frozen spots") {
  CHECK(count_a(4) == 2);
  CHECK(count_a(12) == 4);
  CHECK(count_a(30) == 5);
  CHECK(count_a(96) == 19);
  CHECK(count_a(720) == 98);
  CHECK(count_a(840) == 74);
  CHECK(count_a(1000) == 31);
  CHECK(count_a(1024) == 42);
  CHECK(count_a(2048) == 56);
  CHECK(count_a(5040) == 392);
  CHECK(count_a(9216) == 392);
  CHECK(count_a(10000) == 109);
}

TEST_CASE("f_count matches the oracle and freezes known values") {
  for (uint64_t x : {2u, 6u, 7u, 10u, 14u, 30u, 100u, 200u, 500u})
    CHECK(f_count(static_cast<double>(x)) == oracle::f_sum(x));
  CHECK(f_count(1000.0) == 7313);
  CHECK(f_count(1072.0) == 7992);
  CHECK(f_count(2000.0) == 17919);
  CHECK(f_count(10000.0) == 139812);
}

TEST_CASE("f_count floors its argument and handles the empty domain") {
  CHECK(f_count(0.0) == 0);
  CHECK(f_count(1.999) == 0);
  CHECK(f_count(2.0) == 1);
  CHECK(f_count(2.999) == 1);
  CHECK(f_count(6.5) == f_count(6.0));
}

TEST_CASE("f_count is job-count invariant") {
  CHECK(f_count(5000.0, 4) == f_count(5000.0, 1));
  CHECK(f_count(5000.0, 16) == f_count(5000.0, 1));
}

TEST_CASE("sieve_a matches count_a pointwise and across jobs") {
  auto a = sieve_a(2000);
  REQUIRE(a.size() == 2001);
  CHECK(a[0] == 0);
  CHECK(a[1] == 0);
  for (uint64_t n = 2; n <= 2000; ++n) CHECK(a[n] == count_a(n));
  CHECK(sieve_a(2000, 4) == a);
}

TEST_CASE("shard plans cover the factor domain exactly and replan stably") {
  for (uint64_t bound : {2ull, 3ull, 10ull, 1000ull, 999983ull}) {
    for (std::size_t want : {std::size_t{1}, std::size_t{2}, std::size_t{7},
                             std::size_t{64}, std::size_t{2000}}) {
      auto shards = plan_shards(bound, want);
      REQUIRE(!shards.empty());
      CHECK(shards.size() <= want);
      CHECK(shards.front().lo == 2);
      CHECK(shards.back().hi == bound + 1);
      for (std::size_t i = 0; i < shards.size(); ++i) {
        CHECK(shards[i].lo < shards[i].hi);
        if (i) CHECK(shards[i].lo == shards[i - 1].hi);
      }
      // checkpoint resume replans with the recorded count; it must get the
      // same plan back
      CHECK(plan_shards(bound, shards.size()) == shards);
    }
  }
}

TEST_CASE("sharded enumeration partitions the unsharded one") {
  const uint64_t bound = 300;
  auto collect = [&](std::optional<FactorRange> shard) {
    std::set<std::vector<uint64_t>> out;
    EnumerationSpec spec;
    spec.product_bound = bound;
    spec.shard = shard;
    enumerate_factorizations(spec, [&](const FactorView& v) {
      out.insert({v.factors.begin(), v.factors.end()});
    });
    return out;
  };
  auto whole = collect(std::nullopt);
  std::set<std::vector<uint64_t>> glued;
  std::size_t pieces_total = 0;
  for (const auto& sh : plan_shards(bound, 5)) {
    auto piece = collect(sh);
    pieces_total += piece.size();
    glued.insert(piece.begin(), piece.end());
  }
  CHECK(glued == whole);
  CHECK(pieces_total == whole.size());  // disjoint, not just covering
}

TEST_CASE("domain guards") {
  EnumerationSpec spec;
  spec.product_bound = kMaxProductBound + 1;
  CHECK_THROWS_AS(enumerate_factorizations(spec, [](const FactorView&) {}),
                  CapacityError);
  spec.product_bound = 10;
  spec.min_length = 0;
  CHECK_THROWS_AS(enumerate_factorizations(spec, [](const FactorView&) {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(count_a(0), std::invalid_argument);
  CHECK_THROWS_AS(count_a(1), std::invalid_argument);
  CHECK_THROWS_AS(f_count(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(f_count(1e19), CapacityError);
}
