#include "espp/construction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <mutex>
#include <random>

#include "espp/errors.hpp"
#include "espp/parallel.hpp"

namespace espp {

std::vector<uint64_t> first_primes(std::size_t m) {
  std::vector<uint64_t> primes;
  if (m == 0) return primes;
  double md = static_cast<double>(m);
  std::size_t bound =
      m < 6 ? 15
            : static_cast<std::size_t>(md * (std::log(md) + std::log(std::log(md)))) + 2;
  for (;;) {
    std::vector<char> composite(bound + 1, 0);
    primes.clear();
    for (std::size_t p = 2; p <= bound; ++p) {
      if (composite[p]) continue;
      primes.push_back(p);
      if (primes.size() == m) return primes;
      for (std::size_t q = p * p; q <= bound; q += p) composite[q] = 1;
    }
    bound *= 2;
  }
}

PrimorialTable PrimorialTable::first(std::size_t m) {
  PrimorialTable t;
  t.primes = first_primes(m);
  t.values.reserve(m + 1);
  t.values.emplace_back(1);
  for (std::size_t j = 0; j < m; ++j)
    t.values.push_back(t.values.back() *
                       static_cast<unsigned long>(t.primes[j]));
  return t;
}

mpz_class primorial(std::size_t m) { return PrimorialTable::first(m).values[m]; }

mpz_class bell_number(unsigned k) {
  std::vector<mpz_class> row{1};
  mpz_class bell = 1;  // B_0
  for (unsigned i = 1; i <= k; ++i) {
    std::vector<mpz_class> next;
    next.reserve(row.size() + 1);
    next.push_back(row.back());
    for (const mpz_class& v : row) next.push_back(next.back() + v);
    bell = next.front();
    row = std::move(next);
  }
  return bell;
}

unsigned segment_count(unsigned k) {
  if (k < 3) throw std::invalid_argument("the construction needs k >= 3");
  return static_cast<unsigned>(std::floor(std::log(static_cast<double>(k))));
}

mpz_class max_segment_ratio(unsigned k) {
  unsigned L = segment_count(k);
  PrimorialTable t = PrimorialTable::first(static_cast<std::size_t>(k) * (L + 1));
  mpz_class best = 0;
  for (unsigned i = 0; i <= L; ++i) {
    mpz_class ratio = t.P((i + 1) * k) / t.P(i * k);
    if (ratio > best) best = ratio;
  }
  return best;
}

std::vector<std::vector<unsigned>> SetPartition::blocks() const {
  unsigned nb = block_count();
  std::vector<std::vector<unsigned>> out(nb);
  for (std::size_t i = 0; i < rgs.size(); ++i)
    out[rgs[i]].push_back(static_cast<unsigned>(i + 1));
  return out;
}

unsigned SetPartition::block_count() const {
  uint8_t mx = 0;
  for (uint8_t c : rgs) mx = std::max(mx, c);
  return rgs.empty() ? 0 : static_cast<unsigned>(mx) + 1;
}

SetPartitionSpace::SetPartitionSpace(unsigned k) : k_(k) {
  if (k < 1) throw std::invalid_argument("set partitions need k >= 1");
  if (k > 64) throw CapacityError("set partition space capped at k <= 64");
  completions_.assign(k + 1, std::vector<mpz_class>(k + 2, 0));
  for (unsigned m = 0; m <= k + 1; ++m) completions_[k][m] = 1;
  for (unsigned pos = k; pos-- > 1;)
    for (unsigned m = 0; m <= k; ++m)
      completions_[pos][m] = (m + 1) * completions_[pos + 1][m] +
                             completions_[pos + 1][m + 1];
  count_ = k == 1 ? mpz_class(1) : completions_[1][0];
}

bool SetPartitionSpace::next(std::vector<uint8_t>& rgs) {
  const std::size_t k = rgs.size();
  if (k <= 1) return false;
  std::vector<uint8_t> pmax(k, 0);  // pmax[i] = max of rgs[0..i-1]
  for (std::size_t i = 1; i < k; ++i)
    pmax[i] = std::max(pmax[i - 1], rgs[i - 1]);
  for (std::size_t i = k; i-- > 1;) {
    if (rgs[i] <= pmax[i]) {
      ++rgs[i];
      std::fill(rgs.begin() + static_cast<std::ptrdiff_t>(i) + 1, rgs.end(), 0);
      return true;
    }
  }
  return false;
}

void SetPartitionSpace::unrank(uint64_t index, std::vector<uint8_t>& out) const {
  if (count_ <= static_cast<unsigned long>(index))
    throw std::invalid_argument("partition index out of range");
  out.assign(k_, 0);
  mpz_class rem = static_cast<unsigned long>(index);
  unsigned m = 0;
  for (unsigned pos = 1; pos < k_; ++pos) {
    const mpz_class& w = completions_[pos + 1][m];
    mpz_class q = rem / w;
    unsigned c;
    if (q <= static_cast<unsigned long>(m)) {
      c = static_cast<unsigned>(q.get_ui());
      rem -= q * w;
    } else {
      c = m + 1;
      rem -= (m + 1) * w;
    }
    out[pos] = static_cast<uint8_t>(c);
    m = std::max(m, c);
  }
}

uint64_t SetPartitionSpace::rank(std::span<const uint8_t> rgs) const {
  if (rgs.size() != k_ || (k_ > 0 && rgs[0] != 0))
    throw std::invalid_argument("not a restricted growth string of this space");
  mpz_class r = 0;
  unsigned m = 0;
  for (unsigned pos = 1; pos < k_; ++pos) {
    unsigned c = rgs[pos];
    if (c > m + 1)
      throw std::invalid_argument("not a restricted growth string of this space");
    r += c * completions_[pos + 1][m];
    m = std::max(m, c);
  }
  if (!r.fits_ulong_p())
    throw CapacityError("partition rank exceeds the 64-bit index domain");
  return r.get_ui();
}

ConstructionEngine::ConstructionEngine(unsigned k) : k_(k), space_(k < 1 ? 1 : k) {
  segments_ = segment_count(k);  // validates k >= 3
  if (mpz_sizeinbase(space_.count().get_mpz_t(), 2) > 64 ||
      !space_.count().fits_ulong_p())
    throw CapacityError("Bell number exceeds the 64-bit index domain");
  primorials_ = PrimorialTable::first(static_cast<std::size_t>(k_) * segments_);
  m_k_ = max_segment_ratio(k_);
  mpz_pow_ui(tuple_space_.get_mpz_t(), space_.count().get_mpz_t(), segments_);
}

ConstructionOutput ConstructionEngine::build(
    std::span<const uint64_t> ranks) const {
  if (ranks.size() != segments_)
    throw std::invalid_argument("index tuple length must equal the segment count");
  ConstructionOutput out;
  out.index_tuple.reserve(segments_);
  std::vector<uint8_t> rgs;
  for (unsigned j = 0; j < segments_; ++j) {
    space_.unrank(ranks[j], rgs);
    SetPartition part{k_, rgs};
    for (const auto& block : part.blocks()) {
      mpz_class x = 1;
      for (unsigned s : block)
        x *= static_cast<unsigned long>(
            primorials_.primes[static_cast<std::size_t>(j) * k_ + s - 1]);
      out.core_sum += x;
      out.core.push_back(std::move(x));
      ++out.block_total;
    }
    out.index_tuple.push_back(ranks[j] + 1);
  }
  std::sort(out.core.begin(), out.core.end(), std::greater<>());
  out.n = target_product() - out.core_sum +
          static_cast<unsigned long>(out.block_total);
  out.degenerate = out.block_total == 1;
  return out;
}

bool ConstructionEngine::decode(std::span<const mpz_class> core,
                                std::vector<uint64_t>& ranks) const {
  const std::size_t V = core.size();
  if (V == 0) return false;
  mpz_class prod = 1;
  for (const mpz_class& v : core) {
    if (v <= 1) return false;
    prod *= v;
  }
  if (prod != target_product()) return false;
  ranks.assign(segments_, 0);
  std::vector<char> used(V, 0);
  std::vector<int> value_label(V);
  std::vector<uint8_t> rgs(k_);
  for (unsigned j = 0; j < segments_; ++j) {
    std::fill(value_label.begin(), value_label.end(), -1);
    int next_label = 0;
    for (unsigned s = 0; s < k_; ++s) {
      unsigned long q = primorials_.primes[static_cast<std::size_t>(j) * k_ + s];
      int found = -1;
      for (std::size_t v = 0; v < V; ++v) {
        if (mpz_divisible_ui_p(core[v].get_mpz_t(), q)) {
          if (found >= 0) return false;  // a prime owned by two core values
          found = static_cast<int>(v);
        }
      }
      if (found < 0) return false;
      if (value_label[found] < 0) {
        if (used[found]) return false;  // value straddles two segments
        used[found] = 1;
        value_label[found] = next_label++;
      }
      rgs[s] = static_cast<uint8_t>(value_label[found]);
    }
    ranks[j] = space_.rank(rgs);
  }
  for (char u : used)
    if (!u) return false;  // core value not produced by any segment
  return true;
}

void construct_solutions(
    unsigned k, const std::function<bool(const ConstructionOutput&)>& emit) {
  ConstructionEngine eng(k);
  const unsigned L = eng.segments();
  const uint64_t bell = eng.bell().get_ui();
  std::vector<uint64_t> digits(L, 0);
  for (;;) {
    if (!emit(eng.build(digits))) return;
    unsigned j = L;
    for (;;) {
      if (j-- == 0) return;
      if (++digits[j] < bell) break;
      digits[j] = 0;
      if (j == 0) return;
    }
  }
}

// ---------- verification ----------

namespace {

using u128 = unsigned __int128;

u128 to_u128(const mpz_class& v) {
  mpz_class hi = v >> 64;
  mpz_class lo = v - (hi << 64);
  return (static_cast<u128>(hi.get_ui()) << 64) | lo.get_ui();
}

template <class Int>
Int from_mpz(const mpz_class& v) {
  if constexpr (std::is_same_v<Int, mpz_class>)
    return v;
  else
    return to_u128(v);
}

bool value_divisible(u128 v, uint64_t q) {
  if (static_cast<uint64_t>(v >> 64) == 0)
    return static_cast<uint64_t>(v) % q == 0;
  return v % q == 0;
}

bool value_divisible(const mpz_class& v, uint64_t q) {
  return mpz_divisible_ui_p(v.get_mpz_t(), static_cast<unsigned long>(q)) != 0;
}

struct FailureRecord {
  std::vector<uint64_t> digits;
  const char* kind;
};

struct LocalCounters {
  uint64_t checked = 0;
  uint64_t degenerate = 0;
  uint64_t eq = 0;
  uint64_t window = 0;
  uint64_t roundtrip = 0;
  std::vector<FailureRecord> examples;

  void record(const char* kind, std::span<const uint64_t> digits,
              uint64_t& counter) {
    ++counter;
    if (examples.size() < 8)
      examples.push_back({{digits.begin(), digits.end()}, kind});
  }
  void absorb(LocalCounters&& other) {
    checked += other.checked;
    degenerate += other.degenerate;
    eq += other.eq;
    window += other.window;
    roundtrip += other.roundtrip;
    for (auto& e : other.examples)
      if (examples.size() < 64) examples.push_back(std::move(e));
  }
};

template <class Int>
struct CheckContext {
  unsigned k = 0;
  unsigned L = 0;
  uint64_t bell = 0;
  const std::vector<uint64_t>* primes = nullptr;
  Int P{};
  Int LM{};
  std::vector<std::vector<Int>> values;   // [partition * L + segment]
  std::vector<uint32_t> blocks;           // per partition
  std::vector<std::vector<uint8_t>> rgs;  // per partition
};

template <class Int>
CheckContext<Int> build_context(const ConstructionEngine& eng) {
  CheckContext<Int> ctx;
  ctx.k = eng.k();
  ctx.L = eng.segments();
  ctx.bell = eng.bell().get_ui();
  ctx.primes = &eng.primorials().primes;
  ctx.P = from_mpz<Int>(eng.target_product());
  ctx.LM = from_mpz<Int>(mpz_class(eng.m_k() * eng.segments()));
  ctx.values.reserve(ctx.bell * ctx.L);
  ctx.blocks.reserve(ctx.bell);
  ctx.rgs.reserve(ctx.bell);
  enumerate_set_partitions(ctx.k, [&](const std::vector<uint8_t>& rgs) {
    SetPartition part{ctx.k, rgs};
    auto blocks = part.blocks();
    ctx.blocks.push_back(static_cast<uint32_t>(blocks.size()));
    ctx.rgs.push_back(rgs);
    for (unsigned j = 0; j < ctx.L; ++j) {
      std::vector<Int> vals;
      vals.reserve(blocks.size());
      for (const auto& block : blocks) {
        Int x{1u};
        for (unsigned s : block)
          x *= static_cast<unsigned long>(
              (*ctx.primes)[static_cast<std::size_t>(j) * ctx.k + s - 1]);
        vals.push_back(std::move(x));
      }
      ctx.values.push_back(std::move(vals));
    }
  });
  return ctx;
}

struct Scratch {
  std::vector<int> label;
  std::vector<uint8_t> rgs;
};

template <class Int>
void check_tuple(const CheckContext<Int>& ctx, std::span<const uint64_t> digits,
                 LocalCounters& c, Scratch& scr) {
  ++c.checked;
  uint32_t btotal = 0;
  for (unsigned j = 0; j < ctx.L; ++j) btotal += ctx.blocks[digits[j]];
  if (btotal == 1) {
    ++c.degenerate;
    return;
  }
  Int sum{0u};
  Int prod{1u};
  for (unsigned j = 0; j < ctx.L; ++j) {
    for (const Int& v : ctx.values[digits[j] * ctx.L + j]) {
      sum += v;
      prod *= v;
    }
  }
  // with the n - btotal trailing ones appended, total sum = P iff the core
  // primes partition the target product
  if (!(prod == ctx.P)) c.record("sum-product", digits, c.eq);
  Int diff = sum - Int{btotal};  // P - n
  if (!(diff < ctx.LM) || !(diff + Int{2u} <= ctx.P))
    c.record("window", digits, c.window);
  bool rt_ok = true;
  for (unsigned j = 0; j < ctx.L && rt_ok; ++j) {
    const auto& vals = ctx.values[digits[j] * ctx.L + j];
    scr.label.assign(vals.size(), -1);
    scr.rgs.resize(ctx.k);
    int next_label = 0;
    for (unsigned s = 0; s < ctx.k; ++s) {
      uint64_t q = (*ctx.primes)[static_cast<std::size_t>(j) * ctx.k + s];
      int found = -1;
      for (std::size_t v = 0; v < vals.size(); ++v) {
        if (value_divisible(vals[v], q)) {
          if (found >= 0) {
            rt_ok = false;
            break;
          }
          found = static_cast<int>(v);
        }
      }
      if (found < 0) {
        rt_ok = false;
        break;
      }
      if (scr.label[found] < 0) scr.label[found] = next_label++;
      scr.rgs[s] = static_cast<uint8_t>(scr.label[found]);
    }
    if (rt_ok && (next_label != static_cast<int>(vals.size()) ||
                  !std::equal(scr.rgs.begin(), scr.rgs.end(),
                              ctx.rgs[digits[j]].begin())))
      rt_ok = false;
  }
  if (!rt_ok) c.record("roundtrip", digits, c.roundtrip);
}

template <class Int>
void run_full(const CheckContext<Int>& ctx, uint64_t count, int jobs,
              LocalCounters& total) {
  uint64_t chunks =
      std::min<uint64_t>(count, static_cast<uint64_t>(std::max(1, jobs)) * 8);
  if (chunks == 0) return;
  uint64_t per = (count + chunks - 1) / chunks;
  std::mutex m;
  parallel_for_index(static_cast<std::size_t>(chunks), jobs, [&](std::size_t ci) {
    uint64_t lo = ci * per;
    uint64_t hi = std::min(count, lo + per);
    if (lo >= hi) return;
    LocalCounters local;
    Scratch scr;
    std::vector<uint64_t> digits(ctx.L, 0);
    uint64_t idx = lo;
    for (unsigned j = ctx.L; j-- > 0;) {
      digits[j] = idx % ctx.bell;
      idx /= ctx.bell;
    }
    for (uint64_t t = lo; t < hi; ++t) {
      check_tuple(ctx, digits, local, scr);
      for (unsigned j = ctx.L; j-- > 0;) {
        if (++digits[j] < ctx.bell) break;
        digits[j] = 0;
      }
    }
    std::lock_guard<std::mutex> lock(m);
    total.absorb(std::move(local));
  });
}

template <class Int>
void run_sample(const CheckContext<Int>& ctx,
                const std::vector<uint64_t>& all_digits, int jobs,
                LocalCounters& total) {
  uint64_t draws = all_digits.size() / ctx.L;
  uint64_t chunks =
      std::min<uint64_t>(draws, static_cast<uint64_t>(std::max(1, jobs)) * 8);
  if (chunks == 0) return;
  uint64_t per = (draws + chunks - 1) / chunks;
  std::mutex m;
  parallel_for_index(static_cast<std::size_t>(chunks), jobs, [&](std::size_t ci) {
    uint64_t lo = ci * per;
    uint64_t hi = std::min(draws, lo + per);
    if (lo >= hi) return;
    LocalCounters local;
    Scratch scr;
    for (uint64_t t = lo; t < hi; ++t) {
      std::span<const uint64_t> digits(all_digits.data() + t * ctx.L, ctx.L);
      check_tuple(ctx, digits, local, scr);
    }
    std::lock_guard<std::mutex> lock(m);
    total.absorb(std::move(local));
  });
}

// Slow path for Bell numbers too large to materialize: unrank per tuple.
void check_tuple_streaming(const ConstructionEngine& eng,
                           std::span<const uint64_t> digits,
                           LocalCounters& c) {
  ++c.checked;
  ConstructionOutput out = eng.build(digits);
  if (out.degenerate) {
    ++c.degenerate;
    return;
  }
  mpz_class prod = 1;
  for (const mpz_class& v : out.core) prod *= v;
  if (prod != eng.target_product()) c.record("sum-product", digits, c.eq);
  mpz_class low = eng.target_product() - eng.m_k() * eng.segments();
  if (!(low < out.n && out.n <= eng.target_product()))
    c.record("window", digits, c.window);
  std::vector<uint64_t> ranks;
  if (!eng.decode(out.core, ranks) ||
      !std::equal(ranks.begin(), ranks.end(), digits.begin(), digits.end()))
    c.record("roundtrip", digits, c.roundtrip);
}

uint64_t draw_below(std::mt19937_64& rng, uint64_t bound) {
  if (bound <= 1) return 0;
  uint64_t mask = ~uint64_t{0} >> std::countl_zero(bound - 1);
  for (;;) {
    uint64_t v = rng() & mask;
    if (v < bound) return v;
  }
}

}  // namespace

VerifyConstructionReport verify_construction(unsigned k,
                                             std::optional<uint64_t> sample_size,
                                             int jobs, uint64_t seed) {
  ConstructionEngine eng(k);
  VerifyConstructionReport rep;
  rep.k = k;
  rep.segments = eng.segments();
  rep.bell_k = eng.bell();
  rep.tuple_space = eng.tuple_space();
  rep.m_k = eng.m_k();
  rep.product = eng.target_product();

  uint64_t bell = eng.bell().get_ui();
  rep.sampled = sample_size.has_value() &&
                eng.tuple_space() > static_cast<unsigned long>(*sample_size);
  rep.seed = rep.sampled ? seed : 0;

  constexpr uint64_t kMaterializeCap = 200000;
  bool materialize = bell <= kMaterializeCap;
  mpz_class lm = eng.m_k() * eng.segments();
  bool narrow =
      mpz_sizeinbase(eng.target_product().get_mpz_t(), 2) <= 120 &&
      mpz_sizeinbase(lm.get_mpz_t(), 2) <= 120;

  LocalCounters total;
  if (rep.sampled) {
    uint64_t draws = *sample_size;
    std::vector<uint64_t> digits(draws * eng.segments());
    std::mt19937_64 rng(seed);
    for (uint64_t& d : digits) d = draw_below(rng, bell);
    if (materialize && narrow) {
      run_sample(build_context<u128>(eng), digits, jobs, total);
    } else if (materialize) {
      run_sample(build_context<mpz_class>(eng), digits, jobs, total);
    } else {
      uint64_t chunks = std::min<uint64_t>(
          draws, static_cast<uint64_t>(std::max(1, jobs)) * 8);
      uint64_t per = chunks ? (draws + chunks - 1) / chunks : 0;
      std::mutex m;
      parallel_for_index(
          static_cast<std::size_t>(chunks), jobs, [&](std::size_t ci) {
            uint64_t lo = ci * per;
            uint64_t hi = std::min(draws, lo + per);
            LocalCounters local;
            for (uint64_t t = lo; t < hi; ++t)
              check_tuple_streaming(
                  eng,
                  std::span(digits.data() + t * eng.segments(), eng.segments()),
                  local);
            std::lock_guard<std::mutex> lock(m);
            total.absorb(std::move(local));
          });
    }
  } else {
    if (!eng.tuple_space().fits_ulong_p())
      throw CapacityError(
          "full verification is infeasible at this k; pass a sample size");
    uint64_t count = eng.tuple_space().get_ui();
    if (materialize && narrow) {
      run_full(build_context<u128>(eng), count, jobs, total);
    } else if (materialize) {
      run_full(build_context<mpz_class>(eng), count, jobs, total);
    } else {
      // bell > cap with a full request: honor it, slowly
      uint64_t chunks = std::min<uint64_t>(
          count, static_cast<uint64_t>(std::max(1, jobs)) * 8);
      uint64_t per = chunks ? (count + chunks - 1) / chunks : 0;
      std::mutex m;
      parallel_for_index(
          static_cast<std::size_t>(chunks), jobs, [&](std::size_t ci) {
            uint64_t lo = ci * per;
            uint64_t hi = std::min(count, lo + per);
            LocalCounters local;
            std::vector<uint64_t> digits(eng.segments(), 0);
            uint64_t idx = lo;
            for (unsigned j = eng.segments(); j-- > 0;) {
              digits[j] = idx % bell;
              idx /= bell;
            }
            for (uint64_t t = lo; t < hi; ++t) {
              check_tuple_streaming(eng, digits, local);
              for (unsigned j = eng.segments(); j-- > 0;) {
                if (++digits[j] < bell) break;
                digits[j] = 0;
              }
            }
            std::lock_guard<std::mutex> lock(m);
            total.absorb(std::move(local));
          });
    }
  }

  rep.checked = total.checked;
  rep.degenerate = total.degenerate;
  rep.eq_failures = total.eq;
  rep.window_failures = total.window;
  rep.roundtrip_failures = total.roundtrip;
  std::sort(total.examples.begin(), total.examples.end(),
            [](const FailureRecord& a, const FailureRecord& b) {
              if (a.digits != b.digits) return a.digits < b.digits;
              return std::strcmp(a.kind, b.kind) < 0;
            });
  for (const auto& e : total.examples) {
    if (rep.failure_examples.size() >= 8) break;
    std::string s = "tuple (";
    for (std::size_t i = 0; i < e.digits.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(e.digits[i] + 1);
    }
    s += "): ";
    s += e.kind;
    rep.failure_examples.push_back(std::move(s));
  }
  return rep;
}

}  // namespace espp
