#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "espp/asymptotics.hpp"
#include "espp/checkpoint.hpp"
#include "espp/construction.hpp"
#include "espp/errors.hpp"
#include "espp/factor_enum.hpp"
#include "espp/sumprod.hpp"
#include "espp/table_io.hpp"
#include "espp/version.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace espp;

struct CommonOpts {
  int jobs = 1;
  std::string format = "csv";
  std::string out;
};

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("-j,--jobs", c.jobs, "worker threads")
      ->envname("ESPP_JOBS")
      ->check(CLI::PositiveNumber);
  sub->add_option("--format", c.format, "output format: csv, json, or table");
  sub->add_option("-o,--out", c.out, "write to this file instead of stdout");
}

// Output sink: stdout by default, a file with --out.
struct Sink {
  std::ofstream file;
  std::ostream* s = &std::cout;

  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file.open(path, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open " + path);
      s = &file;
    }
  }
  std::ostream& out() { return *s; }
};

CountTable load_or_sieve(uint64_t x, const std::string& table_path, int jobs) {
  if (table_path.empty()) {
    SieveOptions opts;
    opts.jobs = jobs;
    return sieve_N(x, opts);
  }
  std::ifstream in(table_path);
  if (!in) throw std::runtime_error("cannot open " + table_path);
  CountTable t = read_count_table_csv(in);
  if (!t.covers(x))
    throw std::invalid_argument("table in " + table_path +
                                " does not cover x");
  return t;
}

void print_kv(std::ostream& os, TableFormat fmt, const json& j) {
  switch (fmt) {
    case TableFormat::Json:
      os << j.dump() << "\n";
      return;
    case TableFormat::Csv: {
      os << "field,value\n";
      for (auto it = j.begin(); it != j.end(); ++it) {
        os << it.key() << ",";
        if (it->is_string())
          os << it->get<std::string>();
        else
          os << it->dump();
        os << "\n";
      }
      return;
    }
    case TableFormat::Table: {
      std::size_t w = 0;
      for (auto it = j.begin(); it != j.end(); ++it)
        w = std::max(w, it.key().size());
      for (auto it = j.begin(); it != j.end(); ++it) {
        os << it.key() << std::string(w - it.key().size() + 2, ' ');
        if (it->is_string())
          os << it->get<std::string>();
        else
          os << it->dump();
        os << "\n";
      }
      return;
    }
  }
}

int run_count_n(uint64_t n, bool list, const CommonOpts& c) {
  TableFormat fmt = parse_table_format(c.format);
  Sink sink(c.out);
  std::ostream& os = sink.out();
  uint64_t N = count_N(n);
  std::vector<SolutionTuple> sols;
  if (list) sols = solutions_of(n);
  switch (fmt) {
    case TableFormat::Csv: {
      os << "n,N\n" << n << "," << N << "\n";
      if (list) {
        os << "idx,core,ones\n";
        for (std::size_t i = 0; i < sols.size(); ++i) {
          os << i + 1 << ",";
          for (std::size_t f = 0; f < sols[i].core.factors.size(); ++f)
            os << (f ? " " : "") << sols[i].core.factors[f];
          os << "," << sols[i].ones << "\n";
        }
      }
      break;
    }
    case TableFormat::Json: {
      json j{{"n", n}, {"N", N}};
      if (list) {
        json arr = json::array();
        for (const auto& s : sols)
          arr.push_back(json{{"core", s.core.factors}, {"ones", s.ones}});
        j["solutions"] = arr;
      }
      os << j.dump() << "\n";
      break;
    }
    case TableFormat::Table: {
      os << "N(" << n << ") = " << N << "\n";
      for (const auto& s : sols) {
        os << "  (";
        for (std::size_t f = 0; f < s.core.factors.size(); ++f)
          os << (f ? ", " : "") << s.core.factors[f];
        os << ") + " << s.ones << " ones\n";
      }
      break;
    }
  }
  return 0;
}

int run_sieve(uint64_t x, const CommonOpts& c, const std::string& checkpoint,
              int debug_waves, std::size_t shards_per_job) {
  TableFormat fmt = parse_table_format(c.format);
  CheckpointedSieveOptions opts;
  opts.jobs = c.jobs;
  opts.shards_per_job = static_cast<int>(shards_per_job);
  opts.checkpoint_path = checkpoint;
  opts.debug_stop_after_waves = debug_waves;
  SieveRun run = sieve_N_resumable(x, opts);
  if (!run.complete) {
    std::cerr << "stopped after " << run.waves_executed
              << " wave(s); checkpoint saved, rerun to resume\n";
    return 0;
  }
  Sink sink(c.out);
  write_count_table(sink.out(), run.table, fmt);
  return 0;
}

int run_exceptional(uint64_t x, const CommonOpts& c) {
  TableFormat fmt = parse_table_format(c.format);
  SieveOptions opts;
  opts.jobs = c.jobs;
  auto exc = exceptional_scan(x, opts);
  Sink sink(c.out);
  std::ostream& os = sink.out();
  switch (fmt) {
    case TableFormat::Csv: {
      for (std::size_t i = 0; i < exc.size(); ++i)
        os << (i ? "," : "") << exc[i];
      os << "\n";
      break;
    }
    case TableFormat::Json:
      os << json{{"x", x}, {"exceptional", exc}}.dump() << "\n";
      break;
    case TableFormat::Table: {
      os << exc.size() << " value(s) with a unique solution up to " << x
         << ":\n";
      for (uint64_t n : exc) os << "  " << n << "\n";
      break;
    }
  }
  return 0;
}

int run_factorizations(uint64_t n, bool count_only, const CommonOpts& c) {
  TableFormat fmt = parse_table_format(c.format);
  Sink sink(c.out);
  std::ostream& os = sink.out();
  if (count_only) {
    uint64_t a = count_a(n);
    print_kv(os, fmt, json{{"n", n}, {"a", a}});
    return 0;
  }
  if (n > 1000000)
    throw CapacityError("factorization listing is offered for n <= 1000000");
  std::vector<std::vector<uint64_t>> rows;
  EnumerationSpec spec;
  spec.product_bound = n;
  enumerate_factorizations(spec, [&](const FactorView& v) {
    if (v.product == n)
      rows.emplace_back(v.factors.begin(), v.factors.end());
  });
  switch (fmt) {
    case TableFormat::Csv: {
      os << "factors\n";
      for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? " " : "") << r[i];
        os << "\n";
      }
      break;
    }
    case TableFormat::Json:
      os << json{{"n", n}, {"a", rows.size()}, {"factorizations", rows}}.dump()
         << "\n";
      break;
    case TableFormat::Table: {
      os << "a(" << n << ") = " << rows.size() << "\n";
      for (const auto& r : rows) {
        os << "  ";
        for (std::size_t i = 0; i < r.size(); ++i)
          os << (i ? " * " : "") << r[i];
        os << "\n";
      }
      break;
    }
  }
  return 0;
}

int run_fx(double x, const CommonOpts& c) {
  TableFormat fmt = parse_table_format(c.format);
  Sink sink(c.out);
  uint64_t f = f_count(x, c.jobs);
  print_kv(sink.out(), fmt, json{{"x", format_real(x)}, {"f", f}});
  return 0;
}

int run_bounds(uint64_t x, const std::string& g_text,
               const std::string& table_path, const CommonOpts& c) {
  TableFormat fmt = parse_table_format(c.format);
  GChoice g = GChoice::parse(g_text);
  CountTable table = load_or_sieve(x, table_path, c.jobs);
  BoundReport r = sandwich_check(x, g, table, c.jobs);
  Sink sink(c.out);
  json j{{"x", r.x},
         {"g", r.g_name},
         {"lower", r.lower},
         {"middle", r.middle},
         {"upper", r.upper},
         {"lower_ok", r.lower_ok},
         {"upper_ok", r.upper_ok},
         {"f_x", r.f_x},
         {"upper_arg1", r.upper_arg1},
         {"f_upper1", r.f_upper1},
         {"upper_arg2", r.upper_arg2},
         {"f_upper2", r.f_upper2}};
  print_kv(sink.out(), fmt, j);
  return r.ok() ? 0 : 3;
}

int run_ratio(uint64_t x, const std::string& table_path, const CommonOpts& c) {
  TableFormat fmt = parse_table_format(c.format);
  CountTable table = load_or_sieve(x, table_path, c.jobs);
  double est = main_term_estimate(static_cast<double>(x));
  uint64_t sum = table.total(x);
  double ratio = main_term_ratio(x, table);
  Sink sink(c.out);
  print_kv(sink.out(), fmt,
           json{{"x", x},
                {"sum", sum},
                {"estimate", format_real(est)},
                {"ratio", format_real(ratio)}});
  return 0;
}

int run_almost_all(uint64_t x, double epsilon, const std::string& table_path,
                   const CommonOpts& c) {
  TableFormat fmt = parse_table_format(c.format);
  CountTable table = load_or_sieve(x, table_path, c.jobs);
  AlmostAllReport r = almost_all_report(x, epsilon, table);
  Sink sink(c.out);
  print_kv(sink.out(), fmt,
           json{{"x", r.x},
                {"epsilon", format_real(r.epsilon)},
                {"total", r.total},
                {"lower_violations", r.lower_violations},
                {"upper_violations", r.upper_violations},
                {"lower_fraction", format_real(r.lower_fraction)},
                {"upper_fraction", format_real(r.upper_fraction)}});
  return 0;
}

int run_exponent(uint64_t x, const CommonOpts& c) {
  TableFormat fmt = parse_table_format(c.format);
  auto a = sieve_a(x, c.jobs);
  ExponentReport r = exponent_report(x, a);
  Sink sink(c.out);
  print_kv(sink.out(), fmt,
           json{{"x", r.x},
                {"considered", r.considered},
                {"max_exponent", format_real(r.max_exponent)},
                {"argmax", r.argmax}});
  return 0;
}

int run_construct(unsigned k, uint64_t limit, const CommonOpts& c) {
  TableFormat fmt = parse_table_format(c.format);
  Sink sink(c.out);
  std::ostream& os = sink.out();
  uint64_t emitted = 0;
  uint64_t degenerate = 0;
  json rows = json::array();
  bool header_done = false;
  construct_solutions(k, [&](const ConstructionOutput& o) {
    if (o.degenerate) {
      ++degenerate;
      return true;
    }
    switch (fmt) {
      case TableFormat::Csv: {
        if (!header_done) {
          os << "index,blocks,core,n\n";
          header_done = true;
        }
        for (std::size_t i = 0; i < o.index_tuple.size(); ++i)
          os << (i ? " " : "") << o.index_tuple[i];
        os << "," << o.block_total << ",";
        for (std::size_t i = 0; i < o.core.size(); ++i)
          os << (i ? " " : "") << o.core[i].get_str();
        os << "," << o.n.get_str() << "\n";
        break;
      }
      case TableFormat::Json: {
        json core = json::array();
        for (const auto& v : o.core) core.push_back(v.get_str());
        rows.push_back(json{{"index", o.index_tuple},
                            {"blocks", o.block_total},
                            {"core", core},
                            {"n", o.n.get_str()}});
        break;
      }
      case TableFormat::Table: {
        os << "(";
        for (std::size_t i = 0; i < o.index_tuple.size(); ++i)
          os << (i ? "," : "") << o.index_tuple[i];
        os << ") n=" << o.n.get_str() << " core=";
        for (std::size_t i = 0; i < o.core.size(); ++i)
          os << (i ? " " : "") << o.core[i].get_str();
        os << "\n";
        break;
      }
    }
    ++emitted;
    return limit == 0 || emitted < limit;
  });
  if (fmt == TableFormat::Json) {
    os << json{{"k", k},
               {"emitted", emitted},
               {"degenerate_skipped", degenerate},
               {"rows", rows}}
              .dump()
       << "\n";
  } else if (degenerate > 0) {
    std::cerr << "skipped " << degenerate << " degenerate tuple(s)\n";
  }
  return 0;
}

int run_verify_construct(unsigned k, uint64_t sample, bool full, uint64_t seed,
                         const CommonOpts& c) {
  TableFormat fmt = parse_table_format(c.format);
  std::optional<uint64_t> sample_opt;
  if (!full) sample_opt = sample;
  VerifyConstructionReport r =
      verify_construction(k, sample_opt, c.jobs, seed);
  Sink sink(c.out);
  json j{{"k", r.k},
         {"segments", r.segments},
         {"bell", r.bell_k.get_str()},
         {"tuple_space", r.tuple_space.get_str()},
         {"m_k", r.m_k.get_str()},
         {"product", r.product.get_str()},
         {"sampled", r.sampled},
         {"seed", r.seed},
         {"checked", r.checked},
         {"degenerate", r.degenerate},
         {"eq_failures", r.eq_failures},
         {"window_failures", r.window_failures},
         {"roundtrip_failures", r.roundtrip_failures},
         {"ok", r.ok()}};
  if (!r.failure_examples.empty()) j["failure_examples"] = r.failure_examples;
  print_kv(sink.out(), fmt, j);
  return r.ok() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equal-sum-product counting and verification engine"};
  app.set_version_flag("--version", std::string(kEngineVersion));
  app.require_subcommand(1);

  // count-n
  uint64_t cn_n = 0;
  bool cn_list = false;
  CommonOpts cn_c;
  auto* cn = app.add_subcommand("count-n", "N(n) for one n");
  cn->add_option("n", cn_n, "tuple length")->required();
  cn->add_flag("--list", cn_list, "list the solutions too (n <= 10^6)");
  add_common(cn, cn_c);

  // sieve
  uint64_t sv_x = 0;
  CommonOpts sv_c;
  std::string sv_checkpoint;
  int sv_debug_waves = -1;
  std::size_t sv_spj = 8;
  auto* sv = app.add_subcommand("sieve", "N(n) for all 2 <= n <= X");
  sv->add_option("-x,--max", sv_x, "upper bound X")->required();
  sv->add_option("--checkpoint", sv_checkpoint,
                 "checkpoint file; resumes when present");
  sv->add_option("--debug-stop-after-waves", sv_debug_waves)
      ->group("");  // hidden: test hook for interrupted runs
  sv->add_option("--shards-per-job", sv_spj)->group("");
  add_common(sv, sv_c);

  // exceptional
  uint64_t ex_x = 0;
  CommonOpts ex_c;
  auto* ex = app.add_subcommand("exceptional", "all n <= X with N(n) = 1");
  ex->add_option("-x,--max", ex_x, "upper bound X")->required();
  add_common(ex, ex_c);

  // factorizations
  uint64_t fa_n = 0;
  bool fa_count = false;
  CommonOpts fa_c;
  auto* fa = app.add_subcommand("factorizations",
                                "unordered factorizations of n");
  fa->add_option("n", fa_n, "target product")->required();
  fa->add_flag("--count", fa_count, "print a(n) only");
  add_common(fa, fa_c);

  // fx
  double fx_x = 0.0;
  CommonOpts fx_c;
  auto* fx = app.add_subcommand("fx", "f(x): factorizations with product <= x");
  fx->add_option("x", fx_x, "real bound, floored")->required();
  add_common(fx, fx_c);

  // bounds
  uint64_t bd_x = 0;
  std::string bd_g = "default";
  std::string bd_table;
  CommonOpts bd_c;
  auto* bd = app.add_subcommand(
      "bounds", "exact sandwich bounds on the solution-count sum");
  bd->add_option("-x,--max", bd_x, "evaluation point")->required();
  bd->add_option("--g", bd_g, "weight: default, sqrt, or a positive constant");
  bd->add_option("--table", bd_table, "reuse a sieved CSV table");
  add_common(bd, bd_c);

  // ratio
  uint64_t rt_x = 0;
  std::string rt_table;
  CommonOpts rt_c;
  auto* rt = app.add_subcommand("ratio",
                                "solution-count sum over the main-term estimate");
  rt->add_option("-x,--max", rt_x, "evaluation point")->required();
  rt->add_option("--table", rt_table, "reuse a sieved CSV table");
  add_common(rt, rt_c);

  // report-almost-all
  uint64_t aa_x = 0;
  double aa_eps = 0.1;
  std::string aa_table;
  CommonOpts aa_c;
  auto* aa = app.add_subcommand(
      "report-almost-all",
      "frequency of n violating the typical-size bounds for N(n)");
  aa->add_option("-x,--max", aa_x, "upper bound X")->required();
  aa->add_option("--epsilon", aa_eps, "margin in (0, log 2)");
  aa->add_option("--table", aa_table, "reuse a sieved CSV table");
  add_common(aa, aa_c);

  // report-exponent
  uint64_t ce_x = 0;
  CommonOpts ce_c;
  auto* ce = app.add_subcommand(
      "report-exponent", "max normalized exponent of the factorization counts");
  ce->add_option("-x,--max", ce_x, "upper bound X")->required();
  add_common(ce, ce_c);

  // construct
  unsigned co_k = 0;
  uint64_t co_limit = 0;
  CommonOpts co_c;
  auto* co = app.add_subcommand("construct",
                                "primorial-window solution family for a given k");
  co->add_option("-k", co_k, "base parameter (k >= 3)")->required();
  co->add_option("--limit", co_limit, "stop after this many rows (0 = all)");
  add_common(co, co_c);

  // verify-construct
  unsigned vc_k = 0;
  uint64_t vc_sample = 100000;
  bool vc_full = false;
  uint64_t vc_seed = kDefaultSampleSeed;
  CommonOpts vc_c;
  auto* vc = app.add_subcommand("verify-construct",
                                "check the constructed family exactly");
  vc->add_option("-k", vc_k, "base parameter (k >= 3)")->required();
  vc->add_option("--sample", vc_sample,
                 "tuples to sample when the space is larger than this");
  vc->add_flag("--full", vc_full, "verify every tuple");
  vc->add_option("--seed", vc_seed, "sampling seed");
  add_common(vc, vc_c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cn->parsed()) return run_count_n(cn_n, cn_list, cn_c);
    if (sv->parsed())
      return run_sieve(sv_x, sv_c, sv_checkpoint, sv_debug_waves, sv_spj);
    if (ex->parsed()) return run_exceptional(ex_x, ex_c);
    if (fa->parsed()) return run_factorizations(fa_n, fa_count, fa_c);
    if (fx->parsed()) return run_fx(fx_x, fx_c);
    if (bd->parsed()) return run_bounds(bd_x, bd_g, bd_table, bd_c);
    if (rt->parsed()) return run_ratio(rt_x, rt_table, rt_c);
    if (aa->parsed()) return run_almost_all(aa_x, aa_eps, aa_table, aa_c);
    if (ce->parsed()) return run_exponent(ce_x, ce_c);
    if (co->parsed()) return run_construct(co_k, co_limit, co_c);
    if (vc->parsed())
      return run_verify_construct(vc_k, vc_sample, vc_full, vc_seed, vc_c);
  } catch (const espp::CapacityError& e) {
    std::cerr << "capacity: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
