#include <doctest.h>
#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "espp/checkpoint.hpp"
#include "espp/table_io.hpp"
#include "espp/version.hpp"

using namespace espp;

namespace {

struct CliResult {
  int exit_code;
  std::string out;
};

// Runs the installed CLI binary through the shell; stderr is dropped so the
// frozen stdout comparisons stay exact.
CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(ESPP_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  int status = pclose(pipe);
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), out};
}

std::filesystem::path fresh_temp_dir(const char* tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("espp_test_" + std::string(tag) + "_" + std::to_string(getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string render(const CountTable& table, TableFormat fmt) {
  std::ostringstream os;
  write_count_table(os, table, fmt);
  return os.str();
}

}  // namespace

TEST_CASE("format names parse both ways") {
  CHECK(parse_table_format("csv") == TableFormat::Csv);
  CHECK(parse_table_format("JSON") == TableFormat::Json);
  CHECK(parse_table_format("Table") == TableFormat::Table);
  CHECK(table_format_name(TableFormat::Csv) == "csv");
  CHECK(table_format_name(TableFormat::Json) == "json");
  CHECK(table_format_name(TableFormat::Table) == "table");
  CHECK_THROWS_AS(parse_table_format("xml"), std::invalid_argument);
}

TEST_CASE("reals render with twelve significant digits, shortest form") {
  CHECK(format_real(2.0) == "2");
  CHECK(format_real(0.5) == "0.5");
  CHECK(format_real(0.6052427851430574) == "0.605242785143");
  CHECK(format_real(12699.03613668571976) == "12699.0361367");
  CHECK(format_real(66618899.81925611) == "66618899.8193");
}

TEST_CASE("count tables round-trip through CSV") {
  auto table = sieve_N(50);
  std::string csv = render(table, TableFormat::Csv);
  CHECK(csv.substr(0, 4) == "n,N\n");
  std::istringstream in(csv);
  CountTable back = read_count_table_csv(in);
  CHECK(back == table);
  // header is optional
  std::istringstream bare("2,1\n3,1\n4,1\n5,3\n");
  CountTable small = read_count_table_csv(bare);
  CHECK(small.max_n == 5);
  CHECK(small[5] == 3);
  CHECK(small[4] == 1);
}

TEST_CASE("CSV reader rejects junk") {
  std::istringstream bad("n,N\n5\n");
  CHECK_THROWS_AS(read_count_table_csv(bad), std::runtime_error);
  std::istringstream bad2("2,x\n");
  CHECK_THROWS_AS(read_count_table_csv(bad2), std::runtime_error);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_count_table_csv(empty), std::runtime_error);
}

TEST_CASE("JSON table form carries the engine tag and all rows") {
  auto table = sieve_N(50);
  std::string text = render(table, TableFormat::Json);
  auto j = nlohmann::json::parse(text);
  CHECK(j["engine"] == "espp/0.1.0");
  CHECK(j["max_n"] == 50);
  REQUIRE(j["counts"].size() == 49);
  CHECK(j["counts"][0][0] == 2);
  CHECK(j["counts"][0][1] == 1);
  CHECK(j["counts"][3][0] == 5);
  CHECK(j["counts"][3][1] == 3);
}

TEST_CASE("checkpoint payloads round-trip and tampering is caught") {
  auto dir = fresh_temp_dir("ckpt");
  auto path = (dir / "run.ckpt").string();
  auto table = sieve_N(200);

  CheckpointMeta meta;
  meta.engine = std::string(kEngineVersion);
  meta.x = 200;
  meta.shard_count = 8;
  meta.completed_shards = 8;
  meta.fingerprint = fingerprint_counts(table);
  save_checkpoint(path, meta, table);

  CheckpointMeta got;
  CountTable loaded;
  REQUIRE(load_checkpoint(path, got, loaded));
  CHECK(loaded == table);
  CHECK(got.x == 200);
  CHECK(got.shard_count == 8);
  CHECK(got.completed_shards == 8);
  CHECK(got.fingerprint == meta.fingerprint);

  CHECK_FALSE(load_checkpoint((dir / "absent.ckpt").string(), got, loaded));

  // flip one payload byte: the fingerprint must catch it
  {
    std::fstream f(path + ".data",
                   std::ios::in | std::ios::out | std::ios::binary);
    REQUIRE(f.good());
    f.seekp(12);
    char byte = 0x5a;
    f.write(&byte, 1);
  }
  CHECK_THROWS_AS(load_checkpoint(path, got, loaded), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("resumable sieve equals the uninterrupted run") {
  auto dir = fresh_temp_dir("resume");
  auto path = (dir / "sieve.ckpt").string();

  CheckpointedSieveOptions direct;
  direct.jobs = 2;
  SieveRun whole = sieve_N_resumable(3000, direct);
  REQUIRE(whole.complete);
  CHECK(whole.table == sieve_N(3000));

  CheckpointedSieveOptions stopped = direct;
  stopped.checkpoint_path = path;
  stopped.debug_stop_after_waves = 1;
  SieveRun partial = sieve_N_resumable(3000, stopped);
  CHECK_FALSE(partial.complete);
  CHECK(partial.waves_executed == 1);

  // resume under a different job count; the recorded plan wins
  CheckpointedSieveOptions resume;
  resume.jobs = 5;
  resume.checkpoint_path = path;
  SieveRun finished = sieve_N_resumable(3000, resume);
  REQUIRE(finished.complete);
  CHECK(finished.shards_resumed > 0);
  CHECK(finished.table == whole.table);

  // a finished checkpoint for a different bound is refused
  CheckpointedSieveOptions wrong;
  wrong.checkpoint_path = path;
  CHECK_THROWS_AS(sieve_N_resumable(4000, wrong), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli: count-n prints the count and solutions") {
  auto r = run_cli("count-n 8");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "n,N\n8,2\n");
  auto l = run_cli("count-n 8 --list");
  CHECK(l.exit_code == 0);
  CHECK(l.out == "n,N\n8,2\nidx,core,ones\n1,8 2,6\n2,3 2 2,5\n");
  auto t = run_cli("count-n 8 --format table");
  CHECK(t.exit_code == 0);
  CHECK(t.out == "N(8) = 2\n");
  auto j = run_cli("count-n 8 --format json");
  CHECK(j.exit_code == 0);
  CHECK(nlohmann::json::parse(j.out) == nlohmann::json({{"n", 8}, {"N", 2}}));
}

TEST_CASE("cli: sieve emits the same bytes as the library writer") {
  auto table = sieve_N(200);
  auto r = run_cli("sieve -x 200");
  CHECK(r.exit_code == 0);
  CHECK(r.out == render(table, TableFormat::Csv));
  auto rj = run_cli("sieve -x 200 --format json");
  CHECK(rj.out == render(table, TableFormat::Json));
}

TEST_CASE("cli: sieve output is independent of the job count") {
  auto one = run_cli("sieve -x 3000 -j 1");
  auto four = run_cli("sieve -x 3000 -j 4");
  auto sixteen = run_cli("sieve -x 3000 -j 16");
  CHECK(one.exit_code == 0);
  CHECK(one.out == four.out);
  CHECK(one.out == sixteen.out);
}

TEST_CASE("cli: exceptional list as one csv line") {
  auto r = run_cli("exceptional -x 500");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "2,3,4,6,24,114,174,444\n");
}

TEST_CASE("cli: f(x) in all three formats") {
  auto c = run_cli("fx 1000");
  CHECK(c.exit_code == 0);
  CHECK(c.out == "field,value\nx,1000\nf,7313\n");
  auto j = run_cli("fx 1000 --format json");
  CHECK(j.out == "{\"x\":\"1000\",\"f\":7313}\n");
}

TEST_CASE("cli: bounds reports the frozen sandwich at x = 100") {
  auto r = run_cli("bounds -x 100");
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "field,value\nx,100\ng,default\nlower,257\nmiddle,381\nupper,50703\n"
        "lower_ok,true\nupper_ok,true\nf_x,357\nupper_arg1,111\nf_upper1,403\n"
        "upper_arg2,130\nf_upper2,503\n");
  auto j = run_cli("bounds -x 100 --g sqrt --format json");
  CHECK(j.exit_code == 0);
  auto parsed = nlohmann::json::parse(j.out);
  CHECK(parsed["g"] == "sqrt");
  CHECK(parsed["lower_ok"] == true);
  CHECK(parsed["upper_ok"] == true);
}

TEST_CASE("cli: construct lists the nontrivial k = 3 family") {
  auto r = run_cli("construct -k 3");
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "index,blocks,core,n\n2,2,6 5,21\n3,2,10 3,19\n4,2,15 2,15\n"
        "5,3,5 3 2,23\n");
  auto limited = run_cli("construct -k 4 --limit 2");
  CHECK(limited.exit_code == 0);
  CHECK(limited.out == "index,blocks,core,n\n2,2,30 7,175\n3,2,42 5,165\n");
}

TEST_CASE("cli: verify-construct succeeds on a full small run") {
  auto r = run_cli("verify-construct -k 4 --full");
  CHECK(r.exit_code == 0);
  auto j = run_cli("verify-construct -k 4 --full --format json");
  auto parsed = nlohmann::json::parse(j.out);
  CHECK(parsed["checked"] == 15);
  CHECK(parsed["degenerate"] == 1);
  CHECK(parsed["ok"] == true);
  CHECK(parsed["sampled"] == false);
}

TEST_CASE("cli: checkpointed sieve resumes to identical output") {
  auto dir = fresh_temp_dir("cli_ckpt");
  auto ckpt = (dir / "s.ckpt").string();
  auto direct = run_cli("sieve -x 3000 -j 2");
  auto stopped = run_cli("sieve -x 3000 -j 2 --checkpoint " + ckpt +
                         " --debug-stop-after-waves 1");
  CHECK(stopped.exit_code == 0);
  CHECK(stopped.out.empty());  // incomplete run prints only the stderr note
  auto resumed = run_cli("sieve -x 3000 -j 7 --checkpoint " + ckpt);
  CHECK(resumed.exit_code == 0);
  CHECK(resumed.out == direct.out);

  // corrupting the payload must fail the resume loudly
  auto stopped2 = run_cli("sieve -x 3000 -j 2 --checkpoint " + ckpt +
                          " --debug-stop-after-waves 1");
  CHECK(stopped2.exit_code == 0);
  {
    std::fstream f(ckpt + ".data",
                   std::ios::in | std::ios::out | std::ios::binary);
    REQUIRE(f.good());
    f.seekp(40);
    char byte = 0x7f;
    f.write(&byte, 1);
  }
  auto broken = run_cli("sieve -x 3000 --checkpoint " + ckpt);
  CHECK(broken.exit_code == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli: table reuse through --table matches a fresh sieve") {
  auto dir = fresh_temp_dir("table");
  auto path = (dir / "t.csv").string();
  auto saved = run_cli("sieve -x 2000 -o " + path);
  REQUIRE(saved.exit_code == 0);
  auto from_table = run_cli("ratio -x 2000 --table " + path);
  auto fresh = run_cli("ratio -x 2000");
  CHECK(from_table.exit_code == 0);
  CHECK(from_table.out == fresh.out);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli: exit codes distinguish usage, capacity, and verification") {
  CHECK(run_cli("count-n 1").exit_code == 1);           // domain error
  CHECK(run_cli("factorizations 1 --count").exit_code == 1);
  CHECK(run_cli("count-n 8 --format xml").exit_code == 1);
  CHECK(run_cli("sieve -x 9223372036854775807").exit_code == 2);  // 2X overflows
  CHECK(run_cli("verify-construct -k 30 --sample 10").exit_code == 2);
  CHECK(run_cli("construct -k 2").exit_code == 1);
  CHECK(run_cli("nonsense-subcommand").exit_code != 0);
}

TEST_CASE("cli: version string matches the engine tag") {
  auto r = run_cli("--version");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "espp/0.1.0\n");
}
