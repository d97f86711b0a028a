#include "espp/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>

#include <json.hpp>

#include "espp/version.hpp"

namespace espp {

uint64_t fnv1a(std::span<const std::byte> bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (std::byte b : bytes) {
    h ^= static_cast<uint64_t>(b);
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t fingerprint_counts(const CountTable& table) {
  return fnv1a(std::as_bytes(std::span(table.counts)));
}

namespace {

void atomic_write(const std::string& path, const void* data, std::size_t len) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) throw std::runtime_error("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const CountTable& table) {
  // payload first, meta last: the meta file commits the checkpoint
  atomic_write(path + ".data", table.counts.data(),
               table.counts.size() * sizeof(uint32_t));
  nlohmann::json j{{"version", meta.version},
                   {"engine", meta.engine},
                   {"x", meta.x},
                   {"shard_count", meta.shard_count},
                   {"completed_shards", meta.completed_shards},
                   {"fingerprint", meta.fingerprint}};
  std::string text = j.dump();
  text.push_back('\n');
  atomic_write(path, text.data(), text.size());
}

bool load_checkpoint(const std::string& path, CheckpointMeta& meta,
                     CountTable& table) {
  if (!std::filesystem::exists(path)) return false;
  std::ifstream in(path);
  nlohmann::json j;
  try {
    in >> j;
    meta.version = j.at("version").get<int>();
    meta.engine = j.at("engine").get<std::string>();
    meta.x = j.at("x").get<uint64_t>();
    meta.shard_count = j.at("shard_count").get<uint64_t>();
    meta.completed_shards = j.at("completed_shards").get<uint64_t>();
    meta.fingerprint = j.at("fingerprint").get<uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("unreadable checkpoint " + path + ": " + e.what());
  }
  if (meta.version != 1)
    throw std::runtime_error("unsupported checkpoint version");
  if (meta.engine != kEngineVersion)
    throw std::runtime_error("checkpoint was written by a different engine");
  std::string data_path = path + ".data";
  std::ifstream data(data_path, std::ios::binary);
  if (!data) throw std::runtime_error("missing checkpoint payload " + data_path);
  table = CountTable(meta.x);
  data.read(reinterpret_cast<char*>(table.counts.data()),
            static_cast<std::streamsize>(table.counts.size() * sizeof(uint32_t)));
  if (static_cast<std::size_t>(data.gcount()) !=
          table.counts.size() * sizeof(uint32_t) ||
      data.peek() != std::char_traits<char>::eof())
    throw std::runtime_error("checkpoint payload has the wrong size");
  if (fingerprint_counts(table) != meta.fingerprint)
    throw std::runtime_error("checkpoint fingerprint mismatch");
  return true;
}

SieveRun sieve_N_resumable(uint64_t x, const CheckpointedSieveOptions& options) {
  if (x < 2) throw std::invalid_argument("sieve needs X >= 2");
  if (x > kMaxProductBound / 2)
    throw CapacityError("2X exceeds the 64-bit engine domain");
  int jobs = std::max(1, options.jobs);
  SieveRun run;
  uint64_t shard_count = 0;
  uint64_t start_shard = 0;
  CheckpointMeta meta;
  bool persisted = !options.checkpoint_path.empty();
  if (persisted && load_checkpoint(options.checkpoint_path, meta, run.table)) {
    if (meta.x != x)
      throw std::runtime_error("checkpoint covers a different bound");
    shard_count = meta.shard_count;
    start_shard = meta.completed_shards;
    run.shards_resumed = start_shard;
  } else {
    shard_count = static_cast<uint64_t>(jobs) *
                  std::max<std::size_t>(1, options.shards_per_job);
    run.table = CountTable(x);
  }
  auto shards = plan_shards(2 * x, shard_count);
  shard_count = shards.size();
  for (uint64_t wave_start = start_shard; wave_start < shard_count;
       wave_start += static_cast<uint64_t>(jobs)) {
    uint64_t wave_len =
        std::min<uint64_t>(jobs, shard_count - wave_start);
    sieve_N_into(x,
                 std::span(shards.data() + wave_start,
                           static_cast<std::size_t>(wave_len)),
                 jobs, run.table);
    ++run.waves_executed;
    uint64_t done = wave_start + wave_len;
    if (persisted) {
      CheckpointMeta out;
      out.engine = std::string(kEngineVersion);
      out.x = x;
      out.shard_count = shard_count;
      out.completed_shards = done;
      out.fingerprint = fingerprint_counts(run.table);
      save_checkpoint(options.checkpoint_path, out, run.table);
    }
    if (options.debug_stop_after_waves >= 0 &&
        run.waves_executed >=
            static_cast<uint64_t>(options.debug_stop_after_waves)) {
      run.complete = done >= shard_count;
      return run;
    }
  }
  run.complete = true;
  return run;
}

}  // namespace espp
