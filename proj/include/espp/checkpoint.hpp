#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "espp/sumprod.hpp"

namespace espp {

// 64-bit FNV-1a.
uint64_t fnv1a(std::span<const std::byte> bytes);
uint64_t fingerprint_counts(const CountTable& table);

struct CheckpointMeta {
  int version = 1;
  std::string engine;             // engine version string
  uint64_t x = 0;                 // sieve upper bound
  uint64_t shard_count = 0;       // total shards in the fixed plan
  uint64_t completed_shards = 0;  // prefix of the plan merged into the table
  uint64_t fingerprint = 0;       // fnv1a of the payload bytes
};

// Meta goes to `path` (JSON), the raw count payload to `path + ".data"`.
// Writes are staged through a temp file and renamed.
void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const CountTable& table);

// Returns false when no checkpoint exists at path. Throws std::runtime_error
// on version, engine, bound, or fingerprint mismatch.
bool load_checkpoint(const std::string& path, CheckpointMeta& meta,
                     CountTable& table);

struct CheckpointedSieveOptions {
  int jobs = 1;
  int shards_per_job = 8;
  std::string checkpoint_path;      // empty: plain run, nothing persisted
  int debug_stop_after_waves = -1;  // >= 0: stop after that many waves
};

struct SieveRun {
  CountTable table;
  bool complete = true;
  uint64_t waves_executed = 0;
  uint64_t shards_resumed = 0;  // shards restored from the checkpoint
};

// Shard plan is fixed at first run and recorded in the checkpoint; a resumed
// run reuses it regardless of the current job count, so the merged table is
// identical to an uninterrupted run. Each wave processes `jobs` consecutive
// shards and then persists the prefix-complete state.
SieveRun sieve_N_resumable(uint64_t x, const CheckpointedSieveOptions& options);

}  // namespace espp
