#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "retrysim/reliability.hpp"
#include "retrysim/timing.hpp"
#include "retrysim/types.hpp"

namespace retrysim {

struct SsdConfig {
  int channels = 4;
  int dies_per_channel = 4;
  int planes_per_die = 2;
  int blocks_per_plane = 1888;
  int pages_per_block = 576;
  std::int64_t page_bytes = 16 * 1024;
  // Advertised (LBA-visible) capacity; the physical product above it is
  // spare area.
  std::int64_t user_bytes = 512LL * 1024 * 1024 * 1024;

  void validate() const;

  int total_dies() const { return channels * dies_per_channel; }
  std::int64_t physical_pages() const;
  std::int64_t raw_bytes() const { return physical_pages() * page_bytes; }
  std::int64_t user_pages() const { return user_bytes / page_bytes; }
};

struct PhysAddr {
  int channel = 0;
  int die = 0;  // within channel
  int plane = 0;
  int block = 0;
  int page = 0;

  bool operator==(const PhysAddr&) const = default;
};

// Pages cycle LSB/CSB/MSB through a block.
PageType page_type_of(const PhysAddr& addr);

// Static striping: sequential LBAs walk channels first, then dies, then
// planes, then pages within a block. Bijective over the user LBA range.
PhysAddr map_logical(std::int64_t lba, const SsdConfig& cfg);

// Unique ids used for hashing and per-page state.
std::int64_t flat_page_index(const PhysAddr& addr, const SsdConfig& cfg);
int flat_die_index(const PhysAddr& addr, const SsdConfig& cfg);
std::int64_t flat_block_index(const PhysAddr& addr, const SsdConfig& cfg);

// Per-block wear and per-page program timestamps, kept sparsely for the
// blocks a run actually touches. Pages untouched by the run hold pre-run
// data and age at the sweep's base retention.
class DeviceState {
 public:
  DeviceState(const SsdConfig& cfg, int base_pec);

  void record_program(const PhysAddr& addr, Ns now);
  void erase_block(const PhysAddr& addr);
  int pec_of(const PhysAddr& addr) const;

  // Condition a read of this page sees at simulation time `now`.
  // Reading an erased-but-unprogrammed page is flagged as an error.
  OperatingCondition condition_of(const PhysAddr& addr, Ns now,
                                  const OperatingCondition& base) const;

 private:
  static constexpr Ns kPreRun = -1;  // holds data programmed before the run
  static constexpr Ns kErased = -2;

  struct BlockMeta {
    int pec;
    std::vector<Ns> page_program_time;
  };

  const BlockMeta* find(std::int64_t block_idx) const;
  BlockMeta& touch(std::int64_t block_idx);

  SsdConfig cfg_;
  int base_pec_;
  std::unordered_map<std::int64_t, BlockMeta> blocks_;
};

}  // namespace retrysim
