#include "retrysim/topology.hpp"

#include <stdexcept>
#include <string>

namespace retrysim {

void SsdConfig::validate() const {
  if (channels <= 0 || dies_per_channel <= 0 || planes_per_die <= 0 ||
      blocks_per_plane <= 0 || pages_per_block <= 0 || page_bytes <= 0) {
    throw ConfigError("SSD geometry fields must all be positive");
  }
  if (user_bytes <= 0 || user_bytes % page_bytes != 0) {
    throw ConfigError("user capacity must be a positive page multiple");
  }
  if (user_bytes > raw_bytes()) {
    throw ConfigError("user capacity exceeds physical capacity");
  }
  if (pages_per_block % 3 != 0) {
    throw ConfigError("pages per block must be divisible by 3 (TLC mapping)");
  }
}

std::int64_t SsdConfig::physical_pages() const {
  return static_cast<std::int64_t>(channels) * dies_per_channel * planes_per_die *
         blocks_per_plane * pages_per_block;
}

PageType page_type_of(const PhysAddr& addr) {
  switch (addr.page % 3) {
    case 0: return PageType::kLsb;
    case 1: return PageType::kCsb;
    default: return PageType::kMsb;
  }
}

PhysAddr map_logical(std::int64_t lba, const SsdConfig& cfg) {
  if (lba < 0 || lba >= cfg.user_pages()) {
    throw std::out_of_range("LBA " + std::to_string(lba) + " outside device range");
  }
  const std::int64_t width =
      static_cast<std::int64_t>(cfg.channels) * cfg.dies_per_channel * cfg.planes_per_die;
  const std::int64_t unit = lba % width;
  const std::int64_t row = lba / width;

  PhysAddr addr;
  addr.channel = static_cast<int>(unit % cfg.channels);
  addr.die = static_cast<int>((unit / cfg.channels) % cfg.dies_per_channel);
  addr.plane = static_cast<int>(unit / (cfg.channels * cfg.dies_per_channel));
  addr.page = static_cast<int>(row % cfg.pages_per_block);
  addr.block = static_cast<int>(row / cfg.pages_per_block);
  return addr;
}

std::int64_t flat_page_index(const PhysAddr& addr, const SsdConfig& cfg) {
  return ((flat_block_index(addr, cfg) * cfg.pages_per_block) + addr.page);
}

int flat_die_index(const PhysAddr& addr, const SsdConfig& cfg) {
  return addr.channel * cfg.dies_per_channel + addr.die;
}

std::int64_t flat_block_index(const PhysAddr& addr, const SsdConfig& cfg) {
  const std::int64_t plane_idx =
      (static_cast<std::int64_t>(flat_die_index(addr, cfg)) * cfg.planes_per_die) +
      addr.plane;
  return plane_idx * cfg.blocks_per_plane + addr.block;
}

DeviceState::DeviceState(const SsdConfig& cfg, int base_pec)
    : cfg_(cfg), base_pec_(base_pec) {}

const DeviceState::BlockMeta* DeviceState::find(std::int64_t block_idx) const {
  auto it = blocks_.find(block_idx);
  return it == blocks_.end() ? nullptr : &it->second;
}

DeviceState::BlockMeta& DeviceState::touch(std::int64_t block_idx) {
  auto it = blocks_.find(block_idx);
  if (it == blocks_.end()) {
    BlockMeta meta;
    meta.pec = base_pec_;
    meta.page_program_time.assign(cfg_.pages_per_block, kPreRun);
    it = blocks_.emplace(block_idx, std::move(meta)).first;
  }
  return it->second;
}

void DeviceState::record_program(const PhysAddr& addr, Ns now) {
  touch(flat_block_index(addr, cfg_)).page_program_time[addr.page] = now;
}

void DeviceState::erase_block(const PhysAddr& addr) {
  BlockMeta& meta = touch(flat_block_index(addr, cfg_));
  ++meta.pec;
  meta.page_program_time.assign(cfg_.pages_per_block, kErased);
}

int DeviceState::pec_of(const PhysAddr& addr) const {
  const BlockMeta* meta = find(flat_block_index(addr, cfg_));
  return meta != nullptr ? meta->pec : base_pec_;
}

OperatingCondition DeviceState::condition_of(const PhysAddr& addr, Ns now,
                                             const OperatingCondition& base) const {
  const BlockMeta* meta = find(flat_block_index(addr, cfg_));
  OperatingCondition cond = base;
  if (meta == nullptr) return cond;  // untouched block: pre-run cold data

  cond.pec = meta->pec;
  const Ns programmed = meta->page_program_time[addr.page];
  if (programmed == kPreRun) return cond;
  if (programmed == kErased) {
    throw InternalError("read of an erased, unprogrammed page");
  }
  const double hours = static_cast<double>(now - programmed) / 3.6e12;
  cond.retention_months = effective_retention_months(hours, base.temp_c);
  return cond;
}

}  // namespace retrysim
