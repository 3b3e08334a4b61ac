#include "doctest.h"

#include <set>

#include "retrysim/rng.hpp"
#include "retrysim/topology.hpp"

using namespace retrysim;

TEST_CASE("default geometry") {
  SsdConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.total_dies() == 16);
  // 4 ch x 4 die x 2 planes x 1888 blocks x 576 pages x 16 KiB.
  CHECK(cfg.physical_pages() == 34'799'616);
  CHECK(cfg.raw_bytes() == 570'156'908'544);
  CHECK(cfg.user_bytes == 549'755'813'888);  // 512 GiB exposed
  CHECK(cfg.raw_bytes() >= cfg.user_bytes);
  CHECK(cfg.user_pages() == 33'554'432);
}

TEST_CASE("geometry validation") {
  SsdConfig cfg;
  cfg.channels = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SsdConfig{};
  cfg.pages_per_block = 577;  // not divisible by 3
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SsdConfig{};
  cfg.user_bytes = cfg.raw_bytes() + cfg.page_bytes;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("logical mapping basics") {
  const SsdConfig cfg;
  const PhysAddr origin = map_logical(0, cfg);
  CHECK(origin.channel == 0);
  CHECK(origin.die == 0);
  CHECK(origin.plane == 0);
  CHECK(origin.block == 0);
  CHECK(origin.page == 0);

  // Round-robin striping spreads sequential LBAs across channels first.
  CHECK(map_logical(1, cfg).channel == 1);
  CHECK(map_logical(2, cfg).channel == 2);
  CHECK(map_logical(4, cfg).channel == 0);
  CHECK(map_logical(4, cfg).die == 1);

  CHECK_THROWS_AS(map_logical(cfg.user_pages(), cfg), std::out_of_range);
  CHECK_THROWS_AS(map_logical(-1, cfg), std::out_of_range);
}

TEST_CASE("logical mapping is injective over sampled LBAs") {
  const SsdConfig cfg;
  SplitMix64 rng(42);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 20'000; ++i) {
    const auto lba =
        static_cast<std::int64_t>(rng.next_below(cfg.user_pages()));
    const PhysAddr addr = map_logical(lba, cfg);
    CHECK(addr.channel < cfg.channels);
    CHECK(addr.die < cfg.dies_per_channel);
    CHECK(addr.plane < cfg.planes_per_die);
    CHECK(addr.block < cfg.blocks_per_plane);
    CHECK(addr.page < cfg.pages_per_block);
    const std::int64_t flat = flat_page_index(addr, cfg);
    if (!seen.insert(flat).second) {
      FAIL("two sampled LBAs mapped to one physical page");
    }
  }
}

TEST_CASE("page types cycle and one third of a block is CSB") {
  const SsdConfig cfg;
  int counts[3] = {0, 0, 0};
  for (int page = 0; page < cfg.pages_per_block; ++page) {
    PhysAddr addr;
    addr.page = page;
    counts[static_cast<int>(page_type_of(addr))] += 1;
  }
  CHECK(counts[static_cast<int>(PageType::kLsb)] == 192);
  CHECK(counts[static_cast<int>(PageType::kCsb)] == 192);
  CHECK(counts[static_cast<int>(PageType::kMsb)] == 192);
}

TEST_CASE("condition of cold, rewritten, and erased pages") {
  const SsdConfig cfg;
  DeviceState dev(cfg, 2000);
  const OperatingCondition base{2000, 6, 30};
  const PhysAddr addr = map_logical(1234, cfg);

  // Cold page under a (2K, 6 month) sweep keeps the sweep condition.
  OperatingCondition cond = dev.condition_of(addr, 1'000'000, base);
  CHECK(cond.pec == 2000);
  CHECK(cond.retention_months == 6);
  CHECK(cond.temp_c == 30);

  // Rewritten during the run: retention collapses to about zero.
  dev.record_program(addr, 500'000);
  cond = dev.condition_of(addr, 1'000'000, base);
  CHECK(cond.pec == 2000);
  CHECK(cond.retention_months < 1e-6);
  CHECK(cond.retention_months >= 0.0);

  // Erase bumps wear and makes reads invalid until a program.
  dev.erase_block(addr);
  CHECK(dev.pec_of(addr) == 2001);
  CHECK_THROWS_AS(dev.condition_of(addr, 2'000'000, base), InternalError);
  dev.record_program(addr, 2'000'000);
  CHECK_NOTHROW(dev.condition_of(addr, 2'500'000, base));
}
