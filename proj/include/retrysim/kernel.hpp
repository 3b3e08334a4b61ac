#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "retrysim/analytics.hpp"
#include "retrysim/policies.hpp"
#include "retrysim/reliability.hpp"
#include "retrysim/timing.hpp"
#include "retrysim/topology.hpp"
#include "retrysim/types.hpp"
#include "retrysim/workload.hpp"

namespace retrysim {

// Raw die operation injected at a fixed time, bypassing the host queue.
// Used by tests to pin down suspension timing.
struct InjectedOp {
  Ns time = 0;
  std::int64_t lba = 0;
  bool erase = false;
};

struct SimConfig {
  SsdConfig geometry;
  TimingParams timing = TimingParams::defaults();
  RetryCalibration calibration = RetryCalibration::defaults();
  PolicyKind policy = PolicyKind::kBaseline;
  OperatingCondition base_condition;  // condition of pre-run (cold) data
  std::uint64_t seed = 1;
  // Adaptive policies take their tPRE reduction from here; when unset, a
  // default RPT is built from the calibration.
  std::optional<ReductionSource> reduction;
  std::optional<int> forced_nrr;  // test seam: bypass the sampler
  Ns suspend_overhead_ns = 0;
  std::string workload_id;
  std::vector<InjectedOp> injected_ops;
};

// Runs the full request stream to completion and aggregates response
// times. Deterministic for a fixed (config, workload, seed).
RunReport run_simulation(const SimConfig& cfg, const std::vector<IoRequest>& workload);

}  // namespace retrysim
