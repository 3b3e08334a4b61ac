#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "retrysim/analytics.hpp"
#include "retrysim/kernel.hpp"
#include "retrysim/reliability.hpp"
#include "retrysim/timing.hpp"
#include "retrysim/topology.hpp"
#include "retrysim/types.hpp"
#include "retrysim/workload.hpp"

#include "json.hpp"

namespace retrysim {

struct ConditionGrid {
  std::vector<double> pec = {0, 1000, 2000};
  std::vector<double> retention_months = {0, 3, 6, 12};
  double temperature_c = 30.0;
};

struct WorkloadConfig {
  std::string source = "synthetic";  // synthetic | trace
  std::string preset = "ycsb-a";
  WorkloadSpec spec;
  std::string trace_path;

  std::string id() const;
};

struct OutputConfig {
  std::string path;
  std::string format = "csv";
};

// Everything one `simulate` invocation needs; loadable from JSON with
// strict key checking, overridable from the command line.
struct RunConfig {
  SsdConfig geometry;
  TimingParams timing = TimingParams::defaults();
  std::string calibration_path;
  std::vector<PolicyKind> policies = {PolicyKind::kBaseline};
  ConditionGrid conditions;
  WorkloadConfig workload;
  std::uint64_t seed = 42;
  OutputConfig output;
  int threads = 0;  // 0: hardware concurrency

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);

  RetryCalibration calibration() const;
  void apply_env_seed();  // RETRYSIM_SEED wins over the config value
  void validate() const;
};

// Materializes the workload request stream; trace LBAs wrap into the
// device's user range.
std::vector<IoRequest> build_workload(const RunConfig& cfg);

// Runs every (policy, pec, retention) cell; cells execute in a worker
// pool and are assembled in a deterministic order.
std::vector<RunReport> run_sweep(const RunConfig& cfg,
                                 const std::vector<IoRequest>& workload);

// Kernel-vs-closed-form equivalence over the policy x steps x page x
// reduction grid with isolated single reads. `perturb_ns` shifts the
// simulated pipelined-policy responses to prove the harness can fail.
struct OracleCheckRow {
  PolicyKind policy;
  int n_rr;
  PageType page;
  double reduction;
  Ns simulated_ns;
  Ns oracle_ns;
};
std::vector<OracleCheckRow> oracle_equivalence_grid(const TimingParams& timing,
                                                    Ns perturb_ns = 0);

// Single isolated read on an otherwise idle device.
Ns isolated_read_response(PolicyKind policy, int n_rr, PageType page,
                          const TimingParams& timing, double reduction);

}  // namespace retrysim
