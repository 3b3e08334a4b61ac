#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "retrysim/policies.hpp"
#include "retrysim/timing.hpp"
#include "retrysim/types.hpp"

namespace retrysim {

// Identifies one simulation cell; reports are only comparable when
// everything but the policy matches.
struct RunKey {
  PolicyKind policy = PolicyKind::kBaseline;
  double pec = 0.0;
  double retention_months = 0.0;
  double temp_c = 30.0;
  std::uint64_t seed = 0;
  std::string workload_id;

  bool comparable_with(const RunKey& other) const;
};

struct RunReport {
  RunKey key;
  std::vector<Ns> responses;  // per original request, completion - arrival
  std::map<int, std::int64_t> sampled_nrr;   // model output per read page
  std::map<int, std::int64_t> executed_nrr;  // after the policy transform
  std::int64_t reads = 0;
  std::int64_t writes = 0;
  std::int64_t retry_failures = 0;
  std::uint64_t clamp_warnings = 0;
  std::uint64_t rpt_miss_warnings = 0;

  double mean_ns() const;
  Ns percentile_ns(double q) const;  // nearest-rank on the sorted responses
  double mean_sampled_nrr() const;
};

// Contention-free closed-form response of a single read. n_rr is the
// sampled step count; the policy's own transform (PSO, NoRR) is applied
// here.
Ns oracle_latency(PolicyKind policy, int n_rr, PageType page,
                  const TimingParams& timing, double reduction);

// Closed-form mean response over the LSB/CSB/MSB page mix at a real-valued
// mean step count.
double oracle_mean_latency_ns(PolicyKind policy, double mean_nrr,
                              const TimingParams& timing, double reduction);

struct CompareRow {
  PolicyKind policy;
  double mean_us;
  double reduction_vs_baseline_pct;
};

// Normalizes each report's mean response against the Baseline report in
// the same cell. All keys must match except the policy.
std::vector<CompareRow> compare(const std::vector<RunReport>& reports);

// Stable CSV schema:
//   policy,pec,retention_months,mean_us,p50_us,p95_us,p99_us,
//   reduction_vs_baseline_pct
void emit_csv(const std::vector<RunReport>& reports, std::ostream& os);
void emit_json(const std::vector<RunReport>& reports, std::ostream& os);
void emit_report_file(const std::vector<RunReport>& reports,
                      const std::string& path, const std::string& format);

struct CsvRow {
  std::string policy;
  double pec;
  double retention_months;
  double mean_us;
  double p50_us;
  double p95_us;
  double p99_us;
  double reduction_vs_baseline_pct;
};
std::vector<CsvRow> parse_csv(std::istream& is);

}  // namespace retrysim
