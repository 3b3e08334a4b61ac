#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "retrysim/reliability.hpp"
#include "retrysim/timing.hpp"
#include "retrysim/types.hpp"

namespace retrysim {

enum class PolicyKind {
  kBaseline,  // regular read-retry, steps fully serialized
  kPr2,       // retry senses pipelined, one transfer+decode on the tail
  kAr2,       // serialized steps at reduced tPRE, one SET FEATURE
  kPnAr2,     // pipelined + reduced tPRE
  kNoRr,      // ideal: no retry ever
  kPso,       // baseline chain with Vref-reuse step reduction
  kPsoPnAr2,  // PSO step reduction on top of the pipelined+adaptive chain
};

const char* to_string(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);
const std::vector<PolicyKind>& all_policies();

struct PolicyTraits {
  bool pipelined = false;   // CACHE READ within the retry chain
  bool adaptive = false;    // reduced tPRE for retry steps via the RPT
  bool pso = false;         // step-count transform before execution
  bool no_retry = false;
};
PolicyTraits traits_of(PolicyKind kind);

// Step-count transform applied before a chain executes.
int transform_steps(PolicyKind kind, int n_rr);

// Where the adaptive policies take their tPRE reduction from.
class ReductionSource {
 public:
  static ReductionSource fixed(double reduction);
  static ReductionSource from_rpt(std::shared_ptr<const RptTable> rpt);
  static ReductionSource none();

  double reduction_for(const OperatingCondition& cond,
                       std::uint64_t* miss_warnings = nullptr) const;

 private:
  double fixed_ = 0.0;
  std::shared_ptr<const RptTable> rpt_;
};

double rpt_lookup(const RptTable& rpt, const OperatingCondition& cond,
                  std::uint64_t* miss_warnings = nullptr);

// Contention-free latency components of one read executing `steps` retry
// steps. `steps` is the post-transform count; reduction only matters for
// the adaptive policies.
struct LatencyBreakdown {
  Ns initial_ns = 0;      // tR + tDMA + tECC of the first read
  Ns set_feature_ns = 0;  // tSET, adaptive chains only
  Ns retry_ns = 0;        // the rest of the chain
  Ns reset_tail_ns = 0;   // die-occupying RESET after a pipelined chain
  int steps = 0;

  Ns response_ns() const { return initial_ns + set_feature_ns + retry_ns; }
};

LatencyBreakdown execute_read(PolicyKind kind, int steps, PageType page,
                              const TimingParams& timing, double reduction);

}  // namespace retrysim
