#include "retrysim/policies.hpp"

#include <stdexcept>

namespace retrysim {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kBaseline: return "baseline";
    case PolicyKind::kPr2: return "pr2";
    case PolicyKind::kAr2: return "ar2";
    case PolicyKind::kPnAr2: return "pnar2";
    case PolicyKind::kNoRr: return "norr";
    case PolicyKind::kPso: return "pso";
    case PolicyKind::kPsoPnAr2: return "pso_pnar2";
  }
  return "?";
}

PolicyKind parse_policy(const std::string& name) {
  for (PolicyKind kind : all_policies()) {
    if (name == to_string(kind)) return kind;
  }
  std::string valid;
  for (PolicyKind kind : all_policies()) {
    if (!valid.empty()) valid += ", ";
    valid += to_string(kind);
  }
  throw ConfigError("unknown policy '" + name + "' (valid: " + valid + ")");
}

const std::vector<PolicyKind>& all_policies() {
  static const std::vector<PolicyKind> kinds = {
      PolicyKind::kBaseline, PolicyKind::kPr2,  PolicyKind::kAr2,
      PolicyKind::kPnAr2,    PolicyKind::kNoRr, PolicyKind::kPso,
      PolicyKind::kPsoPnAr2,
  };
  return kinds;
}

PolicyTraits traits_of(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kBaseline: return {};
    case PolicyKind::kPr2: return {.pipelined = true};
    case PolicyKind::kAr2: return {.adaptive = true};
    case PolicyKind::kPnAr2: return {.pipelined = true, .adaptive = true};
    case PolicyKind::kNoRr: return {.no_retry = true};
    case PolicyKind::kPso: return {.pso = true};
    case PolicyKind::kPsoPnAr2:
      return {.pipelined = true, .adaptive = true, .pso = true};
  }
  return {};
}

int transform_steps(PolicyKind kind, int n_rr) {
  const PolicyTraits traits = traits_of(kind);
  if (traits.no_retry) return 0;
  if (traits.pso) return pso_retry_steps(n_rr);
  return n_rr;
}

ReductionSource ReductionSource::fixed(double reduction) {
  ReductionSource src;
  src.fixed_ = reduction;
  return src;
}

ReductionSource ReductionSource::from_rpt(std::shared_ptr<const RptTable> rpt) {
  ReductionSource src;
  src.rpt_ = std::move(rpt);
  return src;
}

ReductionSource ReductionSource::none() { return ReductionSource(); }

double ReductionSource::reduction_for(const OperatingCondition& cond,
                                      std::uint64_t* miss_warnings) const {
  if (rpt_ != nullptr) return rpt_->lookup(cond, miss_warnings);
  return fixed_;
}

double rpt_lookup(const RptTable& rpt, const OperatingCondition& cond,
                  std::uint64_t* miss_warnings) {
  return rpt.lookup(cond, miss_warnings);
}

LatencyBreakdown execute_read(PolicyKind kind, int steps, PageType page,
                              const TimingParams& timing, double reduction) {
  if (steps < 0) throw std::invalid_argument("retry steps must be >= 0");
  const PolicyTraits traits = traits_of(kind);
  const Ns t_read = sense_latency(timing, page);
  const Ns t_tail = timing.tdma_ns + timing.tecc_ns;
  const Ns t_retry_read =
      traits.adaptive ? reduced_sense_latency(timing, page, reduction) : t_read;

  LatencyBreakdown lat;
  lat.steps = steps;
  lat.initial_ns = t_read + t_tail;
  if (steps == 0) return lat;

  if (traits.adaptive) lat.set_feature_ns = timing.tset_ns;
  if (traits.pipelined) {
    // Consecutive senses overlap the previous step's transfer and decode;
    // only the successful step's tail remains on the critical path. The
    // speculative extra step dies by RESET right after the ECC success.
    lat.retry_ns = static_cast<Ns>(steps) * t_retry_read + t_tail;
    lat.reset_tail_ns = timing.trst_ns;
  } else {
    lat.retry_ns = static_cast<Ns>(steps) * (t_retry_read + t_tail);
  }
  return lat;
}

}  // namespace retrysim
