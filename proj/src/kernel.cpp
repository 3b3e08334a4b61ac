#include "retrysim/kernel.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <queue>

#include "retrysim/rng.hpp"

namespace retrysim {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);
constexpr Ns kUnknown = -1;

enum class EventKind {
  kCmdIssue,
  kSenseDone,
  kTransferStart,
  kTransferDone,
  kEccDone,
  kResetDone,
  kProgramDone,
  kEraseDone,
  kSuspendPoint,
};

struct SimEvent {
  Ns time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kCmdIssue;
  std::size_t target = kNone;  // request / sub-op / die / channel id
  int step = -1;
  std::uint64_t gen = 0;

  bool operator>(const SimEvent& other) const {
    if (time != other.time) return time > other.time;
    return seq > other.seq;
  }
};

enum class OpKind { kRead, kWrite, kErase };

struct SubOp {
  std::size_t request = kNone;  // kNone for injected ops
  OpKind kind = OpKind::kRead;
  PhysAddr addr;
  std::int64_t page_uid = 0;
  int die = 0;
  int channel = 0;

  // Read chain state.
  int sampled = 0;
  int steps = 0;  // post-transform chain length
  bool retry_failure = false;
  bool outlier = false;
  bool rerun = false;
  Ns sense_default_ns = 0;
  Ns sense_retry_ns = 0;
  std::vector<char> transfer_done;
};

struct RequestAgg {
  Ns arrival = 0;
  int remaining = 0;
  Ns completion = 0;
};

struct SenseRef {
  std::size_t subop = kNone;
  int step = -1;
};

struct PendingSense {
  std::size_t subop = kNone;
  int step = 0;
  Ns earliest = 0;  // kUnknown until the preceding ECC verdict lands
};

struct Suspended {
  std::size_t subop = kNone;
  OpKind kind = OpKind::kWrite;
  Ns remaining = 0;
};

struct Die {
  std::deque<std::size_t> read_q;
  int reads_in_flight = 0;
  // True while the read owning the sense unit can still need a sense
  // whose timing is not committed yet (retries, speculation, RESET).
  bool owner_unresolved = false;
  std::optional<PendingSense> pending;
  Ns sense_free_at = 0;
  SenseRef hist[2];  // last two committed senses, for the page-buffer rule
  int hist_count = 0;
  std::uint64_t chain_gen = 0;
  bool resetting = false;

  OpKind op_kind = OpKind::kWrite;
  std::size_t active_op = kNone;
  bool op_running = false;
  Ns op_end = 0;
  std::uint64_t op_gen = 0;
  std::optional<Suspended> suspended;
  bool suspend_pending = false;

  std::deque<std::size_t> write_q;
  std::deque<std::size_t> ready_writes;
  bool write_transfer_inflight = false;

  bool tpre_override = false;
};

struct ChannelJob {
  std::size_t subop = kNone;
  int step = -1;  // -1 marks a write data-in transfer
};

struct Channel {
  bool bus_busy = false;
  std::deque<ChannelJob> transfer_q;
  bool ecc_busy = false;
  std::deque<ChannelJob> ecc_q;
};

class Simulation {
 public:
  Simulation(const SimConfig& cfg, const std::vector<IoRequest>& workload)
      : cfg_(cfg),
        traits_(traits_of(cfg.policy)),
        device_(cfg.geometry, static_cast<int>(cfg.base_condition.pec)),
        dies_(cfg.geometry.total_dies()),
        channels_(cfg.geometry.channels) {
    cfg_.geometry.validate();
    cfg_.timing.validate();
    if (traits_.adaptive && !cfg_.reduction.has_value()) {
      rpt_ = std::make_shared<const RptTable>(
          build_rpt(cfg_.calibration, default_rpt_pec_buckets(),
                    default_rpt_retention_buckets()));
      reduction_ = ReductionSource::from_rpt(rpt_);
    } else {
      reduction_ = cfg_.reduction.value_or(ReductionSource::none());
    }
    build_subops(workload);
  }

  RunReport run() {
    for (std::size_t i = 0; i < requests_.size(); ++i) {
      push_event({arrivals_[i], 0, EventKind::kCmdIssue, i});
    }
    for (std::size_t i = 0; i < injected_.size(); ++i) {
      push_event({cfg_.injected_ops[i].time, 0, EventKind::kCmdIssue,
                  requests_.size() + i});
    }

    while (!events_.empty()) {
      SimEvent ev = events_.top();
      events_.pop();
      if (ev.time < now_) throw InternalError("event time went backwards");
      now_ = ev.time;
      dispatch(ev);
    }

    if (completed_ != requests_.size() + injected_.size()) {
      throw InternalError(
          "deadlock: " + std::to_string(completed_) + " of " +
          std::to_string(requests_.size() + injected_.size()) +
          " operations completed with no runnable event left");
    }
    for (const Die& die : dies_) {
      if (die.tpre_override) {
        throw InternalError("a die finished the run with reduced tPRE still set");
      }
    }

    report_.key.policy = cfg_.policy;
    report_.key.pec = cfg_.base_condition.pec;
    report_.key.retention_months = cfg_.base_condition.retention_months;
    report_.key.temp_c = cfg_.base_condition.temp_c;
    report_.key.seed = cfg_.seed;
    report_.key.workload_id = cfg_.workload_id;
    report_.responses.reserve(requests_.size());
    for (const RequestAgg& agg : requests_) {
      report_.responses.push_back(agg.completion - agg.arrival);
    }
    return std::move(report_);
  }

 private:
  // --- setup ---------------------------------------------------------------

  void build_subops(const std::vector<IoRequest>& workload) {
    requests_.reserve(workload.size());
    arrivals_.reserve(workload.size());
    for (std::size_t r = 0; r < workload.size(); ++r) {
      const IoRequest& req = workload[r];
      const std::int64_t pages = req.size_bytes / cfg_.geometry.page_bytes;
      if (pages <= 0) throw ConfigError("request size below one page");
      RequestAgg agg;
      agg.arrival = req.arrival;
      agg.remaining = static_cast<int>(pages);
      requests_.push_back(agg);
      arrivals_.push_back(req.arrival);
      for (std::int64_t p = 0; p < pages; ++p) {
        SubOp op;
        op.request = r;
        op.kind = req.op == IoOp::kRead ? OpKind::kRead : OpKind::kWrite;
        op.addr = map_logical(req.lba + p, cfg_.geometry);
        op.page_uid = flat_page_index(op.addr, cfg_.geometry);
        op.die = flat_die_index(op.addr, cfg_.geometry);
        op.channel = op.addr.channel;
        subops_.push_back(op);
      }
      if (req.op == IoOp::kRead) {
        report_.reads += 1;
      } else {
        report_.writes += 1;
      }
    }
    for (const InjectedOp& inj : cfg_.injected_ops) {
      SubOp op;
      op.kind = inj.erase ? OpKind::kErase : OpKind::kWrite;
      op.addr = map_logical(inj.lba, cfg_.geometry);
      op.page_uid = flat_page_index(op.addr, cfg_.geometry);
      op.die = flat_die_index(op.addr, cfg_.geometry);
      op.channel = op.addr.channel;
      injected_.push_back(op);
    }
  }

  // --- event plumbing ------------------------------------------------------

  void push_event(SimEvent ev) {
    ev.seq = next_seq_++;
    events_.push(ev);
  }

  void dispatch(const SimEvent& ev) {
    switch (ev.kind) {
      case EventKind::kCmdIssue: on_cmd_issue(ev.target); break;
      case EventKind::kSenseDone: on_sense_done(ev); break;
      case EventKind::kTransferStart: on_transfer_start(ev); break;
      case EventKind::kTransferDone: on_transfer_done(ev); break;
      case EventKind::kEccDone: on_ecc_done(ev); break;
      case EventKind::kResetDone: on_reset_done(ev); break;
      case EventKind::kProgramDone: on_op_done(ev, OpKind::kWrite); break;
      case EventKind::kEraseDone: on_op_done(ev, OpKind::kErase); break;
      case EventKind::kSuspendPoint: on_suspend_point(ev); break;
    }
  }

  void on_cmd_issue(std::size_t target) {
    if (target < requests_.size()) {
      // Host request: route each page to its die.
      for (std::size_t i = 0; i < subops_.size(); ++i) {
        if (subops_[i].request != target) continue;
        Die& die = dies_[subops_[i].die];
        if (subops_[i].kind == OpKind::kRead) {
          die.read_q.push_back(i);
          maybe_suspend(subops_[i].die);
        } else {
          die.write_q.push_back(i);
        }
        try_dispatch(subops_[i].die);
      }
    } else {
      // Injected raw op: claims the die directly, no host-side transfer.
      const std::size_t idx = target - requests_.size();
      const std::size_t id = subops_.size();
      subops_.push_back(injected_[idx]);
      Die& die = dies_[subops_[id].die];
      die.ready_writes.push_back(id);
      try_dispatch(subops_[id].die);
    }
  }

  // --- die scheduling --------------------------------------------------------

  bool reads_active(const Die& die) const {
    return die.reads_in_flight > 0 || !die.read_q.empty() ||
           die.pending.has_value() || die.resetting;
  }

  void try_dispatch(int die_id) {
    Die& die = dies_[die_id];
    if (die.resetting || die.op_running || die.suspend_pending) return;

    if (!die.read_q.empty() && !die.pending.has_value() && !die.owner_unresolved &&
        (traits_.pipelined || die.reads_in_flight == 0)) {
      const std::size_t id = die.read_q.front();
      die.read_q.pop_front();
      start_read(die_id, id);
      return;
    }
    if (reads_active(die)) return;

    if (die.suspended.has_value()) {
      const Suspended s = *die.suspended;
      die.suspended.reset();
      start_die_op(die_id, s.subop, s.kind, s.remaining + cfg_.suspend_overhead_ns);
      return;
    }
    if (!die.ready_writes.empty()) {
      const std::size_t id = die.ready_writes.front();
      die.ready_writes.pop_front();
      start_die_op(die_id, id, subops_[id].kind,
                   subops_[id].kind == OpKind::kErase ? cfg_.timing.tbers_ns
                                                      : cfg_.timing.tprog_ns);
      return;
    }
    if (!die.write_q.empty() && !die.write_transfer_inflight &&
        die.ready_writes.empty()) {
      const std::size_t id = die.write_q.front();
      die.write_q.pop_front();
      die.write_transfer_inflight = true;
      request_transfer(subops_[id].channel, {id, -1});
    }
  }

  // Program and erase both run as one suspendable die occupancy.
  void start_die_op(int die_id, std::size_t subop, OpKind kind, Ns duration) {
    Die& die = dies_[die_id];
    die.op_running = true;
    die.op_kind = kind;
    die.active_op = subop;
    die.op_end = now_ + duration;
    ++die.op_gen;
    push_event({die.op_end, 0,
                kind == OpKind::kErase ? EventKind::kEraseDone
                                       : EventKind::kProgramDone,
                static_cast<std::size_t>(die_id), -1, die.op_gen});
  }

  void maybe_suspend(int die_id) {
    Die& die = dies_[die_id];
    if (!die.op_running || die.suspended.has_value() || die.suspend_pending) return;
    if (die.op_end <= now_ + cfg_.suspend_overhead_ns) return;  // about to finish
    die.suspend_pending = true;
    ++die.op_gen;  // cancels the scheduled completion
    push_event({now_ + cfg_.suspend_overhead_ns, 0, EventKind::kSuspendPoint,
                static_cast<std::size_t>(die_id), -1, die.op_gen});
  }

  void on_suspend_point(const SimEvent& ev) {
    Die& die = dies_[ev.target];
    if (ev.gen != die.op_gen) return;
    die.suspend_pending = false;
    die.op_running = false;
    die.suspended = Suspended{die.active_op, die.op_kind, die.op_end - now_};
    die.active_op = kNone;
    try_dispatch(static_cast<int>(ev.target));
  }

  void on_op_done(const SimEvent& ev, OpKind kind) {
    Die& die = dies_[ev.target];
    if (ev.gen != die.op_gen) return;  // superseded by a suspension
    die.op_running = false;
    const std::size_t id = die.active_op;
    die.active_op = kNone;
    if (kind == OpKind::kErase) {
      device_.erase_block(subops_[id].addr);
    } else {
      device_.record_program(subops_[id].addr, now_);
    }
    complete_subop(id);
    try_dispatch(static_cast<int>(ev.target));
  }

  // --- read chains -----------------------------------------------------------

  void start_read(int die_id, std::size_t id) {
    Die& die = dies_[die_id];
    SubOp& op = subops_[id];
    die.reads_in_flight += 1;
    die.owner_unresolved = true;

    const OperatingCondition cond =
        device_.condition_of(op.addr, now_, cfg_.base_condition);
    bool overflow = false;
    if (cfg_.forced_nrr.has_value()) {
      op.sampled = std::min(*cfg_.forced_nrr, cfg_.calibration.max_retry_steps);
      overflow = *cfg_.forced_nrr > cfg_.calibration.max_retry_steps;
    } else {
      op.sampled = sample_retry_steps(cfg_.calibration, cond, op.page_uid,
                                      cfg_.seed, &report_.clamp_warnings, &overflow);
    }
    op.steps = transform_steps(cfg_.policy, op.sampled);
    op.retry_failure = overflow;
    report_.sampled_nrr[op.sampled] += 1;
    report_.executed_nrr[op.steps] += 1;
    if (overflow) report_.retry_failures += 1;

    const PageType page = page_type_of(op.addr);
    op.sense_default_ns = sense_latency(cfg_.timing, page);
    double reduction = 0.0;
    if (traits_.adaptive && op.steps > 0) {
      reduction = reduction_.reduction_for(cond, &report_.rpt_miss_warnings);
    }
    op.sense_retry_ns = traits_.adaptive
                            ? reduced_sense_latency(cfg_.timing, page, reduction)
                            : op.sense_default_ns;
    op.outlier = false;
    if (traits_.adaptive && op.steps > 0 &&
        cfg_.calibration.outlier_probability > 0.0) {
      SplitMix64 rng(SplitMix64::mix(SplitMix64::mix(cfg_.seed ^ 0x5bd1e995ULL) ^
                                     static_cast<std::uint64_t>(op.page_uid)));
      op.outlier = rng.next_unit() <= cfg_.calibration.outlier_probability;
    }
    op.rerun = false;
    op.transfer_done.assign(static_cast<std::size_t>(op.steps) + 1, 0);

    die.pending = PendingSense{id, 0, now_};
    try_commit_sense(die_id);
  }

  Ns sense_duration(const SubOp& op, int step) const {
    if (step == 0) return op.sense_default_ns;
    return op.rerun ? op.sense_default_ns : op.sense_retry_ns;
  }

  // Commit the die's next sense once its start time is known and the page
  // buffer can take the previous sense's data (the sense two back must
  // have transferred out).
  void try_commit_sense(int die_id) {
    Die& die = dies_[die_id];
    if (!die.pending.has_value() || die.pending->earliest == kUnknown) return;
    if (die.hist_count == 2) {
      const SenseRef& two_back = die.hist[0];
      const SubOp& prev = subops_[two_back.subop];
      const bool speculative = two_back.step > prev.steps;
      if (!speculative && !prev.transfer_done[two_back.step]) return;
    }
    const PendingSense p = *die.pending;
    const Ns start = std::max(p.earliest, die.sense_free_at);
    const Ns end = start + sense_duration(subops_[p.subop], p.step);
    die.sense_free_at = end;
    die.hist[0] = die.hist[1];
    die.hist[1] = {p.subop, p.step};
    die.hist_count = std::min(die.hist_count + 1, 2);
    push_event({end, 0, EventKind::kSenseDone, p.subop, p.step, die.chain_gen});
    die.pending.reset();
    plan_next_sense(die_id, p.subop, p.step);
  }

  // Decide which sense follows the one just committed.
  void plan_next_sense(int die_id, std::size_t id, int step) {
    Die& die = dies_[die_id];
    SubOp& op = subops_[id];
    if (step == 0 && op.steps > 0) {
      // The first retry starts only once the initial read's decode fails;
      // the verdict timestamp patches `earliest`.
      die.pending = PendingSense{id, 1, kUnknown};
      return;
    }
    if (traits_.pipelined && step >= 1 && step <= op.steps) {
      // CACHE READ: the next retry sense (and one speculative step past
      // the chain) starts back-to-back with this one.
      die.pending = PendingSense{id, step + 1, now_};
      try_commit_sense(die_id);
      return;
    }
    if (step == 0 && op.steps == 0 && traits_.pipelined) {
      // A regular read: its outcome needs no further sense, so a queued
      // read may overlap this one's transfer and decode.
      die.owner_unresolved = false;
      try_dispatch(die_id);
    }
  }

  void on_sense_done(const SimEvent& ev) {
    SubOp& op = subops_[ev.target];
    Die& die = dies_[op.die];
    if (ev.gen != die.chain_gen) return;  // chain was reset
    if (ev.step <= op.steps) {
      request_transfer(op.channel, {ev.target, ev.step});
    }
    // The speculative sense keeps its data in the latches; nothing moves.
  }

  // --- channel bus and ECC engine ---------------------------------------------

  void request_transfer(int channel_id, ChannelJob job) {
    Channel& ch = channels_[channel_id];
    ch.transfer_q.push_back(job);
    if (!ch.bus_busy) {
      ch.bus_busy = true;
      push_event({now_, 0, EventKind::kTransferStart,
                  static_cast<std::size_t>(channel_id)});
    }
  }

  void on_transfer_start(const SimEvent& ev) {
    Channel& ch = channels_[ev.target];
    push_event({now_ + cfg_.timing.tdma_ns, 0, EventKind::kTransferDone, ev.target,
                ch.transfer_q.front().step, 0});
  }

  void on_transfer_done(const SimEvent& ev) {
    Channel& ch = channels_[ev.target];
    const ChannelJob job = ch.transfer_q.front();
    ch.transfer_q.pop_front();
    if (!ch.transfer_q.empty()) {
      push_event({now_, 0, EventKind::kTransferStart, ev.target});
    } else {
      ch.bus_busy = false;
    }

    SubOp& op = subops_[job.subop];
    if (job.step < 0) {
      // Write data-in landed; program once the die quiets down.
      Die& die = dies_[op.die];
      die.write_transfer_inflight = false;
      die.ready_writes.push_back(job.subop);
      try_dispatch(op.die);
      return;
    }
    op.transfer_done[job.step] = 1;
    request_ecc(static_cast<int>(ev.target), job);
    try_commit_sense(op.die);  // a stalled pipeline may resume now
  }

  void request_ecc(int channel_id, ChannelJob job) {
    Channel& ch = channels_[channel_id];
    ch.ecc_q.push_back(job);
    if (!ch.ecc_busy) {
      ch.ecc_busy = true;
      push_event({now_ + cfg_.timing.tecc_ns, 0, EventKind::kEccDone,
                  static_cast<std::size_t>(channel_id), job.step, 0});
    }
  }

  void on_ecc_done(const SimEvent& ev) {
    Channel& ch = channels_[ev.target];
    const ChannelJob job = ch.ecc_q.front();
    ch.ecc_q.pop_front();
    if (!ch.ecc_q.empty()) {
      push_event({now_ + cfg_.timing.tecc_ns, 0, EventKind::kEccDone, ev.target,
                  ch.ecc_q.front().step, 0});
    } else {
      ch.ecc_busy = false;
    }
    handle_ecc_verdict(job.subop, job.step);
  }

  void handle_ecc_verdict(std::size_t id, int step) {
    SubOp& op = subops_[id];
    Die& die = dies_[op.die];
    const int die_id = op.die;

    if (step < op.steps) {
      // Decode failed, the chain continues.
      if (step == 0) {
        Ns earliest = now_;
        if (traits_.adaptive) {
          earliest += cfg_.timing.tset_ns;  // SET FEATURE: reduced tPRE
          die.tpre_override = true;
        }
        if (die.pending.has_value() && die.pending->subop == id &&
            die.pending->step == 1) {
          die.pending->earliest = earliest;
        } else {
          die.pending = PendingSense{id, 1, earliest};
        }
        try_commit_sense(die_id);
      } else if (!traits_.pipelined) {
        die.pending = PendingSense{id, step + 1, now_};
        try_commit_sense(die_id);
      }
      return;
    }

    // Final-step verdict.
    if (op.outlier && !op.rerun && !op.retry_failure) {
      start_outlier_rerun(die_id, id);
      return;
    }
    finish_read(die_id, id);
  }

  // The reduced-tPRE chain failed on an outlier page: roll the chip back
  // to the default timing and repeat the whole retry chain.
  void start_outlier_rerun(int die_id, std::size_t id) {
    Die& die = dies_[die_id];
    SubOp& op = subops_[id];
    op.rerun = true;
    op.transfer_done.assign(op.transfer_done.size(), 0);
    op.transfer_done[0] = 1;
    Ns earliest = now_ + cfg_.timing.tset_ns;  // roll back to default tPRE
    die.tpre_override = false;
    if (traits_.pipelined) {
      // Kill the in-flight speculative sense before restarting; the sense
      // unit frees when the RESET completes, not when the dead sense
      // would have ended.
      ++die.chain_gen;
      die.hist_count = 0;
      die.sense_free_at = now_ + cfg_.timing.trst_ns;
      earliest += cfg_.timing.trst_ns;
    }
    die.pending = PendingSense{id, 1, earliest};
    try_commit_sense(die_id);
  }

  void finish_read(int die_id, std::size_t id) {
    Die& die = dies_[die_id];
    SubOp& op = subops_[id];
    die.tpre_override = false;  // rollback to the default tPRE
    if (traits_.pipelined && op.steps > 0) {
      // RESET kills the speculative sense. It never delays this request's
      // response, but it holds the die for tRST.
      ++die.chain_gen;
      die.hist_count = 0;
      die.resetting = true;
      die.sense_free_at = now_ + cfg_.timing.trst_ns;
      push_event({now_ + cfg_.timing.trst_ns, 0, EventKind::kResetDone,
                  static_cast<std::size_t>(die_id)});
      complete_subop(id);
      return;
    }
    die.owner_unresolved = false;
    die.reads_in_flight -= 1;
    complete_subop(id);
    try_dispatch(die_id);
  }

  void on_reset_done(const SimEvent& ev) {
    Die& die = dies_[ev.target];
    die.resetting = false;
    die.owner_unresolved = false;
    die.reads_in_flight -= 1;
    try_dispatch(static_cast<int>(ev.target));
  }

  // --- completion --------------------------------------------------------------

  void complete_subop(std::size_t id) {
    const SubOp& op = subops_[id];
    if (op.request == kNone) {
      ++completed_;  // injected op
      return;
    }
    RequestAgg& agg = requests_[op.request];
    agg.completion = std::max(agg.completion, now_);
    if (--agg.remaining == 0) ++completed_;
  }

  SimConfig cfg_;
  PolicyTraits traits_;
  ReductionSource reduction_ = ReductionSource::none();
  std::shared_ptr<const RptTable> rpt_;
  DeviceState device_;
  std::vector<Die> dies_;
  std::vector<Channel> channels_;
  std::vector<SubOp> subops_;
  std::vector<SubOp> injected_;
  std::vector<RequestAgg> requests_;
  std::vector<Ns> arrivals_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<>> events_;
  std::uint64_t next_seq_ = 0;
  Ns now_ = 0;
  std::size_t completed_ = 0;
  RunReport report_;
};

}  // namespace

RunReport run_simulation(const SimConfig& cfg, const std::vector<IoRequest>& workload) {
  Simulation sim(cfg, workload);
  return sim.run();
}

}  // namespace retrysim
