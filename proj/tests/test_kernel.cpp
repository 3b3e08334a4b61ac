#include "doctest.h"

#include "retrysim/config.hpp"
#include "retrysim/kernel.hpp"

using namespace retrysim;

namespace {

SimConfig isolated_config(PolicyKind policy, int n_rr, double reduction = 0.0) {
  SimConfig cfg;
  cfg.policy = policy;
  cfg.forced_nrr = n_rr;
  cfg.reduction = ReductionSource::fixed(reduction);
  cfg.workload_id = "test";
  return cfg;
}

IoRequest read_at(Ns arrival, std::int64_t lba, std::int64_t pages = 1) {
  IoRequest req;
  req.arrival = arrival;
  req.op = IoOp::kRead;
  req.lba = lba;
  req.size_bytes = pages * 16 * 1024;
  req.cold = true;
  return req;
}

IoRequest write_at(Ns arrival, std::int64_t lba) {
  IoRequest req;
  req.arrival = arrival;
  req.op = IoOp::kWrite;
  req.lba = lba;
  req.size_bytes = 16 * 1024;
  return req;
}

}  // namespace

TEST_CASE("empty workload gives an empty report") {
  const RunReport r = run_simulation(isolated_config(PolicyKind::kBaseline, 0), {});
  CHECK(r.responses.empty());
  CHECK(r.reads == 0);
  CHECK(r.writes == 0);
}

TEST_CASE("single isolated read matches the closed forms") {
  // Baseline, no retry: tR + tDMA + tECC.
  RunReport r = run_simulation(isolated_config(PolicyKind::kBaseline, 0),
                               {read_at(0, 0)});
  REQUIRE(r.responses.size() == 1);
  CHECK(r.responses[0] == 114'000);

  // Baseline, 8 retries: response 1026 us (retry part 912 us).
  r = run_simulation(isolated_config(PolicyKind::kBaseline, 8), {read_at(0, 0)});
  CHECK(r.responses[0] == 1'026'000);

  // PR2 pipelines the chain: 774 us; one step degenerates to baseline.
  r = run_simulation(isolated_config(PolicyKind::kPr2, 8), {read_at(0, 0)});
  CHECK(r.responses[0] == 774'000);
  r = run_simulation(isolated_config(PolicyKind::kPr2, 1), {read_at(0, 0)});
  CHECK(r.responses[0] == 228'000);

  // PnAR2 at a 40% reduction: 621.4 us.
  r = run_simulation(isolated_config(PolicyKind::kPnAr2, 8, 0.40), {read_at(0, 0)});
  CHECK(r.responses[0] == 621'400);

  // PSO executes a shortened baseline chain.
  r = run_simulation(isolated_config(PolicyKind::kPso, 20), {read_at(0, 0)});
  CHECK(r.responses[0] == 114'000 + 6 * 114'000);
  CHECK(r.executed_nrr.at(6) == 1);
  CHECK(r.sampled_nrr.at(20) == 1);
}

TEST_CASE("identical seeds give bit-identical reports") {
  SimConfig cfg;
  cfg.policy = PolicyKind::kPnAr2;
  cfg.base_condition = {2000, 6, 30};
  cfg.seed = 77;
  cfg.workload_id = "det";

  WorkloadSpec spec;
  spec.request_count = 2'000;
  const auto workload = synthesize(spec, cfg.geometry.page_bytes, cfg.seed);

  const RunReport a = run_simulation(cfg, workload);
  const RunReport b = run_simulation(cfg, workload);
  CHECK(a.responses == b.responses);
  CHECK(a.sampled_nrr == b.sampled_nrr);
  CHECK(a.responses.size() == workload.size());
}

TEST_CASE("cache read overlaps back-to-back regular reads") {
  // Two reads of the same die, both without retries. With CACHE READ the
  // second sense starts at the first sense's end: done at 192 us instead
  // of the fully serialized 228 us.
  const auto reads = std::vector<IoRequest>{read_at(0, 0), read_at(0, 0)};

  RunReport r = run_simulation(isolated_config(PolicyKind::kPr2, 0), reads);
  REQUIRE(r.responses.size() == 2);
  CHECK(r.responses[0] == 114'000);
  CHECK(r.responses[1] == 192'000);

  r = run_simulation(isolated_config(PolicyKind::kBaseline, 0), reads);
  CHECK(r.responses[0] == 114'000);
  CHECK(r.responses[1] == 228'000);
}

TEST_CASE("transfer longer than the sense still starts the next sense on time") {
  SimConfig cfg = isolated_config(PolicyKind::kPr2, 0);
  cfg.timing.tdma_ns = 100'000;  // dwarfs the 78 us sense
  const auto reads = std::vector<IoRequest>{read_at(0, 0), read_at(0, 0)};
  const RunReport r = run_simulation(cfg, reads);
  // First: sense 78, transfer 100, ecc 20 -> 198. Second sense starts at
  // 78 (sense end), its transfer waits for the bus: 178+100+20 = 298.
  CHECK(r.responses[0] == 198'000);
  CHECK(r.responses[1] == 298'000);
}

TEST_CASE("cross-die reads on one channel serialize on the bus and ECC") {
  // lba 0 -> (ch 0, die 0); lba 4 -> (ch 0, die 1): senses in parallel,
  // then the 16 us transfer and the 20 us decode queue per channel.
  const auto reads = std::vector<IoRequest>{read_at(0, 0), read_at(0, 4)};
  const RunReport r = run_simulation(isolated_config(PolicyKind::kBaseline, 0), reads);
  CHECK(r.responses[0] == 114'000);
  CHECK(r.responses[1] == 134'000);
}

TEST_CASE("multi-page request completes with its slowest page") {
  SimConfig cfg = isolated_config(PolicyKind::kBaseline, 0);
  cfg.geometry.channels = 1;
  cfg.geometry.dies_per_channel = 1;
  cfg.geometry.planes_per_die = 1;
  cfg.geometry.user_bytes = cfg.geometry.raw_bytes();
  // Both pages land on the single die; page 1 is a CSB page (153 us).
  const RunReport r = run_simulation(cfg, {read_at(0, 0, 2)});
  REQUIRE(r.responses.size() == 1);
  CHECK(r.responses[0] == 114'000 + 153'000);
}

TEST_CASE("reads suspend an in-flight program") {
  // Injected program occupies the die from t=0 for 700 us. A read at
  // t=100 us is served immediately; the program finishes late by exactly
  // the read chain.
  SimConfig cfg = isolated_config(PolicyKind::kBaseline, 0);
  cfg.injected_ops = {{0, 0, false}};
  const RunReport r = run_simulation(cfg, {read_at(100'000, 0)});
  CHECK(r.responses[0] == 114'000);

  // Observable through a host write instead: transfer [50,66), program
  // would span [66,766), but the read chain [100,214) pushes its
  // completion to 880.
  cfg = isolated_config(PolicyKind::kBaseline, 0);
  const RunReport w =
      run_simulation(cfg, {write_at(50'000, 0), read_at(100'000, 0)});
  CHECK(w.responses[1] == 114'000);
  CHECK(w.responses[0] == 880'000 - 50'000);
}

TEST_CASE("read at an idle die takes no suspension path") {
  SimConfig cfg = isolated_config(PolicyKind::kBaseline, 0);
  const RunReport r = run_simulation(cfg, {read_at(0, 0), write_at(500'000, 64)});
  CHECK(r.responses[0] == 114'000);
  // Write on an idle die: 16 us transfer + 700 us program.
  CHECK(r.responses[1] == 716'000);
}

TEST_CASE("two reads during one erase extend it by both chains") {
  SimConfig cfg = isolated_config(PolicyKind::kBaseline, 0);
  cfg.injected_ops = {{0, 0, true}};  // erase, 5 ms
  // The write queues behind the erase; its program start marks the erase
  // completion. Reads at 100 and 200 us suspend the erase once and queue
  // once; the erase resumes after both chains (228 us total).
  const RunReport r = run_simulation(
      cfg, {write_at(50'000, 64), read_at(100'000, 128), read_at(200'000, 128)});
  CHECK(r.responses[1] == 114'000);
  CHECK(r.responses[2] == 228'000 - 200'000 + 100'000 + 114'000 - 114'000 + 14'000);
  // read 2 arrives at 200, waits for read 1 (till 214), then runs 114.
  CHECK(r.responses[2] == 128'000);
  // Erase: suspended at 100 with 4900 left, resumes at 328, done at 5228;
  // program then runs 700 us.
  CHECK(r.responses[0] == 5'928'000 - 50'000);
}

TEST_CASE("erase then read is flagged as a read before program") {
  SimConfig cfg = isolated_config(PolicyKind::kBaseline, 0);
  cfg.forced_nrr.reset();  // force the condition path to run
  cfg.injected_ops = {{0, 0, true}};
  CHECK_THROWS_AS(run_simulation(cfg, {read_at(6'000'000, 0)}), InternalError);
}

TEST_CASE("pr2 beats baseline per request with the exact contention-free gap") {
  for (int n : {1, 2, 5, 20}) {
    const Ns base = run_simulation(isolated_config(PolicyKind::kBaseline, n),
                                   {read_at(0, 0)})
                        .responses[0];
    const Ns pr2 =
        run_simulation(isolated_config(PolicyKind::kPr2, n), {read_at(0, 0)})
            .responses[0];
    CHECK(base - pr2 == (n - 1) * 36'000);
  }
}

TEST_CASE("pr2 reset occupies the die after a chain") {
  // Chain of 1 retry ends at 228; RESET holds the die until 233, so a
  // second queued read starts there instead of 228.
  const auto reads = std::vector<IoRequest>{read_at(0, 0), read_at(0, 0)};
  const RunReport r = run_simulation(isolated_config(PolicyKind::kPr2, 1), reads);
  CHECK(r.responses[0] == 228'000);
  CHECK(r.responses[1] == 233'000 + 228'000);

  // Baseline has no reset: the second chain starts right at 228.
  const RunReport b = run_simulation(isolated_config(PolicyKind::kBaseline, 1), reads);
  CHECK(b.responses[1] == 456'000);
}

TEST_CASE("ar2 outlier pages fall back to the default-timing chain") {
  SimConfig cfg = isolated_config(PolicyKind::kAr2, 2, 0.40);
  cfg.calibration.outlier_probability = 1.0;
  RunReport r = run_simulation(cfg, {read_at(0, 0)});
  // 114 + tSET + 2 x 94.8 (reduced, fails) + tSET + 2 x 114 (default).
  CHECK(r.responses[0] == 114'000 + 1'000 + 189'600 + 1'000 + 228'000);

  cfg = isolated_config(PolicyKind::kPnAr2, 2, 0.40);
  cfg.calibration.outlier_probability = 1.0;
  r = run_simulation(cfg, {read_at(0, 0)});
  // 114 + tSET + (2 x 58.8 + 36) fails -> RESET + tSET -> 2 x 78 + 36.
  CHECK(r.responses[0] == 114'000 + 1'000 + 153'600 + 5'000 + 1'000 + 192'000);

  // Probability zero never triggers the fallback.
  cfg.calibration.outlier_probability = 0.0;
  r = run_simulation(cfg, {read_at(0, 0)});
  CHECK(r.responses[0] == 268'600);
}

TEST_CASE("retry failure past the vendor cap is counted") {
  SimConfig cfg = isolated_config(PolicyKind::kBaseline, 60);  // cap is 50
  const RunReport r = run_simulation(cfg, {read_at(0, 0)});
  CHECK(r.retry_failures == 1);
  CHECK(r.responses[0] == 114'000 + 50 * 114'000);
}

TEST_CASE("norr ignores the sampled steps") {
  SimConfig cfg;
  cfg.policy = PolicyKind::kNoRr;
  cfg.base_condition = {2000, 12, 30};
  cfg.workload_id = "norr";
  const RunReport r = run_simulation(cfg, {read_at(0, 0)});
  CHECK(r.responses[0] == 114'000);
  CHECK(r.executed_nrr.at(0) == 1);
  CHECK(r.mean_sampled_nrr() > 10.0);  // the model still reports the need
}

TEST_CASE("request and completion counts are conserved") {
  SimConfig cfg;
  cfg.policy = PolicyKind::kPnAr2;
  cfg.base_condition = {1000, 3, 30};
  cfg.workload_id = "conserve";
  WorkloadSpec spec;
  spec.request_count = 3'000;
  spec.read_ratio = 0.8;
  spec.cold_ratio = 0.5;
  const auto workload = synthesize(spec, cfg.geometry.page_bytes, 5);
  const RunReport r = run_simulation(cfg, workload);
  CHECK(r.responses.size() == workload.size());
  CHECK(r.reads + r.writes == static_cast<std::int64_t>(workload.size()));
  for (Ns response : r.responses) CHECK(response > 0);

  std::int64_t sampled_pages = 0;
  for (const auto& [steps, pages] : r.sampled_nrr) sampled_pages += pages;
  CHECK(sampled_pages == r.reads);  // single-page requests
}
