#include "doctest.h"

#include <sstream>

#include "retrysim/analytics.hpp"

using namespace retrysim;

namespace {
const TimingParams& timing() {
  static const TimingParams t = TimingParams::defaults();
  return t;
}

RunReport make_report(PolicyKind policy, std::vector<Ns> responses) {
  RunReport r;
  r.key.policy = policy;
  r.key.pec = 1000;
  r.key.retention_months = 6;
  r.key.seed = 42;
  r.key.workload_id = "w";
  r.responses = std::move(responses);
  return r;
}
}  // namespace

TEST_CASE("oracle latency spot values") {
  CHECK(oracle_latency(PolicyKind::kBaseline, 8, PageType::kLsb, timing(), 0.0) ==
        1'026'000);
  CHECK(oracle_latency(PolicyKind::kPr2, 8, PageType::kLsb, timing(), 0.0) ==
        774'000);
  CHECK(oracle_latency(PolicyKind::kPnAr2, 8, PageType::kLsb, timing(), 0.40) ==
        621'400);
  CHECK(oracle_latency(PolicyKind::kPso, 20, PageType::kLsb, timing(), 0.0) ==
        oracle_latency(PolicyKind::kBaseline, 6, PageType::kLsb, timing(), 0.0));
  for (PolicyKind kind : all_policies()) {
    CHECK(oracle_latency(kind, 0, PageType::kLsb, timing(), 0.40) == 114'000);
  }
}

TEST_CASE("oracle mean latency over the page mix") {
  // At zero steps every policy degenerates to tR + tDMA + tECC.
  for (PolicyKind kind : all_policies()) {
    CHECK(oracle_mean_latency_ns(kind, 0.0, timing(), 0.40) ==
          doctest::Approx(127'000.0));
  }
  // Matches the integer oracle at integral step counts.
  const double base8 =
      (oracle_latency(PolicyKind::kBaseline, 8, PageType::kLsb, timing(), 0.0) +
       oracle_latency(PolicyKind::kBaseline, 8, PageType::kCsb, timing(), 0.0) +
       oracle_latency(PolicyKind::kBaseline, 8, PageType::kMsb, timing(), 0.0)) /
      3.0;
  CHECK(oracle_mean_latency_ns(PolicyKind::kBaseline, 8.0, timing(), 0.0) ==
        doctest::Approx(base8));

  // The headline contention-free gain at the worst published condition.
  const double base = oracle_mean_latency_ns(PolicyKind::kBaseline, 19.9, timing(), 0.0);
  const double pnar2 = oracle_mean_latency_ns(PolicyKind::kPnAr2, 19.9, timing(), 0.40);
  CHECK(100.0 * (1.0 - pnar2 / base) == doctest::Approx(42.0).epsilon(2.0 / 42.0));
}

TEST_CASE("report statistics") {
  RunReport r = make_report(PolicyKind::kBaseline, {});
  CHECK(r.mean_ns() == 0.0);

  r.responses = {5'000, 1'000, 3'000, 2'000, 4'000};
  CHECK(r.mean_ns() == doctest::Approx(3'000.0));
  CHECK(r.percentile_ns(0.50) == 3'000);
  CHECK(r.percentile_ns(0.95) == 5'000);
  CHECK(r.percentile_ns(0.99) == 5'000);
  CHECK(r.percentile_ns(0.20) == 1'000);

  r.sampled_nrr = {{0, 2}, {10, 2}};
  CHECK(r.mean_sampled_nrr() == doctest::Approx(5.0));
}

TEST_CASE("compare normalizes against baseline") {
  std::vector<RunReport> reports;
  reports.push_back(make_report(PolicyKind::kBaseline, {1'000'000, 1'000'000}));
  reports.push_back(make_report(PolicyKind::kPnAr2, {600'000, 600'000}));

  const auto rows = compare(reports);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].reduction_vs_baseline_pct == doctest::Approx(0.0));
  CHECK(rows[1].reduction_vs_baseline_pct == doctest::Approx(40.0));

  // Ratio identity: (1 - red(A vs B)) * (1 - red(B vs A)) == 1.
  const double ab = 1.0 - 600'000.0 / 1'000'000.0;
  const double ba = 1.0 - 1'000'000.0 / 600'000.0;
  CHECK((1.0 - ab) * (1.0 - ba) == doctest::Approx(1.0));

  // Mismatched keys are rejected.
  reports[1].key.seed = 43;
  CHECK_THROWS_AS(compare(reports), std::invalid_argument);

  // Missing baseline is rejected.
  std::vector<RunReport> no_base;
  no_base.push_back(make_report(PolicyKind::kPr2, {1}));
  CHECK_THROWS_AS(compare(no_base), std::invalid_argument);
}

TEST_CASE("csv emission and parse round trip") {
  std::vector<RunReport> reports;
  reports.push_back(make_report(PolicyKind::kBaseline, {1'026'000, 114'000}));
  reports.push_back(make_report(PolicyKind::kPr2, {774'000, 114'000}));

  std::stringstream csv;
  emit_csv(reports, csv);
  const auto rows = parse_csv(csv);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].policy == "baseline");
  CHECK(rows[0].pec == 1000);
  CHECK(rows[0].retention_months == 6);
  CHECK(rows[0].mean_us == doctest::Approx(570.0));
  CHECK(rows[1].policy == "pr2");
  CHECK(rows[1].reduction_vs_baseline_pct > 0.0);

  // Emitted -> parsed -> re-emitted is byte-identical.
  std::stringstream csv2;
  emit_csv(reports, csv2);
  CHECK(csv.str() == csv2.str());

  // An empty report set still yields the header.
  std::stringstream empty;
  emit_csv({}, empty);
  CHECK(empty.str() ==
        "policy,pec,retention_months,mean_us,p50_us,p95_us,p99_us,"
        "reduction_vs_baseline_pct\n");
  const auto no_rows = parse_csv(empty);
  CHECK(no_rows.empty());

  std::stringstream bad("not,a,report\n");
  CHECK_THROWS_AS(parse_csv(bad), ConfigError);
}

TEST_CASE("sweep emission row count") {
  std::vector<RunReport> reports;
  for (double pec : {0.0, 1000.0, 2000.0}) {
    for (PolicyKind kind : {PolicyKind::kBaseline, PolicyKind::kPr2,
                            PolicyKind::kAr2, PolicyKind::kPnAr2, PolicyKind::kNoRr}) {
      RunReport r = make_report(kind, {100'000});
      r.key.pec = pec;
      reports.push_back(r);
    }
  }
  std::stringstream csv;
  emit_csv(reports, csv);
  const auto rows = parse_csv(csv);
  CHECK(rows.size() == 15);
}

TEST_CASE("json emission is parseable and carries the histogram") {
  RunReport r = make_report(PolicyKind::kBaseline, {114'000});
  r.sampled_nrr = {{0, 1}};
  std::stringstream js;
  emit_json({r}, js);
  const auto parsed = nlohmann::json::parse(js.str());
  REQUIRE(parsed.is_array());
  CHECK(parsed[0]["policy"] == "baseline");
  CHECK(parsed[0]["mean_us"] == doctest::Approx(114.0));
  CHECK(parsed[0]["sampled_nrr_histogram"]["0"] == 1);
}
