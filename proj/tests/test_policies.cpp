#include "doctest.h"

#include "retrysim/policies.hpp"

using namespace retrysim;

namespace {
const TimingParams& timing() {
  static const TimingParams t = TimingParams::defaults();
  return t;
}
}  // namespace

TEST_CASE("policy names round trip") {
  for (PolicyKind kind : all_policies()) {
    CHECK(parse_policy(to_string(kind)) == kind);
  }
  CHECK_THROWS_WITH_AS(parse_policy("bogus"), doctest::Contains("pnar2"),
                       ConfigError);
  CHECK(all_policies().size() == 7);
}

TEST_CASE("step transforms per policy") {
  CHECK(transform_steps(PolicyKind::kBaseline, 8) == 8);
  CHECK(transform_steps(PolicyKind::kPr2, 8) == 8);
  CHECK(transform_steps(PolicyKind::kNoRr, 8) == 0);
  CHECK(transform_steps(PolicyKind::kPso, 20) == 6);
  CHECK(transform_steps(PolicyKind::kPsoPnAr2, 20) == 6);
  CHECK(transform_steps(PolicyKind::kPso, 2) == 2);
}

TEST_CASE("closed-form read execution") {
  SUBCASE("baseline") {
    const auto lat = execute_read(PolicyKind::kBaseline, 8, PageType::kLsb,
                                  timing(), 0.0);
    CHECK(lat.initial_ns == 114'000);
    CHECK(lat.retry_ns == 912'000);  // 8 x (78 + 16 + 20) us
    CHECK(lat.set_feature_ns == 0);
    CHECK(lat.response_ns() == 1'026'000);
  }
  SUBCASE("pr2 pipelines the chain") {
    const auto lat = execute_read(PolicyKind::kPr2, 8, PageType::kLsb, timing(), 0.0);
    CHECK(lat.retry_ns == 660'000);  // 8 x 78 + 16 + 20 us
    CHECK(lat.response_ns() == 774'000);
    CHECK(lat.reset_tail_ns == 5'000);
  }
  SUBCASE("pr2 single step equals baseline") {
    const auto pr2 = execute_read(PolicyKind::kPr2, 1, PageType::kLsb, timing(), 0.0);
    const auto base =
        execute_read(PolicyKind::kBaseline, 1, PageType::kLsb, timing(), 0.0);
    CHECK(pr2.retry_ns == 114'000);
    CHECK(pr2.response_ns() == base.response_ns());
  }
  SUBCASE("pnar2 adds tSET and reduced retry senses") {
    const auto lat = execute_read(PolicyKind::kPnAr2, 8, PageType::kLsb, timing(), 0.40);
    CHECK(lat.set_feature_ns == 1'000);
    CHECK(lat.retry_ns == 8 * 58'800 + 36'000);
    CHECK(lat.response_ns() == 621'400);
  }
  SUBCASE("ar2 alone keeps serialized steps") {
    const auto lat = execute_read(PolicyKind::kAr2, 8, PageType::kLsb, timing(), 0.40);
    CHECK(lat.retry_ns == 8 * (58'800 + 36'000));
    CHECK(lat.response_ns() == 114'000 + 1'000 + 8 * 94'800);
    CHECK(lat.reset_tail_ns == 0);
  }
  SUBCASE("no retries means the plain read for every policy") {
    for (PolicyKind kind : all_policies()) {
      const auto lat = execute_read(kind, 0, PageType::kMsb, timing(), 0.40);
      CHECK(lat.response_ns() == 114'000);
      CHECK(lat.set_feature_ns == 0);
      CHECK(lat.reset_tail_ns == 0);
    }
  }
  SUBCASE("rejects negative steps") {
    CHECK_THROWS_AS(execute_read(PolicyKind::kBaseline, -1, PageType::kLsb,
                                 timing(), 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("pnar2 beats pr2 whenever a retry happens") {
  for (int n = 1; n <= 30; ++n) {
    for (PageType page : {PageType::kLsb, PageType::kCsb, PageType::kMsb}) {
      const Ns pr2 = execute_read(PolicyKind::kPr2, n, page, timing(), 0.0).response_ns();
      const Ns pn = execute_read(PolicyKind::kPnAr2, n, page, timing(), 0.40).response_ns();
      CHECK(pn < pr2);
    }
  }
}

TEST_CASE("pr2 gap identity against baseline") {
  for (int n = 1; n <= 30; ++n) {
    const Ns base =
        execute_read(PolicyKind::kBaseline, n, PageType::kCsb, timing(), 0.0)
            .response_ns();
    const Ns pr2 =
        execute_read(PolicyKind::kPr2, n, PageType::kCsb, timing(), 0.0)
            .response_ns();
    CHECK(base - pr2 == (n - 1) * (timing().tdma_ns + timing().tecc_ns));
  }
}

TEST_CASE("reduction sources") {
  const auto fixed = ReductionSource::fixed(0.47);
  CHECK(fixed.reduction_for({0, 0, 30}) == 0.47);

  const auto rpt = std::make_shared<const RptTable>(
      build_rpt(RetryCalibration::defaults(), default_rpt_pec_buckets(),
                default_rpt_retention_buckets()));
  const auto from_rpt = ReductionSource::from_rpt(rpt);
  CHECK(from_rpt.reduction_for({0, 0, 30}) == doctest::Approx(0.54));
  CHECK(from_rpt.reduction_for({2000, 12, 30}) == doctest::Approx(0.40));
  CHECK(rpt_lookup(*rpt, {1500, 7, 30}) == doctest::Approx(rpt->entry(4, 4)));

  CHECK(ReductionSource::none().reduction_for({0, 0, 30}) == 0.0);
}
