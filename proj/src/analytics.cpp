#include "retrysim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace retrysim {

bool RunKey::comparable_with(const RunKey& other) const {
  return pec == other.pec && retention_months == other.retention_months &&
         temp_c == other.temp_c && seed == other.seed &&
         workload_id == other.workload_id;
}

double RunReport::mean_ns() const {
  if (responses.empty()) return 0.0;
  double total = 0.0;
  for (Ns r : responses) total += static_cast<double>(r);
  return total / static_cast<double>(responses.size());
}

Ns RunReport::percentile_ns(double q) const {
  if (responses.empty()) return 0;
  std::vector<Ns> sorted = responses;
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  if (rank == 0) rank = 1;
  return sorted[rank - 1];
}

double RunReport::mean_sampled_nrr() const {
  std::int64_t count = 0;
  double total = 0.0;
  for (const auto& [steps, pages] : sampled_nrr) {
    count += pages;
    total += static_cast<double>(steps) * static_cast<double>(pages);
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

Ns oracle_latency(PolicyKind policy, int n_rr, PageType page,
                  const TimingParams& timing, double reduction) {
  if (n_rr < 0) throw std::invalid_argument("retry steps must be >= 0");
  const int steps = transform_steps(policy, n_rr);
  return execute_read(policy, steps, page, timing, reduction).response_ns();
}

double oracle_mean_latency_ns(PolicyKind policy, double mean_nrr,
                              const TimingParams& timing, double reduction) {
  const PolicyTraits traits = traits_of(policy);
  const double n = traits.no_retry ? 0.0 : mean_nrr;

  const PageType mix[] = {PageType::kLsb, PageType::kCsb, PageType::kMsb};
  double total = 0.0;
  for (PageType page : mix) {
    const auto t_read = static_cast<double>(sense_latency(timing, page));
    const auto t_tail = static_cast<double>(timing.tdma_ns + timing.tecc_ns);
    const double t_retry_read =
        traits.adaptive
            ? static_cast<double>(reduced_sense_latency(timing, page, reduction))
            : t_read;
    double response = t_read + t_tail;
    if (n > 0.0) {
      if (traits.adaptive) response += static_cast<double>(timing.tset_ns);
      response += traits.pipelined ? n * t_retry_read + t_tail
                                   : n * (t_retry_read + t_tail);
    }
    total += response;
  }
  return total / 3.0;
}

std::vector<CompareRow> compare(const std::vector<RunReport>& reports) {
  if (reports.empty()) return {};
  const RunReport* baseline = nullptr;
  for (const auto& report : reports) {
    if (!report.key.comparable_with(reports.front().key)) {
      throw std::invalid_argument("compare() across mismatched run keys");
    }
    if (report.key.policy == PolicyKind::kBaseline) baseline = &report;
  }
  if (baseline == nullptr) {
    throw std::invalid_argument("compare() needs a Baseline report");
  }
  const double base_mean = baseline->mean_ns();
  std::vector<CompareRow> rows;
  rows.reserve(reports.size());
  for (const auto& report : reports) {
    CompareRow row;
    row.policy = report.key.policy;
    row.mean_us = report.mean_ns() / 1000.0;
    row.reduction_vs_baseline_pct =
        base_mean > 0.0 ? (1.0 - report.mean_ns() / base_mean) * 100.0 : 0.0;
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string fmt_us(double ns) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", ns / 1000.0);
  return buf;
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

const RunReport* baseline_of(const std::vector<RunReport>& reports,
                             const RunReport& report) {
  for (const auto& other : reports) {
    if (other.key.policy == PolicyKind::kBaseline &&
        other.key.comparable_with(report.key)) {
      return &other;
    }
  }
  return nullptr;
}

}  // namespace

void emit_csv(const std::vector<RunReport>& reports, std::ostream& os) {
  os << "policy,pec,retention_months,mean_us,p50_us,p95_us,p99_us,"
        "reduction_vs_baseline_pct\n";
  for (const auto& report : reports) {
    const RunReport* base = baseline_of(reports, report);
    double reduction = 0.0;
    if (base != nullptr && base->mean_ns() > 0.0) {
      reduction = (1.0 - report.mean_ns() / base->mean_ns()) * 100.0;
    }
    os << to_string(report.key.policy) << ',' << fmt_num(report.key.pec) << ','
       << fmt_num(report.key.retention_months) << ',' << fmt_us(report.mean_ns())
       << ',' << fmt_us(static_cast<double>(report.percentile_ns(0.50))) << ','
       << fmt_us(static_cast<double>(report.percentile_ns(0.95))) << ','
       << fmt_us(static_cast<double>(report.percentile_ns(0.99))) << ','
       << fmt_num(reduction) << '\n';
  }
}

void emit_json(const std::vector<RunReport>& reports, std::ostream& os) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& report : reports) {
    nlohmann::json j;
    j["policy"] = to_string(report.key.policy);
    j["pec"] = report.key.pec;
    j["retention_months"] = report.key.retention_months;
    j["temperature_c"] = report.key.temp_c;
    j["seed"] = report.key.seed;
    j["workload"] = report.key.workload_id;
    j["requests"] = report.responses.size();
    j["reads"] = report.reads;
    j["writes"] = report.writes;
    j["mean_us"] = report.mean_ns() / 1000.0;
    j["p50_us"] = ns_to_us(report.percentile_ns(0.50));
    j["p95_us"] = ns_to_us(report.percentile_ns(0.95));
    j["p99_us"] = ns_to_us(report.percentile_ns(0.99));
    j["mean_sampled_nrr"] = report.mean_sampled_nrr();
    j["retry_failures"] = report.retry_failures;
    j["clamp_warnings"] = report.clamp_warnings;
    j["rpt_miss_warnings"] = report.rpt_miss_warnings;
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [steps, pages] : report.sampled_nrr) {
      hist[std::to_string(steps)] = pages;
    }
    j["sampled_nrr_histogram"] = hist;
    const RunReport* base = baseline_of(reports, report);
    if (base != nullptr && base->mean_ns() > 0.0) {
      j["reduction_vs_baseline_pct"] =
          (1.0 - report.mean_ns() / base->mean_ns()) * 100.0;
    }
    out.push_back(j);
  }
  os << out.dump(2) << '\n';
}

void emit_report_file(const std::vector<RunReport>& reports,
                      const std::string& path, const std::string& format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  if (format == "csv") {
    emit_csv(reports, out);
  } else if (format == "json") {
    emit_json(reports, out);
  } else {
    throw ConfigError("unknown report format '" + format + "' (csv or json)");
  }
  if (!out) throw ConfigError("failed writing output file: " + path);
}

std::vector<CsvRow> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) ||
      line != "policy,pec,retention_months,mean_us,p50_us,p95_us,p99_us,"
              "reduction_vs_baseline_pct") {
    throw ConfigError("bad report CSV header");
  }
  std::vector<CsvRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    CsvRow row;
    std::string field;
    if (!std::getline(ss, row.policy, ',')) throw ConfigError("bad CSV row: " + line);
    try {
      auto next = [&]() {
        if (!std::getline(ss, field, ',')) throw ConfigError("bad CSV row: " + line);
        return std::stod(field);
      };
      row.pec = next();
      row.retention_months = next();
      row.mean_us = next();
      row.p50_us = next();
      row.p95_us = next();
      row.p99_us = next();
      row.reduction_vs_baseline_pct = next();
    } catch (const std::exception&) {
      throw ConfigError("bad CSV row: " + line);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace retrysim
