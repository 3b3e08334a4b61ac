#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "retrysim/analytics.hpp"
#include "retrysim/config.hpp"
#include "retrysim/kernel.hpp"
#include "retrysim/reliability.hpp"
#include "retrysim/types.hpp"
#include "retrysim/workload.hpp"

namespace {

using namespace retrysim;

int cmd_simulate(const std::string& config_path, std::vector<std::string> policy_names,
                 std::vector<double> pecs, std::vector<double> retentions,
                 double temp_c, bool sweep_default, const std::string& trace,
                 const std::string& preset, double read_ratio, double cold_ratio,
                 std::int64_t requests, double interarrival_us,
                 std::int64_t span_pages, std::int64_t request_bytes,
                 const std::string& calibration, std::uint64_t seed, bool seed_set,
                 const std::string& out, const std::string& format, int threads) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = RunConfig::load(config_path);

  if (!policy_names.empty()) {
    cfg.policies.clear();
    for (const auto& name : policy_names) {
      if (name == "all") {
        cfg.policies = all_policies();
        break;
      }
      cfg.policies.push_back(parse_policy(name));
    }
  }
  if (sweep_default) {
    cfg.conditions.pec = {0, 1000, 2000};
    cfg.conditions.retention_months = {0, 3, 6, 12};
  }
  if (!pecs.empty()) cfg.conditions.pec = pecs;
  if (!retentions.empty()) cfg.conditions.retention_months = retentions;
  if (temp_c > 0) cfg.conditions.temperature_c = temp_c;
  if (!trace.empty()) {
    cfg.workload.source = "trace";
    cfg.workload.trace_path = trace;
  }
  if (!preset.empty()) {
    const auto p = find_preset(preset);
    if (!p.has_value()) throw ConfigError("unknown workload preset '" + preset + "'");
    cfg.workload.spec.read_ratio = p->read_ratio;
    cfg.workload.spec.cold_ratio = p->cold_ratio;
    cfg.workload.preset = preset;
  }
  if (read_ratio >= 0) cfg.workload.spec.read_ratio = read_ratio;
  if (cold_ratio >= 0) cfg.workload.spec.cold_ratio = cold_ratio;
  if (requests > 0) cfg.workload.spec.request_count = requests;
  if (interarrival_us > 0) cfg.workload.spec.mean_interarrival_us = interarrival_us;
  if (span_pages > 0) cfg.workload.spec.address_span_pages = span_pages;
  if (request_bytes > 0) cfg.workload.spec.request_bytes = request_bytes;
  if (!calibration.empty()) cfg.calibration_path = calibration;
  if (seed_set) cfg.seed = seed;
  if (!out.empty()) cfg.output.path = out;
  if (!format.empty()) cfg.output.format = format;
  if (threads > 0) cfg.threads = threads;

  cfg.apply_env_seed();
  cfg.validate();

  const std::vector<IoRequest> workload = build_workload(cfg);
  const std::vector<RunReport> reports = run_sweep(cfg, workload);

  if (!cfg.output.path.empty()) {
    emit_report_file(reports, cfg.output.path, cfg.output.format);
    std::printf("wrote %zu report rows to %s\n", reports.size(),
                cfg.output.path.c_str());
  } else if (cfg.output.format == "json") {
    emit_json(reports, std::cout);
  } else {
    emit_csv(reports, std::cout);
  }
  return kExitOk;
}

int cmd_rpt(const std::string& calibration, std::vector<double> pec_buckets,
            std::vector<double> retention_buckets, const std::string& out,
            bool binary, bool dump_calibration) {
  const RetryCalibration cal = calibration.empty()
                                   ? RetryCalibration::defaults()
                                   : RetryCalibration::load(calibration);
  if (dump_calibration) {
    if (out.empty()) {
      std::cout << cal.to_json().dump(2) << '\n';
    } else {
      std::ofstream os(out, std::ios::binary);
      if (!os) throw ConfigError("cannot open output file: " + out);
      os << cal.to_json().dump(2) << '\n';
      std::printf("wrote calibration to %s\n", out.c_str());
    }
    return kExitOk;
  }

  if (pec_buckets.empty()) pec_buckets = default_rpt_pec_buckets();
  if (retention_buckets.empty()) retention_buckets = default_rpt_retention_buckets();
  const RptTable rpt = build_rpt(cal, pec_buckets, retention_buckets);

  // Margin audit: replay the safety inequality for every bucket.
  std::printf("%8s %10s %10s %6s %8s %8s  %s\n", "pec", "ret_mo", "reduction",
              "m_err", "delta", "margin", "check");
  bool all_ok = true;
  for (std::size_t pi = 0; pi < rpt.pec_buckets().size(); ++pi) {
    for (std::size_t ri = 0; ri < rpt.retention_buckets().size(); ++ri) {
      const double pec = rpt.pec_buckets()[pi];
      const double ret = rpt.retention_buckets()[ri];
      const double reduction = rpt.entry(pi, ri);
      const OperatingCondition worst{pec, ret, cal.temp_axis.front()};
      const int merr = max_errors_final_step(cal, worst);
      const double delta = delta_errors(cal, reduction, worst);
      const double margin =
          cal.ecc_capability - (merr + delta + cal.safety_margin_bits);
      const bool ok = margin >= -1e-9 && reduction > 0.0;
      all_ok = all_ok && ok;
      std::printf("%8.0f %10.2f %9.0f%% %6d %8.2f %8.2f  %s\n", pec, ret,
                  reduction * 100.0, merr, delta, margin, ok ? "ok" : "VIOLATION");
    }
  }
  if (!all_ok) {
    std::fprintf(stderr, "RPT margin audit failed\n");
    return kExitConfigError;
  }

  if (!out.empty()) {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw ConfigError("cannot open output file: " + out);
    if (binary) {
      rpt.serialize_binary(os);
    } else {
      rpt.serialize_text(os);
    }
    os.flush();
    std::printf("wrote %zu RPT entries to %s (%s)\n", rpt.entry_count(), out.c_str(),
                binary ? "binary" : "text");
  }
  return kExitOk;
}

int cmd_oracle_check(bool break_for_test) {
  const TimingParams timing = TimingParams::defaults();
  const auto rows = oracle_equivalence_grid(timing, break_for_test ? 1000 : 0);
  std::printf("%-10s %5s %5s %10s %14s %14s %10s\n", "policy", "n_rr", "page",
              "reduction", "simulated_ns", "oracle_ns", "delta_ns");
  std::size_t mismatches = 0;
  for (const auto& row : rows) {
    const Ns delta = row.simulated_ns - row.oracle_ns;
    if (delta != 0) ++mismatches;
    std::printf("%-10s %5d %5s %9.0f%% %14" PRId64 " %14" PRId64 " %10" PRId64 "\n",
                to_string(row.policy), row.n_rr, to_string(row.page),
                row.reduction * 100.0, row.simulated_ns, row.oracle_ns, delta);
  }
  std::printf("%zu cells, %zu mismatches\n", rows.size(), mismatches);
  return mismatches == 0 ? kExitOk : kExitInternalError;
}

int cmd_trace(const std::string& in_path, const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw TraceParseError("cannot open trace file: " + in_path);

  constexpr std::int64_t kPageBytes = 16 * 1024;
  std::vector<IoRequest> reqs;
  if (looks_normalized(in)) {
    std::printf("input already normalized; passing through\n");
    reqs = parse_normalized(in);
    tag_cold_reads(reqs, kPageBytes);
  } else {
    reqs = parse_msrc(in, kPageBytes);
  }

  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + out_path);
    write_normalized(reqs, out);
  }
  std::printf("%zu requests, read ratio %.3f, cold ratio %.3f\n", reqs.size(),
              read_ratio_of(reqs), cold_ratio_of(reqs));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NAND read-retry latency simulator"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run simulations over a condition grid");
  std::string config_path, trace, preset, calibration, out, format;
  std::vector<std::string> policy_names;
  std::vector<double> pecs, retentions, pec_buckets, ret_buckets;
  double temp_c = -1, read_ratio = -1, cold_ratio = -1, interarrival_us = -1;
  std::int64_t requests = 0, span_pages = 0, request_bytes = 0;
  std::uint64_t seed = 0;
  bool sweep_default = false, binary = false, break_for_test = false;
  bool dump_calibration = false;
  int threads = 0;
  sim->add_option("--config", config_path, "JSON run configuration");
  sim->add_option("--policy", policy_names, "policy name or 'all'");
  sim->add_option("--pec", pecs, "P/E-cycle count(s)");
  sim->add_option("--retention-months", retentions, "retention age(s), months");
  sim->add_option("--temp", temp_c, "operating temperature, C");
  sim->add_flag("--sweep-default", sweep_default,
                "condition grid {0,1K,2K} x {0,3,6,12} months");
  sim->add_option("--trace", trace, "replay a trace file (MSRC or normalized)");
  sim->add_option("--preset", preset, "synthetic workload preset, e.g. ycsb-a");
  sim->add_option("--read-ratio", read_ratio, "synthetic read ratio");
  sim->add_option("--cold-ratio", cold_ratio, "synthetic cold ratio");
  sim->add_option("--requests", requests, "synthetic request count");
  sim->add_option("--inter-arrival-us", interarrival_us, "mean inter-arrival, us");
  sim->add_option("--span-pages", span_pages, "synthetic address span, pages");
  sim->add_option("--request-bytes", request_bytes, "request size, bytes");
  sim->add_option("--calibration", calibration, "calibration JSON file");
  auto* seed_opt = sim->add_option("--seed", seed, "simulation seed");
  sim->add_option("--out", out, "report output path");
  sim->add_option("--format", format, "report format: csv or json");
  sim->add_option("--threads", threads, "sweep worker threads");

  // rpt
  auto* rpt = app.add_subcommand("rpt", "build and audit a read-timing parameter table");
  rpt->add_option("--calibration", calibration, "calibration JSON file");
  rpt->add_option("--pec-buckets", pec_buckets, "PEC bucket boundaries");
  rpt->add_option("--retention-buckets", ret_buckets, "retention bucket boundaries");
  rpt->add_option("--out", out, "write the table here");
  rpt->add_flag("--binary", binary, "emit the 4-byte-per-entry binary form");
  rpt->add_flag("--dump-calibration", dump_calibration,
                "write the active calibration as JSON instead");

  // oracle-check
  auto* oracle = app.add_subcommand(
      "oracle-check", "verify the kernel against the closed-form latencies");
  oracle->add_flag("--break-policy-for-test", break_for_test,
                   "perturb pipelined policies to prove the check can fail");

  // trace
  auto* trace_cmd = app.add_subcommand("trace", "convert an MSRC trace to the "
                                                "normalized format");
  std::string trace_in, trace_out;
  trace_cmd->add_option("--in", trace_in, "input trace")->required();
  trace_cmd->add_option("--out", trace_out, "normalized output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return retrysim::kExitConfigError;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(config_path, policy_names, pecs, retentions, temp_c,
                          sweep_default, trace, preset, read_ratio, cold_ratio,
                          requests, interarrival_us, span_pages, request_bytes,
                          calibration, seed, seed_opt->count() > 0, out, format,
                          threads);
    }
    if (rpt->parsed()) {
      return cmd_rpt(calibration, pec_buckets, ret_buckets, out, binary,
                     dump_calibration);
    }
    if (oracle->parsed()) return cmd_oracle_check(break_for_test);
    if (trace_cmd->parsed()) return cmd_trace(trace_in, trace_out);
  } catch (const retrysim::TraceParseError& e) {
    std::fprintf(stderr, "trace error: %s\n", e.what());
    return retrysim::kExitTraceError;
  } catch (const retrysim::InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return retrysim::kExitInternalError;
  } catch (const retrysim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return retrysim::kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return retrysim::kExitConfigError;
  }
  return retrysim::kExitConfigError;
}
