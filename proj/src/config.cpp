#include "retrysim/config.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace retrysim {

namespace {

void reject_unknown_keys(const nlohmann::json& j, const char* section,
                         std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw ConfigError(std::string(section) + " must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + section);
    }
  }
}

// Config timing values are microseconds at up to 0.1 us granularity so
// the nanosecond conversion stays exact.
Ns parse_us(const nlohmann::json& j, const char* key, Ns fallback) {
  if (!j.contains(key)) return fallback;
  const double us = j.at(key).get<double>();
  const double tenths = us * 10.0;
  if (std::abs(tenths - std::llround(tenths)) > 1e-6) {
    throw ConfigError(std::string("timing value '") + key +
                      "' must have at most 0.1 us granularity");
  }
  return us_to_ns(us);
}

}  // namespace

std::string WorkloadConfig::id() const {
  if (source == "trace") return "trace:" + trace_path;
  char buf[96];
  std::snprintf(buf, sizeof buf, "synthetic:r%.3f:c%.3f:n%lld", spec.read_ratio,
                spec.cold_ratio, static_cast<long long>(spec.request_count));
  return buf;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  reject_unknown_keys(j, "config", {"geometry", "timing_us", "calibration",
                                    "policies", "conditions", "workload", "seed",
                                    "output", "threads"});
  try {
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      reject_unknown_keys(g, "geometry",
                          {"channels", "dies_per_channel", "planes_per_die",
                           "blocks_per_plane", "pages_per_block", "page_bytes",
                           "user_gib"});
      cfg.geometry.channels = g.value("channels", cfg.geometry.channels);
      cfg.geometry.dies_per_channel =
          g.value("dies_per_channel", cfg.geometry.dies_per_channel);
      cfg.geometry.planes_per_die =
          g.value("planes_per_die", cfg.geometry.planes_per_die);
      cfg.geometry.blocks_per_plane =
          g.value("blocks_per_plane", cfg.geometry.blocks_per_plane);
      cfg.geometry.pages_per_block =
          g.value("pages_per_block", cfg.geometry.pages_per_block);
      cfg.geometry.page_bytes = g.value("page_bytes", cfg.geometry.page_bytes);
      if (g.contains("user_gib")) {
        cfg.geometry.user_bytes =
            g.at("user_gib").get<std::int64_t>() * 1024 * 1024 * 1024;
      }
    }
    if (j.contains("timing_us")) {
      const auto& t = j.at("timing_us");
      reject_unknown_keys(t, "timing_us",
                          {"tpre", "teval", "tdisch", "tdma", "tecc", "tset",
                           "trst", "tprog", "tbers"});
      cfg.timing.tpre_ns = parse_us(t, "tpre", cfg.timing.tpre_ns);
      cfg.timing.teval_ns = parse_us(t, "teval", cfg.timing.teval_ns);
      cfg.timing.tdisch_ns = parse_us(t, "tdisch", cfg.timing.tdisch_ns);
      cfg.timing.tdma_ns = parse_us(t, "tdma", cfg.timing.tdma_ns);
      cfg.timing.tecc_ns = parse_us(t, "tecc", cfg.timing.tecc_ns);
      cfg.timing.tset_ns = parse_us(t, "tset", cfg.timing.tset_ns);
      cfg.timing.trst_ns = parse_us(t, "trst", cfg.timing.trst_ns);
      cfg.timing.tprog_ns = parse_us(t, "tprog", cfg.timing.tprog_ns);
      cfg.timing.tbers_ns = parse_us(t, "tbers", cfg.timing.tbers_ns);
    }
    if (j.contains("calibration")) {
      cfg.calibration_path = j.at("calibration").get<std::string>();
    }
    if (j.contains("policies")) {
      cfg.policies.clear();
      if (j.at("policies").is_string() && j.at("policies") == "all") {
        cfg.policies = all_policies();
      } else {
        for (const auto& name : j.at("policies")) {
          cfg.policies.push_back(parse_policy(name.get<std::string>()));
        }
      }
    }
    if (j.contains("conditions")) {
      const auto& c = j.at("conditions");
      reject_unknown_keys(c, "conditions",
                          {"pec", "retention_months", "temperature_c"});
      if (c.contains("pec")) cfg.conditions.pec = c.at("pec").get<std::vector<double>>();
      if (c.contains("retention_months")) {
        cfg.conditions.retention_months =
            c.at("retention_months").get<std::vector<double>>();
      }
      cfg.conditions.temperature_c =
          c.value("temperature_c", cfg.conditions.temperature_c);
    }
    if (j.contains("workload")) {
      const auto& w = j.at("workload");
      reject_unknown_keys(w, "workload",
                          {"source", "preset", "read_ratio", "cold_ratio",
                           "requests", "mean_interarrival_us",
                           "address_span_pages", "cold_span_pages",
                           "request_bytes", "trace"});
      cfg.workload.source = w.value("source", cfg.workload.source);
      if (w.contains("preset")) {
        cfg.workload.preset = w.at("preset").get<std::string>();
        const auto preset = find_preset(cfg.workload.preset);
        if (!preset.has_value()) {
          throw ConfigError("unknown workload preset '" + cfg.workload.preset + "'");
        }
        cfg.workload.spec.read_ratio = preset->read_ratio;
        cfg.workload.spec.cold_ratio = preset->cold_ratio;
      }
      auto& spec = cfg.workload.spec;
      spec.read_ratio = w.value("read_ratio", spec.read_ratio);
      spec.cold_ratio = w.value("cold_ratio", spec.cold_ratio);
      spec.request_count = w.value("requests", spec.request_count);
      spec.mean_interarrival_us =
          w.value("mean_interarrival_us", spec.mean_interarrival_us);
      spec.address_span_pages = w.value("address_span_pages", spec.address_span_pages);
      spec.cold_span_pages = w.value("cold_span_pages", spec.cold_span_pages);
      spec.request_bytes = w.value("request_bytes", spec.request_bytes);
      cfg.workload.trace_path = w.value("trace", cfg.workload.trace_path);
      if (cfg.workload.source == "trace" && cfg.workload.trace_path.empty()) {
        throw ConfigError("trace workloads need a 'trace' path");
      }
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("output")) {
      const auto& o = j.at("output");
      reject_unknown_keys(o, "output", {"path", "format"});
      cfg.output.path = o.value("path", cfg.output.path);
      cfg.output.format = o.value("format", cfg.output.format);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config file: ") + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

RetryCalibration RunConfig::calibration() const {
  if (calibration_path.empty()) return RetryCalibration::defaults();
  return RetryCalibration::load(calibration_path);
}

void RunConfig::apply_env_seed() {
  const char* env = std::getenv("RETRYSIM_SEED");
  if (env == nullptr || *env == '\0') return;
  try {
    seed = std::stoull(env);
  } catch (const std::exception&) {
    throw ConfigError("RETRYSIM_SEED is not a valid integer");
  }
}

void RunConfig::validate() const {
  geometry.validate();
  timing.validate();
  if (policies.empty()) throw ConfigError("no policies selected");
  if (conditions.pec.empty() || conditions.retention_months.empty()) {
    throw ConfigError("condition grid must not be empty");
  }
  for (double pec : conditions.pec) {
    if (pec < 0) throw ConfigError("PEC values must be >= 0");
  }
  for (double ret : conditions.retention_months) {
    if (ret < 0) throw ConfigError("retention values must be >= 0");
  }
  if (workload.source != "synthetic" && workload.source != "trace") {
    throw ConfigError("workload source must be 'synthetic' or 'trace'");
  }
  if (workload.source == "synthetic") {
    workload.spec.validate(geometry.page_bytes);
    if (workload.spec.address_span_pages > geometry.user_pages()) {
      throw ConfigError("workload address span exceeds device capacity");
    }
  }
  if (output.format != "csv" && output.format != "json") {
    throw ConfigError("output format must be csv or json");
  }
}

std::vector<IoRequest> build_workload(const RunConfig& cfg) {
  if (cfg.workload.source == "synthetic") {
    return synthesize(cfg.workload.spec, cfg.geometry.page_bytes, cfg.seed);
  }
  std::ifstream in(cfg.workload.trace_path);
  if (!in) throw TraceParseError("cannot open trace file: " + cfg.workload.trace_path);
  std::vector<IoRequest> reqs = looks_normalized(in)
                                    ? parse_normalized(in)
                                    : parse_msrc(in, cfg.geometry.page_bytes);
  // Replayed traces address arbitrary volumes; fold them into this device.
  const std::int64_t user_pages = cfg.geometry.user_pages();
  for (auto& req : reqs) {
    const std::int64_t pages = req.size_bytes / cfg.geometry.page_bytes;
    if (req.lba + pages > user_pages) req.lba = req.lba % (user_pages - pages);
  }
  return reqs;
}

std::vector<RunReport> run_sweep(const RunConfig& cfg,
                                 const std::vector<IoRequest>& workload) {
  cfg.validate();
  const RetryCalibration cal = cfg.calibration();

  struct Cell {
    PolicyKind policy;
    double pec;
    double retention;
  };
  std::vector<Cell> cells;
  for (double pec : cfg.conditions.pec) {
    for (double ret : cfg.conditions.retention_months) {
      for (PolicyKind policy : cfg.policies) {
        cells.push_back({policy, pec, ret});
      }
    }
  }

  std::vector<RunReport> reports(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto n_threads = static_cast<unsigned>(
      cfg.threads > 0 ? cfg.threads : std::min<std::size_t>(hw, cells.size()));

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        SimConfig sim;
        sim.geometry = cfg.geometry;
        sim.timing = cfg.timing;
        sim.calibration = cal;
        sim.policy = cells[i].policy;
        sim.base_condition = {cells[i].pec, cells[i].retention,
                              cfg.conditions.temperature_c};
        sim.seed = cfg.seed;
        sim.workload_id = cfg.workload.id();
        reports[i] = run_simulation(sim, workload);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (const std::string& err : errors) {
    if (!err.empty()) throw InternalError("simulation cell failed: " + err);
  }
  return reports;
}

std::vector<OracleCheckRow> oracle_equivalence_grid(const TimingParams& timing,
                                                    Ns perturb_ns) {
  const PolicyKind policies[] = {PolicyKind::kBaseline, PolicyKind::kPr2,
                                 PolicyKind::kAr2, PolicyKind::kPnAr2,
                                 PolicyKind::kNoRr};
  const int step_counts[] = {0, 1, 2, 8, 20};
  const PageType pages[] = {PageType::kLsb, PageType::kCsb, PageType::kMsb};

  std::vector<OracleCheckRow> rows;
  for (PolicyKind policy : policies) {
    const bool adaptive = traits_of(policy).adaptive;
    const std::vector<double> reductions =
        adaptive ? std::vector<double>{0.40, 0.54} : std::vector<double>{0.0};
    for (int n : step_counts) {
      for (PageType page : pages) {
        for (double reduction : reductions) {
          OracleCheckRow row;
          row.policy = policy;
          row.n_rr = n;
          row.page = page;
          row.reduction = reduction;
          row.simulated_ns = isolated_read_response(policy, n, page, timing, reduction);
          if (traits_of(policy).pipelined) row.simulated_ns += perturb_ns;
          row.oracle_ns = oracle_latency(policy, n, page, timing, reduction);
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

Ns isolated_read_response(PolicyKind policy, int n_rr, PageType page,
                          const TimingParams& timing, double reduction) {
  SimConfig sim;
  sim.timing = timing;
  sim.policy = policy;
  sim.forced_nrr = n_rr;
  sim.reduction = ReductionSource::fixed(reduction);
  sim.workload_id = "isolated";

  // Page index inside the block selects the page type; LBAs stride by one
  // full channel/die/plane row per page.
  const std::int64_t width = static_cast<std::int64_t>(sim.geometry.channels) *
                             sim.geometry.dies_per_channel *
                             sim.geometry.planes_per_die;
  std::int64_t page_idx = 0;
  switch (page) {
    case PageType::kLsb: page_idx = 0; break;
    case PageType::kCsb: page_idx = 1; break;
    case PageType::kMsb: page_idx = 2; break;
  }
  IoRequest req;
  req.op = IoOp::kRead;
  req.lba = width * page_idx;
  req.size_bytes = sim.geometry.page_bytes;
  req.cold = true;

  const RunReport report = run_simulation(sim, {req});
  return report.responses.at(0);
}

}  // namespace retrysim
