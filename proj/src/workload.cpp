#include "retrysim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "retrysim/rng.hpp"

namespace retrysim {

void WorkloadSpec::validate(std::int64_t page_bytes) const {
  if (read_ratio < 0.0 || read_ratio > 1.0 || cold_ratio < 0.0 || cold_ratio > 1.0) {
    throw ConfigError("read_ratio and cold_ratio must be in [0, 1]");
  }
  if (request_count <= 0) throw ConfigError("request_count must be positive");
  if (address_span_pages <= 1) throw ConfigError("address span must exceed one page");
  if (mean_interarrival_us <= 0.0) {
    throw ConfigError("mean inter-arrival time must be positive");
  }
  if (request_bytes <= 0 || request_bytes % page_bytes != 0) {
    throw ConfigError("request size must be a positive page multiple");
  }
  const std::int64_t cold_span =
      cold_span_pages > 0 ? cold_span_pages : address_span_pages / 2;
  if (cold_span >= address_span_pages) {
    throw ConfigError("cold region must be smaller than the address span");
  }
  // Hot reads replay earlier writes, so a pure-read stream can only be cold.
  if (read_ratio >= 1.0 && cold_ratio < 1.0) {
    throw ConfigError("read_ratio 1.0 requires cold_ratio 1.0 (no writes to re-read)");
  }
}

const std::vector<WorkloadPreset>& workload_presets() {
  static const std::vector<WorkloadPreset> presets = {
      {"stg_0", 0.15, 0.38}, {"hm_0", 0.36, 0.22},   {"prn_0", 0.75, 0.72},
      {"proj_0", 0.89, 0.96}, {"mds_0", 0.92, 0.98}, {"usr_0", 0.96, 0.73},
      {"ycsb-a", 0.98, 0.72}, {"ycsb-b", 0.99, 0.59}, {"ycsb-c", 0.99, 0.60},
      {"ycsb-d", 0.98, 0.58}, {"ycsb-e", 0.99, 0.98}, {"ycsb-f", 0.98, 0.87},
  };
  return presets;
}

std::optional<WorkloadPreset> find_preset(const std::string& name) {
  for (const auto& p : workload_presets()) {
    if (name == p.name) return p;
  }
  return std::nullopt;
}

std::vector<IoRequest> synthesize(const WorkloadSpec& spec, std::int64_t page_bytes,
                                  std::uint64_t seed) {
  spec.validate(page_bytes);
  const std::int64_t cold_span =
      spec.cold_span_pages > 0 ? spec.cold_span_pages : spec.address_span_pages / 2;
  const std::int64_t hot_span = spec.address_span_pages - cold_span;
  const std::int64_t cold_base = hot_span;  // hot region low, cold region high
  const std::int64_t pages_per_request = spec.request_bytes / page_bytes;

  SplitMix64 rng(SplitMix64::mix(seed ^ 0x9e3779b97f4a7c15ULL));
  std::vector<IoRequest> reqs;
  reqs.reserve(spec.request_count);
  std::vector<std::int64_t> written;
  std::unordered_set<std::int64_t> written_set;

  double clock_us = 0.0;
  for (std::int64_t i = 0; i < spec.request_count; ++i) {
    clock_us += exponential(rng, spec.mean_interarrival_us);
    IoRequest req;
    req.arrival = us_to_ns(clock_us);
    req.size_bytes = spec.request_bytes;

    const bool is_read = rng.next_unit() <= spec.read_ratio;
    if (is_read) {
      req.op = IoOp::kRead;
      const bool is_cold = rng.next_unit() <= spec.cold_ratio;
      if (is_cold || written.empty()) {
        req.cold = true;
        req.lba = cold_base + static_cast<std::int64_t>(
                                  rng.next_below(static_cast<std::uint64_t>(cold_span)));
      } else {
        req.cold = false;
        req.lba = written[rng.next_below(written.size())];
      }
    } else {
      req.op = IoOp::kWrite;
      req.lba = static_cast<std::int64_t>(
          rng.next_below(static_cast<std::uint64_t>(hot_span)));
      for (std::int64_t p = 0; p < pages_per_request; ++p) {
        if (written_set.insert(req.lba + p).second) written.push_back(req.lba + p);
      }
    }
    reqs.push_back(req);
  }
  return reqs;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::vector<IoRequest> parse_msrc(std::istream& in, std::int64_t page_bytes) {
  std::vector<IoRequest> reqs;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::int64_t> timestamps;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 7) {
      throw TraceParseError("line " + std::to_string(line_no) +
                            ": expected 7 comma-separated fields, got " +
                            std::to_string(fields.size()));
    }
    IoRequest req;
    std::int64_t ticks, offset, size;
    try {
      ticks = std::stoll(fields[0]);
      offset = std::stoll(fields[4]);
      size = std::stoll(fields[5]);
    } catch (const std::exception&) {
      throw TraceParseError("line " + std::to_string(line_no) + ": bad numeric field");
    }
    const std::string type = lower(fields[3]);
    if (type == "read") {
      req.op = IoOp::kRead;
    } else if (type == "write") {
      req.op = IoOp::kWrite;
    } else {
      throw TraceParseError("line " + std::to_string(line_no) +
                            ": unknown operation '" + fields[3] + "'");
    }
    if (size <= 0 || offset < 0) {
      throw TraceParseError("line " + std::to_string(line_no) +
                            ": offset/size out of range");
    }
    const std::int64_t first_page = offset / page_bytes;
    const std::int64_t last_page = (offset + size - 1) / page_bytes;
    req.lba = first_page;
    req.size_bytes = (last_page - first_page + 1) * page_bytes;
    timestamps.push_back(ticks);
    reqs.push_back(req);
  }
  if (reqs.empty()) throw TraceParseError("trace contains no records");

  // Windows filetime ticks are 100 ns; normalize to a 0-origin ns clock
  // and a non-decreasing order.
  std::vector<std::size_t> order(reqs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return timestamps[a] < timestamps[b];
  });
  const std::int64_t origin = timestamps[order.front()];
  std::vector<IoRequest> sorted;
  sorted.reserve(reqs.size());
  for (std::size_t idx : order) {
    IoRequest req = reqs[idx];
    req.arrival = (timestamps[idx] - origin) * 100;
    sorted.push_back(req);
  }
  tag_cold_reads(sorted, page_bytes);
  return sorted;
}

std::vector<IoRequest> parse_msrc_file(const std::string& path,
                                       std::int64_t page_bytes) {
  std::ifstream in(path);
  if (!in) throw TraceParseError("cannot open trace file: " + path);
  return parse_msrc(in, page_bytes);
}

void write_normalized(const std::vector<IoRequest>& reqs, std::ostream& out) {
  for (const auto& req : reqs) {
    out << req.arrival << ',' << (req.op == IoOp::kRead ? 'R' : 'W') << ','
        << req.lba << ',' << req.size_bytes << ',' << (req.cold ? 1 : 0) << '\n';
  }
}

std::vector<IoRequest> parse_normalized(std::istream& in) {
  std::vector<IoRequest> reqs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 5 || fields[1].size() != 1 ||
        (fields[1] != "R" && fields[1] != "W")) {
      throw TraceParseError("line " + std::to_string(line_no) +
                            ": bad normalized trace record");
    }
    IoRequest req;
    try {
      req.arrival = std::stoll(fields[0]);
      req.lba = std::stoll(fields[2]);
      req.size_bytes = std::stoll(fields[3]);
      req.cold = std::stoi(fields[4]) != 0;
    } catch (const std::exception&) {
      throw TraceParseError("line " + std::to_string(line_no) + ": bad numeric field");
    }
    req.op = fields[1] == "R" ? IoOp::kRead : IoOp::kWrite;
    reqs.push_back(req);
  }
  if (reqs.empty()) throw TraceParseError("trace contains no records");
  return reqs;
}

bool looks_normalized(std::istream& in) {
  std::string line;
  const auto pos = in.tellg();
  bool normalized = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    normalized = fields.size() == 5 && (fields[1] == "R" || fields[1] == "W");
    break;
  }
  in.clear();
  in.seekg(pos);
  return normalized;
}

void tag_cold_reads(std::vector<IoRequest>& reqs, std::int64_t page_bytes) {
  std::unordered_set<std::int64_t> written;
  for (const auto& req : reqs) {
    if (req.op != IoOp::kWrite) continue;
    const std::int64_t pages = req.size_bytes / page_bytes;
    for (std::int64_t p = 0; p < pages; ++p) written.insert(req.lba + p);
  }
  for (auto& req : reqs) {
    if (req.op != IoOp::kRead) continue;
    const std::int64_t pages = req.size_bytes / page_bytes;
    req.cold = true;
    for (std::int64_t p = 0; p < pages; ++p) {
      if (written.count(req.lba + p) != 0) {
        req.cold = false;
        break;
      }
    }
  }
}

double read_ratio_of(const std::vector<IoRequest>& reqs) {
  if (reqs.empty()) return 0.0;
  std::int64_t reads = 0;
  for (const auto& req : reqs) reads += req.op == IoOp::kRead ? 1 : 0;
  return static_cast<double>(reads) / static_cast<double>(reqs.size());
}

double cold_ratio_of(const std::vector<IoRequest>& reqs) {
  std::int64_t reads = 0, cold = 0;
  for (const auto& req : reqs) {
    if (req.op != IoOp::kRead) continue;
    ++reads;
    cold += req.cold ? 1 : 0;
  }
  return reads == 0 ? 0.0 : static_cast<double>(cold) / static_cast<double>(reads);
}

}  // namespace retrysim
