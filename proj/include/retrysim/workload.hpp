#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "retrysim/types.hpp"

namespace retrysim {

enum class IoOp { kRead, kWrite };

struct IoRequest {
  Ns arrival = 0;
  IoOp op = IoOp::kRead;
  std::int64_t lba = 0;         // page units
  std::int64_t size_bytes = 0;  // page-aligned
  bool cold = false;            // reads only: target never updated in the run
};

struct WorkloadSpec {
  double read_ratio = 0.98;
  double cold_ratio = 0.72;
  std::int64_t request_count = 10'000;
  std::int64_t address_span_pages = 1 << 20;
  std::int64_t cold_span_pages = 0;  // 0 selects half the span
  double mean_interarrival_us = 200.0;
  std::int64_t request_bytes = 16 * 1024;

  void validate(std::int64_t page_bytes) const;
};

// Table 3-style presets selectable by name.
struct WorkloadPreset {
  const char* name;
  double read_ratio;
  double cold_ratio;
};
const std::vector<WorkloadPreset>& workload_presets();
std::optional<WorkloadPreset> find_preset(const std::string& name);

// Draw a request stream from the spec. Reads pick the never-written cold
// region with probability cold_ratio; otherwise they target a page some
// earlier write already touched. Deterministic per seed.
std::vector<IoRequest> synthesize(const WorkloadSpec& spec, std::int64_t page_bytes,
                                  std::uint64_t seed);

// MSRC block-I/O traces: comma-separated
//   timestamp(100ns ticks),hostname,disk,type,offset_bytes,size_bytes,latency
// Timestamps are normalized to a 0 origin in ns; requests are page-aligned.
std::vector<IoRequest> parse_msrc(std::istream& in, std::int64_t page_bytes);
std::vector<IoRequest> parse_msrc_file(const std::string& path,
                                       std::int64_t page_bytes);

// Internal normalized trace format: "arrival_ns,op,lba,size_bytes,cold".
void write_normalized(const std::vector<IoRequest>& reqs, std::ostream& out);
std::vector<IoRequest> parse_normalized(std::istream& in);

// True if the stream's first record looks like the normalized format.
bool looks_normalized(std::istream& in);

// Reads are cold when their pages are never written anywhere in the
// request stream.
void tag_cold_reads(std::vector<IoRequest>& reqs, std::int64_t page_bytes);

double read_ratio_of(const std::vector<IoRequest>& reqs);
double cold_ratio_of(const std::vector<IoRequest>& reqs);

}  // namespace retrysim
