#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace retrysim {

// All simulation time is integer nanoseconds. Config files accept
// microseconds at 0.1 us granularity; the conversion below is exact for
// such inputs.
using Ns = std::int64_t;

constexpr Ns kNsPerUs = 1000;

inline Ns us_to_ns(double us) {
  return static_cast<Ns>(std::llround(us * 1000.0));
}

inline double ns_to_us(Ns ns) {
  return static_cast<double>(ns) / 1000.0;
}

// Process exit codes shared by the CLI and tests.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitTraceError = 3,
  kExitInternalError = 4,
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct TraceParseError : std::runtime_error {
  explicit TraceParseError(const std::string& what) : std::runtime_error(what) {}
};

struct InternalError : std::runtime_error {
  explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace retrysim
