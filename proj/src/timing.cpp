#include "retrysim/timing.hpp"

#include <cmath>
#include <stdexcept>

namespace retrysim {

int sense_count(PageType page) {
  switch (page) {
    case PageType::kLsb: return 2;
    case PageType::kCsb: return 3;
    case PageType::kMsb: return 2;
  }
  return 2;
}

const char* to_string(PageType page) {
  switch (page) {
    case PageType::kLsb: return "LSB";
    case PageType::kCsb: return "CSB";
    case PageType::kMsb: return "MSB";
  }
  return "?";
}

TimingParams TimingParams::defaults() {
  TimingParams p;
  p.tpre_ns = 24'000;
  p.teval_ns = 5'000;
  p.tdisch_ns = 10'000;
  p.tdma_ns = 16'000;
  p.tecc_ns = 20'000;
  p.tset_ns = 1'000;
  p.trst_ns = 5'000;
  p.tprog_ns = 700'000;
  p.tbers_ns = 5'000'000;
  return p;
}

void TimingParams::validate() const {
  const Ns values[] = {tpre_ns, teval_ns, tdisch_ns, tdma_ns, tecc_ns,
                       tset_ns, trst_ns,  tprog_ns,  tbers_ns};
  for (Ns v : values) {
    if (v <= 0) throw ConfigError("timing parameters must all be positive");
  }
}

Ns sense_latency(const TimingParams& params, PageType page) {
  return static_cast<Ns>(sense_count(page)) *
         (params.tpre_ns + params.teval_ns + params.tdisch_ns);
}

Ns reduced_tpre(const TimingParams& params, double tpre_reduction) {
  if (tpre_reduction < 0.0 || tpre_reduction >= 1.0) {
    throw std::invalid_argument("tPRE reduction must be in [0, 1)");
  }
  return static_cast<Ns>(
      std::llround(static_cast<double>(params.tpre_ns) * (1.0 - tpre_reduction)));
}

Ns reduced_sense_latency(const TimingParams& params, PageType page,
                         double tpre_reduction) {
  return static_cast<Ns>(sense_count(page)) *
         (reduced_tpre(params, tpre_reduction) + params.teval_ns +
          params.tdisch_ns);
}

}  // namespace retrysim
