#pragma once

#include "retrysim/types.hpp"

namespace retrysim {

// TLC page kinds. CSB pages need three sensing rounds, LSB/MSB two.
enum class PageType { kLsb, kCsb, kMsb };

int sense_count(PageType page);
const char* to_string(PageType page);

// Chip-level timing parameters, in nanosecond ticks.
struct TimingParams {
  Ns tpre_ns;    // precharge phase
  Ns teval_ns;   // evaluation phase
  Ns tdisch_ns;  // discharge phase
  Ns tdma_ns;    // chip-to-controller transfer of one 16-KiB page
  Ns tecc_ns;    // ECC decode of one page
  Ns tset_ns;    // SET FEATURE command
  Ns trst_ns;    // RESET of an in-flight read
  Ns tprog_ns;   // page program
  Ns tbers_ns;   // block erase

  static TimingParams defaults();

  // All durations must be positive.
  void validate() const;
};

// One-sense latency is tPRE + tEVAL + tDISCH; a page read multiplies it
// by the page type's sensing count.
Ns sense_latency(const TimingParams& params, PageType page);

// tPRE scaled by (1 - reduction), other phases untouched.
Ns reduced_tpre(const TimingParams& params, double tpre_reduction);

// Sense latency with a reduced precharge phase. reduction must be in [0, 1).
Ns reduced_sense_latency(const TimingParams& params, PageType page,
                         double tpre_reduction);

}  // namespace retrysim
