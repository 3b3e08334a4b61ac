#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "retrysim/types.hpp"

#include "json.hpp"

namespace retrysim {

// Condition tuple driving the error model. PEC and retention are real so
// the grids can be queried between calibration points.
struct OperatingCondition {
  double pec = 0.0;
  double retention_months = 0.0;
  double temp_c = 30.0;
};

// A regular grid over up to four axes with multilinear interpolation.
// Queries outside the axis range clamp to the boundary.
class Grid {
 public:
  Grid() = default;
  Grid(std::vector<std::vector<double>> axes, std::vector<double> values);

  double at(const std::vector<double>& coords) const;
  std::size_t rank() const { return axes_.size(); }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& values() const { return values_; }

  // True if values never decrease (axis_sign=+1) / never increase
  // (axis_sign=-1) along the given axis.
  bool monotone_along(std::size_t axis, int axis_sign) const;

 private:
  std::vector<std::vector<double>> axes_;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;
};

// Which read-timing phase a what-if reduction applies to. Shipped policies
// only ever reduce tPRE; the other two tables exist for what-if queries.
enum class TimingPhase { kPre, kEval, kDisch };

struct RetryCalibration {
  // Axes shared by the grids below.
  std::vector<double> pec_axis;        // P/E cycles
  std::vector<double> retention_axis;  // months at 30C
  std::vector<double> temp_axis;       // degrees C
  std::vector<double> reduction_axis;  // tPRE reduction fraction

  Grid mean_nrr;     // pec x retention -> mean retry steps
  Grid min_nrr;      // pec x retention -> every-read minimum steps
  Grid merr;         // pec x retention x temp -> max errors, final step
  Grid delta_tpre;   // reduction x pec x retention x temp -> extra errors
  Grid delta_teval;  // what-if only
  Grid delta_tdisch; // what-if only

  double jitter_sigma = 2.0;
  int max_retry_steps = 50;
  int ecc_capability = 72;
  int safety_margin_bits = 14;
  double outlier_probability = 0.0;

  static RetryCalibration defaults();
  static RetryCalibration from_json(const nlohmann::json& j);
  static RetryCalibration load(const std::string& path);
  nlohmann::json to_json() const;

  void validate() const;
};

// Arrhenius conversion of time spent at temp_c into the equivalent
// retention age at 30C, in months. The activation energy is solved from
// the 13 h at 85C == 1 year at 30C anchor.
double effective_retention_months(double elapsed_hours, double temp_c);
double arrhenius_acceleration(double temp_c);
double arrhenius_activation_energy_ev();

// Number of retry steps a read of the given page needs under the given
// condition. Pure function of (calibration, condition, page_id, seed).
// Conditions outside the calibrated range are clamped; when a warning
// counter is supplied it is incremented on clamp. A draw past the vendor
// cap clamps to max_retry_steps and sets *overflow (the read will fail
// even in its final step).
int sample_retry_steps(const RetryCalibration& cal, const OperatingCondition& cond,
                       std::uint64_t page_id, std::uint64_t seed,
                       std::uint64_t* clamp_warnings = nullptr,
                       bool* overflow = nullptr);

// Max bit errors per 1-KiB codeword in the final retry step, rounded up.
int max_errors_final_step(const RetryCalibration& cal, OperatingCondition cond);

// Extra bit errors caused by reducing tPRE by the given fraction.
// Reductions outside the calibrated range are rejected.
double delta_errors(const RetryCalibration& cal, double tpre_reduction,
                    OperatingCondition cond);

// Same, for the what-if tEVAL / tDISCH tables.
double what_if_delta_errors(const RetryCalibration& cal, TimingPhase phase,
                            double reduction, OperatingCondition cond);

// Largest 1%-quantized tPRE reduction that keeps
//   M_ERR + delta + safety_margin <= ecc_capability
// at the worst calibrated temperature (30C). The search window is bounded
// by the calibrated best case, 54%.
double min_safe_tpre(const RetryCalibration& cal, const OperatingCondition& cond);

// PSO's reuse of recent Vref values: about a 70% cut in retry steps, but
// never below three once any retry is needed beyond that floor.
int pso_retry_steps(int n_rr);

// Per-chip table of safe tPRE reductions keyed by (PEC, retention) bucket.
class RptTable {
 public:
  RptTable() = default;
  RptTable(std::vector<double> pec_buckets, std::vector<double> retention_buckets,
           std::vector<double> reductions);

  // Floor bucketing on both axes; conditions below the first bucket use
  // the first bucket. Conditions past the last bucket count as misses
  // when a warning counter is supplied.
  double lookup(const OperatingCondition& cond,
                std::uint64_t* miss_warnings = nullptr) const;

  std::size_t entry_count() const { return reductions_.size(); }
  const std::vector<double>& pec_buckets() const { return pec_buckets_; }
  const std::vector<double>& retention_buckets() const { return retention_buckets_; }
  double entry(std::size_t pec_idx, std::size_t ret_idx) const;

  // Text form: one "pec,retention_months,reduction_percent" line per entry.
  void serialize_text(std::ostream& os) const;
  static RptTable parse_text(std::istream& is);

  // Flat binary form, 4 bytes per entry:
  //   u16 pec bucket, u8 retention bucket (months), u8 reduction percent.
  void serialize_binary(std::ostream& os) const;
  static RptTable parse_binary(std::istream& is);

 private:
  std::vector<double> pec_buckets_;
  std::vector<double> retention_buckets_;
  std::vector<double> reductions_;  // row-major pec x retention
};

RptTable build_rpt(const RetryCalibration& cal, std::vector<double> pec_buckets,
                   std::vector<double> retention_buckets);

// Default 6x6 RPT bucket grid.
std::vector<double> default_rpt_pec_buckets();
std::vector<double> default_rpt_retention_buckets();

}  // namespace retrysim
