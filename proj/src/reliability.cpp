#include "retrysim/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "retrysim/rng.hpp"

namespace retrysim {

namespace {

// Locate v on an axis: index of the lower grid point plus the fractional
// position towards the next one. Out-of-range values clamp.
struct AxisPos {
  std::size_t index;
  double frac;
};

AxisPos locate(const std::vector<double>& axis, double v) {
  if (axis.size() == 1 || v <= axis.front()) return {0, 0.0};
  if (v >= axis.back()) return {axis.size() - 2, 1.0};
  std::size_t i = 0;
  while (v > axis[i + 1]) ++i;
  double span = axis[i + 1] - axis[i];
  return {i, span > 0.0 ? (v - axis[i]) / span : 0.0};
}

bool in_range(const std::vector<double>& axis, double v) {
  return v >= axis.front() - 1e-12 && v <= axis.back() + 1e-12;
}

}  // namespace

Grid::Grid(std::vector<std::vector<double>> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  std::size_t expected = 1;
  strides_.assign(axes_.size(), 1);
  for (std::size_t a = axes_.size(); a-- > 0;) {
    strides_[a] = expected;
    expected *= axes_[a].size();
  }
  if (expected != values_.size()) {
    throw ConfigError("grid value count does not match axis sizes");
  }
  for (const auto& axis : axes_) {
    if (axis.empty() || !std::is_sorted(axis.begin(), axis.end())) {
      throw ConfigError("grid axes must be non-empty and sorted ascending");
    }
  }
}

double Grid::at(const std::vector<double>& coords) const {
  if (coords.size() != axes_.size()) {
    throw std::invalid_argument("grid query rank mismatch");
  }
  std::vector<AxisPos> pos(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) pos[a] = locate(axes_[a], coords[a]);

  // Multilinear blend over the 2^rank surrounding corners.
  double acc = 0.0;
  const std::size_t corners = std::size_t{1} << axes_.size();
  for (std::size_t c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t offset = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      const bool high = (c >> a) & 1u;
      const bool has_high = axes_[a].size() > 1;
      w *= high ? pos[a].frac : 1.0 - pos[a].frac;
      offset += (pos[a].index + ((high && has_high) ? 1 : 0)) * strides_[a];
    }
    if (w != 0.0) acc += w * values_[offset];
  }
  return acc;
}

bool Grid::monotone_along(std::size_t axis, int axis_sign) const {
  const std::size_t n = axes_[axis].size();
  for (std::size_t flat = 0; flat < values_.size(); ++flat) {
    const std::size_t idx = (flat / strides_[axis]) % n;
    if (idx + 1 >= n) continue;
    const double lo = values_[flat];
    const double hi = values_[flat + strides_[axis]];
    if (axis_sign > 0 && hi < lo - 1e-9) return false;
    if (axis_sign < 0 && hi > lo + 1e-9) return false;
  }
  return true;
}

namespace {

// Default calibration tables. The published characterization gives a set
// of spot values (means, minima, max-error counts, delta ratios); the grid
// points below are chosen to reproduce each of them, with multilinear
// interpolation declared for everything in between. All of it can be
// overridden through a calibration file.

constexpr double kPecAxis[] = {0.0, 1000.0, 2000.0};
constexpr double kRetAxis[] = {0.0, 3.0, 6.0, 12.0};
constexpr double kTempAxis[] = {30.0, 55.0, 85.0};
constexpr double kReductionAxis[] = {0.0, 0.20, 0.40, 0.47, 0.54, 0.60};

// Mean retry steps, pec x retention. The (0,6) entry makes
// P(N_RR >= 7) = 0.544 under the sigma=2 jitter model.
constexpr double kMeanNrr[3][4] = {
    {0.0, 4.6, 6.7204332, 9.5},
    {1.5, 9.8, 12.0, 16.0},
    {3.0, 11.5, 14.5, 19.9},
};

// Every-read minimum steps, pec x retention.
constexpr double kMinNrr[3][4] = {
    {0, 4, 5, 6},
    {0, 8, 9, 12},
    {0, 9, 11, 15},
};

// Max errors per 1-KiB codeword in the final retry step at 85C; 55C and
// 30C sit 3 and 5 errors higher across the board.
constexpr double kMerr85[3][4] = {
    {10, 15, 18, 22},
    {14, 20, 24, 30},
    {18, 24, 28, 35},
};
constexpr double kMerrOffset[3] = {5.0, 3.0, 0.0};  // 30C, 55C, 85C

// Extra errors from tPRE reduction factor into a per-condition scale and
// a shared convex shape over the reduction axis.
constexpr double kTpreShape[6] = {0.0, 0.06, 0.25, 0.50, 1.00, 1.70};
constexpr double kTpreScale85[3][4] = {
    {33, 36, 39, 44},
    {35, 40, 44, 50},
    {35, 42, 48, 56},
};
constexpr double kTpreScale55[3][4] = {
    {35, 38, 42, 47},
    {37, 43, 47, 54},
    {38, 45, 52, 61},
};
constexpr double kTpreScale30[3][4] = {
    {36, 40, 44, 50},
    {39, 45, 50, 58},
    {40, 48, 56, 64},
};

// What-if tables for the two phases the shipped policies never touch.
constexpr double kTevalAxis[] = {0.0, 0.05, 0.10, 0.20, 0.30};
constexpr double kTevalShape[5] = {0.0, 0.08, 0.22, 1.00, 2.20};
constexpr double kTevalScale[3][4] = {
    {30, 31, 32, 33},
    {31, 32, 33, 35},
    {32, 33, 35, 36},
};
constexpr double kTdischAxis[] = {0.0, 0.07, 0.20, 0.27, 0.40};
constexpr double kTdischShape[5] = {0.0, 0.11, 0.30, 1.00, 2.40};
constexpr double kTdischScale[3][4] = {
    {22, 24, 26, 28},
    {26, 28, 30, 32},
    {28, 30, 33, 36},
};

template <std::size_t NP, std::size_t NR>
Grid make_grid2(const double (&table)[NP][NR], std::vector<double> pec,
                std::vector<double> ret) {
  std::vector<double> values;
  values.reserve(NP * NR);
  for (std::size_t i = 0; i < NP; ++i)
    for (std::size_t j = 0; j < NR; ++j) values.push_back(table[i][j]);
  return Grid({std::move(pec), std::move(ret)}, std::move(values));
}

Grid make_merr_grid() {
  std::vector<double> values;
  values.reserve(3 * 4 * 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < 3; ++k)
        values.push_back(kMerr85[i][j] + kMerrOffset[k]);
  return Grid({{std::begin(kPecAxis), std::end(kPecAxis)},
               {std::begin(kRetAxis), std::end(kRetAxis)},
               {std::begin(kTempAxis), std::end(kTempAxis)}},
              std::move(values));
}

// Delta grid = shape[r] x scale[pec][ret][temp], temp major-to-minor order
// reduction, pec, retention, temperature.
template <std::size_t NS>
Grid make_delta_grid(const double (&shape)[NS], std::vector<double> raxis,
                     const double (&s30)[3][4], const double (&s55)[3][4],
                     const double (&s85)[3][4]) {
  std::vector<double> values;
  values.reserve(NS * 3 * 4 * 3);
  for (std::size_t r = 0; r < NS; ++r)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        values.push_back(shape[r] * s30[i][j]);
        values.push_back(shape[r] * s55[i][j]);
        values.push_back(shape[r] * s85[i][j]);
      }
  return Grid({std::move(raxis),
               {std::begin(kPecAxis), std::end(kPecAxis)},
               {std::begin(kRetAxis), std::end(kRetAxis)},
               {std::begin(kTempAxis), std::end(kTempAxis)}},
              std::move(values));
}

}  // namespace

RetryCalibration RetryCalibration::defaults() {
  RetryCalibration cal;
  cal.pec_axis.assign(std::begin(kPecAxis), std::end(kPecAxis));
  cal.retention_axis.assign(std::begin(kRetAxis), std::end(kRetAxis));
  cal.temp_axis.assign(std::begin(kTempAxis), std::end(kTempAxis));
  cal.reduction_axis.assign(std::begin(kReductionAxis), std::end(kReductionAxis));
  cal.mean_nrr = make_grid2(kMeanNrr, cal.pec_axis, cal.retention_axis);
  cal.min_nrr = make_grid2(kMinNrr, cal.pec_axis, cal.retention_axis);
  cal.merr = make_merr_grid();
  cal.delta_tpre = make_delta_grid(kTpreShape, cal.reduction_axis, kTpreScale30,
                                   kTpreScale55, kTpreScale85);
  cal.delta_teval =
      make_delta_grid(kTevalShape, {std::begin(kTevalAxis), std::end(kTevalAxis)},
                      kTevalScale, kTevalScale, kTevalScale);
  cal.delta_tdisch =
      make_delta_grid(kTdischShape, {std::begin(kTdischAxis), std::end(kTdischAxis)},
                      kTdischScale, kTdischScale, kTdischScale);
  cal.validate();
  return cal;
}

void RetryCalibration::validate() const {
  if (jitter_sigma < 0.0) throw ConfigError("jitter_sigma must be >= 0");
  if (max_retry_steps <= 0) throw ConfigError("max_retry_steps must be > 0");
  if (ecc_capability <= 0) throw ConfigError("ecc_capability must be > 0");
  if (safety_margin_bits < 0 || safety_margin_bits >= ecc_capability) {
    throw ConfigError("safety_margin_bits must be in [0, ecc_capability)");
  }
  if (outlier_probability < 0.0 || outlier_probability > 1.0) {
    throw ConfigError("outlier_probability must be in [0, 1]");
  }
  if (mean_nrr.rank() != 2 || min_nrr.rank() != 2 || merr.rank() != 3 ||
      delta_tpre.rank() != 4 || delta_teval.rank() != 4 ||
      delta_tdisch.rank() != 4) {
    throw ConfigError("calibration grid rank mismatch");
  }
  // Error surfaces worsen with wear and retention and improve with
  // temperature; reduction deltas grow with the reduction and are zero
  // at no reduction.
  if (!merr.monotone_along(0, +1) || !merr.monotone_along(1, +1) ||
      !merr.monotone_along(2, -1)) {
    throw ConfigError("merr grid must be non-decreasing in PEC/retention and "
                      "non-increasing in temperature");
  }
  for (const Grid* g : {&delta_tpre, &delta_teval, &delta_tdisch}) {
    if (!g->monotone_along(0, +1) || !g->monotone_along(1, +1) ||
        !g->monotone_along(2, +1) || !g->monotone_along(3, -1)) {
      throw ConfigError("delta grids must be non-decreasing in reduction/PEC/"
                        "retention and non-increasing in temperature");
    }
    for (std::size_t i = 0; i < g->axes()[1].size() * g->axes()[2].size() *
                                    g->axes()[3].size();
         ++i) {
      if (g->values()[i] != 0.0) {
        throw ConfigError("delta grids must be zero at reduction 0");
      }
    }
  }
}

double arrhenius_activation_energy_ev() {
  // Solved once from the 13 h at 85C == 1 year at 30C anchor.
  constexpr double kBoltzmannEv = 8.617333262e-5;
  constexpr double kTUse = 303.15;
  constexpr double kTStress = 358.15;
  static const double ea =
      std::log(8760.0 / 13.0) * kBoltzmannEv / (1.0 / kTUse - 1.0 / kTStress);
  return ea;
}

double arrhenius_acceleration(double temp_c) {
  constexpr double kBoltzmannEv = 8.617333262e-5;
  constexpr double kTUse = 303.15;
  if (temp_c < -273.15) throw std::invalid_argument("temperature below absolute zero");
  const double t_stress = temp_c + 273.15;
  return std::exp(arrhenius_activation_energy_ev() / kBoltzmannEv *
                  (1.0 / kTUse - 1.0 / t_stress));
}

double effective_retention_months(double elapsed_hours, double temp_c) {
  if (elapsed_hours < 0.0) throw std::invalid_argument("elapsed time must be >= 0");
  constexpr double kHoursPerMonth = 730.0;  // 8760 / 12
  return elapsed_hours * arrhenius_acceleration(temp_c) / kHoursPerMonth;
}

namespace {

OperatingCondition clamp_condition(const RetryCalibration& cal,
                                   const OperatingCondition& cond,
                                   bool* clamped = nullptr) {
  OperatingCondition c = cond;
  c.pec = std::clamp(c.pec, cal.pec_axis.front(), cal.pec_axis.back());
  c.retention_months = std::clamp(c.retention_months, cal.retention_axis.front(),
                                  cal.retention_axis.back());
  c.temp_c = std::clamp(c.temp_c, cal.temp_axis.front(), cal.temp_axis.back());
  if (clamped != nullptr) {
    *clamped = c.pec != cond.pec || c.retention_months != cond.retention_months ||
               c.temp_c != cond.temp_c;
  }
  return c;
}

}  // namespace

int sample_retry_steps(const RetryCalibration& cal, const OperatingCondition& cond,
                       std::uint64_t page_id, std::uint64_t seed,
                       std::uint64_t* clamp_warnings, bool* overflow) {
  bool clamped = false;
  const OperatingCondition c = clamp_condition(cal, cond, &clamped);
  if (clamped && clamp_warnings != nullptr) ++*clamp_warnings;

  const double mean = cal.mean_nrr.at({c.pec, c.retention_months});
  if (mean <= 0.0) return 0;  // no-retry region: fresh pages

  const auto floor_steps = static_cast<int>(
      std::llround(cal.min_nrr.at({c.pec, c.retention_months})));

  SplitMix64 rng(SplitMix64::mix(SplitMix64::mix(seed) ^ page_id));
  const double jitter =
      truncated_normal(rng, cal.jitter_sigma, 3.0 * cal.jitter_sigma);
  auto steps = static_cast<int>(std::llround(mean + jitter));
  if (overflow != nullptr && steps > cal.max_retry_steps) *overflow = true;
  return std::clamp(steps, std::max(floor_steps, 0), cal.max_retry_steps);
}

int max_errors_final_step(const RetryCalibration& cal, OperatingCondition cond) {
  const OperatingCondition c = clamp_condition(cal, cond);
  const double v = cal.merr.at({c.pec, c.retention_months, c.temp_c});
  return static_cast<int>(std::ceil(v - 1e-9));
}

namespace {

double delta_from_grid(const RetryCalibration& cal, const Grid& grid,
                       double reduction, const OperatingCondition& cond) {
  const auto& raxis = grid.axes()[0];
  if (reduction < raxis.front() - 1e-12 || reduction > raxis.back() + 1e-12) {
    throw std::invalid_argument("timing reduction outside the calibrated range");
  }
  const OperatingCondition c = clamp_condition(cal, cond);
  return grid.at({reduction, c.pec, c.retention_months, c.temp_c});
}

}  // namespace

double delta_errors(const RetryCalibration& cal, double tpre_reduction,
                    OperatingCondition cond) {
  return delta_from_grid(cal, cal.delta_tpre, tpre_reduction, cond);
}

double what_if_delta_errors(const RetryCalibration& cal, TimingPhase phase,
                            double reduction, OperatingCondition cond) {
  switch (phase) {
    case TimingPhase::kPre: return delta_from_grid(cal, cal.delta_tpre, reduction, cond);
    case TimingPhase::kEval: return delta_from_grid(cal, cal.delta_teval, reduction, cond);
    case TimingPhase::kDisch: return delta_from_grid(cal, cal.delta_tdisch, reduction, cond);
  }
  throw std::invalid_argument("unknown timing phase");
}

double min_safe_tpre(const RetryCalibration& cal, const OperatingCondition& cond) {
  if (!in_range(cal.pec_axis, cond.pec) ||
      !in_range(cal.retention_axis, cond.retention_months)) {
    throw std::invalid_argument("condition outside the calibration grid");
  }
  // The table is temperature-blind, so the margin check takes the worst
  // calibrated temperature.
  OperatingCondition worst = cond;
  worst.temp_c = cal.temp_axis.front();
  const int budget =
      cal.ecc_capability - cal.safety_margin_bits - max_errors_final_step(cal, worst);

  const int window_pct =
      std::min<int>(54, static_cast<int>(cal.delta_tpre.axes()[0].back() * 100.0));
  int best = 0;
  for (int pct = 1; pct <= window_pct; ++pct) {
    const double delta = delta_errors(cal, pct / 100.0, worst);
    if (delta <= static_cast<double>(budget) + 1e-9) best = pct;
  }
  return best / 100.0;
}

int pso_retry_steps(int n_rr) {
  if (n_rr < 0) throw std::invalid_argument("retry count must be >= 0");
  if (n_rr <= 3) return n_rr;
  const int ceil_30pct = (3 * n_rr + 9) / 10;
  return std::max(3, ceil_30pct);
}

RptTable::RptTable(std::vector<double> pec_buckets,
                   std::vector<double> retention_buckets,
                   std::vector<double> reductions)
    : pec_buckets_(std::move(pec_buckets)),
      retention_buckets_(std::move(retention_buckets)),
      reductions_(std::move(reductions)) {
  if (pec_buckets_.empty() || retention_buckets_.empty()) {
    throw ConfigError("RPT bucket lists must be non-empty");
  }
  if (!std::is_sorted(pec_buckets_.begin(), pec_buckets_.end()) ||
      !std::is_sorted(retention_buckets_.begin(), retention_buckets_.end())) {
    throw ConfigError("RPT buckets must be sorted ascending");
  }
  if (reductions_.size() != pec_buckets_.size() * retention_buckets_.size()) {
    throw ConfigError("RPT entry count does not match bucket grid");
  }
}

double RptTable::entry(std::size_t pec_idx, std::size_t ret_idx) const {
  return reductions_[pec_idx * retention_buckets_.size() + ret_idx];
}

namespace {

std::size_t floor_bucket(const std::vector<double>& buckets, double v) {
  if (v <= buckets.front()) return 0;
  std::size_t i = buckets.size() - 1;
  while (buckets[i] > v) --i;
  return i;
}

}  // namespace

double RptTable::lookup(const OperatingCondition& cond,
                        std::uint64_t* miss_warnings) const {
  if (reductions_.empty()) throw ConfigError("RPT table is empty");
  if (miss_warnings != nullptr &&
      (cond.pec > pec_buckets_.back() ||
       cond.retention_months > retention_buckets_.back())) {
    ++*miss_warnings;  // past the profiled range: nearest bucket serves
  }
  const std::size_t pi = floor_bucket(pec_buckets_, cond.pec);
  const std::size_t ri = floor_bucket(retention_buckets_, cond.retention_months);
  return entry(pi, ri);
}

void RptTable::serialize_text(std::ostream& os) const {
  os << "pec,retention_months,reduction_percent\n";
  for (std::size_t pi = 0; pi < pec_buckets_.size(); ++pi) {
    for (std::size_t ri = 0; ri < retention_buckets_.size(); ++ri) {
      os << static_cast<long long>(std::llround(pec_buckets_[pi])) << ','
         << retention_buckets_[ri] << ','
         << static_cast<int>(std::llround(entry(pi, ri) * 100.0)) << '\n';
    }
  }
}

RptTable RptTable::parse_text(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "pec,retention_months,reduction_percent") {
    throw ConfigError("bad RPT text header");
  }
  std::vector<double> pecs, rets, reductions;
  std::vector<std::pair<std::pair<double, double>, double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double pec, ret;
    int pct;
    char c1, c2;
    if (!(ss >> pec >> c1 >> ret >> c2 >> pct) || c1 != ',' || c2 != ',') {
      throw ConfigError("bad RPT text row: " + line);
    }
    rows.push_back({{pec, ret}, pct / 100.0});
    if (pecs.empty() || pecs.back() != pec) pecs.push_back(pec);
    if (pecs.size() == 1) rets.push_back(ret);
  }
  if (rows.size() != pecs.size() * rets.size()) {
    throw ConfigError("RPT text table is not a full grid");
  }
  for (const auto& row : rows) reductions.push_back(row.second);
  return RptTable(std::move(pecs), std::move(rets), std::move(reductions));
}

void RptTable::serialize_binary(std::ostream& os) const {
  for (std::size_t pi = 0; pi < pec_buckets_.size(); ++pi) {
    for (std::size_t ri = 0; ri < retention_buckets_.size(); ++ri) {
      const auto pec = static_cast<std::uint16_t>(std::llround(pec_buckets_[pi]));
      const auto ret = static_cast<std::uint8_t>(std::llround(retention_buckets_[ri]));
      const auto pct = static_cast<std::uint8_t>(std::llround(entry(pi, ri) * 100.0));
      const char bytes[4] = {
          static_cast<char>(pec & 0xff), static_cast<char>((pec >> 8) & 0xff),
          static_cast<char>(ret), static_cast<char>(pct)};
      os.write(bytes, 4);
    }
  }
}

RptTable RptTable::parse_binary(std::istream& is) {
  std::vector<double> pecs, rets, reductions;
  std::vector<std::pair<std::pair<double, double>, double>> rows;
  char bytes[4];
  while (is.read(bytes, 4)) {
    const double pec = static_cast<double>(
        static_cast<std::uint8_t>(bytes[0]) |
        (static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes[1])) << 8));
    const double ret = static_cast<std::uint8_t>(bytes[2]);
    const double reduction = static_cast<std::uint8_t>(bytes[3]) / 100.0;
    rows.push_back({{pec, ret}, reduction});
    if (pecs.empty() || pecs.back() != pec) pecs.push_back(pec);
    if (pecs.size() == 1) rets.push_back(ret);
  }
  if (is.gcount() != 0) throw ConfigError("binary RPT size is not a multiple of 4");
  if (rows.empty() || rows.size() != pecs.size() * rets.size()) {
    throw ConfigError("binary RPT table is not a full grid");
  }
  for (const auto& row : rows) reductions.push_back(row.second);
  return RptTable(std::move(pecs), std::move(rets), std::move(reductions));
}

RptTable build_rpt(const RetryCalibration& cal, std::vector<double> pec_buckets,
                   std::vector<double> retention_buckets) {
  if (pec_buckets.empty() || retention_buckets.empty()) {
    throw ConfigError("RPT bucket lists must be non-empty");
  }
  std::vector<double> reductions;
  reductions.reserve(pec_buckets.size() * retention_buckets.size());
  for (double pec : pec_buckets) {
    for (double ret : retention_buckets) {
      reductions.push_back(min_safe_tpre(cal, {pec, ret, cal.temp_axis.front()}));
    }
  }
  return RptTable(std::move(pec_buckets), std::move(retention_buckets),
                  std::move(reductions));
}

std::vector<double> default_rpt_pec_buckets() {
  return {0, 250, 500, 750, 1000, 2000};
}

std::vector<double> default_rpt_retention_buckets() {
  return {0, 1, 2, 4, 6, 12};
}

namespace {

Grid grid_from_json(const nlohmann::json& j, const std::string& key,
                    std::vector<std::vector<double>> axes) {
  if (!j.contains(key)) throw ConfigError("calibration missing grid: " + key);
  auto values = j.at(key).get<std::vector<double>>();
  return Grid(std::move(axes), std::move(values));
}

}  // namespace

RetryCalibration RetryCalibration::from_json(const nlohmann::json& j) {
  RetryCalibration cal;
  try {
    cal.pec_axis = j.at("pec_axis").get<std::vector<double>>();
    cal.retention_axis = j.at("retention_axis_months").get<std::vector<double>>();
    cal.temp_axis = j.at("temperature_axis_c").get<std::vector<double>>();
    cal.reduction_axis = j.at("tpre_reduction_axis").get<std::vector<double>>();
    cal.jitter_sigma = j.value("jitter_sigma", 2.0);
    cal.max_retry_steps = j.value("max_retry_steps", 50);
    cal.ecc_capability = j.value("ecc_capability", 72);
    cal.safety_margin_bits = j.value("safety_margin_bits", 14);
    cal.outlier_probability = j.value("outlier_probability", 0.0);

    cal.mean_nrr =
        grid_from_json(j, "mean_nrr", {cal.pec_axis, cal.retention_axis});
    cal.min_nrr = grid_from_json(j, "min_nrr", {cal.pec_axis, cal.retention_axis});
    cal.merr = grid_from_json(j, "merr",
                              {cal.pec_axis, cal.retention_axis, cal.temp_axis});
    cal.delta_tpre = grid_from_json(
        j, "delta_merr_tpre",
        {cal.reduction_axis, cal.pec_axis, cal.retention_axis, cal.temp_axis});
    const auto teval_axis = j.at("teval_reduction_axis").get<std::vector<double>>();
    const auto tdisch_axis = j.at("tdisch_reduction_axis").get<std::vector<double>>();
    cal.delta_teval = grid_from_json(
        j, "delta_merr_teval",
        {teval_axis, cal.pec_axis, cal.retention_axis, cal.temp_axis});
    cal.delta_tdisch = grid_from_json(
        j, "delta_merr_tdisch",
        {tdisch_axis, cal.pec_axis, cal.retention_axis, cal.temp_axis});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad calibration file: ") + e.what());
  }
  cal.validate();
  return cal;
}

RetryCalibration RetryCalibration::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("calibration file " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

nlohmann::json RetryCalibration::to_json() const {
  nlohmann::json j;
  j["pec_axis"] = pec_axis;
  j["retention_axis_months"] = retention_axis;
  j["temperature_axis_c"] = temp_axis;
  j["tpre_reduction_axis"] = reduction_axis;
  j["jitter_sigma"] = jitter_sigma;
  j["max_retry_steps"] = max_retry_steps;
  j["ecc_capability"] = ecc_capability;
  j["safety_margin_bits"] = safety_margin_bits;
  j["outlier_probability"] = outlier_probability;
  j["mean_nrr"] = mean_nrr.values();
  j["min_nrr"] = min_nrr.values();
  j["merr"] = merr.values();
  j["delta_merr_tpre"] = delta_tpre.values();
  j["teval_reduction_axis"] = delta_teval.axes()[0];
  j["delta_merr_teval"] = delta_teval.values();
  j["tdisch_reduction_axis"] = delta_tdisch.axes()[0];
  j["delta_merr_tdisch"] = delta_tdisch.values();
  return j;
}

}  // namespace retrysim
