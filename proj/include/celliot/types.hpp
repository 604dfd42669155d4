#pragma once

// Shared domain types for the eMTC / NB-IoT models.
//
// Times cross the public API in seconds (double). The simulator and the
// closed-form latency formulas work in integer milliseconds; one millisecond
// is one LTE subframe.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace celliot {

// Malformed table or scenario input. Carries a human readable location.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A value violates a documented invariant or precondition.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Coupling loss beyond the deepest coverage class.
class OutOfCoverageError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

enum class Technology { EMTC, NBIOT };

inline std::string_view to_string(Technology t) {
  return t == Technology::EMTC ? "EMTC" : "NBIOT";
}

inline Technology technology_from_string(std::string_view s) {
  if (s == "EMTC" || s == "emtc") return Technology::EMTC;
  if (s == "NBIOT" || s == "nbiot") return Technology::NBIOT;
  throw ConfigError("unknown technology '" + std::string(s) + "'");
}

// Highest MCS index a technology may use. eMTC is capped at 16QAM, NB-IoT at
// QPSK; with the bundled TBS tables that is MCS 15 and MCS 12 respectively.
inline int max_mcs(Technology t) { return t == Technology::EMTC ? 15 : 12; }

// Largest per-UE allocation in resource blocks.
inline int max_rbu(Technology t) { return t == Technology::EMTC ? 6 : 1; }

struct PowerProfile {
  double p_tx = 0.792;     // W
  double p_rx = 0.072;     // W
  double p_idle = 0.022;   // W
  double p_sleep = 18e-6;  // W

  void validate() const {
    if (!(p_tx > p_rx && p_rx > p_idle && p_idle > p_sleep && p_sleep > 0.0))
      throw ValidationError("power profile must satisfy p_tx > p_rx > p_idle > p_sleep > 0");
  }

  // eMTC radio draws more in Tx/Rx; idle and sleep are shared.
  [[nodiscard]] PowerProfile scaled_radio(double factor) const {
    PowerProfile p = *this;
    p.p_tx *= factor;
    p.p_rx *= factor;
    return p;
  }
};

struct ClockModel {
  double fractional_error = 0.0;  // m
  double resync_time = 0.2;       // t_synch, seconds

  void validate() const {
    if (!(fractional_error >= 0.0 && fractional_error < 1.0))
      throw ValidationError("clock fractional error must lie in [0, 1)");
    if (!(resync_time > 0.0)) throw ValidationError("clock resync time must be > 0");
  }
};

enum class DutyMode { EDRX, PSM };

struct DutyCycleConfig {
  DutyMode mode = DutyMode::PSM;
  double period = 0.0;          // t_eDRX or t_PSM, seconds
  double paging_window = 0.0;   // t_PDCCH, seconds

  static DutyCycleConfig edrx(double period, double paging_window) {
    return {DutyMode::EDRX, period, paging_window};
  }
  static DutyCycleConfig psm(double period) { return {DutyMode::PSM, period, 0.0}; }

  void validate() const {
    if (mode == DutyMode::PSM && paging_window != 0.0)
      throw ValidationError("PSM duty cycle has no paging window");
    if (!(paging_window >= 0.0)) throw ValidationError("paging window must be >= 0");
    if (!(period > paging_window)) throw ValidationError("duty period must exceed paging window");
  }
};

// Per-technology channel timing constants, seconds per subframe-level event.
struct LinkTiming {
  double t_pdcch = 1e-3;
  double t_pdsch = 1e-3;
  double t_pusch = 1e-3;
  double t_d = 1e-3;     // cross-subframe delay
  double t_dus = 3e-3;   // DL -> UL RF retune
  double t_uds = 3e-3;   // UL -> DL RF retune
  double t_ulack = 1e-3;
  double t_dlack = 1e-3;
};

struct LinkParams {
  int mcs = 0;
  int rbu = 1;
  std::int64_t tbs_bits = 0;
  int rldc = 1;  // control repetitions
  int rlds = 1;  // downlink data repetitions
  int rlus = 1;  // uplink data repetitions, also used for the uplink ack
  LinkTiming timing{};

  void validate() const {
    if (rldc < 1 || rlds < 1 || rlus < 1) throw ValidationError("repetition counts must be >= 1");
    if (tbs_bits <= 0) throw ValidationError("tbs_bits must be > 0");
    if (rbu < 1) throw ValidationError("rbu must be >= 1");
    const LinkTiming& t = timing;
    for (double v : {t.t_pdcch, t.t_pdsch, t.t_pusch, t.t_d, t.t_dus, t.t_uds, t.t_ulack, t.t_dlack})
      if (!(v >= 0.0)) throw ValidationError("link durations must be >= 0");
  }
};

enum class CoverageLevel { GOOD = 0, MEDIUM = 1, POOR = 2 };

inline std::string_view to_string(CoverageLevel c) {
  switch (c) {
    case CoverageLevel::GOOD: return "GOOD";
    case CoverageLevel::MEDIUM: return "MEDIUM";
    case CoverageLevel::POOR: return "POOR";
  }
  return "?";
}

inline CoverageLevel coverage_level_from_string(std::string_view s) {
  if (s == "GOOD" || s == "good") return CoverageLevel::GOOD;
  if (s == "MEDIUM" || s == "medium") return CoverageLevel::MEDIUM;
  if (s == "POOR" || s == "poor") return CoverageLevel::POOR;
  throw ConfigError("unknown coverage class '" + std::string(s) + "'");
}

// One row of the MCL mapping: the class applies to coupling losses up to
// mcl_db (inclusive) and above the previous row's threshold.
struct CoverageClass {
  CoverageLevel level = CoverageLevel::GOOD;
  double mcl_db = 0.0;
  int mcs = 0;
  int rldc = 1;
  int rlds = 1;
  int rlus = 1;
};

// Seconds to whole subframes. Inputs are expected to be multiples of 1 ms.
inline std::int64_t to_ms(double seconds) { return std::llround(seconds * 1000.0); }
inline double from_ms(std::int64_t ms) { return static_cast<double>(ms) / 1000.0; }

inline constexpr double kSecondsPerYear = 365.25 * 86400.0;

}  // namespace celliot
