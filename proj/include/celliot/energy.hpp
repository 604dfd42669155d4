#pragma once

// Energy of one reporting interval and the resulting battery lifetime.
//
// An interval walks through: downlink synchronisation, system information,
// random access, grant wait, the uplink report itself (one grant / data / ack
// exchange per transport block), the application acknowledgement, connected
// mode DRX until the ready timer expires, and finally standby. Standby is a
// sequence of eDRX cycles or a single PSM sleep, each priced by the sleep
// scheduler.

#include "celliot/link_analytics.hpp"
#include "celliot/power_optimizer.hpp"
#include "celliot/tables.hpp"
#include "celliot/types.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace celliot {

enum class RadioState { TX, RX, IDLE, SLEEP };

inline std::string_view to_string(RadioState s) {
  switch (s) {
    case RadioState::TX: return "TX";
    case RadioState::RX: return "RX";
    case RadioState::IDLE: return "IDLE";
    case RadioState::SLEEP: return "SLEEP";
  }
  return "?";
}

enum class StandbyPolicy { OPTIMIZED, UNOPTIMIZED };

struct ReportingCycleSpec {
  double reporting_interval = 86400.0;  // t_tot, seconds
  std::int64_t data_len_bits = 1600;
  EventDurations events{};
  DutyCycleConfig duty = DutyCycleConfig::psm(86400.0);
  LinkParams link{};
  Technology technology = Technology::NBIOT;
  StandbyPolicy standby = StandbyPolicy::OPTIMIZED;
};

struct TimelineEntry {
  std::string label;
  RadioState state;
  double start;     // seconds from the start of the interval
  double duration;  // seconds
  double power;     // watts
  double joules;
};

struct CycleEnergy {
  double total_joules = 0.0;
  double active_time = 0.0;   // everything before standby
  double standby_time = 0.0;
  int wakeups_per_sleep = 0;  // K of the standby schedule
  std::vector<TimelineEntry> timeline;
};

namespace detail {

class TimelineBuilder {
public:
  explicit TimelineBuilder(const PowerProfile& p) : p_(p) {}

  void add(std::string label, RadioState s, double duration) {
    if (duration <= 0.0) return;
    const double w = power(s);
    out_.timeline.push_back({std::move(label), s, clock_, duration, w, w * duration});
    out_.total_joules += w * duration;
    clock_ += duration;
  }

  [[nodiscard]] double now() const { return clock_; }
  CycleEnergy& result() { return out_; }

private:
  double power(RadioState s) const {
    switch (s) {
      case RadioState::TX: return p_.p_tx;
      case RadioState::RX: return p_.p_rx;
      case RadioState::IDLE: return p_.p_idle;
      case RadioState::SLEEP: return p_.p_sleep;
    }
    return 0.0;
  }

  const PowerProfile& p_;
  CycleEnergy out_;
  double clock_ = 0.0;
};

inline SleepSchedule standby_schedule(const DutyCycleConfig& duty, const PowerProfile& p,
                                      const ClockModel& clock, StandbyPolicy policy) {
  return policy == StandbyPolicy::OPTIMIZED ? plan_sleep_schedule(duty, p, clock)
                                            : unoptimized_schedule(duty, p, clock);
}

// Sleep for `span` seconds ending at the next scheduled activity. The drift
// schedule is applied when the span leaves room for it.
inline void emit_standby_span(TimelineBuilder& b, double span, double paging_window,
                              const PowerProfile& p, const ClockModel& clock,
                              StandbyPolicy policy, int& k_out) {
  if (span <= 0.0) return;
  // A drift-free clock keeps synchronisation through the whole sleep.
  if (clock.fractional_error == 0.0 || span - paging_window <= clock.resync_time) {
    b.add("sleep", RadioState::SLEEP, span - paging_window);
    b.add("paging", RadioState::RX, paging_window);
    return;
  }
  const DutyCycleConfig duty = paging_window > 0.0 ? DutyCycleConfig::edrx(span, paging_window)
                                                   : DutyCycleConfig::psm(span);
  const SleepSchedule s = standby_schedule(duty, p, clock, policy);
  k_out = s.k;
  for (double t : s.sleep_durations) {
    b.add("sleep", RadioState::SLEEP, t);
    b.add("resync", RadioState::RX, clock.resync_time);
  }
  b.add("pre-paging idle", RadioState::IDLE, s.active_time);
  b.add("paging", RadioState::RX, paging_window);
}

}  // namespace detail

// Uplink report airtime split by radio state, seconds, for data_len bits.
struct ReportAirtime {
  double rx = 0.0;
  double idle = 0.0;
  double tx = 0.0;
};

// Blocks of one report; an empty report skips the uplink exchange.
inline std::int64_t report_blocks(std::int64_t data_len_bits, const LinkParams& lp) {
  if (data_len_bits < 0) throw ValidationError("data length must be >= 0");
  return data_len_bits == 0 ? 0 : transport_blocks(data_len_bits, lp);
}

inline ReportAirtime report_airtime(std::int64_t data_len_bits, const LinkParams& lp) {
  const auto blocks = static_cast<double>(report_blocks(data_len_bits, lp));
  const auto& t = lp.timing;
  ReportAirtime a;
  a.rx = blocks * (lp.rldc * t.t_pdcch + lp.rldc * t.t_dlack);
  a.idle = blocks * (t.t_dus + t.t_uds);
  a.tx = blocks * lp.rlus * t.t_pusch;
  return a;
}

inline CycleEnergy reporting_cycle_energy(const ReportingCycleSpec& spec, const PowerProfile& p,
                                          const ClockModel& clock) {
  p.validate();
  clock.validate();
  spec.events.validate();
  spec.link.validate();
  if (!(spec.reporting_interval > 0.0)) throw ValidationError("reporting interval must be > 0");

  detail::TimelineBuilder b(p);
  const auto& ev = spec.events;
  b.add("downlink synch", RadioState::RX, ev.t_synch_dl);
  b.add("system information", RadioState::RX, ev.t_pbch);
  b.add("random access", RadioState::TX, ev.t_rach);
  b.add("grant wait", RadioState::RX, ev.t_grant_wait);

  const auto blocks = report_blocks(spec.data_len_bits, spec.link);
  const auto& lp = spec.link;
  const auto& t = lp.timing;
  for (std::int64_t i = 0; i < blocks; ++i) {
    b.add("ul grant", RadioState::RX, lp.rldc * t.t_pdcch);
    b.add("dl-ul retune", RadioState::IDLE, t.t_dus);
    b.add("report tx", RadioState::TX, lp.rlus * t.t_pusch);
    b.add("ul-dl retune", RadioState::IDLE, t.t_uds);
    b.add("harq ack", RadioState::RX, lp.rldc * t.t_dlack);
  }
  b.add("application ack", RadioState::RX, ev.t_ack_rx);
  b.add("connected drx", RadioState::IDLE, ev.t_connected_drx);

  const double active = b.now();
  const double standby = spec.reporting_interval - active;
  if (standby < 0.0)
    throw ValidationError("reporting interval shorter than its active events");

  CycleEnergy& out = b.result();
  out.active_time = active;
  out.standby_time = standby;

  if (spec.duty.mode == DutyMode::PSM) {
    detail::emit_standby_span(b, standby, 0.0, p, clock, spec.standby, out.wakeups_per_sleep);
  } else {
    spec.duty.validate();
    const double period = spec.duty.period;
    const auto cycles = static_cast<std::int64_t>(std::floor(standby / period));
    for (std::int64_t c = 0; c < cycles; ++c)
      detail::emit_standby_span(b, period, spec.duty.paging_window, p, clock, spec.standby,
                                out.wakeups_per_sleep);
    // The tail before the next report ends in its own synchronisation, so
    // no paging window is spent there.
    int tail_k = 0;
    detail::emit_standby_span(b, standby - static_cast<double>(cycles) * period, 0.0, p, clock,
                              spec.standby, tail_k);
  }
  return std::move(out);
}

struct LifetimeResult {
  double energy_per_cycle = 0.0;
  double cycles_per_day = 0.0;
  double lifetime_years = 0.0;
};

inline double battery_lifetime(double capacity_joules, double energy_per_cycle,
                               double reporting_interval) {
  if (!(capacity_joules > 0.0 && energy_per_cycle > 0.0 && reporting_interval > 0.0))
    throw ValidationError("battery lifetime inputs must be > 0");
  return capacity_joules / energy_per_cycle * reporting_interval / kSecondsPerYear;
}

inline LifetimeResult lifetime(double capacity_joules, const CycleEnergy& e,
                               double reporting_interval) {
  LifetimeResult r;
  r.energy_per_cycle = e.total_joules;
  r.cycles_per_day = 86400.0 / reporting_interval;
  r.lifetime_years = battery_lifetime(capacity_joules, e.total_joules, reporting_interval);
  return r;
}

// ---------------------------------------------------------------------------
// eMTC versus NB-IoT lifetime matrix.

struct LifetimeSweep {
  std::vector<double> reports_per_day{1, 2, 4, 6, 8, 10};
  std::vector<std::int64_t> data_bytes{12, 160};
  std::vector<CoverageLevel> coverage{CoverageLevel::GOOD, CoverageLevel::MEDIUM,
                                      CoverageLevel::POOR};
};

struct LifetimeSetup {
  PowerProfile nbiot_power{};
  double emtc_radio_factor = 1.25;
  std::optional<PowerProfile> emtc_power;  // overrides the factor when set
  ClockModel clock{0.001, 0.2};
  double battery_joules = 18000.0;
  int emtc_rbu = 6;
  int nbiot_rbu = 1;
  LinkTiming emtc_timing{};
  LinkTiming nbiot_timing{};
  StandbyPolicy standby = StandbyPolicy::OPTIMIZED;

  [[nodiscard]] PowerProfile power(Technology t) const {
    if (t == Technology::NBIOT) return nbiot_power;
    return emtc_power ? *emtc_power : nbiot_power.scaled_radio(emtc_radio_factor);
  }
  [[nodiscard]] int rbu(Technology t) const { return t == Technology::EMTC ? emtc_rbu : nbiot_rbu; }
  [[nodiscard]] const LinkTiming& timing(Technology t) const {
    return t == Technology::EMTC ? emtc_timing : nbiot_timing;
  }
};

struct LifetimePoint {
  Technology technology;
  CoverageLevel coverage;
  double mcl_db;
  std::int64_t data_bytes;
  double reports_per_day;
  double energy_per_cycle;
  double lifetime_years;
};

// Lifetime of a PSM device reporting `reports_per_day` times.
inline LifetimePoint psm_lifetime_point(const LifetimeSetup& setup, const TableSet& tables,
                                        Technology tech, CoverageLevel level,
                                        std::int64_t data_bytes, double reports_per_day) {
  const CoverageClass cls = tables.coverage.level(tech, level);
  ReportingCycleSpec spec;
  spec.technology = tech;
  spec.reporting_interval = 86400.0 / reports_per_day;
  spec.data_len_bits = data_bytes * 8;
  spec.events = tables.events.get(tech, level);
  spec.link = make_link_params(tables.tbs, tech, cls, setup.rbu(tech), setup.timing(tech));
  spec.duty = DutyCycleConfig::psm(spec.reporting_interval);
  spec.standby = setup.standby;
  const CycleEnergy e = reporting_cycle_energy(spec, setup.power(tech), setup.clock);
  return {tech,
          level,
          cls.mcl_db,
          data_bytes,
          reports_per_day,
          e.total_joules,
          battery_lifetime(setup.battery_joules, e.total_joules, spec.reporting_interval)};
}

inline std::vector<LifetimePoint> emtc_vs_nbiot_lifetime(const LifetimeSetup& setup,
                                                         const TableSet& tables,
                                                         const LifetimeSweep& sweep) {
  std::vector<LifetimePoint> out;
  for (auto level : sweep.coverage)
    for (auto bytes : sweep.data_bytes)
      for (double rpd : sweep.reports_per_day)
        for (auto tech : {Technology::EMTC, Technology::NBIOT})
          out.push_back(psm_lifetime_point(setup, tables, tech, level, bytes, rpd));
  return out;
}

}  // namespace celliot
