#pragma once

// Sleep scheduling under clock drift for one eDRX (or PSM) period.
//
// A low cost sleep clock drifts by a fraction m of the time slept, so the
// device must wake m * t_sleep early and idle on the accurate clock before
// its paging occasion. Splitting the period into K sleeps, each followed by a
// resynchronisation of length t_synch, shrinks that idle tail at the cost of
// K receptions. For K cycles the period is partitioned as
//
//   period = t_pdcch + K * t_synch + sum(sleep_k) + t_act,   t_act = m * sleep_K
//
// and the energy spent is K * P_rx * t_synch + P_sleep * sum(sleep_k) + P_idle * t_act.
//
// Cycles are added greedily: cycle K+1 is carved out of the residual active
// time of cycle K. With residual R the split is sleep = R / (1 + m) and
// t_act = m * R / (1 + m), earlier sleeps stay fixed.

#include "celliot/types.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

namespace celliot {

struct SleepSchedule {
  int k = 0;
  std::vector<double> sleep_durations;
  double active_time = 0.0;
  double total_energy = 0.0;
};

inline constexpr double kScheduleTolerance = 1e-9;

// Budget identity residual: period - t_pdcch - k t_synch - sum(sleep) - t_act.
inline double budget_residual(const SleepSchedule& s, const DutyCycleConfig& duty,
                              const ClockModel& clock) {
  const double slept = std::accumulate(s.sleep_durations.begin(), s.sleep_durations.end(), 0.0);
  return duty.period - duty.paging_window - s.k * clock.resync_time - slept - s.active_time;
}

// Checks the duty-independent invariants: positive, strictly decreasing
// sleeps and the drift coupling of the final active time.
inline void check_schedule_shape(const SleepSchedule& s, const ClockModel& clock) {
  if (s.k < 0 || static_cast<std::size_t>(s.k) != s.sleep_durations.size())
    throw ValidationError("schedule k does not match number of sleep durations");
  if (!(s.active_time >= 0.0)) throw ValidationError("schedule active time must be >= 0");
  for (std::size_t i = 0; i < s.sleep_durations.size(); ++i) {
    if (!(s.sleep_durations[i] > 0.0)) throw ValidationError("sleep durations must be > 0");
    if (i > 0 && !(s.sleep_durations[i] < s.sleep_durations[i - 1]))
      throw ValidationError("sleep durations must be strictly decreasing");
  }
  if (s.k >= 1) {
    const double coupled = clock.fractional_error * s.sleep_durations.back();
    if (std::abs(s.active_time - coupled) > kScheduleTolerance)
      throw ValidationError("active time does not match drift of the last sleep");
  }
}

inline void validate_schedule(const SleepSchedule& s, const DutyCycleConfig& duty,
                              const ClockModel& clock) {
  check_schedule_shape(s, clock);
  if (std::abs(budget_residual(s, duty, clock)) > kScheduleTolerance) {
    std::ostringstream os;
    os << "schedule violates period budget by " << budget_residual(s, duty, clock) << " s";
    throw ValidationError(os.str());
  }
}

// Objective value of a schedule. The paging window is not included.
inline double schedule_energy(const SleepSchedule& s, const PowerProfile& p,
                              const ClockModel& clock) {
  check_schedule_shape(s, clock);
  double sleep_energy = 0.0;
  for (double t : s.sleep_durations) sleep_energy += p.p_sleep * t;
  return s.k * p.p_rx * clock.resync_time + sleep_energy + p.p_idle * s.active_time;
}

namespace detail {

inline double require_budget(const DutyCycleConfig& duty, const ClockModel& clock) {
  duty.validate();
  clock.validate();
  const double budget = duty.period - duty.paging_window;
  if (!(budget > clock.resync_time)) {
    std::ostringstream os;
    os << "period too short: " << duty.period << " s leaves no room for a "
       << clock.resync_time << " s resync and a sleep";
    throw ValidationError(os.str());
  }
  return budget;
}

}  // namespace detail

// Single wake-up: sleep once and idle m * t_sleep before the paging occasion.
inline SleepSchedule unoptimized_schedule(const DutyCycleConfig& duty, const PowerProfile& p,
                                          const ClockModel& clock) {
  const double budget = detail::require_budget(duty, clock);
  const double m = clock.fractional_error;
  const double residual = budget - clock.resync_time;
  SleepSchedule s;
  s.k = 1;
  s.sleep_durations = {residual / (1.0 + m)};
  s.active_time = m * residual / (1.0 + m);
  s.total_energy = schedule_energy(s, p, clock);
  return s;
}

// Greedy multi wake-up schedule. A further cycle is added while the current
// active time still leaves room for a resync plus a positive sleep and the
// extra cycle lowers the energy. When the first marginal test already fails
// the single-wake schedule is returned.
inline SleepSchedule plan_sleep_schedule(const DutyCycleConfig& duty, const PowerProfile& p,
                                         const ClockModel& clock) {
  p.validate();
  SleepSchedule s = unoptimized_schedule(duty, p, clock);
  const double m = clock.fractional_error;
  const double ts = clock.resync_time;
  while (s.active_time > ts) {
    const double residual = s.active_time - ts;
    const double next_sleep = residual / (1.0 + m);
    const double next_act = m * residual / (1.0 + m);
    const double added = p.p_rx * ts + p.p_sleep * next_sleep + p.p_idle * next_act;
    if (added > p.p_idle * s.active_time) break;
    s.sleep_durations.push_back(next_sleep);
    s.active_time = next_act;
    ++s.k;
  }
  s.total_energy = schedule_energy(s, p, clock);
  return s;
}

// Exhaustive reference: build the K-cycle schedule for every K <= k_max from
// scratch and keep the cheapest. Verification only.
inline SleepSchedule oracle_schedule(const DutyCycleConfig& duty, const PowerProfile& p,
                                     const ClockModel& clock, int k_max) {
  if (k_max < 1) throw ValidationError("oracle k_max must be >= 1");
  const double budget = detail::require_budget(duty, clock);
  const double m = clock.fractional_error;
  const double ts = clock.resync_time;

  SleepSchedule best;
  double best_energy = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    SleepSchedule cand;
    cand.k = k;
    double available = budget;  // time still to partition
    bool feasible = true;
    for (int step = 0; step < k; ++step) {
      const double residual = available - ts;
      if (!(residual > 0.0)) {
        feasible = false;
        break;
      }
      cand.sleep_durations.push_back(residual / (1.0 + m));
      available = m * residual / (1.0 + m);
    }
    if (!feasible) break;
    cand.active_time = available;
    double energy = k * p.p_rx * ts + p.p_idle * cand.active_time;
    for (double t : cand.sleep_durations) energy += p.p_sleep * t;
    if (energy < best_energy) {
      best_energy = energy;
      best = cand;
    }
  }
  best.total_energy = best_energy;
  return best;
}

}  // namespace celliot
