#pragma once

// Deterministic discrete-event simulator of eMTC / NB-IoT uplink reporting.
//
// Time advances in whole subframes (1 ms). Each cell runs independently: its
// UEs are those attached to it by strongest received power, and their
// coverage class follows from the effective coupling loss of the SINR map.
//
// The scheduler serves UEs in grant rounds. A round collects up to
// floor(N_RB / RBU) queued UEs of one coverage class in round-robin order,
// sends their grants in shared control subframes and then runs one
//   grant (RLDC) | DL->UL retune | PUSCH (RLUS) | UL->DL retune | ack (RLDC)
// cycle per transport block attempt, all members aligned. Control and data
// never share a subframe. A failed block costs another cycle, up to the
// retry cap. The next round starts when the longest member finishes.
//
// A queued report that can no longer finish inside its reporting period is
// discarded when its turn comes. Every report ends as exactly one of
// delivered, expired, failed or unreachable.

#include "celliot/link_analytics.hpp"
#include "celliot/radio.hpp"
#include "celliot/rng.hpp"
#include "celliot/tables.hpp"
#include "celliot/types.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace celliot {

enum class WakeupMode { RANDOM, SIMULTANEOUS };

struct TechRadio {
  int n_rb_total = 6;
  int rbu = 1;
  LinkTiming timing{};
};

struct TrafficConfig {
  double reporting_period_s = 30.0;
  std::int64_t payload_bytes = 12;
  int periods = 10;
  WakeupMode wakeup = WakeupMode::RANDOM;
};

struct SimScenario {
  Technology technology = Technology::EMTC;
  CityConfig city{};
  RadioConfig radio{};
  TechRadio link{};
  TrafficConfig traffic{};
  bool bler_enabled = true;
  int retry_cap = 8;
  double core_delay_s = 0.020;
  bool audit = false;  // per-subframe resource check

  void validate() const {
    if (!(link.rbu >= 1 && link.n_rb_total >= link.rbu))
      throw ValidationError("rbu must satisfy 1 <= rbu <= n_rb_total");
    if (link.rbu > max_rbu(technology))
      throw ValidationError("rbu exceeds the technology's per-UE allocation limit");
    if (!(traffic.reporting_period_s > 0.0)) throw ValidationError("reporting period must be > 0");
    if (to_ms(traffic.reporting_period_s) < 1) throw ValidationError("reporting period below 1 ms");
    if (traffic.payload_bytes <= 0) throw ValidationError("payload must be > 0 bytes");
    if (traffic.periods < 1) throw ValidationError("periods must be >= 1");
    if (retry_cap < 0) throw ValidationError("retry cap must be >= 0");
    if (!(core_delay_s >= 0.0)) throw ValidationError("core delay must be >= 0");
  }
};

enum class Outcome { DELIVERED, EXPIRED, FAILED, UNREACHABLE };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::DELIVERED: return "delivered";
    case Outcome::EXPIRED: return "expired";
    case Outcome::FAILED: return "failed";
    case Outcome::UNREACHABLE: return "unreachable";
  }
  return "?";
}

// Link state of one UE, fixed for the run.
struct UeLink {
  int id = 0;
  int cell = -1;
  UeRadio radio{};
  bool reachable = false;
  CoverageLevel level = CoverageLevel::GOOD;
  LinkParams link{};
  std::int64_t blocks = 0;
  std::int64_t tl_ms = 0;      // one uplink transport block cycle
  double block_error = 0.0;    // per attempt
  [[nodiscard]] std::int64_t nominal_ms() const { return blocks * tl_ms; }
};

struct PreparedScenario {
  CityTopology city;
  std::vector<UeLink> ues;
  std::int64_t group_size = 1;
};

inline PreparedScenario prepare_scenario(const SimScenario& sc, const TableSet& tables,
                                         std::uint64_t seed) {
  sc.validate();
  PreparedScenario out;
  out.city = generate_city(sc.city, seed);
  out.group_size = sc.link.n_rb_total / sc.link.rbu;
  const auto radio = sinr_map(sc.radio, out.city);
  const std::int64_t bits = sc.traffic.payload_bytes * 8;
  out.ues.resize(radio.size());
  for (std::size_t i = 0; i < radio.size(); ++i) {
    UeLink& u = out.ues[i];
    u.id = static_cast<int>(i);
    u.radio = radio[i];
    u.cell = radio[i].serving_cell;
    try {
      const CoverageClass cls = tables.coverage.for_mcl(sc.technology, radio[i].effective_mcl_db);
      u.reachable = true;
      u.level = cls.level;
      u.link = make_link_params(tables.tbs, sc.technology, cls, sc.link.rbu, sc.link.timing);
      u.blocks = transport_blocks(bits, u.link);
      u.tl_ms = tl_uplink_ms(u.link);
      u.block_error = sc.bler_enabled
                          ? bler(tables.bler, sc.technology, u.link.mcs, radio[i].sinr_db, u.link.rlus)
                          : 0.0;
    } catch (const OutOfCoverageError&) {
      u.reachable = false;
    }
  }
  return out;
}

struct ReportRecord {
  int ue = 0;
  int cell = 0;
  std::int64_t created_ms = 0;
  std::int64_t delivered_ms = -1;
  std::int64_t airtime_ms = 0;  // time the UE spent in its grant round
  Outcome outcome = Outcome::EXPIRED;
};

struct UeSummary {
  int generated = 0;
  int delivered = 0;
  [[nodiscard]] double delivery_ratio() const {
    return generated == 0 ? 1.0 : static_cast<double>(delivered) / generated;
  }
};

struct SimReport {
  std::uint64_t seed = 0;
  std::vector<ReportRecord> records;  // ordered by (cell, completion)
  std::vector<UeSummary> per_ue;
  std::vector<std::int64_t> cell_airtime_ms;
  std::int64_t total_airtime_ms = 0;  // longest cell airtime
  std::int64_t max_single_airtime_ms = 0;
  std::int64_t core_delay_ms = 0;
  int max_rb_in_subframe = 0;
  std::int64_t audit_violations = 0;

  [[nodiscard]] std::int64_t count(Outcome o) const {
    return std::count_if(records.begin(), records.end(), [o](const auto& r) { return r.outcome == o; });
  }

  // Mean end-to-end latency of delivered reports, seconds.
  [[nodiscard]] double mean_latency_s() const {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& r : records)
      if (r.outcome == Outcome::DELIVERED) {
        sum += static_cast<double>(r.delivered_ms - r.created_ms + core_delay_ms);
        ++n;
      }
    return n == 0 ? 0.0 : sum / static_cast<double>(n) / 1000.0;
  }

  // Share of UEs with at least `threshold` of their reports delivered on time.
  [[nodiscard]] double fraction_ues_meeting(double threshold) const {
    if (per_ue.empty()) return 1.0;
    const auto ok = std::count_if(per_ue.begin(), per_ue.end(),
                                  [&](const UeSummary& u) { return u.delivery_ratio() >= threshold; });
    return static_cast<double>(ok) / static_cast<double>(per_ue.size());
  }
};

namespace detail {

struct Arrival {
  std::int64_t time_ms;
  int ue;
  std::int64_t created_ms;
};

struct PendingReport {
  std::int64_t created_ms;
  std::int64_t deadline_ms;
};

// Per-subframe occupancy, only kept when auditing.
class SubframeAudit {
public:
  void control(std::int64_t from, std::int64_t len) {
    for (std::int64_t t = from; t < from + len; ++t) {
      auto& s = at(t);
      s.control = true;
      if (s.rbs > 0) ++violations;
    }
  }
  void data(std::int64_t from, std::int64_t len, int rbs, int n_rb_total) {
    for (std::int64_t t = from; t < from + len; ++t) {
      auto& s = at(t);
      s.rbs += rbs;
      max_rbs = std::max(max_rbs, s.rbs);
      if (s.control || s.rbs > n_rb_total) ++violations;
    }
  }
  std::int64_t violations = 0;
  int max_rbs = 0;

private:
  struct Slot {
    bool control = false;
    int rbs = 0;
  };
  Slot& at(std::int64_t t) {
    const auto i = static_cast<std::size_t>(t);
    if (i >= slots_.size()) slots_.resize(std::max(i + 1, slots_.size() * 2));
    return slots_[i];
  }
  std::vector<Slot> slots_;
};

class CellEngine {
public:
  CellEngine(const SimScenario& sc, const PreparedScenario& prep, std::vector<int> members,
             std::uint64_t seed, SimReport& report)
      : sc_(sc), prep_(prep), ues_(std::move(members)), seed_(seed), report_(report) {
    g_ = prep.group_size;
    period_ms_ = to_ms(sc.traffic.reporting_period_s);
  }

  std::int64_t run(int cell) {
    cell_ = cell;
    build_arrivals();
    std::size_t next = 0;
    std::int64_t now = 0;
    while (true) {
      if (queue_.empty()) {
        if (next == arrivals_.size()) break;
        now = std::max(now, arrivals_[next].time_ms);
      } else {
        now = std::max(now, channel_free_);
      }
      while (next < arrivals_.size() && arrivals_[next].time_ms <= now) admit(arrivals_[next++]);
      if (queue_.empty()) continue;

      const auto round = plan_round(now);
      if (round.empty()) continue;
      const std::int64_t end = execute_round(round, now);
      channel_free_ = end;
      while (next < arrivals_.size() && arrivals_[next].time_ms <= end) admit(arrivals_[next++]);
      for (int u : round) {
        active_[u] = false;
        if (!pending_[u].empty()) enqueue(u);
      }
    }
    return first_tx_ < 0 ? 0 : last_finish_ - first_tx_;
  }

  std::int64_t max_single_airtime = 0;
  SubframeAudit audit;

private:
  void build_arrivals() {
    const bool simultaneous = sc_.traffic.wakeup == WakeupMode::SIMULTANEOUS;
    const int periods = simultaneous ? 1 : sc_.traffic.periods;
    for (int u : ues_) {
      for (int k = 0; k < periods; ++k) {
        std::int64_t t = 0;
        if (!simultaneous) {
          Rng rng(seed_, {0xa7, static_cast<std::uint64_t>(u), static_cast<std::uint64_t>(k)});
          t = k * period_ms_ + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(period_ms_)));
        }
        arrivals_.push_back({t, u, t});
      }
    }
    std::sort(arrivals_.begin(), arrivals_.end(), [](const Arrival& a, const Arrival& b) {
      return a.time_ms != b.time_ms ? a.time_ms < b.time_ms : a.ue < b.ue;
    });
  }

  void admit(const Arrival& a) {
    auto& summary = report_.per_ue[static_cast<std::size_t>(a.ue)];
    ++summary.generated;
    const UeLink& link = prep_.ues[static_cast<std::size_t>(a.ue)];
    if (!link.reachable) {
      report_.records.push_back({a.ue, cell_, a.created_ms, -1, 0, Outcome::UNREACHABLE});
      return;
    }
    const std::int64_t deadline = sc_.traffic.wakeup == WakeupMode::SIMULTANEOUS
                                      ? std::numeric_limits<std::int64_t>::max()
                                      : a.created_ms + period_ms_;
    pending_[a.ue].push_back({a.created_ms, deadline});
    if (!active_[a.ue] && !queued_[a.ue]) enqueue(a.ue);
  }

  void enqueue(int u) {
    queue_.push_back(u);
    queued_[u] = true;
  }

  // Drop head reports that cannot finish by their deadline any more.
  bool has_feasible_report(int u, std::int64_t now) {
    auto& q = pending_[u];
    const std::int64_t need = prep_.ues[static_cast<std::size_t>(u)].nominal_ms();
    while (!q.empty() && now + need > q.front().deadline_ms) {
      report_.records.push_back({u, cell_, q.front().created_ms, -1, 0, Outcome::EXPIRED});
      q.pop_front();
    }
    return !q.empty();
  }

  std::vector<int> plan_round(std::int64_t now) {
    std::vector<int> members;
    std::optional<CoverageLevel> level;
    std::deque<int> rest;
    while (!queue_.empty()) {
      const int u = queue_.front();
      queue_.pop_front();
      const bool fits = static_cast<std::int64_t>(members.size()) < g_ &&
                        (!level || prep_.ues[static_cast<std::size_t>(u)].level == *level);
      if (!fits) {
        rest.push_back(u);
        continue;
      }
      queued_[u] = false;
      if (!has_feasible_report(u, now)) continue;
      level = prep_.ues[static_cast<std::size_t>(u)].level;
      members.push_back(u);
      active_[u] = true;
    }
    queue_ = std::move(rest);
    return members;
  }

  std::int64_t execute_round(const std::vector<int>& members, std::int64_t start) {
    const UeLink& lead = prep_.ues[static_cast<std::size_t>(members.front())];
    const std::int64_t tl = lead.tl_ms;
    std::vector<std::int64_t> cycles(members.size(), 0);
    std::vector<bool> failed(members.size(), false);
    for (std::size_t i = 0; i < members.size(); ++i) {
      const int u = members[i];
      const UeLink& link = prep_.ues[static_cast<std::size_t>(u)];
      auto& rng = rng_for(u);
      for (std::int64_t b = 0; b < link.blocks && !failed[i]; ++b) {
        bool ok = false;
        for (int attempt = 0; attempt <= sc_.retry_cap && !ok; ++attempt) {
          ++cycles[i];
          ok = link.block_error <= 0.0 || !rng.bernoulli(link.block_error);
        }
        failed[i] = !ok;
      }
    }
    const std::int64_t longest = *std::max_element(cycles.begin(), cycles.end());
    if (sc_.audit) audit_round(lead.link, start, tl, cycles, longest);

    if (first_tx_ < 0) first_tx_ = start;
    for (std::size_t i = 0; i < members.size(); ++i) {
      const int u = members[i];
      const std::int64_t finish = start + cycles[i] * tl;
      last_finish_ = std::max(last_finish_, finish);
      max_single_airtime = std::max(max_single_airtime, cycles[i] * tl);
      const PendingReport rep = pending_[u].front();
      pending_[u].pop_front();
      ReportRecord rec{u, cell_, rep.created_ms, -1, cycles[i] * tl, Outcome::FAILED};
      if (!failed[i]) {
        if (finish <= rep.deadline_ms) {
          rec.outcome = Outcome::DELIVERED;
          rec.delivered_ms = finish;
          ++report_.per_ue[static_cast<std::size_t>(u)].delivered;
        } else {
          rec.outcome = Outcome::EXPIRED;
        }
      }
      report_.records.push_back(rec);
    }
    return start + longest * tl;
  }

  void audit_round(const LinkParams& lp, std::int64_t start, std::int64_t tl,
                   const std::vector<std::int64_t>& cycles, std::int64_t longest) {
    const auto& t = lp.timing;
    const std::int64_t ctrl = lp.rldc * to_ms(t.t_pdcch);
    const std::int64_t data_off = ctrl + to_ms(t.t_dus);
    const std::int64_t data = lp.rlus * to_ms(t.t_pusch);
    const std::int64_t ack_off = data_off + data + to_ms(t.t_uds);
    const std::int64_t ack = lp.rldc * to_ms(t.t_dlack);
    for (std::int64_t c = 0; c < longest; ++c) {
      const std::int64_t base = start + c * tl;
      int users = 0;
      for (auto n : cycles)
        if (n > c) ++users;
      audit.control(base, ctrl);
      audit.data(base + data_off, data, users * sc_.link.rbu, sc_.link.n_rb_total);
      audit.control(base + ack_off, ack);
    }
  }

  Rng& rng_for(int u) {
    auto it = rngs_.find(u);
    if (it == rngs_.end())
      it = rngs_.emplace(u, Rng(seed_, {0xb1e, static_cast<std::uint64_t>(u)})).first;
    return it->second;
  }

  const SimScenario& sc_;
  const PreparedScenario& prep_;
  std::vector<int> ues_;
  std::uint64_t seed_;
  SimReport& report_;
  int cell_ = 0;
  std::int64_t g_ = 1;
  std::int64_t period_ms_ = 0;
  std::vector<Arrival> arrivals_;
  std::map<int, std::deque<PendingReport>> pending_;
  std::map<int, bool> active_;
  std::map<int, bool> queued_;
  std::map<int, Rng> rngs_;
  std::deque<int> queue_;
  std::int64_t channel_free_ = 0;
  std::int64_t first_tx_ = -1;
  std::int64_t last_finish_ = 0;
};

}  // namespace detail

inline SimReport run_simulation(const SimScenario& sc, const PreparedScenario& prep,
                                std::uint64_t seed) {
  SimReport report;
  report.seed = seed;
  report.core_delay_ms = to_ms(sc.core_delay_s);
  report.per_ue.assign(prep.ues.size(), {});
  std::map<int, std::vector<int>> by_cell;
  for (const auto& u : prep.ues) by_cell[u.cell].push_back(u.id);
  report.cell_airtime_ms.assign(prep.city.cells.size(), 0);
  for (const auto& [cell, members] : by_cell) {
    detail::CellEngine engine(sc, prep, members, seed, report);
    const std::int64_t airtime = engine.run(cell);
    report.cell_airtime_ms[static_cast<std::size_t>(cell)] = airtime;
    report.total_airtime_ms = std::max(report.total_airtime_ms, airtime);
    report.max_single_airtime_ms = std::max(report.max_single_airtime_ms, engine.max_single_airtime);
    report.max_rb_in_subframe = std::max(report.max_rb_in_subframe, engine.audit.max_rbs);
    report.audit_violations += engine.audit.violations;
  }
  return report;
}

inline SimReport run_simulation(const SimScenario& sc, const TableSet& tables, std::uint64_t seed) {
  const PreparedScenario prep = prepare_scenario(sc, tables, seed);
  return run_simulation(sc, prep, seed);
}

// ---------------------------------------------------------------------------
// Closed-form companions for a prepared scenario.

inline std::vector<ClassPopulation> cell_classes(const PreparedScenario& prep, int cell) {
  std::map<CoverageLevel, ClassPopulation> by_level;
  for (const auto& u : prep.ues) {
    if (u.cell != cell || !u.reachable) continue;
    auto& c = by_level[u.level];
    c.link = u.link;
    ++c.n_ue;
  }
  std::vector<ClassPopulation> out;
  for (auto& [lvl, c] : by_level) out.push_back(c);
  return out;
}

inline CellConfig cell_config(const SimScenario& sc, std::int64_t n_ue) {
  CellConfig cfg;
  cfg.n_rb_total = sc.link.n_rb_total;
  cfg.rbu = sc.link.rbu;
  cfg.n_ue = n_ue;
  cfg.reporting_period = sc.traffic.reporting_period_s;
  cfg.direction = Direction::UL;
  cfg.data_len_bits = sc.traffic.payload_bytes * 8;
  return cfg;
}

// Total cell delay summed over the cell's coverage classes.
inline std::int64_t analytical_cell_airtime_ms(const SimScenario& sc, const PreparedScenario& prep,
                                               int cell) {
  const auto classes = cell_classes(prep, cell);
  std::int64_t n = 0;
  for (const auto& c : classes) n += c.n_ue;
  return total_cell_delay_ms(cell_config(sc, n), classes);
}

// Per-cell capacity with the delay averaged over every reachable UE.
inline std::int64_t analytical_max_ue(const SimScenario& sc, const PreparedScenario& prep) {
  std::map<CoverageLevel, ClassPopulation> by_level;
  for (const auto& u : prep.ues) {
    if (!u.reachable) continue;
    auto& c = by_level[u.level];
    c.link = u.link;
    ++c.n_ue;
  }
  std::vector<ClassPopulation> classes;
  for (auto& [lvl, c] : by_level) classes.push_back(c);
  return max_ue(cell_config(sc, 0), classes);
}

// Largest candidate UEs-per-cell count for which at least 90% of UEs get at
// least 90% of their reports through on time.
inline constexpr double kDeliveryTarget = 0.9;

struct CapacityResult {
  int max_supported = 0;
  std::vector<std::pair<int, double>> fraction_ok;  // per candidate
};

inline CapacityResult max_supported_ues(const SimScenario& base, const TableSet& tables,
                                        const std::vector<int>& candidates, std::uint64_t seed) {
  if (!std::is_sorted(candidates.begin(), candidates.end()))
    throw ValidationError("candidate counts must be ascending");
  CapacityResult out;
  for (int n : candidates) {
    SimScenario sc = base;
    sc.city.ues_per_cell = n;
    const SimReport rep = run_simulation(sc, tables, seed);
    const double ok = rep.fraction_ues_meeting(kDeliveryTarget);
    out.fraction_ok.emplace_back(n, ok);
    if (ok >= kDeliveryTarget) out.max_supported = n;
  }
  return out;
}

}  // namespace celliot
