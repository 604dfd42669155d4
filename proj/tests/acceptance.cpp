// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails. Runtime budgets are part of each criterion.

#include "celliot/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

using namespace celliot;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Conservation and subframe audit tally shared by every simulation run here.
struct Conservation {
  std::int64_t runs = 0;
  std::int64_t generated = 0;
  std::int64_t accounted = 0;
  std::int64_t record_mismatch = 0;
  std::int64_t audit_violations = 0;
  std::int64_t rb_overflow = 0;

  void check(const SimReport& r, const SimScenario& sc) {
    ++runs;
    std::int64_t gen = 0;
    for (const auto& u : r.per_ue) gen += u.generated;
    const std::int64_t acc = r.count(Outcome::DELIVERED) + r.count(Outcome::EXPIRED) +
                             r.count(Outcome::FAILED) + r.count(Outcome::UNREACHABLE);
    generated += gen;
    accounted += acc;
    if (acc != gen || static_cast<std::int64_t>(r.records.size()) != gen) ++record_mismatch;
    audit_violations += r.audit_violations;
    if (r.max_rb_in_subframe > sc.link.n_rb_total) ++rb_overflow;
  }
};

Conservation g_conservation;

const Scenario& base_scenario() {
  static const Scenario sc = load_scenario(std::string(CELLIOT_SCENARIO_DIR) + "/table1_default.yaml");
  return sc;
}

const TableSet& tables() {
  static const TableSet t = base_scenario().load_tables();
  return t;
}

int hardware_jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double num(const CsvTable& t, std::size_t row, const std::string& col) {
  return std::stod(t.rows[row][t.column(col)]);
}

SimReport audited_run(SimScenario sc, std::uint64_t seed, const PreparedScenario* prep = nullptr) {
  sc.audit = true;
  SimReport r = prep ? run_simulation(sc, *prep, seed) : run_simulation(sc, tables(), seed);
  g_conservation.check(r, sc);
  return r;
}

// ---------------------------------------------------------------------------

Verdict optimizer_dominance() {
  Sweep sw;
  sw.edrx_minutes.clear();
  for (double m = 1; m <= 180; m += 1) sw.edrx_minutes.push_back(m);
  Scenario sc = base_scenario();
  sc.energy.clock.fractional_error = 0.001;
  const auto r = lifetime_vs_edrx(sc, tables(), sw, 1);
  if (!r.point_errors.empty()) return {false, r.point_errors.front()};
  Verdict v;
  double first_strict = -1;
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    const double minutes = num(r.table, i, "edrx_min");
    const double opt = num(r.table, i, "optimized_years");
    const double un = num(r.table, i, "unoptimized_years");
    if (opt < un) v = {false, "optimized below single-wake at " + fmt(minutes) + " min"};
    if (minutes > 12 && !(opt > un)) v = {false, "no strict gain at " + fmt(minutes) + " min"};
    if (opt > un && first_strict < 0) first_strict = minutes;
  }
  if (v.pass) {
    std::ostringstream os;
    os << r.table.rows.size() << " eDRX points 1..180 min, strict gain from " << first_strict << " min";
    v.detail = os.str();
  }
  return v;
}

Verdict optimizer_oracle() {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const PowerProfile p = base_scenario().energy.nbiot_power;
  double worst_gap = 0.0, worst_residual = 0.0;
  for (int i = 0; i < 1000; ++i) {
    // m log-uniform in [1e-4, 0.2]; period and t_synch uniform.
    ClockModel clock;
    clock.fractional_error = std::exp(std::log(1e-4) + u01(g) * (std::log(0.2) - std::log(1e-4)));
    clock.resync_time = 0.1 + 1.9 * u01(g);
    const double period = 60.0 + (86400.0 - 60.0) * u01(g);
    const DutyCycleConfig duty = i % 2 ? DutyCycleConfig::psm(period) : DutyCycleConfig::edrx(period, 0.001);
    const auto opt = plan_sleep_schedule(duty, p, clock);
    const auto ref = oracle_schedule(duty, p, clock, 50);
    worst_gap = std::max(worst_gap, std::abs(opt.total_energy - ref.total_energy));
    for (const auto* s : {&opt, &ref}) {
      worst_residual = std::max(worst_residual, std::abs(budget_residual(*s, duty, clock)));
      if (s->k >= 1)
        worst_residual = std::max(worst_residual,
                                  std::abs(s->active_time - clock.fractional_error * s->sleep_durations.back()));
      try {
        validate_schedule(*s, duty, clock);
      } catch (const std::exception& e) {
        return {false, "draw " + std::to_string(i) + ": " + e.what()};
      }
    }
  }
  std::ostringstream os;
  os << "1000 draws, max |E_plan - E_oracle| = " << worst_gap << " J, max residual = " << worst_residual << " s";
  return {worst_gap <= 1e-9 && worst_residual <= 1e-9, os.str()};
}

Verdict lifetime_headline() {
  const auto p = psm_lifetime_point(base_scenario().lifetime_setup(), tables(), Technology::NBIOT,
                                    CoverageLevel::POOR, 200, 1.0);
  std::ostringstream os;
  os << "NB-IoT " << p.mcl_db << " dB, 200 B/day: " << p.lifetime_years << " years, bracket [8, 12]";
  return {p.mcl_db == 164.0 && p.lifetime_years >= 8.0 && p.lifetime_years <= 12.0, os.str()};
}

Verdict lifetime_crossover() {
  const auto setup = base_scenario().lifetime_setup();
  auto years = [&](Technology t, CoverageLevel l, std::int64_t bytes) {
    return psm_lifetime_point(setup, tables(), t, l, bytes, 1.0).lifetime_years;
  };
  const double e_small = years(Technology::EMTC, CoverageLevel::POOR, 12);
  const double n_small = years(Technology::NBIOT, CoverageLevel::POOR, 12);
  const double e_big = years(Technology::EMTC, CoverageLevel::GOOD, 160);
  const double n_big = years(Technology::NBIOT, CoverageLevel::GOOD, 160);
  std::ostringstream os;
  os << "12 B poor: NB-IoT " << n_small << " vs eMTC " << e_small << "; 160 B good: eMTC " << e_big
     << " vs NB-IoT " << n_big;
  return {n_small > e_small && e_big > n_big, os.str()};
}

Verdict formula_suite() {
  int checks = 0;
  std::string failed;
  auto expect = [&](bool ok, const char* what) {
    ++checks;
    if (!ok && failed.empty()) failed = what;
  };
  LinkParams lp;
  lp.tbs_bits = 100;
  lp.timing.t_d = lp.timing.t_dus = lp.timing.t_uds = 0.0;
  expect(tl_downlink_ms(lp) == 3, "TL_DL unit case");
  expect(tl_uplink_ms(lp) == 3, "TL_UL unit case");
  {
    LinkParams a = lp;
    a.rlds = 2;
    LinkParams b = a;
    b.rlds = 4;
    expect(tl_downlink_ms(b) - tl_downlink_ms(a) == 2, "RLDS doubling");
  }
  {
    LinkParams a = lp;
    a.timing.t_dus = 0.003;
    a.timing.t_uds = 0.005;
    expect(tl_uplink_ms(a) - tl_uplink_ms(lp) == 8, "switching delays");
  }
  expect(delay_ue_ms(Direction::UL, 100, lp) == 3, "data = TBS");
  expect(delay_ue_ms(Direction::UL, 101, lp) == 6, "data = TBS + 1");
  CellConfig cfg;
  cfg.n_rb_total = 6;
  cfg.rbu = 1;
  cfg.data_len_bits = 100;
  cfg.n_ue = 1;
  expect(total_cell_delay_ms(cfg, lp) == 3, "one UE");
  cfg.n_ue = 7;
  expect(total_cell_delay_ms(cfg, lp) == 6, "seven UEs over six RBs");
  cfg.n_rb_total = 1;
  cfg.reporting_period = 0.003;
  expect(max_ue(cfg, lp) == 1, "period = delay");
  cfg.reporting_period = 0.002;
  expect(max_ue(cfg, lp) == 0, "period < delay");
  return {failed.empty(), failed.empty() ? std::to_string(checks) + " exact integer-ms cases" : "failed: " + failed};
}

Verdict airtime_agreement() {
  double lo = 1e9, hi = 0;
  int rows = 0;
  for (auto tech : {Technology::EMTC, Technology::NBIOT})
    for (double indoor : {0.0, 0.5, 1.0}) {
      SimScenario sc = base_scenario().sim_scenario(tech);
      sc.city.ues_per_cell = 100;
      sc.city.indoor_ratio = indoor;
      sc.bler_enabled = false;
      sc.traffic.wakeup = WakeupMode::SIMULTANEOUS;
      const auto prep = prepare_scenario(sc, tables(), base_scenario().seed);
      const auto rep = audited_run(sc, base_scenario().seed, &prep);
      for (std::size_t c = 0; c < prep.city.cells.size(); ++c) {
        const auto an = analytical_cell_airtime_ms(sc, prep, static_cast<int>(c));
        if (an == 0) continue;
        const double ratio = static_cast<double>(rep.cell_airtime_ms[c]) / static_cast<double>(an);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ++rows;
      }
    }
  std::ostringstream os;
  os << rows << " cells, sim/analytical in [" << lo << ", " << hi << "], band [1.0, 1.25]";
  return {rows > 0 && lo >= 1.0 && hi <= 1.25, os.str()};
}

Verdict latency_ordering() {
  Verdict v;
  std::ostringstream os;
  for (int n : {50, 150, 300}) {
    double lat[2] = {0, 0};
    int i = 0;
    for (auto tech : {Technology::EMTC, Technology::NBIOT}) {
      SimScenario sc = base_scenario().sim_scenario(tech);
      sc.city.ues_per_cell = n;
      lat[i++] = audited_run(sc, base_scenario().seed).mean_latency_s();
    }
    const double ratio = lat[0] / lat[1];
    if (!(ratio <= 0.2)) v.pass = false;
    os << n << " UEs: " << lat[0] << " s / " << lat[1] << " s = " << ratio << "; ";
  }
  os << "limit 0.2";
  v.detail = os.str();
  return v;
}

Verdict scalability_ordering() {
  Sweep sw;
  sw.indoor_ratios = {1.0};
  sw.payload_bytes = {160};
  sw.seeds = {base_scenario().seed};
  const auto r = scalability_vs_indoor(base_scenario(), tables(), sw, hardware_jobs());
  if (!r.point_errors.empty()) return {false, r.point_errors.front()};
  double sim[2] = {0, 0}, an[2] = {0, 0};
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    const int k = r.table.rows[i][r.table.column("technology")] == "EMTC" ? 0 : 1;
    sim[k] = num(r.table, i, "sim_max_ues");
    an[k] = num(r.table, i, "analytical_max_ues");
  }
  std::ostringstream os;
  os << "eMTC sim " << sim[0] << " (analytical " << an[0] << "), NB-IoT sim " << sim[1] << " (analytical "
     << an[1] << ")";
  return {sim[0] > sim[1] && sim[0] <= an[0] && sim[1] <= an[1], os.str()};
}

Verdict determinism() {
  // Every experiment kind is rerun from its serialized manifest.
  Scenario sc = base_scenario();
  sc.city.ues_per_cell = 40;
  Sweep sw;
  sw.ue_counts = {40};
  sw.seeds = {1, 2};
  sw.candidate_counts = {10, 20, 40};
  int compared = 0;
  for (const auto& [name, kind] : experiment_names()) {
    const auto first = run_experiment(kind, sc, tables(), sw, hardware_jobs());
    const auto text = manifest(kind, sc, tables(), sw).dump();
    const auto m = nlohmann::ordered_json::parse(text);
    const Scenario sc2 = parse_scenario(m.at("scenario").get<std::string>(), "manifest");
    const Sweep sw2 = sweep_from_json(m.at("sweep"));
    const auto second = run_experiment(experiment_from_string(m.at("experiment").get<std::string>()), sc2,
                                       sc2.load_tables(), sw2, 1);
    if (first.table.to_csv() != second.table.to_csv()) return {false, name + " CSV differs on rerun"};
    ++compared;
  }
  return {true, std::to_string(compared) + " experiments byte-identical across reruns and job counts"};
}

Verdict conservation() {
  for (auto tech : {Technology::EMTC, Technology::NBIOT})
    for (double indoor : {0.0, 0.5, 1.0}) {
      SimScenario sc = base_scenario().sim_scenario(tech);
      sc.city.indoor_ratio = indoor;
      sc.traffic.reporting_period_s = 2.0;  // overload so reports expire
      audited_run(sc, 7);
    }
  const auto& c = g_conservation;
  std::ostringstream os;
  os << c.runs << " runs, " << c.generated << " reports generated, " << c.accounted << " accounted, "
     << c.audit_violations << " subframe violations";
  return {c.record_mismatch == 0 && c.generated == c.accounted && c.audit_violations == 0 && c.rb_overflow == 0,
          os.str()};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "optimizer dominance", 1.0, optimizer_dominance},
      {2, "optimizer oracle equivalence", 10.0, optimizer_oracle},
      {3, "lifetime headline", 1.0, lifetime_headline},
      {4, "coverage/payload crossover", 1.0, lifetime_crossover},
      {5, "formula unit suite", 1.0, formula_suite},
      {6, "analytical vs simulated airtime", 120.0, airtime_agreement},
      {7, "latency ordering", 300.0, latency_ordering},
      {8, "scalability ordering", 600.0, scalability_ordering},
      {9, "determinism", 600.0, determinism},
      {10, "simulator conservation", 600.0, conservation},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      // Table loading is not charged to the first criterion.
      (void)tables();
      const auto t1 = std::chrono::steady_clock::now();
      v = c.run();
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
      if (secs > c.budget_s) {
        v.pass = false;
        v.detail += "; over runtime budget";
      }
      std::printf("%s %2d %-32s %8.2f s / %6.0f s  %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                  c.budget_s, v.detail.c_str());
    } catch (const std::exception& e) {
      v.pass = false;
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("FAIL %2d %-32s %8.2f s / %6.0f s  error: %s\n", c.id, c.name, secs, c.budget_s, e.what());
    }
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
