#pragma once

// Named experiments over a Scenario. Each experiment expands its sweep into
// independent points, evaluates them on a worker pool and merges the rows in
// point order, so output never depends on the job count.

#include "celliot/energy.hpp"
#include "celliot/link_analytics.hpp"
#include "celliot/scenario.hpp"
#include "celliot/simulator.hpp"
#include "celliot/tables.hpp"

#include <json.hpp>  // nlohmann/json, vendored

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace celliot {

inline constexpr int kCsvSchema = 1;

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::string to_csv() const {
    std::ostringstream os;
    os << "# schema=" << kCsvSchema << "\n";
    write_row(os, columns);
    for (const auto& r : rows) write_row(os, r);
    return os.str();
  }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      nlohmann::ordered_json o;
      for (std::size_t i = 0; i < columns.size(); ++i) o[columns[i]] = r[i];
      out.push_back(std::move(o));
    }
    return out;
  }

  [[nodiscard]] std::size_t column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }

  static CsvTable parse(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> fields;
      for (auto f : detail::split_fields(line)) fields.emplace_back(f);
      if (t.columns.empty()) {
        t.columns = std::move(fields);
      } else {
        if (fields.size() != t.columns.size())
          throw ConfigError("csv row has " + std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(t.columns.size()));
        t.rows.push_back(std::move(fields));
      }
    }
    return t;
  }

private:
  static void write_row(std::ostringstream& os, const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
};

inline std::string fmt(double v) { return detail::format_number(v); }
inline std::string fmt(std::int64_t v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

// Runs fn(i) for i in [0, n) on `jobs` threads. Exceptions are captured per
// point and returned as messages (empty when the point succeeded).
inline std::vector<std::string> parallel_points(std::size_t n, int jobs,
                                                const std::function<void(std::size_t)>& fn) {
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return errors;
}

enum class ExperimentKind {
  LIFETIME_VS_EDRX,
  LIFETIME_MATRIX,
  LATENCY_VS_INDOOR,
  AIRTIME_VS_INDOOR,
  SCALABILITY_VS_INDOOR,
  CUSTOM
};

inline const std::vector<std::pair<std::string, ExperimentKind>>& experiment_names() {
  static const std::vector<std::pair<std::string, ExperimentKind>> names{
      {"lifetime_vs_edrx", ExperimentKind::LIFETIME_VS_EDRX},
      {"lifetime_matrix", ExperimentKind::LIFETIME_MATRIX},
      {"latency_vs_indoor", ExperimentKind::LATENCY_VS_INDOOR},
      {"airtime_vs_indoor", ExperimentKind::AIRTIME_VS_INDOOR},
      {"scalability_vs_indoor", ExperimentKind::SCALABILITY_VS_INDOOR},
      {"custom", ExperimentKind::CUSTOM}};
  return names;
}

inline ExperimentKind experiment_from_string(const std::string& s) {
  for (const auto& [name, kind] : experiment_names())
    if (name == s) return kind;
  throw ConfigError("unknown experiment '" + s + "'");
}

inline std::string to_string(ExperimentKind k) {
  for (const auto& [name, kind] : experiment_names())
    if (kind == k) return name;
  return "?";
}

// Sweep axes. Axes an experiment does not use are ignored.
struct Sweep {
  std::vector<std::uint64_t> seeds{1};
  std::vector<Technology> technologies{Technology::EMTC, Technology::NBIOT};
  std::vector<double> indoor_ratios{0.0, 0.5, 1.0};
  std::vector<int> ue_counts{300};
  std::vector<std::int64_t> payload_bytes{12};
  std::vector<double> edrx_minutes{1, 2, 5, 10, 12, 15, 20, 30, 45, 60, 90, 120, 180};
  std::vector<int> candidate_counts = [] {
    std::vector<int> c;
    for (int n = 10; n <= 600; n += 10) c.push_back(n);
    return c;
  }();
  // lifetime_vs_edrx device
  Technology edrx_technology = Technology::NBIOT;
  CoverageLevel edrx_coverage = CoverageLevel::GOOD;
  std::int64_t edrx_payload_bytes = 200;
  double edrx_reports_per_day = 1.0;
  double paging_window_s = 0.001;
  LifetimeSweep lifetime{};
};

struct ExperimentResult {
  CsvTable table;
  std::vector<std::string> point_errors;  // "point i: message"
};

namespace detail {

template <class Point, class Row>
ExperimentResult run_points(std::vector<std::string> columns, const std::vector<Point>& points, int jobs,
                            const std::function<std::vector<Row>(const Point&)>& eval) {
  std::vector<std::vector<Row>> out(points.size());
  const auto errors = parallel_points(points.size(), jobs, [&](std::size_t i) { out[i] = eval(points[i]); });
  ExperimentResult r;
  r.table.columns = std::move(columns);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!errors[i].empty()) {
      r.point_errors.push_back("point " + std::to_string(i) + ": " + errors[i]);
      continue;
    }
    for (auto& row : out[i]) r.table.rows.push_back(std::move(row));
  }
  return r;
}

using Row = std::vector<std::string>;

}  // namespace detail

// Optimized versus single-wake standby across eDRX periods for one device
// reporting a fixed number of times per day.
inline ExperimentResult lifetime_vs_edrx(const Scenario& sc, const TableSet& tables, const Sweep& sw,
                                         int jobs = 1) {
  const LifetimeSetup setup = sc.lifetime_setup();
  return detail::run_points<double, detail::Row>(
      {"technology", "coverage", "edrx_min", "optimized_years", "unoptimized_years", "wakeups"},
      sw.edrx_minutes, jobs, [&](const double& minutes) {
        const Technology tech = sw.edrx_technology;
        const CoverageClass cls = tables.coverage.level(tech, sw.edrx_coverage);
        ReportingCycleSpec spec;
        spec.technology = tech;
        spec.reporting_interval = 86400.0 / sw.edrx_reports_per_day;
        spec.data_len_bits = sw.edrx_payload_bytes * 8;
        spec.events = tables.events.get(tech, sw.edrx_coverage);
        spec.link = make_link_params(tables.tbs, tech, cls, setup.rbu(tech), setup.timing(tech));
        spec.duty = DutyCycleConfig::edrx(minutes * 60.0, sw.paging_window_s);
        spec.standby = StandbyPolicy::OPTIMIZED;
        const CycleEnergy opt = reporting_cycle_energy(spec, setup.power(tech), setup.clock);
        spec.standby = StandbyPolicy::UNOPTIMIZED;
        const CycleEnergy unopt = reporting_cycle_energy(spec, setup.power(tech), setup.clock);
        return std::vector<detail::Row>{
            {std::string(to_string(tech)), std::string(to_string(sw.edrx_coverage)), fmt(minutes),
             fmt(battery_lifetime(setup.battery_joules, opt.total_joules, spec.reporting_interval)),
             fmt(battery_lifetime(setup.battery_joules, unopt.total_joules, spec.reporting_interval)),
             fmt(opt.wakeups_per_sleep)}};
      });
}

inline ExperimentResult lifetime_matrix(const Scenario& sc, const TableSet& tables, const Sweep& sw,
                                        int jobs = 1) {
  struct Point {
    CoverageLevel level;
    std::int64_t bytes;
    double rpd;
    Technology tech;
  };
  std::vector<Point> points;
  for (auto level : sw.lifetime.coverage)
    for (auto bytes : sw.lifetime.data_bytes)
      for (double rpd : sw.lifetime.reports_per_day)
        for (auto tech : sw.technologies) points.push_back({level, bytes, rpd, tech});
  const LifetimeSetup setup = sc.lifetime_setup();
  return detail::run_points<Point, detail::Row>(
      {"technology", "coverage", "mcl_db", "payload_bytes", "reports_per_day", "energy_per_report_j",
       "lifetime_years"},
      points, jobs, [&](const Point& p) {
        const LifetimePoint lp = psm_lifetime_point(setup, tables, p.tech, p.level, p.bytes, p.rpd);
        return std::vector<detail::Row>{{std::string(to_string(lp.technology)),
                                         std::string(to_string(lp.coverage)), fmt(lp.mcl_db),
                                         fmt(lp.data_bytes), fmt(lp.reports_per_day),
                                         fmt(lp.energy_per_cycle), fmt(lp.lifetime_years)}};
      });
}

namespace detail {

struct SimPoint {
  Technology tech;
  double indoor;
  int ues;
  std::int64_t bytes;
  std::uint64_t seed;
};

inline std::vector<SimPoint> sim_points(const Sweep& sw, bool with_counts) {
  std::vector<SimPoint> points;
  const std::vector<int> counts = with_counts ? sw.ue_counts : std::vector<int>{0};
  for (auto tech : sw.technologies)
    for (double indoor : sw.indoor_ratios)
      for (int n : counts)
        for (auto bytes : sw.payload_bytes)
          for (auto seed : sw.seeds) points.push_back({tech, indoor, n, bytes, seed});
  return points;
}

inline SimScenario point_scenario(const Scenario& sc, const SimPoint& p) {
  SimScenario s = sc.sim_scenario(p.tech);
  s.city.indoor_ratio = p.indoor;
  if (p.ues > 0) s.city.ues_per_cell = p.ues;
  s.traffic.payload_bytes = p.bytes;
  return s;
}

inline Row point_prefix(const SimPoint& p) {
  return {std::string(to_string(p.tech)), fmt(p.indoor), fmt(p.ues), fmt(p.bytes), fmt(p.seed)};
}

inline void append(Row& r, std::initializer_list<std::string> more) { r.insert(r.end(), more); }

}  // namespace detail

inline ExperimentResult latency_vs_indoor(const Scenario& sc, const TableSet& tables, const Sweep& sw,
                                          int jobs = 1) {
  return detail::run_points<detail::SimPoint, detail::Row>(
      {"technology", "indoor_ratio", "ues_per_cell", "payload_bytes", "seed", "mean_latency_s", "generated",
       "delivered", "expired", "failed", "unreachable", "ues_meeting_target"},
      detail::sim_points(sw, true), jobs, [&](const detail::SimPoint& p) {
        const SimReport r = run_simulation(detail::point_scenario(sc, p), tables, p.seed);
        auto row = detail::point_prefix(p);
        detail::append(row, {fmt(r.mean_latency_s()), fmt(static_cast<std::int64_t>(r.records.size())),
                             fmt(r.count(Outcome::DELIVERED)), fmt(r.count(Outcome::EXPIRED)),
                             fmt(r.count(Outcome::FAILED)), fmt(r.count(Outcome::UNREACHABLE)),
                             fmt(r.fraction_ues_meeting(kDeliveryTarget))});
        return std::vector<detail::Row>{row};
      });
}

// Every UE wakes at t = 0; per-cell simulated airtime next to the
// closed-form total cell delay.
inline ExperimentResult airtime_vs_indoor(const Scenario& sc, const TableSet& tables, const Sweep& sw,
                                          int jobs = 1) {
  return detail::run_points<detail::SimPoint, detail::Row>(
      {"technology", "indoor_ratio", "ues_per_cell", "payload_bytes", "seed", "cell", "ues_in_cell",
       "sim_airtime_s", "analytical_airtime_s", "ratio"},
      detail::sim_points(sw, true), jobs, [&](const detail::SimPoint& p) {
        SimScenario s = detail::point_scenario(sc, p);
        s.traffic.wakeup = WakeupMode::SIMULTANEOUS;
        const PreparedScenario prep = prepare_scenario(s, tables, p.seed);
        const SimReport r = run_simulation(s, prep, p.seed);
        std::vector<detail::Row> rows;
        for (std::size_t c = 0; c < prep.city.cells.size(); ++c) {
          const int cell = static_cast<int>(c);
          const auto members = std::count_if(prep.ues.begin(), prep.ues.end(),
                                             [&](const UeLink& u) { return u.cell == cell; });
          const std::int64_t sim = r.cell_airtime_ms[c];
          const std::int64_t an = analytical_cell_airtime_ms(s, prep, cell);
          auto row = detail::point_prefix(p);
          detail::append(row, {fmt(cell), fmt(static_cast<std::int64_t>(members)), fmt(from_ms(sim)),
                               fmt(from_ms(an)),
                               an == 0 ? "nan" : fmt(static_cast<double>(sim) / static_cast<double>(an))});
          rows.push_back(std::move(row));
        }
        return rows;
      });
}

inline ExperimentResult scalability_vs_indoor(const Scenario& sc, const TableSet& tables, const Sweep& sw,
                                              int jobs = 1) {
  return detail::run_points<detail::SimPoint, detail::Row>(
      {"technology", "indoor_ratio", "ues_per_cell", "payload_bytes", "seed", "sim_max_ues",
       "analytical_max_ues"},
      detail::sim_points(sw, false), jobs, [&](const detail::SimPoint& p) {
        const SimScenario s = detail::point_scenario(sc, p);
        const CapacityResult cap = max_supported_ues(s, tables, sw.candidate_counts, p.seed);
        SimScenario at_cap = s;
        at_cap.city.ues_per_cell = sw.candidate_counts.empty() ? s.city.ues_per_cell : sw.candidate_counts.back();
        const PreparedScenario prep = prepare_scenario(at_cap, tables, p.seed);
        auto row = detail::point_prefix(p);
        detail::append(row, {fmt(cap.max_supported), fmt(analytical_max_ue(s, prep))});
        return std::vector<detail::Row>{row};
      });
}

// One simulation of the scenario as written, one row per report.
inline ExperimentResult custom_run(const Scenario& sc, const TableSet& tables, const Sweep& sw, int jobs = 1) {
  return detail::run_points<std::uint64_t, detail::Row>(
      {"seed", "ue_id", "cell", "created_at_ms", "delivered_at_ms", "airtime_ms", "outcome"}, sw.seeds, jobs,
      [&](const std::uint64_t& seed) {
        const SimReport r = run_simulation(sc.sim_scenario(), tables, seed);
        std::vector<detail::Row> rows;
        rows.reserve(r.records.size());
        for (const auto& rec : r.records)
          rows.push_back({fmt(seed), fmt(rec.ue), fmt(rec.cell), fmt(rec.created_ms),
                          rec.delivered_ms < 0 ? "" : fmt(rec.delivered_ms), fmt(rec.airtime_ms),
                          std::string(to_string(rec.outcome))});
        return rows;
      });
}

inline ExperimentResult run_experiment(ExperimentKind kind, const Scenario& sc, const TableSet& tables,
                                       const Sweep& sw, int jobs = 1) {
  switch (kind) {
    case ExperimentKind::LIFETIME_VS_EDRX: return lifetime_vs_edrx(sc, tables, sw, jobs);
    case ExperimentKind::LIFETIME_MATRIX: return lifetime_matrix(sc, tables, sw, jobs);
    case ExperimentKind::LATENCY_VS_INDOOR: return latency_vs_indoor(sc, tables, sw, jobs);
    case ExperimentKind::AIRTIME_VS_INDOOR: return airtime_vs_indoor(sc, tables, sw, jobs);
    case ExperimentKind::SCALABILITY_VS_INDOOR: return scalability_vs_indoor(sc, tables, sw, jobs);
    case ExperimentKind::CUSTOM: return custom_run(sc, tables, sw, jobs);
  }
  throw ConfigError("unknown experiment");
}

inline nlohmann::ordered_json sweep_to_json(const Sweep& sw) {
  nlohmann::ordered_json j;
  j["seeds"] = sw.seeds;
  std::vector<std::string> techs;
  for (auto t : sw.technologies) techs.emplace_back(to_string(t));
  j["technologies"] = techs;
  j["indoor_ratios"] = sw.indoor_ratios;
  j["ue_counts"] = sw.ue_counts;
  j["payload_bytes"] = sw.payload_bytes;
  j["edrx_minutes"] = sw.edrx_minutes;
  j["candidate_counts"] = sw.candidate_counts;
  j["edrx_technology"] = to_string(sw.edrx_technology);
  j["edrx_coverage"] = to_string(sw.edrx_coverage);
  j["edrx_payload_bytes"] = sw.edrx_payload_bytes;
  j["edrx_reports_per_day"] = sw.edrx_reports_per_day;
  j["paging_window_s"] = sw.paging_window_s;
  j["lifetime_reports_per_day"] = sw.lifetime.reports_per_day;
  j["lifetime_data_bytes"] = sw.lifetime.data_bytes;
  std::vector<std::string> levels;
  for (auto l : sw.lifetime.coverage) levels.emplace_back(to_string(l));
  j["lifetime_coverage"] = levels;
  return j;
}

inline Sweep sweep_from_json(const nlohmann::ordered_json& j) {
  Sweep sw;
  try {
    sw.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    sw.technologies.clear();
    for (const auto& t : j.at("technologies")) sw.technologies.push_back(technology_from_string(t.get<std::string>()));
    sw.indoor_ratios = j.at("indoor_ratios").get<std::vector<double>>();
    sw.ue_counts = j.at("ue_counts").get<std::vector<int>>();
    sw.payload_bytes = j.at("payload_bytes").get<std::vector<std::int64_t>>();
    sw.edrx_minutes = j.at("edrx_minutes").get<std::vector<double>>();
    sw.candidate_counts = j.at("candidate_counts").get<std::vector<int>>();
    sw.edrx_technology = technology_from_string(j.at("edrx_technology").get<std::string>());
    sw.edrx_coverage = coverage_level_from_string(j.at("edrx_coverage").get<std::string>());
    sw.edrx_payload_bytes = j.at("edrx_payload_bytes").get<std::int64_t>();
    sw.edrx_reports_per_day = j.at("edrx_reports_per_day").get<double>();
    sw.paging_window_s = j.at("paging_window_s").get<double>();
    sw.lifetime.reports_per_day = j.at("lifetime_reports_per_day").get<std::vector<double>>();
    sw.lifetime.data_bytes = j.at("lifetime_data_bytes").get<std::vector<std::int64_t>>();
    sw.lifetime.coverage.clear();
    for (const auto& l : j.at("lifetime_coverage"))
      sw.lifetime.coverage.push_back(coverage_level_from_string(l.get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest sweep: ") + e.what());
  }
  return sw;
}

// Everything needed to reproduce a CSV.
inline nlohmann::ordered_json manifest(ExperimentKind kind, const Scenario& sc, const TableSet& tables,
                                       const Sweep& sw) {
  nlohmann::ordered_json m;
  m["schema"] = kCsvSchema;
  m["experiment"] = to_string(kind);
  m["seeds"] = sw.seeds;
  m["sweep"] = sweep_to_json(sw);
  m["table_versions"] = {{"tbs", tables.tbs.version()},
                         {"coverage", tables.coverage.version()},
                         {"bler", tables.bler.version()},
                         {"events", tables.events.version()}};
  m["config_hash"] = config_hash(sc);
  m["scenario"] = emit_scenario(sc);
  return m;
}

// Checks sim/analytical ratios row by row.
struct ComparisonResult {
  std::size_t rows = 0;
  std::vector<std::string> violations;
  [[nodiscard]] bool ok() const { return violations.empty(); }
};

inline ComparisonResult compare_analytical_sim(const CsvTable& t, const std::string& sim_column,
                                               const std::string& analytical_column, double lo = 1.0,
                                               double hi = 1.25) {
  const std::size_t si = t.column(sim_column);
  const std::size_t ai = t.column(analytical_column);
  ComparisonResult r;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double sim = detail::parse_number<double>(t.rows[i][si], sim_column, static_cast<int>(i + 1));
    const double an = detail::parse_number<double>(t.rows[i][ai], analytical_column, static_cast<int>(i + 1));
    ++r.rows;
    if (an == 0.0 && sim == 0.0) continue;
    const double ratio = an == 0.0 ? std::numeric_limits<double>::infinity() : sim / an;
    if (!(ratio >= lo - 1e-12 && ratio <= hi + 1e-12))
      r.violations.push_back("row " + std::to_string(i + 1) + ": " + sim_column + "/" + analytical_column +
                             " = " + fmt(ratio) + " outside [" + fmt(lo) + ", " + fmt(hi) + "]");
  }
  return r;
}

}  // namespace celliot
