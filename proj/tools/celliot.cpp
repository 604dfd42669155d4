// celliot: command-line front end for the scenario runner.
//
// Exit codes: 0 success, 1 configuration or validation error, 2 one or more
// sweep points (or comparison rows) failed.

#include "celliot/energy.hpp"
#include "celliot/experiments.hpp"
#include "celliot/link_analytics.hpp"
#include "celliot/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace celliot;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPoints = 2;

std::string read_file(const std::string& path) { return detail::slurp(path); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<Technology> parse_techs(const std::vector<std::string>& names) {
  std::vector<Technology> out;
  for (const auto& n : names) out.push_back(technology_from_string(n));
  return out;
}

struct RunOptions {
  std::string scenario;
  std::string manifest;
  std::string experiment = "custom";
  std::vector<std::uint64_t> seeds;
  int jobs = 1;
  std::string out;
  std::string format = "csv";
  std::vector<std::string> techs;
  std::vector<double> indoor;
  std::vector<int> ues;
  std::vector<std::int64_t> payloads;
  std::vector<double> edrx;
  std::vector<int> candidates;
  bool empty_sweep = false;
};

int cmd_validate(const std::string& path) {
  const Scenario sc = load_scenario(path);
  sc.sim_scenario(Technology::EMTC).validate();
  sc.sim_scenario(Technology::NBIOT).validate();
  const TableSet tables = sc.load_tables();
  std::cout << "ok " << sc.name << " config_hash=" << config_hash(sc) << " tables=" << tables.versions() << "\n";
  return kExitOk;
}

int cmd_run(const RunOptions& o) {
  Scenario sc;
  Sweep sw;
  ExperimentKind kind = experiment_from_string(o.experiment);
  std::optional<nlohmann::ordered_json> pinned_versions;
  if (!o.manifest.empty()) {
    nlohmann::ordered_json m;
    try {
      m = nlohmann::ordered_json::parse(read_file(o.manifest));
      kind = experiment_from_string(m.at("experiment").get<std::string>());
      sc = parse_scenario(m.at("scenario").get<std::string>(), o.manifest + "#scenario");
      sw = sweep_from_json(m.at("sweep"));
      pinned_versions = m.at("table_versions");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(o.manifest + ": " + e.what());
    }
  } else {
    if (o.scenario.empty()) throw ConfigError("run needs --scenario or --manifest");
    sc = load_scenario(o.scenario);
    sw.seeds = {sc.seed};
    sw.ue_counts = {sc.city.ues_per_cell};
    sw.payload_bytes = {sc.traffic.payload_bytes};
  }
  if (!o.seeds.empty()) sw.seeds = o.seeds;
  if (!o.techs.empty()) sw.technologies = parse_techs(o.techs);
  if (!o.indoor.empty()) sw.indoor_ratios = o.indoor;
  if (!o.ues.empty()) sw.ue_counts = o.ues;
  if (!o.payloads.empty()) sw.payload_bytes = o.payloads;
  if (!o.edrx.empty()) sw.edrx_minutes = o.edrx;
  if (!o.candidates.empty()) sw.candidate_counts = o.candidates;
  if (o.empty_sweep) {
    sw.seeds.clear();
    sw.edrx_minutes.clear();
    sw.lifetime.reports_per_day.clear();
  }

  sc.sim_scenario(Technology::EMTC).validate();
  sc.sim_scenario(Technology::NBIOT).validate();
  const TableSet tables = sc.load_tables();
  const auto man = manifest(kind, sc, tables, sw);
  if (pinned_versions && *pinned_versions != man["table_versions"])
    throw ConfigError("table versions differ from the manifest");

  const ExperimentResult r = run_experiment(kind, sc, tables, sw, o.jobs);
  const std::string body =
      o.format == "json" ? r.table.to_json().dump(2) + "\n" : r.table.to_csv();

  if (o.out.empty()) {
    std::cout << body;
  } else {
    std::filesystem::create_directories(o.out);
    const std::string stem = to_string(kind);
    write_file(std::filesystem::path(o.out) / (stem + "." + o.format), body);
    write_file(std::filesystem::path(o.out) / (stem + ".manifest.json"), man.dump(2) + "\n");
  }
  for (const auto& e : r.point_errors) std::cerr << "error: " << e << "\n";
  return r.point_errors.empty() ? kExitOk : kExitPoints;
}

int cmd_compare(const std::string& csv, const std::string& sim, const std::string& analytical, double lo,
                double hi) {
  const CsvTable t = CsvTable::parse(read_file(csv));
  const ComparisonResult r = compare_analytical_sim(t, sim, analytical, lo, hi);
  for (const auto& v : r.violations) std::cout << v << "\n";
  std::cout << (r.ok() ? "ok " : "FAIL ") << r.rows << " rows, " << r.violations.size() << " outside ["
            << fmt(lo) << ", " << fmt(hi) << "]\n";
  return r.ok() ? kExitOk : kExitPoints;
}

int cmd_lifetime(const std::string& path, const std::string& tech_name, const std::string& level_name,
                 std::int64_t bytes, double rpd, bool timeline) {
  const Scenario sc = path.empty() ? Scenario{} : load_scenario(path);
  const TableSet tables = sc.load_tables();
  const LifetimeSetup setup = sc.lifetime_setup();
  const Technology tech = technology_from_string(tech_name);
  const CoverageLevel level = coverage_level_from_string(level_name);
  const CoverageClass cls = tables.coverage.level(tech, level);

  ReportingCycleSpec spec;
  spec.technology = tech;
  spec.reporting_interval = 86400.0 / rpd;
  spec.data_len_bits = bytes * 8;
  spec.events = tables.events.get(tech, level);
  spec.link = make_link_params(tables.tbs, tech, cls, setup.rbu(tech), setup.timing(tech));
  spec.duty = DutyCycleConfig::psm(spec.reporting_interval);
  spec.standby = setup.standby;
  const CycleEnergy e = reporting_cycle_energy(spec, setup.power(tech), setup.clock);
  if (timeline) {
    std::cout << "label,state,start_s,duration_s,power_w,joules\n";
    for (const auto& t : e.timeline)
      std::cout << t.label << "," << to_string(t.state) << "," << fmt(t.start) << "," << fmt(t.duration) << ","
                << fmt(t.power) << "," << fmt(t.joules) << "\n";
  }
  const LifetimeResult lr = lifetime(setup.battery_joules, e, spec.reporting_interval);
  std::cout << "technology=" << to_string(tech) << " coverage=" << to_string(level) << " mcl_db=" << fmt(cls.mcl_db)
            << " payload_bytes=" << bytes << " reports_per_day=" << fmt(rpd) << "\n"
            << "energy_per_report_j=" << fmt(lr.energy_per_cycle) << " lifetime_years=" << fmt(lr.lifetime_years)
            << "\n";
  return kExitOk;
}

int cmd_analytics(const std::string& path, const std::string& tech_name, const std::string& level_name,
                  std::int64_t bytes, std::int64_t n_ue) {
  const Scenario sc = path.empty() ? Scenario{} : load_scenario(path);
  const TableSet tables = sc.load_tables();
  const Technology tech = technology_from_string(tech_name);
  const CoverageLevel level = coverage_level_from_string(level_name);
  const CoverageClass cls = tables.coverage.level(tech, level);
  const TechRadio& radio = sc.link(tech);
  const LinkParams lp = make_link_params(tables.tbs, tech, cls, radio.rbu, radio.timing);
  CellConfig cfg;
  cfg.n_rb_total = radio.n_rb_total;
  cfg.rbu = radio.rbu;
  cfg.n_ue = n_ue;
  cfg.reporting_period = sc.traffic.reporting_period_s;
  cfg.data_len_bits = bytes * 8;
  std::cout << "technology=" << to_string(tech) << " coverage=" << to_string(level) << " tbs_bits=" << lp.tbs_bits
            << " blocks=" << transport_blocks(cfg.data_len_bits, lp) << "\n"
            << "tl_uplink_ms=" << tl_uplink_ms(lp) << " tl_downlink_ms=" << tl_downlink_ms(lp) << "\n"
            << "delay_ue_ul_ms=" << delay_ue_ms(Direction::UL, cfg.data_len_bits, lp)
            << " delay_ue_dl_ms=" << delay_ue_ms(Direction::DL, cfg.data_len_bits, lp) << "\n"
            << "total_cell_delay_ul_ms=" << total_cell_delay_ms(cfg, lp) << " max_ue_ul=" << max_ue(cfg, lp) << "\n";
  return kExitOk;
}

// Outdoor SINR grid of the scenario's city as a CSV matrix.
int cmd_rem(const std::string& path, double step_m) {
  const Scenario sc = path.empty() ? Scenario{} : load_scenario(path);
  CityConfig city_cfg = sc.city;
  city_cfg.ues_per_cell = 0;
  const CityTopology city = generate_city(city_cfg, sc.seed);
  write_rem_csv(std::cout, radio_environment_map(sc.radio, city_cfg, city, step_m));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eMTC / NB-IoT energy, latency and capacity models"};
  app.require_subcommand(1);

  std::string scenario;
  auto* validate = app.add_subcommand("validate", "parse and validate a scenario file");
  validate->add_option("--scenario", scenario, "scenario YAML")->required();

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "run a named experiment");
  run_cmd->add_option("--scenario", run.scenario, "scenario YAML");
  run_cmd->add_option("--manifest", run.manifest, "rerun from a manifest written by a previous run");
  run_cmd->add_option("--experiment", run.experiment, "experiment name")
      ->check(CLI::IsMember({"lifetime_vs_edrx", "lifetime_matrix", "latency_vs_indoor", "airtime_vs_indoor",
                             "scalability_vs_indoor", "custom"}));
  run_cmd->add_option("--seed", run.seeds, "seed (repeatable)");
  run_cmd->add_option("--jobs", run.jobs, "worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", run.out, "output directory (default: stdout)");
  run_cmd->add_option("--format", run.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--tech", run.techs, "technologies (EMTC, NBIOT)");
  run_cmd->add_option("--indoor", run.indoor, "indoor ratios");
  run_cmd->add_option("--ues", run.ues, "UEs per cell");
  run_cmd->add_option("--payload", run.payloads, "payload sizes, bytes");
  run_cmd->add_option("--edrx-min", run.edrx, "eDRX periods, minutes");
  run_cmd->add_option("--candidates", run.candidates, "ascending UE counts for the capacity search");
  run_cmd->add_flag("--empty-sweep", run.empty_sweep, "run no points (writes the header only)");

  std::string csv, sim_col = "sim_airtime_s", an_col = "analytical_airtime_s";
  double lo = 1.0, hi = 1.25;
  auto* compare = app.add_subcommand("compare", "check sim/analytical ratios in an experiment CSV");
  compare->add_option("--csv", csv, "experiment CSV")->required();
  compare->add_option("--sim", sim_col, "simulated column");
  compare->add_option("--analytical", an_col, "analytical column");
  compare->add_option("--lo", lo, "lowest accepted ratio");
  compare->add_option("--hi", hi, "highest accepted ratio");

  std::string tech = "NBIOT", level = "POOR";
  std::int64_t bytes = 200;
  double rpd = 1.0;
  bool timeline = false;
  auto* life = app.add_subcommand("lifetime", "energy per report and battery lifetime of one PSM device");
  life->add_option("--scenario", scenario, "scenario YAML (default: built-in defaults)");
  life->add_option("--tech", tech, "EMTC or NBIOT");
  life->add_option("--coverage", level, "GOOD, MEDIUM or POOR");
  life->add_option("--bytes", bytes, "report size, bytes")->check(CLI::PositiveNumber);
  life->add_option("--reports-per-day", rpd, "reports per day")->check(CLI::PositiveNumber);
  life->add_flag("--timeline", timeline, "print the per-state energy timeline");

  std::int64_t n_ue = 100;
  auto* analytics = app.add_subcommand("analytics", "closed-form latency and capacity for one coverage class");
  analytics->add_option("--scenario", scenario, "scenario YAML (default: built-in defaults)");
  analytics->add_option("--tech", tech, "EMTC or NBIOT");
  analytics->add_option("--coverage", level, "GOOD, MEDIUM or POOR");
  analytics->add_option("--bytes", bytes, "payload, bytes")->check(CLI::PositiveNumber);
  analytics->add_option("--ues", n_ue, "UEs in the cell")->check(CLI::NonNegativeNumber);

  double step_m = 50.0;
  auto* rem = app.add_subcommand("rem", "outdoor SINR map of the city as a CSV matrix");
  rem->add_option("--scenario", scenario, "scenario YAML (default: built-in defaults)");
  rem->add_option("--step", step_m, "grid step, metres")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*validate) return cmd_validate(scenario);
    if (*run_cmd) return cmd_run(run);
    if (*compare) return cmd_compare(csv, sim_col, an_col, lo, hi);
    if (*life) return cmd_lifetime(scenario, tech, level, bytes, rpd, timeline);
    if (*analytics) return cmd_analytics(scenario, tech, level, bytes, n_ue);
    if (*rem) return cmd_rem(scenario, step_m);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
