#pragma once

// Scenario files: YAML in, validated Scenario out, and a normalized YAML
// rendering that parses back to the same Scenario.
//
// Every section and key is optional; absent keys keep their defaults.
// Unknown keys are rejected with their line number.

#include "celliot/energy.hpp"
#include "celliot/radio.hpp"
#include "celliot/simulator.hpp"
#include "celliot/tables.hpp"
#include "celliot/types.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace celliot {

struct SimKnobs {
  bool bler_enabled = true;
  int retry_cap = 8;
  double core_delay_ms = 20.0;
  bool audit = false;
};

struct EnergyConfig {
  PowerProfile nbiot_power{};
  double emtc_radio_factor = 1.25;
  ClockModel clock{0.001, 0.2};
  double battery_joules = 18000.0;
  int emtc_rbu = 6;
  int nbiot_rbu = 1;
  StandbyPolicy standby = StandbyPolicy::OPTIMIZED;
};

inline LinkTiming default_emtc_timing() { return LinkTiming{}; }

inline LinkTiming default_nbiot_timing() {
  LinkTiming t;
  t.t_d = 4e-3;
  t.t_dus = 8e-3;
  t.t_uds = 3e-3;
  return t;
}

struct Scenario {
  std::string name = "custom";
  std::uint64_t seed = 1;
  Technology technology = Technology::EMTC;

  CityConfig city{};
  RadioConfig radio{};
  double frequency_dl_mhz = 925.0;
  double frequency_ul_mhz = 880.0;
  double ue_tx_power_dbm = 20.0;
  std::string scheduler = "round_robin";

  TechRadio emtc{6, 1, default_emtc_timing()};
  TechRadio nbiot{2, 1, default_nbiot_timing()};

  TrafficConfig traffic{};
  std::vector<std::int64_t> packet_sizes_bytes{12, 160};
  SimKnobs sim{};
  EnergyConfig energy{};
  std::string tables_dir;  // empty: bundled tables

  [[nodiscard]] const TechRadio& link(Technology t) const {
    return t == Technology::EMTC ? emtc : nbiot;
  }

  [[nodiscard]] SimScenario sim_scenario(Technology t) const {
    SimScenario s;
    s.technology = t;
    s.city = city;
    s.radio = radio;
    s.link = link(t);
    s.traffic = traffic;
    s.bler_enabled = sim.bler_enabled;
    s.retry_cap = sim.retry_cap;
    s.core_delay_s = sim.core_delay_ms / 1000.0;
    s.audit = sim.audit;
    return s;
  }
  [[nodiscard]] SimScenario sim_scenario() const { return sim_scenario(technology); }

  [[nodiscard]] LifetimeSetup lifetime_setup() const {
    LifetimeSetup l;
    l.nbiot_power = energy.nbiot_power;
    l.emtc_radio_factor = energy.emtc_radio_factor;
    l.clock = energy.clock;
    l.battery_joules = energy.battery_joules;
    l.emtc_rbu = energy.emtc_rbu;
    l.nbiot_rbu = energy.nbiot_rbu;
    l.emtc_timing = emtc.timing;
    l.nbiot_timing = nbiot.timing;
    l.standby = energy.standby;
    return l;
  }

  [[nodiscard]] TableSet load_tables() const {
#ifdef CELLIOT_DEFAULT_DATA_DIR
    if (tables_dir.empty()) return TableSet::bundled();
#endif
    if (tables_dir.empty()) throw ConfigError("tables.dir: no bundled table directory compiled in");
    return TableSet::load_dir(tables_dir);
  }
};

namespace detail {

// Reads one YAML mapping, tracking which keys were consumed.
class MapReader {
public:
  MapReader(YAML::Node node, std::string path, std::string source)
      : node_(std::move(node)), path_(std::move(path)), source_(std::move(source)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(node_, "expected a mapping");
  }

  [[nodiscard]] bool has(const std::string& key) const {
    return node_ && node_.IsMap() && node_[key];
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const YAML::Node v = node_[key];
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, "field '" + field(key) + "' has the wrong type");
    }
  }

  MapReader child(const std::string& key) {
    seen_.insert(key);
    return {has(key) ? node_[key] : YAML::Node(), field(key), source_};
  }


  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(kv.first, "unknown key '" + field(key) + "'");
    }
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    if (at.Mark().line >= 0) os << ":" << at.Mark().line + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  [[noreturn]] void invalid(const std::string& key, const std::string& msg) const {
    const YAML::Node at = has(key) ? node_[key] : node_;
    std::ostringstream os;
    os << source_;
    if (at && at.Mark().line >= 0) os << ":" << at.Mark().line + 1;
    os << ": field '" << field(key) << "': " << msg;
    throw ValidationError(os.str());
  }

  [[nodiscard]] std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

private:
  YAML::Node node_;
  std::string path_;
  std::string source_;
  std::set<std::string> seen_;
};

inline void read_timing(MapReader m, LinkTiming& t) {
  struct Field {
    const char* key;
    double* value;
  };
  for (Field f : {Field{"t_pdcch", &t.t_pdcch}, Field{"t_pdsch", &t.t_pdsch}, Field{"t_pusch", &t.t_pusch},
                  Field{"t_d", &t.t_d}, Field{"t_dus", &t.t_dus}, Field{"t_uds", &t.t_uds},
                  Field{"t_ulack", &t.t_ulack}, Field{"t_dlack", &t.t_dlack}}) {
    m.get(f.key, *f.value);
    if (!(*f.value >= 0.0)) m.invalid(f.key, "must be >= 0");
    const double ms = *f.value * 1000.0;
    if (std::abs(ms - std::round(ms)) > 1e-9) m.invalid(f.key, "must be a whole number of milliseconds");
  }
  m.finish();
}

inline void read_tech_radio(MapReader m, Technology tech, TechRadio& r) {
  m.get("n_rb", r.n_rb_total);
  m.get("rbu", r.rbu);
  if (r.rbu < 1 || r.rbu > max_rbu(tech)) m.invalid("rbu", "out of range for " + std::string(to_string(tech)));
  if (r.n_rb_total < r.rbu) m.invalid("n_rb", "must be >= rbu");
  read_timing(m.child("timing"), r.timing);
  m.finish();
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  Scenario sc;
  detail::MapReader top(root, "", source);

  {
    auto m = top.child("scenario");
    m.get("name", sc.name);
    m.get("seed", sc.seed);
    std::string tech(to_string(sc.technology));
    m.get("technology", tech);
    try {
      sc.technology = technology_from_string(tech);
    } catch (const ConfigError& e) {
      m.invalid("technology", e.what());
    }
    m.finish();
  }
  {
    auto m = top.child("topology");
    auto& c = sc.city;
    m.get("sites", c.sites);
    if (c.sites != 1 && c.sites != 7) m.invalid("sites", "must be 1 or 7");
    m.get("inter_site_distance_m", c.inter_site_distance_m);
    if (!(c.inter_site_distance_m > 0.0)) m.invalid("inter_site_distance_m", "must be > 0");
    m.get("sectors", c.sectors);
    if (c.sectors < 1) m.invalid("sectors", "must be >= 1");
    m.get("ues_per_cell", c.ues_per_cell);
    if (c.ues_per_cell < 0) m.invalid("ues_per_cell", "must be >= 0");
    m.get("indoor_ratio", c.indoor_ratio);
    if (!(c.indoor_ratio >= 0.0 && c.indoor_ratio <= 1.0)) m.invalid("indoor_ratio", "must lie in [0, 1]");
    m.get("urban_radius_m", c.urban_radius_m);
    m.get("suburban_radius_m", c.suburban_radius_m);
    if (!(c.urban_radius_m >= 0.0 && c.suburban_radius_m >= c.urban_radius_m))
      m.invalid("suburban_radius_m", "must be >= urban_radius_m >= 0");
    m.get("min_distance_m", c.min_distance_m);
    if (!(c.min_distance_m > 0.0)) m.invalid("min_distance_m", "must be > 0");
    m.finish();
  }
  {
    auto m = top.child("propagation");
    auto& pl = sc.radio.path_loss;
    m.get("frequency_dl_mhz", sc.frequency_dl_mhz);
    m.get("frequency_ul_mhz", sc.frequency_ul_mhz);
    if (!(sc.frequency_ul_mhz > 0.0)) m.invalid("frequency_ul_mhz", "must be > 0");
    if (!(sc.frequency_dl_mhz > 0.0)) m.invalid("frequency_dl_mhz", "must be > 0");
    m.get("reference_distance_m", pl.reference_distance_m);
    if (!(pl.reference_distance_m > 0.0)) m.invalid("reference_distance_m", "must be > 0");
    pl.reference_loss_db = friis_loss_db(sc.frequency_ul_mhz, pl.reference_distance_m);
    m.get("exponent_urban", pl.exponent_urban);
    m.get("exponent_suburban", pl.exponent_suburban);
    m.get("exponent_openarea", pl.exponent_openarea);
    for (auto [key, value] : {std::pair{"exponent_urban", pl.exponent_urban},
                              std::pair{"exponent_suburban", pl.exponent_suburban},
                              std::pair{"exponent_openarea", pl.exponent_openarea}})
      if (!(value > 0.0)) m.invalid(key, "must be > 0");
    m.get("wall_loss_db", sc.city.wall_loss_db);
    if (!(sc.city.wall_loss_db >= 0.0)) m.invalid("wall_loss_db", "must be >= 0");
    m.finish();
  }
  {
    auto m = top.child("radio");
    m.get("enb_tx_power_dbm", sc.city.enb_tx_power_dbm);
    m.get("ue_tx_power_dbm", sc.ue_tx_power_dbm);
    m.get("lte_bandwidth_rb", sc.radio.lte_bandwidth_rb);
    if (sc.radio.lte_bandwidth_rb < 1) m.invalid("lte_bandwidth_rb", "must be >= 1");
    m.get("noise_figure_db", sc.radio.noise_figure_db);
    m.get("sector_beamwidth_deg", sc.radio.sector_beamwidth_deg);
    if (!(sc.radio.sector_beamwidth_deg > 0.0)) m.invalid("sector_beamwidth_deg", "must be > 0");
    m.get("max_attenuation_db", sc.radio.max_attenuation_db);
    std::string ffr = sc.radio.hard_ffr ? "hard" : "none";
    m.get("ffr", ffr);
    if (ffr != "hard" && ffr != "none") m.invalid("ffr", "must be 'hard' or 'none'");
    sc.radio.hard_ffr = ffr == "hard";
    m.get("scheduler", sc.scheduler);
    if (sc.scheduler != "round_robin") m.invalid("scheduler", "only 'round_robin' is supported");
    detail::read_tech_radio(m.child("emtc"), Technology::EMTC, sc.emtc);
    detail::read_tech_radio(m.child("nbiot"), Technology::NBIOT, sc.nbiot);
    m.finish();
  }
  {
    auto m = top.child("traffic");
    auto& t = sc.traffic;
    m.get("reporting_period_s", t.reporting_period_s);
    if (!(t.reporting_period_s >= 0.001)) m.invalid("reporting_period_s", "must be >= 0.001");
    m.get("payload_bytes", t.payload_bytes);
    if (t.payload_bytes < 1) m.invalid("payload_bytes", "must be >= 1");
    m.get("packet_sizes_bytes", sc.packet_sizes_bytes);
    for (auto b : sc.packet_sizes_bytes)
      if (b < 1) m.invalid("packet_sizes_bytes", "entries must be >= 1");
    m.get("periods", t.periods);
    if (t.periods < 1) m.invalid("periods", "must be >= 1");
    std::string wake = t.wakeup == WakeupMode::RANDOM ? "random" : "simultaneous";
    m.get("wakeup", wake);
    if (wake != "random" && wake != "simultaneous") m.invalid("wakeup", "must be 'random' or 'simultaneous'");
    t.wakeup = wake == "random" ? WakeupMode::RANDOM : WakeupMode::SIMULTANEOUS;
    m.finish();
  }
  {
    auto m = top.child("sim");
    m.get("bler", sc.sim.bler_enabled);
    m.get("retry_cap", sc.sim.retry_cap);
    if (sc.sim.retry_cap < 0) m.invalid("retry_cap", "must be >= 0");
    m.get("core_delay_ms", sc.sim.core_delay_ms);
    if (!(sc.sim.core_delay_ms >= 0.0)) m.invalid("core_delay_ms", "must be >= 0");
    m.get("audit", sc.sim.audit);
    m.finish();
  }
  {
    auto m = top.child("energy");
    auto& e = sc.energy;
    {
      auto p = m.child("nbiot_power");
      p.get("p_tx", e.nbiot_power.p_tx);
      p.get("p_rx", e.nbiot_power.p_rx);
      p.get("p_idle", e.nbiot_power.p_idle);
      p.get("p_sleep", e.nbiot_power.p_sleep);
      try {
        e.nbiot_power.validate();
      } catch (const ValidationError& err) {
        m.invalid("nbiot_power", err.what());
      }
      p.finish();
    }
    m.get("emtc_radio_factor", e.emtc_radio_factor);
    if (!(e.emtc_radio_factor > 0.0)) m.invalid("emtc_radio_factor", "must be > 0");
    {
      auto c = m.child("clock");
      c.get("fractional_error", e.clock.fractional_error);
      c.get("resync_time_s", e.clock.resync_time);
      try {
        e.clock.validate();
      } catch (const ValidationError& err) {
        m.invalid("clock", err.what());
      }
      c.finish();
    }
    m.get("battery_j", e.battery_joules);
    if (!(e.battery_joules > 0.0)) m.invalid("battery_j", "must be > 0");
    m.get("emtc_rbu", e.emtc_rbu);
    if (e.emtc_rbu < 1 || e.emtc_rbu > max_rbu(Technology::EMTC)) m.invalid("emtc_rbu", "must lie in [1, 6]");
    m.get("nbiot_rbu", e.nbiot_rbu);
    if (e.nbiot_rbu != 1) m.invalid("nbiot_rbu", "must be 1");
    std::string standby = e.standby == StandbyPolicy::OPTIMIZED ? "optimized" : "unoptimized";
    m.get("standby", standby);
    if (standby != "optimized" && standby != "unoptimized")
      m.invalid("standby", "must be 'optimized' or 'unoptimized'");
    e.standby = standby == "optimized" ? StandbyPolicy::OPTIMIZED : StandbyPolicy::UNOPTIMIZED;
    m.finish();
  }
  {
    auto m = top.child("tables");
    m.get("dir", sc.tables_dir);
    m.finish();
  }
  top.finish();
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  return parse_scenario(detail::slurp(path), path);
}

// Normalized rendering: fixed key order, shortest round-trip numbers.
inline std::string emit_scenario(const Scenario& sc) {
  using detail::format_number;
  std::ostringstream os;
  auto num = [](double v) { return format_number(v); };
  auto quoted = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  auto timing = [&](const char* indent, const LinkTiming& t) {
    os << indent << "timing:\n";
    const std::string in = std::string(indent) + "  ";
    os << in << "t_pdcch: " << num(t.t_pdcch) << "\n"
       << in << "t_pdsch: " << num(t.t_pdsch) << "\n"
       << in << "t_pusch: " << num(t.t_pusch) << "\n"
       << in << "t_d: " << num(t.t_d) << "\n"
       << in << "t_dus: " << num(t.t_dus) << "\n"
       << in << "t_uds: " << num(t.t_uds) << "\n"
       << in << "t_ulack: " << num(t.t_ulack) << "\n"
       << in << "t_dlack: " << num(t.t_dlack) << "\n";
  };

  os << "scenario:\n"
     << "  name: " << quoted(sc.name) << "\n"
     << "  seed: " << sc.seed << "\n"
     << "  technology: " << to_string(sc.technology) << "\n";
  const auto& c = sc.city;
  os << "topology:\n"
     << "  sites: " << c.sites << "\n"
     << "  inter_site_distance_m: " << num(c.inter_site_distance_m) << "\n"
     << "  sectors: " << c.sectors << "\n"
     << "  ues_per_cell: " << c.ues_per_cell << "\n"
     << "  indoor_ratio: " << num(c.indoor_ratio) << "\n"
     << "  urban_radius_m: " << num(c.urban_radius_m) << "\n"
     << "  suburban_radius_m: " << num(c.suburban_radius_m) << "\n"
     << "  min_distance_m: " << num(c.min_distance_m) << "\n";
  const auto& pl = sc.radio.path_loss;
  os << "propagation:\n"
     << "  frequency_dl_mhz: " << num(sc.frequency_dl_mhz) << "\n"
     << "  frequency_ul_mhz: " << num(sc.frequency_ul_mhz) << "\n"
     << "  reference_distance_m: " << num(pl.reference_distance_m) << "\n"
     << "  exponent_urban: " << num(pl.exponent_urban) << "\n"
     << "  exponent_suburban: " << num(pl.exponent_suburban) << "\n"
     << "  exponent_openarea: " << num(pl.exponent_openarea) << "\n"
     << "  wall_loss_db: " << num(c.wall_loss_db) << "\n";
  os << "radio:\n"
     << "  enb_tx_power_dbm: " << num(c.enb_tx_power_dbm) << "\n"
     << "  ue_tx_power_dbm: " << num(sc.ue_tx_power_dbm) << "\n"
     << "  lte_bandwidth_rb: " << sc.radio.lte_bandwidth_rb << "\n"
     << "  noise_figure_db: " << num(sc.radio.noise_figure_db) << "\n"
     << "  sector_beamwidth_deg: " << num(sc.radio.sector_beamwidth_deg) << "\n"
     << "  max_attenuation_db: " << num(sc.radio.max_attenuation_db) << "\n"
     << "  ffr: " << (sc.radio.hard_ffr ? "hard" : "none") << "\n"
     << "  scheduler: " << sc.scheduler << "\n";
  for (auto tech : {Technology::EMTC, Technology::NBIOT}) {
    const auto& r = sc.link(tech);
    os << "  " << (tech == Technology::EMTC ? "emtc" : "nbiot") << ":\n"
       << "    n_rb: " << r.n_rb_total << "\n"
       << "    rbu: " << r.rbu << "\n";
    timing("    ", r.timing);
  }
  const auto& t = sc.traffic;
  os << "traffic:\n"
     << "  reporting_period_s: " << num(t.reporting_period_s) << "\n"
     << "  payload_bytes: " << t.payload_bytes << "\n"
     << "  packet_sizes_bytes: [";
  for (std::size_t i = 0; i < sc.packet_sizes_bytes.size(); ++i)
    os << (i ? ", " : "") << sc.packet_sizes_bytes[i];
  os << "]\n"
     << "  periods: " << t.periods << "\n"
     << "  wakeup: " << (t.wakeup == WakeupMode::RANDOM ? "random" : "simultaneous") << "\n";
  os << "sim:\n"
     << "  bler: " << (sc.sim.bler_enabled ? "true" : "false") << "\n"
     << "  retry_cap: " << sc.sim.retry_cap << "\n"
     << "  core_delay_ms: " << num(sc.sim.core_delay_ms) << "\n"
     << "  audit: " << (sc.sim.audit ? "true" : "false") << "\n";
  const auto& e = sc.energy;
  os << "energy:\n"
     << "  nbiot_power:\n"
     << "    p_tx: " << num(e.nbiot_power.p_tx) << "\n"
     << "    p_rx: " << num(e.nbiot_power.p_rx) << "\n"
     << "    p_idle: " << num(e.nbiot_power.p_idle) << "\n"
     << "    p_sleep: " << num(e.nbiot_power.p_sleep) << "\n"
     << "  emtc_radio_factor: " << num(e.emtc_radio_factor) << "\n"
     << "  clock:\n"
     << "    fractional_error: " << num(e.clock.fractional_error) << "\n"
     << "    resync_time_s: " << num(e.clock.resync_time) << "\n"
     << "  battery_j: " << num(e.battery_joules) << "\n"
     << "  emtc_rbu: " << e.emtc_rbu << "\n"
     << "  nbiot_rbu: " << e.nbiot_rbu << "\n"
     << "  standby: " << (e.standby == StandbyPolicy::OPTIMIZED ? "optimized" : "unoptimized") << "\n";
  os << "tables:\n"
     << "  dir: " << quoted(sc.tables_dir) << "\n";
  return os.str();
}

// 64-bit FNV-1a over the normalized form.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const Scenario& sc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(emit_scenario(sc))));
  return buf;
}

}  // namespace celliot
