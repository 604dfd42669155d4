#pragma once

// City radio model: log-distance path loss, hexagonal eNB layout with
// three-sector sites and hard frequency reuse, per-UE SINR, and the logistic
// BLER link abstraction.

#include "celliot/rng.hpp"
#include "celliot/tables.hpp"
#include "celliot/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string_view>
#include <vector>

namespace celliot {

enum class Environment { URBAN, SUBURBAN, OPENAREA };

inline std::string_view to_string(Environment e) {
  switch (e) {
    case Environment::URBAN: return "URBAN";
    case Environment::SUBURBAN: return "SUBURBAN";
    case Environment::OPENAREA: return "OPENAREA";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Path loss.

// Free space loss in dB at distance_m for carrier frequency_mhz.
inline double friis_loss_db(double frequency_mhz, double distance_m) {
  constexpr double c = 299792458.0;
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * frequency_mhz * 1e6 / c);
}

// PL(d) = PL(d0) + 10 n log10(d / d0), plus one wall crossing for indoor UEs.
struct PathLossConfig {
  double reference_distance_m = 1.0;
  double reference_loss_db = friis_loss_db(880.0, 1.0);
  double exponent_urban = 3.8;
  double exponent_suburban = 3.2;
  double exponent_openarea = 2.8;

  [[nodiscard]] double exponent(Environment e) const {
    switch (e) {
      case Environment::URBAN: return exponent_urban;
      case Environment::SUBURBAN: return exponent_suburban;
      case Environment::OPENAREA: return exponent_openarea;
    }
    return exponent_urban;
  }
};

inline double path_loss(const PathLossConfig& cfg, Environment env, double distance_m, bool indoor,
                        double wall_loss_db) {
  if (!(distance_m > 0.0)) throw ValidationError("path loss distance must be > 0");
  const double outdoor = cfg.reference_loss_db +
                         10.0 * cfg.exponent(env) * std::log10(distance_m / cfg.reference_distance_m);
  return indoor ? outdoor + wall_loss_db : outdoor;
}

// ---------------------------------------------------------------------------
// Topology.

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Enb {
  Vec2 position;
  double tx_power_dbm = 46.0;
  int sectors = 3;
  int reuse_group = 0;  // rotates the sector -> sub-band assignment
};

struct UePlacement {
  Vec2 position;
  bool indoor = false;
  Environment environment = Environment::URBAN;
  int home_cell = 0;  // cell the UE was dropped around
};

struct CityTopology {
  std::vector<Enb> cells;
  std::vector<UePlacement> ues;
  double wall_loss_db = 15.0;
};

struct CityConfig {
  int sites = 7;                  // 1 or 7 (centre plus first ring)
  double inter_site_distance_m = 1000.0;
  double enb_tx_power_dbm = 46.0;
  int sectors = 3;
  int ues_per_cell = 300;
  double indoor_ratio = 0.5;
  double wall_loss_db = 15.0;
  double urban_radius_m = 700.0;     // city centre
  double suburban_radius_m = 1400.0; // beyond this: open area
  double min_distance_m = 10.0;
};

inline Environment environment_at(const CityConfig& cfg, Vec2 p) {
  const double r = std::hypot(p.x, p.y);
  if (r <= cfg.urban_radius_m) return Environment::URBAN;
  if (r <= cfg.suburban_radius_m) return Environment::SUBURBAN;
  return Environment::OPENAREA;
}

inline std::vector<Enb> hex_sites(const CityConfig& cfg) {
  if (cfg.sites != 1 && cfg.sites != 7) throw ValidationError("city supports 1 or 7 sites");
  std::vector<Enb> cells;
  cells.push_back({{0.0, 0.0}, cfg.enb_tx_power_dbm, cfg.sectors, 0});
  if (cfg.sites == 7) {
    for (int i = 0; i < 6; ++i) {
      const double a = std::numbers::pi / 6.0 + i * std::numbers::pi / 3.0;
      cells.push_back({{cfg.inter_site_distance_m * std::cos(a), cfg.inter_site_distance_m * std::sin(a)},
                       cfg.enb_tx_power_dbm,
                       cfg.sectors,
                       0});
    }
  }
  return cells;
}

// Indoor flags for n UEs: exactly round(ratio * n) indoor, chosen by a
// seeded ranking that does not depend on the ratio, so sweeping the ratio
// re-flags the same UEs instead of moving them.
inline std::vector<bool> indoor_flags(std::size_t n, double ratio, std::uint64_t seed) {
  std::vector<std::pair<double, std::size_t>> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[i] = {Rng(seed, {0x1d00, i}).uniform(), i};
  std::sort(rank.begin(), rank.end());
  const auto count = static_cast<std::size_t>(std::llround(std::clamp(ratio, 0.0, 1.0) * static_cast<double>(n)));
  std::vector<bool> flags(n, false);
  for (std::size_t i = 0; i < count; ++i) flags[rank[i].second] = true;
  return flags;
}

// UEs are dropped uniformly in a disc of the hexagon circumradius around each
// site. UE i of cell c always lands at the same spot for a given seed, so a
// larger population extends a smaller one.
inline CityTopology generate_city(const CityConfig& cfg, std::uint64_t seed) {
  if (cfg.ues_per_cell < 0) throw ValidationError("ues_per_cell must be >= 0");
  if (!(cfg.indoor_ratio >= 0.0 && cfg.indoor_ratio <= 1.0))
    throw ValidationError("indoor ratio must lie in [0, 1]");
  CityTopology city;
  city.cells = hex_sites(cfg);
  city.wall_loss_db = cfg.wall_loss_db;
  const double radius = cfg.inter_site_distance_m / std::sqrt(3.0);
  for (std::size_t c = 0; c < city.cells.size(); ++c) {
    for (int i = 0; i < cfg.ues_per_cell; ++i) {
      Rng rng(seed, {0x0e, c, static_cast<std::uint64_t>(i)});
      Vec2 p;
      do {
        const double r = radius * std::sqrt(rng.uniform());
        const double a = 2.0 * std::numbers::pi * rng.uniform();
        p = {city.cells[c].position.x + r * std::cos(a), city.cells[c].position.y + r * std::sin(a)};
      } while (distance(p, city.cells[c].position) < cfg.min_distance_m);
      UePlacement ue;
      ue.position = p;
      ue.environment = environment_at(cfg, p);
      ue.home_cell = static_cast<int>(c);
      city.ues.push_back(ue);
    }
  }
  const auto flags = indoor_flags(city.ues.size(), cfg.indoor_ratio, seed);
  for (std::size_t i = 0; i < city.ues.size(); ++i) city.ues[i].indoor = flags[i];
  return city;
}

// ---------------------------------------------------------------------------
// SINR.

struct RadioConfig {
  PathLossConfig path_loss{};
  int lte_bandwidth_rb = 50;     // eNB power is spread over the whole LTE carrier
  double noise_figure_db = 7.0;
  double sector_beamwidth_deg = 70.0;
  double max_attenuation_db = 20.0;
  bool hard_ffr = true;

  [[nodiscard]] double noise_per_rb_dbm() const {
    return -174.0 + 10.0 * std::log10(180e3) + noise_figure_db;
  }
  [[nodiscard]] double rb_power_dbm(double tx_power_dbm) const {
    return tx_power_dbm - 10.0 * std::log10(static_cast<double>(lte_bandwidth_rb));
  }
};

// Parabolic sector pattern, attenuation in dB for an angle off boresight.
inline double sector_attenuation_db(const RadioConfig& cfg, double off_boresight_rad) {
  double deg = std::abs(off_boresight_rad) * 180.0 / std::numbers::pi;
  deg = std::fmod(deg, 360.0);
  if (deg > 180.0) deg = 360.0 - deg;
  const double r = deg / cfg.sector_beamwidth_deg;
  return std::min(12.0 * r * r, cfg.max_attenuation_db);
}

inline double sector_boresight(int sector, int sectors) {
  return 2.0 * std::numbers::pi * sector / sectors;
}

// Sector of a site that faces a point, and the attenuation towards it.
struct SectorView {
  int sector = 0;
  double attenuation_db = 0.0;
};

inline SectorView facing_sector(const RadioConfig& cfg, const Enb& enb, Vec2 p) {
  if (enb.sectors <= 1) return {0, 0.0};
  const double bearing = std::atan2(p.y - enb.position.y, p.x - enb.position.x);
  SectorView best{0, 1e300};
  for (int s = 0; s < enb.sectors; ++s) {
    const double att = sector_attenuation_db(cfg, bearing - sector_boresight(s, enb.sectors));
    if (att < best.attenuation_db) best = {s, att};
  }
  return best;
}

inline double attenuation_from_sector(const RadioConfig& cfg, const Enb& enb, int sector, Vec2 p) {
  if (enb.sectors <= 1) return 0.0;
  const double bearing = std::atan2(p.y - enb.position.y, p.x - enb.position.x);
  return sector_attenuation_db(cfg, bearing - sector_boresight(sector, enb.sectors));
}

inline int sub_band(const Enb& enb, int sector) {
  return enb.sectors <= 1 ? 0 : (enb.reuse_group + sector) % enb.sectors;
}

struct UeRadio {
  int serving_cell = -1;
  int sector = 0;
  double path_loss_db = 0.0;
  double sinr_db = 0.0;
  // Coupling loss seen by link adaptation: path loss plus serving sector
  // attenuation plus the interference rise over the noise floor.
  double effective_mcl_db = 0.0;
};

inline double to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double to_db(double linear) { return 10.0 * std::log10(linear); }

inline UeRadio evaluate_point(const RadioConfig& cfg, const std::vector<Enb>& cells, Vec2 p,
                              Environment env, bool indoor, double wall_loss_db) {
  if (cells.empty()) throw ValidationError("topology has no cells");
  std::vector<double> pl(cells.size());
  UeRadio out;
  double best_rx = -1e300;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double d = std::max(distance(p, cells[c].position), cfg.path_loss.reference_distance_m);
    pl[c] = path_loss(cfg.path_loss, env, d, indoor, wall_loss_db);
    const SectorView v = facing_sector(cfg, cells[c], p);
    const double rx = cfg.rb_power_dbm(cells[c].tx_power_dbm) - pl[c] - v.attenuation_db;
    if (rx > best_rx) {
      best_rx = rx;
      out.serving_cell = static_cast<int>(c);
      out.sector = v.sector;
    }
  }
  const Enb& serving = cells[static_cast<std::size_t>(out.serving_cell)];
  const int band = sub_band(serving, out.sector);
  const double noise_mw = to_mw(cfg.noise_per_rb_dbm());
  double interference_mw = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Enb& e = cells[c];
    for (int s = 0; s < std::max(e.sectors, 1); ++s) {
      if (static_cast<int>(c) == out.serving_cell && s == out.sector) continue;
      // Hard reuse: only sectors on the serving sub-band interfere, which
      // also removes the other sectors of the serving site.
      if (cfg.hard_ffr && sub_band(e, s) != band) continue;
      interference_mw += to_mw(cfg.rb_power_dbm(e.tx_power_dbm) - pl[c] - attenuation_from_sector(cfg, e, s, p));
    }
  }
  out.path_loss_db = pl[static_cast<std::size_t>(out.serving_cell)];
  out.sinr_db = best_rx - to_db(noise_mw + interference_mw);
  out.effective_mcl_db = cfg.rb_power_dbm(serving.tx_power_dbm) - cfg.noise_per_rb_dbm() - out.sinr_db;
  return out;
}

inline std::vector<UeRadio> sinr_map(const RadioConfig& cfg, const CityTopology& city) {
  std::vector<UeRadio> out;
  out.reserve(city.ues.size());
  for (const auto& ue : city.ues)
    out.push_back(evaluate_point(cfg, city.cells, ue.position, ue.environment, ue.indoor, city.wall_loss_db));
  return out;
}

// Outdoor SINR sampled on a square grid covering the city, row-major from
// the lowest y. Written as a CSV matrix by write_rem_csv.
struct RemGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double step_m = 50.0;
  int nx = 0;
  int ny = 0;
  std::vector<double> sinr_db;
};

inline RemGrid radio_environment_map(const RadioConfig& cfg, const CityConfig& city_cfg,
                                     const CityTopology& city, double step_m) {
  if (!(step_m > 0.0)) throw ValidationError("REM step must be > 0");
  double extent = 0.0;
  for (const auto& c : city.cells) extent = std::max(extent, std::hypot(c.position.x, c.position.y));
  extent += city_cfg.inter_site_distance_m / std::sqrt(3.0);
  RemGrid g;
  g.step_m = step_m;
  g.x0 = g.y0 = -extent;
  g.nx = g.ny = static_cast<int>(std::floor(2.0 * extent / step_m)) + 1;
  g.sinr_db.reserve(static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny));
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Vec2 p{g.x0 + ix * step_m, g.y0 + iy * step_m};
      g.sinr_db.push_back(
          evaluate_point(cfg, city.cells, p, environment_at(city_cfg, p), false, 0.0).sinr_db);
    }
  return g;
}

// Header comment with the grid origin and step, then one row per y.
inline void write_rem_csv(std::ostream& os, const RemGrid& g) {
  os << "# x0=" << detail::format_number(g.x0) << " y0=" << detail::format_number(g.y0)
     << " step_m=" << detail::format_number(g.step_m) << "\n";
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      if (ix) os << ',';
      os << detail::format_number(g.sinr_db[static_cast<std::size_t>(iy) * g.nx + ix]);
    }
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// BLER.

inline double repetition_gain_db(int repetitions) {
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  return 10.0 * std::log10(static_cast<double>(repetitions));
}

inline double bler(const BlerTable& table, Technology tech, int mcs, double sinr_db, int repetitions) {
  const auto& c = table.curve(tech, mcs);
  const double effective = sinr_db + repetition_gain_db(repetitions);
  if (std::isinf(effective)) return effective > 0 ? 0.0 : 1.0;
  return 1.0 / (1.0 + std::exp(c.slope_per_db * (effective - c.sinr50_db)));
}

}  // namespace celliot
