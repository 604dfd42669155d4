#pragma once

// Closed-form data transmission latency and cell capacity.
//
// All ceilings and floors are taken on integer milliseconds so subframe
// boundaries are exact.

#include "celliot/types.hpp"

#include <cstdint>
#include <vector>

namespace celliot {

enum class Direction { UL, DL };

struct CellConfig {
  int n_rb_total = 6;
  int rbu = 1;
  std::int64_t n_ue = 0;
  double reporting_period = 60.0;  // seconds
  Direction direction = Direction::UL;
  std::int64_t data_len_bits = 96;

  void validate() const {
    if (!(rbu >= 1 && n_rb_total >= rbu)) throw ValidationError("need n_rb_total >= rbu >= 1");
    if (n_ue < 0) throw ValidationError("n_ue must be >= 0");
    if (!(reporting_period > 0.0)) throw ValidationError("reporting period must be > 0");
  }

  // UEs that can transmit concurrently.
  [[nodiscard]] std::int64_t group_size() const { return n_rb_total / rbu; }
};

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// Downlink: control, cross-subframe gap, data, retune, uplink ack.
inline std::int64_t tl_downlink_ms(const LinkParams& lp) {
  const auto& t = lp.timing;
  return lp.rldc * to_ms(t.t_pdcch) + to_ms(t.t_d) + lp.rlds * to_ms(t.t_pdsch) + to_ms(t.t_dus) +
         lp.rlus * to_ms(t.t_ulack);
}

// Uplink: grant, retune, data, retune, downlink ack.
inline std::int64_t tl_uplink_ms(const LinkParams& lp) {
  const auto& t = lp.timing;
  return lp.rldc * to_ms(t.t_pdcch) + to_ms(t.t_dus) + lp.rlus * to_ms(t.t_pusch) + to_ms(t.t_uds) +
         lp.rldc * to_ms(t.t_dlack);
}

inline double tl_downlink(const LinkParams& lp) { return from_ms(tl_downlink_ms(lp)); }
inline double tl_uplink(const LinkParams& lp) { return from_ms(tl_uplink_ms(lp)); }

inline std::int64_t transport_blocks(std::int64_t data_len_bits, const LinkParams& lp) {
  if (data_len_bits <= 0) throw ValidationError("data length must be > 0");
  if (lp.tbs_bits <= 0) throw ValidationError("tbs_bits must be > 0");
  return ceil_div(data_len_bits, lp.tbs_bits);
}

inline std::int64_t delay_ue_ms(Direction dir, std::int64_t data_len_bits, const LinkParams& lp) {
  const std::int64_t tl = dir == Direction::UL ? tl_uplink_ms(lp) : tl_downlink_ms(lp);
  return tl * transport_blocks(data_len_bits, lp);
}

inline double delay_ue(Direction dir, std::int64_t data_len_bits, const LinkParams& lp) {
  return from_ms(delay_ue_ms(dir, data_len_bits, lp));
}

inline std::int64_t total_cell_delay_ms(const CellConfig& cfg, const LinkParams& lp) {
  cfg.validate();
  const std::int64_t groups = ceil_div(cfg.n_ue, cfg.group_size());
  return delay_ue_ms(cfg.direction, cfg.data_len_bits, lp) * groups;
}

inline double total_cell_delay(const CellConfig& cfg, const LinkParams& lp) {
  return from_ms(total_cell_delay_ms(cfg, lp));
}

inline std::int64_t max_ue(const CellConfig& cfg, const LinkParams& lp) {
  cfg.validate();
  const std::int64_t d = delay_ue_ms(cfg.direction, cfg.data_len_bits, lp);
  const std::int64_t period = to_ms(cfg.reporting_period);
  return (period / d) * cfg.group_size();
}

// Cells whose UEs fall into several coverage classes. Each class is packed
// into its own groups, so the cell delay is the sum over classes.
struct ClassPopulation {
  LinkParams link;
  std::int64_t n_ue = 0;
};

inline std::int64_t total_cell_delay_ms(const CellConfig& cfg,
                                        const std::vector<ClassPopulation>& classes) {
  cfg.validate();
  std::int64_t total = 0;
  for (const auto& c : classes) {
    if (c.n_ue == 0) continue;
    total += delay_ue_ms(cfg.direction, cfg.data_len_bits, c.link) * ceil_div(c.n_ue, cfg.group_size());
  }
  return total;
}

// Capacity with the per-UE delay averaged over the population.
inline std::int64_t max_ue(const CellConfig& cfg, const std::vector<ClassPopulation>& classes) {
  cfg.validate();
  std::int64_t n = 0;
  std::int64_t work = 0;
  for (const auto& c : classes) {
    if (c.n_ue == 0) continue;
    n += c.n_ue;
    work += c.n_ue * delay_ue_ms(cfg.direction, cfg.data_len_bits, c.link);
  }
  if (n == 0) return 0;
  // floor(period / mean_delay) without leaving integer arithmetic.
  const std::int64_t period = to_ms(cfg.reporting_period);
  return ((period * n) / work) * cfg.group_size();
}

}  // namespace celliot
