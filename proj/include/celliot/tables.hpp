#pragma once

// Bundled lookup tables: TBS, MCL -> coverage class, BLER curve parameters
// and per-class procedure durations.
//
// File format: one comma separated record per line, '#' starts a comment
// line, blank lines are ignored. Leading comment lines are kept so a table
// written back out is byte-identical to a canonical input file. A comment of
// the form "# version=<tag>" names the table revision.

#include "celliot/types.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace celliot {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] inline void line_error(std::string_view what, int line, std::string_view msg) {
  std::ostringstream os;
  os << what << " line " << line << ": " << msg;
  throw ConfigError(os.str());
}

template <typename T>
T parse_number(std::string_view field, std::string_view what, int line) {
  T value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last)
    line_error(what, line, "bad number '" + std::string(field) + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) line_error(what, line, "non-finite number");
  }
  return value;
}

inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

inline std::string format_number(std::int64_t v) { return std::to_string(v); }
inline std::string format_number(int v) { return std::to_string(v); }

// Line-oriented reader shared by every table type.
struct TableText {
  std::vector<std::string> leading_comments;
  std::string version;
  struct Record {
    int line = 0;
    std::vector<std::string_view> fields;
  };
  std::vector<Record> records;
  std::string storage;  // owns the text the field views point into
};

inline TableText read_table_text(std::string text, std::string_view what, std::size_t arity) {
  TableText out;
  out.storage = std::move(text);
  std::string_view rest = out.storage;
  int line_no = 0;
  bool seen_record = false;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view raw = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!seen_record) out.leading_comments.emplace_back(raw);
      const auto body = trim(line.substr(1));
      if (body.rfind("version=", 0) == 0) out.version = std::string(trim(body.substr(8)));
      continue;
    }
    seen_record = true;
    auto fields = split_fields(line);
    if (fields.size() != arity) {
      std::ostringstream os;
      os << "expected " << arity << " fields, got " << fields.size();
      line_error(what, line_no, os.str());
    }
    out.records.push_back({line_no, std::move(fields)});
  }
  return out;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_comments(std::ostream& os, const std::vector<std::string>& comments) {
  for (const auto& c : comments) os << c << '\n';
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Transport block sizes.

class TbsTable {
public:
  struct Entry {
    Technology tech;
    int mcs;
    int rbu;
    std::int64_t tbs_bits;
  };

  static TbsTable parse(std::string text) {
    auto raw = detail::read_table_text(std::move(text), "tbs table", 4);
    TbsTable t;
    t.comments_ = std::move(raw.leading_comments);
    t.version_ = std::move(raw.version);
    for (const auto& r : raw.records) {
      Entry e{};
      try {
        e.tech = technology_from_string(r.fields[0]);
      } catch (const ConfigError& err) {
        detail::line_error("tbs table", r.line, err.what());
      }
      e.mcs = detail::parse_number<int>(r.fields[1], "tbs table", r.line);
      e.rbu = detail::parse_number<int>(r.fields[2], "tbs table", r.line);
      e.tbs_bits = detail::parse_number<std::int64_t>(r.fields[3], "tbs table", r.line);
      if (e.mcs < 0 || e.rbu < 1 || e.tbs_bits <= 0)
        detail::line_error("tbs table", r.line, "mcs >= 0, rbu >= 1 and tbs > 0 required");
      if (!t.index_.emplace(key(e.tech, e.mcs, e.rbu), t.entries_.size()).second)
        detail::line_error("tbs table", r.line, "duplicate entry");
      t.entries_.push_back(e);
    }
    return t;
  }

  static TbsTable load(const std::string& path) { return parse(detail::slurp(path)); }

  [[nodiscard]] std::int64_t lookup(Technology tech, int mcs, int rbu) const {
    if (mcs < 0 || mcs > max_mcs(tech))
      throw ConfigError("tbs lookup: mcs " + std::to_string(mcs) + " outside range for " +
                        std::string(to_string(tech)));
    if (rbu < 1 || rbu > max_rbu(tech))
      throw ConfigError("tbs lookup: rbu " + std::to_string(rbu) + " outside range for " +
                        std::string(to_string(tech)));
    const auto it = index_.find(key(tech, mcs, rbu));
    if (it == index_.end())
      throw ConfigError("tbs table has no entry for " + std::string(to_string(tech)) +
                        " mcs=" + std::to_string(mcs) + " rbu=" + std::to_string(rbu));
    return entries_[it->second].tbs_bits;
  }

  [[nodiscard]] std::string serialize() const {
    std::ostringstream os;
    detail::write_comments(os, comments_);
    for (const auto& e : entries_)
      os << to_string(e.tech) << ',' << e.mcs << ',' << e.rbu << ',' << e.tbs_bits << '\n';
    return os.str();
  }

  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] const std::string& version() const { return version_; }

private:
  static std::int64_t key(Technology t, int mcs, int rbu) {
    return (static_cast<std::int64_t>(t) << 32) | (static_cast<std::int64_t>(mcs) << 8) | rbu;
  }

  std::vector<std::string> comments_;
  std::string version_;
  std::vector<Entry> entries_;
  std::map<std::int64_t, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// MCL -> (MCS, repetitions). Rows of one technology are listed in increasing
// MCL order; the n-th row is coverage level n.

class CoverageTable {
public:
  static CoverageTable parse(std::string text) {
    auto raw = detail::read_table_text(std::move(text), "coverage table", 6);
    CoverageTable t;
    t.comments_ = std::move(raw.leading_comments);
    t.version_ = std::move(raw.version);
    for (const auto& r : raw.records) {
      Technology tech{};
      try {
        tech = technology_from_string(r.fields[0]);
      } catch (const ConfigError& err) {
        detail::line_error("coverage table", r.line, err.what());
      }
      auto& rows = t.rows_[tech];
      if (rows.size() >= 3) detail::line_error("coverage table", r.line, "more than three classes");
      CoverageClass c;
      c.level = static_cast<CoverageLevel>(rows.size());
      c.mcl_db = detail::parse_number<double>(r.fields[1], "coverage table", r.line);
      c.mcs = detail::parse_number<int>(r.fields[2], "coverage table", r.line);
      c.rldc = detail::parse_number<int>(r.fields[3], "coverage table", r.line);
      c.rlds = detail::parse_number<int>(r.fields[4], "coverage table", r.line);
      c.rlus = detail::parse_number<int>(r.fields[5], "coverage table", r.line);
      if (c.rldc < 1 || c.rlds < 1 || c.rlus < 1)
        detail::line_error("coverage table", r.line, "repetitions must be >= 1");
      if (c.mcs < 0 || c.mcs > max_mcs(tech))
        detail::line_error("coverage table", r.line, "mcs outside technology range");
      if (!rows.empty()) {
        const auto& prev = rows.back();
        if (!(c.mcl_db > prev.mcl_db))
          detail::line_error("coverage table", r.line, "mcl thresholds must increase");
        if (c.mcs > prev.mcs || c.rldc < prev.rldc || c.rlds < prev.rlds || c.rlus < prev.rlus)
          detail::line_error("coverage table", r.line,
                             "deeper class must not raise mcs or lower repetitions");
      }
      rows.push_back(c);
      t.order_.emplace_back(tech, rows.size() - 1);
    }
    return t;
  }

  static CoverageTable load(const std::string& path) { return parse(detail::slurp(path)); }

  // Class with the smallest threshold >= mcl_db.
  [[nodiscard]] CoverageClass for_mcl(Technology tech, double mcl_db) const {
    const auto& rows = classes(tech);
    for (const auto& c : rows)
      if (mcl_db <= c.mcl_db) return c;
    std::ostringstream os;
    os << "out of coverage: " << to_string(tech) << " mcl " << mcl_db << " dB exceeds "
       << rows.back().mcl_db << " dB";
    throw OutOfCoverageError(os.str());
  }

  [[nodiscard]] const std::vector<CoverageClass>& classes(Technology tech) const {
    const auto it = rows_.find(tech);
    if (it == rows_.end() || it->second.empty())
      throw ConfigError("coverage table has no rows for " + std::string(to_string(tech)));
    return it->second;
  }

  [[nodiscard]] CoverageClass level(Technology tech, CoverageLevel lvl) const {
    const auto& rows = classes(tech);
    const auto i = static_cast<std::size_t>(lvl);
    if (i >= rows.size()) throw ConfigError("coverage table lacks class " + std::string(to_string(lvl)));
    return rows[i];
  }

  [[nodiscard]] std::string serialize() const {
    std::ostringstream os;
    detail::write_comments(os, comments_);
    for (const auto& [tech, idx] : order_) {
      const auto& c = rows_.at(tech)[idx];
      os << to_string(tech) << ',' << detail::format_number(c.mcl_db) << ',' << c.mcs << ','
         << c.rldc << ',' << c.rlds << ',' << c.rlus << '\n';
    }
    return os.str();
  }

  [[nodiscard]] const std::string& version() const { return version_; }

private:
  std::vector<std::string> comments_;
  std::string version_;
  std::map<Technology, std::vector<CoverageClass>> rows_;
  std::vector<std::pair<Technology, std::size_t>> order_;
};

// ---------------------------------------------------------------------------
// Logistic BLER curve parameters per (technology, MCS).

class BlerTable {
public:
  struct Curve {
    double sinr50_db = 0.0;    // SINR with 50% block error rate
    double slope_per_db = 1.0; // logistic steepness
  };

  static BlerTable parse(std::string text) {
    auto raw = detail::read_table_text(std::move(text), "bler table", 4);
    BlerTable t;
    t.comments_ = std::move(raw.leading_comments);
    t.version_ = std::move(raw.version);
    for (const auto& r : raw.records) {
      Technology tech{};
      try {
        tech = technology_from_string(r.fields[0]);
      } catch (const ConfigError& err) {
        detail::line_error("bler table", r.line, err.what());
      }
      const int mcs = detail::parse_number<int>(r.fields[1], "bler table", r.line);
      Curve c;
      c.sinr50_db = detail::parse_number<double>(r.fields[2], "bler table", r.line);
      c.slope_per_db = detail::parse_number<double>(r.fields[3], "bler table", r.line);
      if (!(c.slope_per_db > 0.0)) detail::line_error("bler table", r.line, "slope must be > 0");
      if (!t.curves_.emplace(std::pair{tech, mcs}, c).second)
        detail::line_error("bler table", r.line, "duplicate entry");
      t.order_.emplace_back(tech, mcs);
    }
    return t;
  }

  static BlerTable load(const std::string& path) { return parse(detail::slurp(path)); }

  [[nodiscard]] const Curve& curve(Technology tech, int mcs) const {
    const auto it = curves_.find({tech, mcs});
    if (it == curves_.end())
      throw ConfigError("bler table has no curve for " + std::string(to_string(tech)) +
                        " mcs=" + std::to_string(mcs));
    return it->second;
  }

  [[nodiscard]] std::string serialize() const {
    std::ostringstream os;
    detail::write_comments(os, comments_);
    for (const auto& k : order_) {
      const auto& c = curves_.at(k);
      os << to_string(k.first) << ',' << k.second << ',' << detail::format_number(c.sinr50_db)
         << ',' << detail::format_number(c.slope_per_db) << '\n';
    }
    return os.str();
  }

  [[nodiscard]] const std::string& version() const { return version_; }

private:
  std::vector<std::string> comments_;
  std::string version_;
  std::map<std::pair<Technology, int>, Curve> curves_;
  std::vector<std::pair<Technology, int>> order_;
};

// ---------------------------------------------------------------------------
// Access-procedure durations per (technology, coverage class), seconds.

struct EventDurations {
  double t_synch_dl = 0.0;
  double t_pbch = 0.0;
  double t_rach = 0.0;
  double t_grant_wait = 0.0;
  double t_ack_rx = 0.0;
  double t_connected_drx = 0.0;

  void validate() const {
    for (double v : {t_synch_dl, t_pbch, t_rach, t_grant_wait, t_ack_rx, t_connected_drx})
      if (!(v >= 0.0)) throw ValidationError("event durations must be >= 0");
  }
};

class EventTable {
public:
  static EventTable parse(std::string text) {
    auto raw = detail::read_table_text(std::move(text), "event table", 8);
    EventTable t;
    t.comments_ = std::move(raw.leading_comments);
    t.version_ = std::move(raw.version);
    for (const auto& r : raw.records) {
      Technology tech{};
      CoverageLevel lvl{};
      try {
        tech = technology_from_string(r.fields[0]);
        lvl = coverage_level_from_string(r.fields[1]);
      } catch (const ConfigError& err) {
        detail::line_error("event table", r.line, err.what());
      }
      EventDurations e;
      double* slots[] = {&e.t_synch_dl, &e.t_pbch,   &e.t_rach,
                         &e.t_grant_wait, &e.t_ack_rx, &e.t_connected_drx};
      for (std::size_t i = 0; i < 6; ++i) {
        *slots[i] = detail::parse_number<double>(r.fields[i + 2], "event table", r.line);
        if (*slots[i] < 0.0) detail::line_error("event table", r.line, "negative duration");
      }
      if (!t.rows_.emplace(std::pair{tech, lvl}, e).second)
        detail::line_error("event table", r.line, "duplicate entry");
      t.order_.emplace_back(tech, lvl);
    }
    return t;
  }

  static EventTable load(const std::string& path) { return parse(detail::slurp(path)); }

  [[nodiscard]] const EventDurations& get(Technology tech, CoverageLevel lvl) const {
    const auto it = rows_.find({tech, lvl});
    if (it == rows_.end())
      throw ConfigError("event table has no row for " + std::string(to_string(tech)) + "," +
                        std::string(to_string(lvl)));
    return it->second;
  }

  [[nodiscard]] std::string serialize() const {
    std::ostringstream os;
    detail::write_comments(os, comments_);
    for (const auto& k : order_) {
      const auto& e = rows_.at(k);
      os << to_string(k.first) << ',' << to_string(k.second);
      for (double v : {e.t_synch_dl, e.t_pbch, e.t_rach, e.t_grant_wait, e.t_ack_rx, e.t_connected_drx})
        os << ',' << detail::format_number(v);
      os << '\n';
    }
    return os.str();
  }

  [[nodiscard]] const std::string& version() const { return version_; }

private:
  std::vector<std::string> comments_;
  std::string version_;
  std::map<std::pair<Technology, CoverageLevel>, EventDurations> rows_;
  std::vector<std::pair<Technology, CoverageLevel>> order_;
};

// All bundled tables, loaded together from one directory.
struct TableSet {
  TbsTable tbs;
  CoverageTable coverage;
  BlerTable bler;
  EventTable events;

  static TableSet load_dir(const std::string& dir) {
    return {TbsTable::load(dir + "/tbs.csv"), CoverageTable::load(dir + "/coverage.csv"),
            BlerTable::load(dir + "/bler.csv"), EventTable::load(dir + "/events.csv")};
  }

#ifdef CELLIOT_DEFAULT_DATA_DIR
  static TableSet bundled() { return load_dir(CELLIOT_DEFAULT_DATA_DIR); }
#endif

  [[nodiscard]] std::string versions() const {
    return "tbs=" + tbs.version() + ";coverage=" + coverage.version() + ";bler=" + bler.version() +
           ";events=" + events.version();
  }
};

// Free-function forms.
inline std::int64_t tbs_lookup(const TbsTable& t, Technology tech, int mcs, int rbu) {
  return t.lookup(tech, mcs, rbu);
}

inline CoverageClass coverage_for_mcl(const CoverageTable& t, Technology tech, double mcl_db) {
  return t.for_mcl(tech, mcl_db);
}

// Assemble the link parameters of a coverage class for a given allocation.
inline LinkParams make_link_params(const TbsTable& tbs, Technology tech, const CoverageClass& cls,
                                   int rbu, const LinkTiming& timing) {
  LinkParams lp;
  lp.mcs = cls.mcs;
  lp.rbu = rbu;
  lp.tbs_bits = tbs.lookup(tech, cls.mcs, rbu);
  lp.rldc = cls.rldc;
  lp.rlds = cls.rlds;
  lp.rlus = cls.rlus;
  lp.timing = timing;
  return lp;
}

}  // namespace celliot
