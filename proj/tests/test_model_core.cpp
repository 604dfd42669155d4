#include "celliot/tables.hpp"
#include "celliot/types.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

using namespace celliot;

namespace {

const std::string kData = CELLIOT_DEFAULT_DATA_DIR;

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Independent reader for the TBS file: plain stream splitting, no shared code.
std::map<std::tuple<std::string, int, int>, long> reread_tbs(const std::string& path) {
  std::map<std::tuple<std::string, int, int>, long> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string tech, mcs, rbu, tbs;
    std::getline(ss, tech, ',');
    std::getline(ss, mcs, ',');
    std::getline(ss, rbu, ',');
    std::getline(ss, tbs, ',');
    out[{tech, std::stoi(mcs), std::stoi(rbu)}] = std::stol(tbs);
  }
  return out;
}

}  // namespace

TEST(Technology, StringRoundTrip) {
  for (auto t : {Technology::EMTC, Technology::NBIOT})
    EXPECT_EQ(technology_from_string(std::string(to_string(t))), t);
  EXPECT_THROW(technology_from_string("LORA"), ConfigError);
}

TEST(Technology, ModulationAndAllocationLimits) {
  EXPECT_EQ(max_rbu(Technology::EMTC), 6);
  EXPECT_EQ(max_rbu(Technology::NBIOT), 1);
  EXPECT_GT(max_mcs(Technology::EMTC), max_mcs(Technology::NBIOT));
}

TEST(PowerProfile, DefaultsAreOrderedAndScaleOnlyRadio) {
  PowerProfile p;
  EXPECT_NO_THROW(p.validate());
  const PowerProfile e = p.scaled_radio(1.25);
  EXPECT_DOUBLE_EQ(e.p_tx, 1.25 * p.p_tx);
  EXPECT_DOUBLE_EQ(e.p_rx, 1.25 * p.p_rx);
  EXPECT_DOUBLE_EQ(e.p_idle, p.p_idle);
  EXPECT_DOUBLE_EQ(e.p_sleep, p.p_sleep);
  PowerProfile bad = p;
  bad.p_idle = bad.p_rx;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(ClockModel, Bounds) {
  EXPECT_NO_THROW((ClockModel{0.0, 0.1}.validate()));
  EXPECT_THROW((ClockModel{1.0, 0.1}.validate()), ValidationError);
  EXPECT_THROW((ClockModel{-0.1, 0.1}.validate()), ValidationError);
  EXPECT_THROW((ClockModel{0.1, 0.0}.validate()), ValidationError);
}

TEST(DutyCycleConfig, PsmHasNoPagingWindow) {
  EXPECT_NO_THROW(DutyCycleConfig::psm(100).validate());
  EXPECT_NO_THROW(DutyCycleConfig::edrx(100, 1).validate());
  DutyCycleConfig d = DutyCycleConfig::psm(100);
  d.paging_window = 1;
  EXPECT_THROW(d.validate(), ValidationError);
  EXPECT_THROW(DutyCycleConfig::edrx(1, 1).validate(), ValidationError);
}

TEST(LinkParams, Invariants) {
  LinkParams lp;
  lp.tbs_bits = 16;
  EXPECT_NO_THROW(lp.validate());
  lp.rlus = 0;
  EXPECT_THROW(lp.validate(), ValidationError);
  lp.rlus = 1;
  lp.tbs_bits = 0;
  EXPECT_THROW(lp.validate(), ValidationError);
  lp.tbs_bits = 16;
  lp.timing.t_dus = -1e-3;
  EXPECT_THROW(lp.validate(), ValidationError);
}

TEST(Milliseconds, RoundsToNearestSubframe) {
  EXPECT_EQ(to_ms(0.003), 3);
  EXPECT_EQ(to_ms(0.0029999999), 3);
  EXPECT_EQ(to_ms(30.0), 30000);
  EXPECT_DOUBLE_EQ(from_ms(267), 0.267);
}

// --- TBS ------------------------------------------------------------------

TEST(TbsTable, EmtcMinimumIsSmallestEntry) {
  const auto t = TbsTable::load(kData + "/tbs.csv");
  std::int64_t smallest = INT64_MAX;
  for (const auto& e : t.entries())
    if (e.tech == Technology::EMTC) smallest = std::min(smallest, e.tbs_bits);
  EXPECT_EQ(tbs_lookup(t, Technology::EMTC, 0, 1), smallest);
}

TEST(TbsTable, MatchesIndependentReread) {
  const auto t = TbsTable::load(kData + "/tbs.csv");
  const auto oracle = reread_tbs(kData + "/tbs.csv");
  ASSERT_EQ(oracle.size(), t.entries().size());
  for (int mcs = 0; mcs <= 12; ++mcs)
    EXPECT_EQ(tbs_lookup(t, Technology::NBIOT, mcs, 1), (oracle.at({"NBIOT", mcs, 1})));
  for (int mcs = 0; mcs <= 15; ++mcs)
    for (int rbu = 1; rbu <= 6; ++rbu)
      EXPECT_EQ(tbs_lookup(t, Technology::EMTC, mcs, rbu), (oracle.at({"EMTC", mcs, rbu})));
}

TEST(TbsTable, CoversRequiredRanges) {
  const auto t = TbsTable::load(kData + "/tbs.csv");
  for (int mcs = 0; mcs <= 15; ++mcs)
    for (int rbu = 1; rbu <= 6; ++rbu) EXPECT_GT(t.lookup(Technology::EMTC, mcs, rbu), 0);
  for (int mcs = 0; mcs <= 12; ++mcs) EXPECT_GT(t.lookup(Technology::NBIOT, mcs, 1), 0);
}

TEST(TbsTable, MonotoneInMcsAndRbu) {
  const auto t = TbsTable::load(kData + "/tbs.csv");
  for (int mcs = 0; mcs <= 15; ++mcs)
    for (int rbu = 1; rbu <= 6; ++rbu) {
      if (mcs > 0) {
        EXPECT_GE(t.lookup(Technology::EMTC, mcs, rbu), t.lookup(Technology::EMTC, mcs - 1, rbu));
      }
      if (rbu > 1) {
        EXPECT_GE(t.lookup(Technology::EMTC, mcs, rbu), t.lookup(Technology::EMTC, mcs, rbu - 1));
      }
    }
  for (int mcs = 1; mcs <= 12; ++mcs)
    EXPECT_GE(t.lookup(Technology::NBIOT, mcs, 1), t.lookup(Technology::NBIOT, mcs - 1, 1));
}

TEST(TbsTable, MissingEntryNamesIt) {
  const auto t = TbsTable::parse("EMTC,0,1,16\n");
  try {
    (void)t.lookup(Technology::EMTC, 1, 1);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("mcs=1 rbu=1"), std::string::npos) << e.what();
  }
  EXPECT_THROW((void)t.lookup(Technology::NBIOT, 0, 2), ConfigError);
  EXPECT_THROW((void)t.lookup(Technology::NBIOT, 13, 1), ConfigError);
}

TEST(TbsTable, MalformedLineReportsLineNumber) {
  try {
    (void)TbsTable::parse("# c\nEMTC,0,1,16\nEMTC,1,x,24\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW((void)TbsTable::parse("EMTC,0,1\n"), ConfigError);
  EXPECT_THROW((void)TbsTable::parse("EMTC,0,1,16\nEMTC,0,1,16\n"), ConfigError);
}

// --- Coverage -------------------------------------------------------------

TEST(CoverageTable, ThresholdSelection) {
  const auto t = CoverageTable::load(kData + "/coverage.csv");
  for (auto tech : {Technology::EMTC, Technology::NBIOT}) {
    EXPECT_EQ(coverage_for_mcl(t, tech, 144).level, CoverageLevel::GOOD);
    EXPECT_EQ(coverage_for_mcl(t, tech, 120).level, CoverageLevel::GOOD);
    EXPECT_EQ(coverage_for_mcl(t, tech, 144.01).level, CoverageLevel::MEDIUM);
    EXPECT_EQ(coverage_for_mcl(t, tech, 154).level, CoverageLevel::MEDIUM);
    EXPECT_EQ(coverage_for_mcl(t, tech, 164).level, CoverageLevel::POOR);
    EXPECT_THROW(coverage_for_mcl(t, tech, 200), OutOfCoverageError);
  }
}

TEST(CoverageTable, PoorIsLowestMcsAndMaxRepetitions) {
  const auto t = CoverageTable::load(kData + "/coverage.csv");
  for (auto tech : {Technology::EMTC, Technology::NBIOT}) {
    const auto poor = coverage_for_mcl(t, tech, 164);
    for (const auto& c : t.classes(tech)) {
      EXPECT_LE(poor.mcs, c.mcs);
      EXPECT_GE(poor.rlus, c.rlus);
      EXPECT_GE(poor.rldc, c.rldc);
    }
    const auto good = t.level(tech, CoverageLevel::GOOD);
    EXPECT_EQ(good.rldc, 1);
    EXPECT_EQ(good.rlds, 1);
    EXPECT_EQ(good.rlus, 1);
  }
}

TEST(CoverageTable, DefaultRepetitionTiers) {
  const auto t = CoverageTable::load(kData + "/coverage.csv");
  for (auto tech : {Technology::EMTC, Technology::NBIOT}) {
    const auto& rows = t.classes(tech);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].rlus, 1);
    EXPECT_EQ(rows[1].rlus, 16);
    EXPECT_EQ(rows[2].rlus, 128);
    EXPECT_EQ(rows[0].rldc, 1);
    EXPECT_EQ(rows[1].rldc, 8);
    EXPECT_EQ(rows[2].rldc, 64);
    EXPECT_DOUBLE_EQ(rows[0].mcl_db, 144);
    EXPECT_DOUBLE_EQ(rows[1].mcl_db, 154);
    EXPECT_DOUBLE_EQ(rows[2].mcl_db, 164);
  }
}

TEST(CoverageTable, MonotoneOverMclSweep) {
  const auto t = CoverageTable::load(kData + "/coverage.csv");
  for (auto tech : {Technology::EMTC, Technology::NBIOT}) {
    CoverageClass prev = coverage_for_mcl(t, tech, 100);
    for (double mcl = 100; mcl <= 164; mcl += 0.25) {
      const auto c = coverage_for_mcl(t, tech, mcl);
      EXPECT_LE(c.mcs, prev.mcs);
      EXPECT_GE(c.rlus, prev.rlus);
      EXPECT_GE(c.rldc, prev.rldc);
      EXPECT_GE(c.rlds, prev.rlds);
      prev = c;
    }
  }
}

TEST(CoverageTable, RejectsNonMonotoneRows) {
  EXPECT_THROW((void)CoverageTable::parse("EMTC,144,10,1,1,1\nEMTC,154,12,8,16,16\n"), ConfigError);
  EXPECT_THROW((void)CoverageTable::parse("EMTC,144,10,8,1,1\nEMTC,154,8,1,16,16\n"), ConfigError);
  EXPECT_THROW((void)CoverageTable::parse("EMTC,154,10,1,1,1\nEMTC,144,8,8,16,16\n"), ConfigError);
  EXPECT_THROW((void)CoverageTable::parse("NBIOT,144,13,1,1,1\n"), ConfigError);
}

// --- Round trip -----------------------------------------------------------

TEST(Tables, BundledFilesRoundTripByteIdentical) {
  EXPECT_EQ(TbsTable::load(kData + "/tbs.csv").serialize(), read_all(kData + "/tbs.csv"));
  EXPECT_EQ(CoverageTable::load(kData + "/coverage.csv").serialize(), read_all(kData + "/coverage.csv"));
  EXPECT_EQ(BlerTable::load(kData + "/bler.csv").serialize(), read_all(kData + "/bler.csv"));
  EXPECT_EQ(EventTable::load(kData + "/events.csv").serialize(), read_all(kData + "/events.csv"));
}

TEST(Tables, VersionsAreStated) {
  const auto t = TableSet::bundled();
  EXPECT_EQ(t.tbs.version(), "tbs-v1");
  EXPECT_EQ(t.coverage.version(), "coverage-v1");
  EXPECT_EQ(t.bler.version(), "bler-v1");
  EXPECT_EQ(t.events.version(), "events-v1");
}

TEST(Tables, MakeLinkParamsUsesClassAndTable) {
  const auto t = TableSet::bundled();
  const auto cls = t.coverage.level(Technology::NBIOT, CoverageLevel::POOR);
  const auto lp = make_link_params(t.tbs, Technology::NBIOT, cls, 1, LinkTiming{});
  EXPECT_EQ(lp.mcs, cls.mcs);
  EXPECT_EQ(lp.rldc, cls.rldc);
  EXPECT_EQ(lp.rlus, cls.rlus);
  EXPECT_EQ(lp.tbs_bits, t.tbs.lookup(Technology::NBIOT, cls.mcs, 1));
  EXPECT_NO_THROW(lp.validate());
}

TEST(EventTable, AllDurationsNonNegative) {
  const auto t = TableSet::bundled();
  for (auto tech : {Technology::EMTC, Technology::NBIOT})
    for (auto lvl : {CoverageLevel::GOOD, CoverageLevel::MEDIUM, CoverageLevel::POOR}) {
      const auto& e = t.events.get(tech, lvl);
      for (double v : {e.t_synch_dl, e.t_pbch, e.t_rach, e.t_grant_wait, e.t_ack_rx, e.t_connected_drx})
        EXPECT_GE(v, 0.0);
    }
}
