#include "celliot/power_optimizer.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

using namespace celliot;

namespace {

struct Draw {
  DutyCycleConfig duty;
  PowerProfile p;
  ClockModel clock;
};

// Random but valid inputs: powers strictly ordered, period well above t_synch.
Draw random_draw(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Draw d;
  d.p.p_sleep = 1e-6 + 1e-4 * u(g);
  d.p.p_idle = d.p.p_sleep * (2.0 + 2000.0 * u(g));
  d.p.p_rx = d.p.p_idle * (1.1 + 10.0 * u(g));
  d.p.p_tx = d.p.p_rx * (1.1 + 20.0 * u(g));
  d.clock.fractional_error = 0.2 * u(g) * u(g);
  d.clock.resync_time = 0.01 + 1.0 * u(g);
  const double period = d.clock.resync_time + 1.0 + 20000.0 * u(g);
  if (u(g) < 0.5)
    d.duty = DutyCycleConfig::psm(period);
  else
    d.duty = DutyCycleConfig::edrx(period, 0.5 * u(g));
  return d;
}

}  // namespace

TEST(ScheduleEnergy, EmptyScheduleIsZero) {
  SleepSchedule s;
  EXPECT_DOUBLE_EQ(schedule_energy(s, PowerProfile{}, ClockModel{0.0, 0.2}), 0.0);
}

TEST(ScheduleEnergy, HandEvaluatedSingleWake) {
  SleepSchedule s;
  s.k = 1;
  s.sleep_durations = {1000.0};
  s.active_time = 1.0;
  const ClockModel clock{0.001, 1.0};
  EXPECT_NEAR(schedule_energy(s, PowerProfile{}, clock), 0.072 + 18e-6 * 1000 + 0.022, 1e-12);
}

TEST(ScheduleEnergy, LinearInSleepPower) {
  SleepSchedule s;
  s.k = 1;
  s.sleep_durations = {1000.0};
  s.active_time = 1.0;
  const ClockModel clock{0.001, 1.0};
  PowerProfile p;
  const double e1 = schedule_energy(s, p, clock);
  p.p_sleep *= 2;
  const double e2 = schedule_energy(s, p, clock);
  EXPECT_NEAR(e2 - e1, 18e-6 * 1000, 1e-12);
}

TEST(ScheduleEnergy, RejectsBrokenShape) {
  const ClockModel clock{0.1, 0.2};
  SleepSchedule s;
  s.k = 2;
  s.sleep_durations = {10.0};
  EXPECT_THROW(schedule_energy(s, PowerProfile{}, clock), ValidationError);
  s.sleep_durations = {10.0, 20.0};
  s.active_time = 2.0;
  EXPECT_THROW(schedule_energy(s, PowerProfile{}, clock), ValidationError);
  s.sleep_durations = {20.0, 10.0};
  s.active_time = 5.0;  // drift says 1.0
  EXPECT_THROW(schedule_energy(s, PowerProfile{}, clock), ValidationError);
}

TEST(Unoptimized, ClosedFormSingleWake) {
  const auto duty = DutyCycleConfig::psm(3600);
  const ClockModel clock{0.1, 0.5};
  const auto s = unoptimized_schedule(duty, PowerProfile{}, clock);
  ASSERT_EQ(s.k, 1);
  EXPECT_NEAR(s.sleep_durations[0], 3599.5 / 1.1, 1e-9);
  EXPECT_NEAR(s.active_time, 0.1 * 3599.5 / 1.1, 1e-9);
  EXPECT_NO_THROW(validate_schedule(s, duty, clock));
}

TEST(Plan, PerfectClockSleepsOnce) {
  const auto duty = DutyCycleConfig::edrx(720, 0.001);
  const ClockModel clock{0.0, 0.2};
  const auto s = plan_sleep_schedule(duty, PowerProfile{}, clock);
  ASSERT_EQ(s.k, 1);
  EXPECT_NEAR(s.sleep_durations[0], 720 - 0.001 - 0.2, 1e-9);
  EXPECT_DOUBLE_EQ(s.active_time, 0.0);
  const auto u = unoptimized_schedule(duty, PowerProfile{}, clock);
  EXPECT_EQ(u.sleep_durations, s.sleep_durations);
  EXPECT_DOUBLE_EQ(u.total_energy, s.total_energy);
}

TEST(Plan, TwelveMinuteEdrxNoWorseThanSingleWake) {
  const auto duty = DutyCycleConfig::edrx(12 * 60, 0.001);
  const ClockModel clock{0.001, 0.5};
  const auto opt = plan_sleep_schedule(duty, PowerProfile{}, clock);
  const auto un = unoptimized_schedule(duty, PowerProfile{}, clock);
  EXPECT_LE(opt.total_energy, un.total_energy + 1e-9);
}

TEST(Plan, LongPeriodAddsWakeups) {
  const auto duty = DutyCycleConfig::psm(3600);
  const ClockModel clock{0.1, 0.5};
  const auto opt = plan_sleep_schedule(duty, PowerProfile{}, clock);
  EXPECT_GT(opt.k, 1);
  EXPECT_LT(opt.total_energy, unoptimized_schedule(duty, PowerProfile{}, clock).total_energy);
  EXPECT_NO_THROW(validate_schedule(opt, duty, clock));
}

TEST(Plan, MatchesOracleAtHourPeriod) {
  const auto duty = DutyCycleConfig::psm(3600);
  const ClockModel clock{0.1, 0.5};
  const auto opt = plan_sleep_schedule(duty, PowerProfile{}, clock);
  const auto ref = oracle_schedule(duty, PowerProfile{}, clock, 20);
  EXPECT_NEAR(opt.total_energy, ref.total_energy, 1e-9);
  EXPECT_EQ(opt.k, ref.k);
}

TEST(Plan, PeriodTooShortRejected) {
  const ClockModel clock{0.01, 0.5};
  try {
    (void)plan_sleep_schedule(DutyCycleConfig::edrx(0.5, 0.1), PowerProfile{}, clock);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("period too short"), std::string::npos);
  }
  EXPECT_THROW((void)unoptimized_schedule(DutyCycleConfig::psm(0.5), PowerProfile{}, clock),
               ValidationError);
}

TEST(Oracle, KMaxOneIsBaseline) {
  const auto duty = DutyCycleConfig::psm(3600);
  const ClockModel clock{0.1, 0.5};
  const auto ref = oracle_schedule(duty, PowerProfile{}, clock, 1);
  const auto un = unoptimized_schedule(duty, PowerProfile{}, clock);
  EXPECT_EQ(ref.k, 1);
  EXPECT_DOUBLE_EQ(ref.total_energy, un.total_energy);
  EXPECT_THROW((void)oracle_schedule(duty, PowerProfile{}, clock, 0), ValidationError);
}

TEST(Oracle, PerfectClockIsSingleWake) {
  const auto ref = oracle_schedule(DutyCycleConfig::psm(3600), PowerProfile{}, ClockModel{0.0, 0.5}, 20);
  EXPECT_EQ(ref.k, 1);
}

// Property sweep over random valid inputs.
TEST(PlanProperties, ConstraintsDominanceAndOracleEquivalence) {
  std::mt19937_64 g(20240601);
  for (int i = 0; i < 1000; ++i) {
    const Draw d = random_draw(g);
    const auto opt = plan_sleep_schedule(d.duty, d.p, d.clock);
    const auto un = unoptimized_schedule(d.duty, d.p, d.clock);
    const auto ref = oracle_schedule(d.duty, d.p, d.clock, 50);
    ASSERT_NO_THROW(validate_schedule(opt, d.duty, d.clock)) << "draw " << i;
    ASSERT_NO_THROW(validate_schedule(un, d.duty, d.clock)) << "draw " << i;
    EXPECT_NEAR(opt.total_energy, schedule_energy(opt, d.p, d.clock), 1e-12);
    EXPECT_LE(opt.total_energy, un.total_energy + 1e-9) << "draw " << i;
    EXPECT_NEAR(opt.total_energy, ref.total_energy, 1e-9) << "draw " << i;
  }
}

TEST(PlanProperties, EnergyNondecreasingInDrift) {
  std::mt19937_64 g(7);
  for (int i = 0; i < 200; ++i) {
    Draw d = random_draw(g);
    double prev = -1.0;
    for (double m : {0.0, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.5}) {
      d.clock.fractional_error = m;
      const double e = plan_sleep_schedule(d.duty, d.p, d.clock).total_energy;
      EXPECT_GE(e, prev - 1e-9) << "draw " << i << " m=" << m;
      prev = e;
    }
  }
}

TEST(PlanProperties, PsmIsEdrxWithoutPagingWindow) {
  const ClockModel clock{0.05, 0.3};
  const auto a = plan_sleep_schedule(DutyCycleConfig::psm(5000), PowerProfile{}, clock);
  DutyCycleConfig e = DutyCycleConfig::edrx(5000, 0.0);
  const auto b = plan_sleep_schedule(e, PowerProfile{}, clock);
  EXPECT_EQ(a.k, b.k);
  EXPECT_EQ(a.sleep_durations, b.sleep_durations);
  EXPECT_DOUBLE_EQ(a.total_energy, b.total_energy);
}
